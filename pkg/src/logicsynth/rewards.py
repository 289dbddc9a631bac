"""Answer extraction, graded scoring and reward mapping.

Scoring produces a correctness score S in [0, 1]. The reward schemes map S:

* binary:  1 if S == 1 else 0
* graded:  S
* bipolar: 1 if S == 1 else S - 1, i.e. values in [-1, 0) ∪ {1}

An optional format bonus (default 0.1) is added on top of the mapped value
whenever the answer tags were present and parseable. Totals are not clamped.
"""

from __future__ import annotations

import enum
import math
import re
import unicodedata
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import MethodKindMismatch, SOutOfRange
from .generators.base import GroundTruth
from .task_model import AnswerKind, ScoringMethod, is_compatible

DEFAULT_FORMAT_BONUS = 0.1

ANSWER_TAG = re.compile(r"<answer>(.*?)</answer>", re.IGNORECASE | re.DOTALL)
SET_SPLIT = re.compile(r"[,、;]+|\s+and\s+|和")
SEQ_SPLIT = re.compile(r"→|->|=>|>|[,、;]+")
NUMBER = re.compile(r"[-−]?\d+(?:\.\d+)?")
STRIP_CHARS = " \t\r\n.。!！?？'\"“”‘’「」()（）"
NONE_WORDS = {"", "none", "nobody", "no one", "无", "没有", "无人"}
YES_WORDS = {"yes", "y", "true", "possible", "是", "能", "可以", "可能"}
NO_WORDS = {"no", "n", "false", "impossible", "否", "不能", "不可以", "不可能"}


class Scheme(str, enum.Enum):
    BINARY = "binary"
    GRADED = "graded"
    BIPOLAR = "bipolar"


@dataclass(frozen=True)
class ExtractedAnswer:
    raw: str
    parsed: Any
    format_ok: bool


@dataclass(frozen=True)
class RewardValue:
    S: float
    scheme: Scheme
    mapped: float
    bonus: float
    total: float


def normalize_text(text: str) -> str:
    """NFKC folds full-width punctuation, digits and letters to half-width."""
    return unicodedata.normalize("NFKC", text)


def _item(token: str) -> str:
    return " ".join(token.strip(STRIP_CHARS).split()).casefold()


def parse_answer(body: str, kind: AnswerKind) -> Any:
    """Parse the text inside the answer tags; None when unparseable."""
    body = normalize_text(body).strip()
    kind = AnswerKind(kind)
    if kind is AnswerKind.SET:
        items = [_item(tok) for tok in SET_SPLIT.split(body)]
        items = [it for it in items if it]
        if not items and _item(body) in NONE_WORDS:
            return frozenset()
        if len(items) == 1 and items[0] in NONE_WORDS:
            return frozenset()
        return frozenset(items) if items else None
    if kind is AnswerKind.SEQUENCE:
        items = [_item(tok) for tok in SEQ_SPLIT.split(body)]
        items = [it for it in items if it]
        return tuple(items) if items else None
    if kind is AnswerKind.NUMERIC:
        match = NUMBER.search(body.replace(",", ""))
        return float(match.group(0).replace("−", "-")) if match else None
    word = _item(body)
    if not word:
        return None
    if word in YES_WORDS:
        return "yes"
    if word in NO_WORDS:
        return "no"
    return word


def extract_answer(response: str, kind: AnswerKind, language: str = "en", lenient: bool = False) -> ExtractedAnswer:
    """Locate the last ``<answer>...</answer>`` block and parse it.

    With ``lenient`` a reply without tags is still parsed from the text after
    the last colon of its last non-empty line; ``format_ok`` stays False.
    """
    text = normalize_text(response)
    blocks = ANSWER_TAG.findall(text)
    if blocks:
        parsed = parse_answer(blocks[-1], kind)
        return ExtractedAnswer(response, parsed, parsed is not None)
    if lenient:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if lines:
            tail = lines[-1].rsplit(":", 1)[-1]
            return ExtractedAnswer(response, parse_answer(tail, kind), False)
    return ExtractedAnswer(response, None, False)


def edit_distance(a: Sequence, b: Sequence) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def _normalize_truth(value: Any, kind: AnswerKind) -> Any:
    if kind is AnswerKind.SET:
        return frozenset(_item(v) for v in value)
    if kind is AnswerKind.SEQUENCE:
        return tuple(_item(v) for v in value)
    if kind is AnswerKind.NUMERIC:
        return float(value)
    return _item(str(value))


def score(parsed: Any, truth: GroundTruth | Any, method: ScoringMethod, language: str = "en",
          kind: AnswerKind | None = None) -> float:
    """Graded correctness S in [0, 1].

    ``truth`` is either a :class:`GroundTruth` (the answer for ``language`` is
    used) or a raw typed answer together with ``kind``.
    """
    method = ScoringMethod(method)
    if isinstance(truth, GroundTruth):
        kind, expected = truth.kind, truth.answer(language)
    elif kind is None:
        raise ValueError("kind is required when truth is a raw value")
    kind = AnswerKind(kind)
    if not is_compatible(method, kind):
        raise MethodKindMismatch(f"{method.value} cannot score {kind.value} answers")
    if parsed is None:
        return 0.0
    expected = _normalize_truth(truth.answer(language) if isinstance(truth, GroundTruth) else truth, kind)

    if method is ScoringMethod.F1:
        pred = frozenset(parsed)
        if not pred and not expected:
            return 1.0
        if not pred or not expected:
            return 0.0
        hit = len(pred & expected)
        if hit == 0:
            return 0.0
        precision, recall = hit / len(pred), hit / len(expected)
        return 2 * precision * recall / (precision + recall)

    if method is ScoringMethod.ACCURACY:
        if kind is AnswerKind.SINGLE:
            return 1.0 if parsed == expected else 0.0
        pred = tuple(parsed)
        longest = max(len(pred), len(expected))
        if longest == 0:
            return 1.0
        return sum(p == t for p, t in zip(pred, expected)) / longest

    if method is ScoringMethod.SIMILARITY:
        pred = tuple(parsed) if kind is AnswerKind.SEQUENCE else str(parsed)
        longest = max(len(pred), len(expected))
        if longest == 0:
            return 1.0
        return 1.0 - edit_distance(pred, expected) / longest

    pred = float(parsed)
    if not math.isfinite(pred):
        return 0.0
    return max(0.0, 1.0 - abs(pred - expected) / max(abs(expected), 1.0))


def _check_s(S: float) -> None:
    if not (0.0 <= S <= 1.0):  # also rejects NaN
        raise SOutOfRange(f"S must lie in [0, 1], got {S}")


def map_reward(S: float, scheme: Scheme | str) -> float:
    _check_s(S)
    scheme = Scheme(scheme)
    if scheme is Scheme.BINARY:
        return 1.0 if S == 1.0 else 0.0
    if scheme is Scheme.GRADED:
        return float(S)
    return 1.0 if S == 1.0 else float(S) - 1.0


def map_rewards(S: np.ndarray, scheme: Scheme | str) -> np.ndarray:
    """Vectorised :func:`map_reward`."""
    S = np.asarray(S, dtype=float)
    if np.any(~((S >= 0.0) & (S <= 1.0))):
        raise SOutOfRange("S must lie in [0, 1]")
    scheme = Scheme(scheme)
    perfect = S == 1.0
    if scheme is Scheme.BINARY:
        return perfect.astype(float)
    if scheme is Scheme.GRADED:
        return S.copy()
    return np.where(perfect, 1.0, S - 1.0)


def total_reward(S: float, scheme: Scheme | str, format_ok: bool, bonus: float = DEFAULT_FORMAT_BONUS) -> RewardValue:
    mapped = map_reward(S, scheme)
    applied = bonus if format_ok else 0.0
    return RewardValue(float(S), Scheme(scheme), mapped, applied, mapped + applied)


def score_response(response: str, truth: GroundTruth, method: ScoringMethod, language: str,
                   scheme: Scheme | str = Scheme.BIPOLAR, bonus: float = DEFAULT_FORMAT_BONUS) -> RewardValue:
    """Extract, score and map one response in a single call."""
    extracted = extract_answer(response, truth.kind, language)
    S = score(extracted.parsed, truth, method, language)
    return total_reward(S, scheme, extracted.format_ok, bonus)
