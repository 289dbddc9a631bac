from __future__ import annotations

import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping

from ..task_model import LANGUAGES, AnswerKind

# canonical joiners used when rendering answers as text
SET_JOINER = {"en": ", ", "zh": "、"}
SEQUENCE_JOINER = "→"


@dataclass(frozen=True)
class InstanceParams:
    """The logical core of one problem instance.

    ``payload`` holds JSON-native values only (lists, ints, strings) so that a
    JSON round trip reproduces it exactly. Treat it as read-only.
    """

    family_id: str
    seed: int
    difficulty: int
    payload: Mapping[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "family_id": self.family_id,
            "seed": self.seed,
            "difficulty": self.difficulty,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "InstanceParams":
        return cls(data["family_id"], int(data["seed"]), int(data["difficulty"]), data["payload"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class SlotFills:
    fills: tuple[str, ...]
    language: str

    def __len__(self) -> int:
        return len(self.fills)


@dataclass(frozen=True)
class GroundTruth:
    """Deterministic answer of an instance.

    ``value`` is language-neutral and JSON-native. ``answers`` maps each
    language to the typed answer the scorer compares against (frozenset for
    value-sets, tuple for sequences, float for numerics, str otherwise);
    ``canonical_text`` is the rendering placed between answer tags.
    ``choices`` lists the candidate universe for value-set answers, used to
    build near-miss wrong answers.
    """

    kind: AnswerKind
    value: Any
    answers: Mapping[str, Any]
    canonical_text: Mapping[str, str]
    choices: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "answers", MappingProxyType(dict(self.answers)))
        object.__setattr__(self, "canonical_text", MappingProxyType(dict(self.canonical_text)))
        object.__setattr__(self, "choices", MappingProxyType(dict(self.choices)))

    def answer(self, language: str) -> Any:
        return self.answers[language]

    def text(self, language: str) -> str:
        return self.canonical_text[language]


def set_truth(value: list, items_by_lang: Mapping[str, list[str]], choices: Mapping[str, Iterable[str]]) -> GroundTruth:
    return GroundTruth(
        kind=AnswerKind.SET,
        value=list(value),
        answers={lang: frozenset(items) for lang, items in items_by_lang.items()},
        canonical_text={lang: SET_JOINER[lang].join(items) for lang, items in items_by_lang.items()},
        choices={lang: tuple(c) for lang, c in choices.items()},
    )


def sequence_truth(items: list[str]) -> GroundTruth:
    return GroundTruth(
        kind=AnswerKind.SEQUENCE,
        value=list(items),
        answers={lang: tuple(items) for lang in LANGUAGES},
        canonical_text={lang: SEQUENCE_JOINER.join(items) for lang in LANGUAGES},
    )


def numeric_truth(number: int) -> GroundTruth:
    return GroundTruth(
        kind=AnswerKind.NUMERIC,
        value=number,
        answers={lang: float(number) for lang in LANGUAGES},
        canonical_text={lang: str(number) for lang in LANGUAGES},
    )


def single_truth(value: str, text_by_lang: Mapping[str, str]) -> GroundTruth:
    return GroundTruth(
        kind=AnswerKind.SINGLE,
        value=value,
        answers={lang: value for lang in LANGUAGES},
        canonical_text=dict(text_by_lang),
    )


class Family:
    """A paired input/solution function for one task family.

    Subclasses implement ``sample`` (draw a payload from a ladder parameter
    bag), ``solve`` (the deterministic solver), ``oracle`` (an independent
    exhaustive check), and ``fills`` (natural-language slot fills).
    """

    family_id: str = ""
    arity: int = 0

    def sample(self, level_params: Mapping[str, Any], rng) -> dict[str, Any]:
        raise NotImplementedError

    def solve(self, payload: Mapping[str, Any]) -> GroundTruth:
        raise NotImplementedError

    def oracle(self, payload: Mapping[str, Any]) -> GroundTruth:
        raise NotImplementedError

    def oracle_tractable(self, payload: Mapping[str, Any]) -> bool:
        return True

    def fills(self, payload: Mapping[str, Any], language: str) -> list[str]:
        raise NotImplementedError

    def accept(self, payload: Mapping[str, Any], truth: GroundTruth) -> bool:
        """Quality filter applied after a unique answer is found."""
        return True
