"""Answering models used by calibration and validation.

``MockModel`` is a synthetic solver whose success probability is
``logistic(slope * (skill - complexity))``, with ``complexity`` read from the
instance's ladder parameters. All of its draws are keyed by the instance seed,
so repeated calls give identical text and, for a fixed instance, correctness
is monotone in complexity (common random numbers across ladder settings).

``HttpModel`` talks to an OpenAI-style chat completions endpoint.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, replace
from typing import Any, Protocol

import httpx

from .errors import AuthMissing, Timeout, TransportError
from .generators.base import SEQUENCE_JOINER, SET_JOINER, GroundTruth
from .generators.lexicon import YES_NO
from .seeding import unit_draw
from .task_model import AnswerKind, TaskDescriptor
from .templating import RESIDUAL

HIGH_SKILL_BOOST = 1000.0

# family -> (skill, slope); complexity is the family's tuning knob
MOCK_PRESETS: dict[str, tuple[float, float]] = {
    "truth_teller": (8.0, 0.5),
    "maze_paths": (8.0, 0.5),
    "seal_decode": (18.0, 0.25),
    "rect_paint": (7.0, 0.5),
    "causal_chain": (7.0, 0.6),
}


class AnswerContext(Protocol):
    """What a model may look at besides the question text."""

    seed: int
    language: str
    truth: GroundTruth
    level_params: dict


class Model(Protocol):
    name: str

    def answer(self, question: str, instance: AnswerContext) -> str: ...


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True)
class MockModelConfig:
    skill: float
    slope: float
    complexity_key: str
    format_fail_rate: float = 0.0
    salt: int = 0

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError("slope must be positive")
        if not 0.0 <= self.format_fail_rate <= 1.0:
            raise ValueError("format_fail_rate must lie in [0, 1]")

    def success_probability(self, complexity: float) -> float:
        return logistic(self.slope * (self.skill - complexity))

    def complexity_for(self, rate: float) -> float:
        """Inverse of :meth:`success_probability`."""
        return self.skill - math.log(rate / (1.0 - rate)) / self.slope


def _join(items, kind: AnswerKind, language: str) -> str:
    if kind is AnswerKind.SET:
        return SET_JOINER[language].join(items)
    return SEQUENCE_JOINER.join(items)


def near_miss(truth: GroundTruth, language: str, draw: float) -> str:
    """A wrong but parseable answer close to the truth."""
    kind = truth.kind
    if kind is AnswerKind.SET:
        choices = list(truth.choices.get(language, ()))
        items = [c for c in choices if c in truth.answer(language)] or sorted(truth.answer(language))
        others = [c for c in choices if c not in items]
        if others and (len(items) <= 1 or draw < 0.5):
            extra = others[int(draw * 1e6) % len(others)]
            return _join(items + [extra], kind, language)
        if items:
            drop = int(draw * 1e6) % len(items)
            rest = items[:drop] + items[drop + 1:]
            return _join(rest, kind, language) if rest else ("none" if language == "en" else "无")
        return "?"
    if kind is AnswerKind.SEQUENCE:
        items = list(truth.answer(language))
        if len(items) >= 2:
            i = int(draw * 1e6) % (len(items) - 1)
            items[i], items[i + 1] = items[i + 1], items[i]
        else:
            items.append("X0")
        return _join(items, kind, language)
    if kind is AnswerKind.NUMERIC:
        offset = 1 + int(draw * 1e6) % 3
        return str(int(truth.value) + (offset if draw < 0.5 else -offset))
    if truth.value in ("yes", "no"):
        return YES_NO[language]["no" if truth.value == "yes" else "yes"]
    return f"{truth.text(language)}?"


def _noisy(text: str, language: str, draw: float) -> str:
    # harmless surface variation the extractor has to absorb
    if draw < 0.3:
        return f" {text} "
    if draw < 0.5 and language == "zh":
        return text.replace("、", "，")
    if draw < 0.6:
        return text.replace(", ", " ,  ")
    return text


class MockModel:
    def __init__(self, config: MockModelConfig, name: str = "mock"):
        self.config = config
        self.name = name

    def success_probability(self, instance: AnswerContext) -> float:
        return self.config.success_probability(float(instance.level_params[self.config.complexity_key]))

    def answer(self, question: str, instance: AnswerContext) -> str:
        lang = instance.language
        if RESIDUAL.search(question):
            return "I cannot answer: the question is incomplete." if lang == "en" else "无法作答：题目不完整。"
        salt = self.config.salt
        correct = unit_draw(instance.seed, salt, "correct") < self.success_probability(instance)
        truth = instance.truth
        body = truth.text(lang) if correct else near_miss(truth, lang, unit_draw(instance.seed, salt, "miss"))
        if unit_draw(instance.seed, salt, "format") < self.config.format_fail_rate:
            return f"The answer is: {body}" if lang == "en" else f"答案是：{body}"
        body = _noisy(body, lang, unit_draw(instance.seed, salt, "noise"))
        lead = "Reasoning complete." if lang == "en" else "推理完成。"
        return f"{lead}\n<answer>{body}</answer>"


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    token_env: str | None = None
    timeout: float = 60.0
    max_retries: int = 2
    temperature: float = 0.0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class HttpModel:
    """Chat-completions client with a hard wall-clock bound of
    ``timeout * (max_retries + 1)`` per question."""

    def __init__(self, config: EndpointConfig, name: str | None = None, transport: httpx.BaseTransport | None = None):
        self.config = config
        self.name = name or config.model
        self._client = httpx.Client(transport=transport)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.token_env:
            token = os.environ.get(self.config.token_env)
            if not token:
                raise AuthMissing(f"environment variable {self.config.token_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def answer(self, question: str, instance: Any = None) -> str:
        cfg = self.config
        headers = self._headers()
        body = {
            "model": cfg.model,
            "messages": [{"role": "user", "content": question}],
            "temperature": cfg.temperature,
        }
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        deadline = time.monotonic() + cfg.timeout * (cfg.max_retries + 1)
        last: Exception | None = None
        for _ in range(cfg.max_retries + 1):
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                break
            try:
                resp = self._client.post(url, json=body, headers=headers, timeout=min(cfg.timeout, remaining))
            except httpx.TimeoutException as exc:
                last = Timeout(str(exc) or "request timed out")
                continue
            except httpx.HTTPError as exc:
                last = TransportError(str(exc))
                continue
            if resp.status_code in (401, 403):
                raise AuthMissing(f"endpoint rejected credentials ({resp.status_code})")
            if resp.status_code >= 400:
                last = TransportError(f"HTTP {resp.status_code}")
                continue
            try:
                choice = resp.json()["choices"][0]
                return choice["message"]["content"] if "message" in choice else choice["text"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                last = TransportError(f"unexpected response shape: {exc}")
        raise last or Timeout("deadline exhausted before any attempt")

    def close(self) -> None:
        self._client.close()


def mock_for(descriptor: TaskDescriptor, high_skill: bool = False, **overrides) -> MockModel:
    """The documented mock for a family, keyed on the family's tuning knob."""
    skill, slope = MOCK_PRESETS.get(descriptor.family_id, (5.0, 0.5))
    if descriptor.knob is None:
        raise ValueError(f"{descriptor.family_id} has no tuning knob for the mock to read")
    config = MockModelConfig(skill=skill, slope=slope, complexity_key=descriptor.knob.name)
    if high_skill:
        config = replace(config, skill=config.skill + HIGH_SKILL_BOOST)
    if overrides:
        config = replace(config, **overrides)
    return MockModel(config, name="mock-highskill" if high_skill else "mock")


def answer(question: str, instance: AnswerContext, model: Model) -> str:
    return model.answer(question, instance)
