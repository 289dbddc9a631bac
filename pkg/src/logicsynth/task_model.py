"""Shared vocabulary: taxonomy, difficulty ladders and task descriptors.

Descriptors persist as one YAML file per family (see ``docs`` section of the
README for the schema). Everything here is immutable after construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping

import yaml

LEVELS = tuple(range(1, 11))
LANGUAGES = ("en", "zh")
LADDER_FORMAT_VERSION = 1


class TaskDomain(str, enum.Enum):
    SYMBOLIC_MANIPULATION = "Symbolic Manipulation"
    NUMERICAL_MANIPULATION = "Numerical Manipulation"
    TEXTUAL_MANIPULATION = "Textual Manipulation"
    OBJECT_MANIPULATION = "Object Manipulation (Real-World)"
    PLANNING_SCHEDULING = "Planning & Scheduling"
    CLASSIC_GAMES = "Classic Games"
    SPATIAL_GEOMETRY = "Spatial: Geometry"
    SPATIAL_PATHFINDING = "Spatial: Pathfinding"
    SPATIAL_VISUAL_TO_TEXT = "Spatial: Visual-to-Text"
    CROSS_TOPIC = "Cross-Topic"
    OTHERS = "Others"


class CoreAbility(str, enum.Enum):
    CONSTRAINT_SATISFACTION = "Constraint Satisfaction"
    ALGORITHMIC_THINKING = "Algorithmic Thinking"
    INFO_EXTRACTION = "Info Extraction & Integration"
    ITEM_CONNECTION = "Item Connection & Mapping"
    INSTRUCTION_FOLLOWING = "Instruction Following"
    OTHERS = "Others"


class DifficultySource(str, enum.Enum):
    COMPLEX_RULES = "Complex Rules"
    COMPLEX_CONDITIONS = "Complex Conditions"
    LARGE_SEARCH_SPACE = "Large Search Space"
    TEDIOUS_STEPS = "Tedious Solution Steps"
    COMPUTATIONAL_COMPLEXITY = "Computational Complexity"
    LLM_WEAKNESSES = "Intrinsic LLM Weaknesses"
    OTHERS = "Others"


class ScoringMethod(str, enum.Enum):
    ACCURACY = "Accuracy"
    F1 = "F1"
    SIMILARITY = "Similarity"
    ABS_DIFF_RATE = "AbsDiffRate"


class AnswerKind(str, enum.Enum):
    SINGLE = "single-value"
    SET = "value-set"
    SEQUENCE = "sequence"
    NUMERIC = "numeric"


COMPATIBLE_KINDS: Mapping[ScoringMethod, frozenset[AnswerKind]] = MappingProxyType({
    ScoringMethod.ACCURACY: frozenset({AnswerKind.SINGLE, AnswerKind.SEQUENCE}),
    ScoringMethod.F1: frozenset({AnswerKind.SET}),
    ScoringMethod.SIMILARITY: frozenset({AnswerKind.SINGLE, AnswerKind.SEQUENCE}),
    ScoringMethod.ABS_DIFF_RATE: frozenset({AnswerKind.NUMERIC}),
})


def is_compatible(method: ScoringMethod, kind: AnswerKind) -> bool:
    return AnswerKind(kind) in COMPATIBLE_KINDS[ScoringMethod(method)]


@dataclass(frozen=True)
class TaxonomyLabel:
    task_domain: TaskDomain
    core_ability: CoreAbility
    difficulty_source: DifficultySource

    def __post_init__(self):
        object.__setattr__(self, "task_domain", TaskDomain(self.task_domain))
        object.__setattr__(self, "core_ability", CoreAbility(self.core_ability))
        object.__setattr__(self, "difficulty_source", DifficultySource(self.difficulty_source))

    def to_dict(self) -> dict[str, str]:
        return {
            "task_domain": self.task_domain.value,
            "core_ability": self.core_ability.value,
            "difficulty_source": self.difficulty_source.value,
        }


Scalar = int | float


@dataclass(frozen=True)
class DifficultyLadder:
    """Level (1..10) -> flat parameter bag.

    ``complexity_params`` names the parameters that must be non-decreasing in
    level; when empty, every parameter is treated as a complexity parameter.
    """

    entries: Mapping[int, Mapping[str, Scalar]]
    complexity_params: tuple[str, ...] = ()

    def __post_init__(self):
        frozen = {int(k): MappingProxyType(dict(v)) for k, v in sorted(self.entries.items())}
        object.__setattr__(self, "entries", MappingProxyType(frozen))
        object.__setattr__(self, "complexity_params", tuple(self.complexity_params))

    def __getitem__(self, level: int) -> Mapping[str, Scalar]:
        return self.entries[level]

    def params(self, level: int) -> dict[str, Scalar]:
        return dict(self.entries[level])

    def column(self, name: str) -> dict[int, Scalar]:
        return {lvl: bag[name] for lvl, bag in self.entries.items() if name in bag}

    def checked_params(self) -> tuple[str, ...]:
        if self.complexity_params:
            return self.complexity_params
        names: set[str] = set()
        for bag in self.entries.values():
            names.update(bag)
        return tuple(sorted(names))

    def with_column(self, name: str, values: Mapping[int, Scalar]) -> "DifficultyLadder":
        entries = {lvl: {**bag, name: values.get(lvl, bag.get(name))} for lvl, bag in self.entries.items()}
        return DifficultyLadder(entries, self.complexity_params)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": LADDER_FORMAT_VERSION,
            "complexity_params": list(self.complexity_params),
            "levels": {lvl: dict(bag) for lvl, bag in self.entries.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DifficultyLadder":
        version = data.get("format_version", LADDER_FORMAT_VERSION)
        if version != LADDER_FORMAT_VERSION:
            raise ValueError(f"unsupported ladder format_version {version}")
        return cls(
            {int(k): v for k, v in data["levels"].items()},
            tuple(data.get("complexity_params", ())),
        )


@dataclass(frozen=True)
class LadderReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_ladder(ladder: DifficultyLadder) -> LadderReport:
    """Check level coverage and monotonicity of every complexity parameter.

    Violations are reported, never raised. Equal values at adjacent levels are
    allowed.
    """
    entries = ladder.entries
    if not entries:
        return LadderReport(("ladder is empty",))
    violations = []
    for lvl in sorted(set(entries) - set(LEVELS)):
        violations.append(f"level {lvl} outside 1..10")
    for lvl in LEVELS:
        if lvl not in entries:
            violations.append(f"missing level {lvl}")
    present = [lvl for lvl in LEVELS if lvl in entries]
    for name in ladder.checked_params():
        for lo, hi in zip(present, present[1:]):
            a, b = entries[lo].get(name), entries[hi].get(name)
            if a is None or b is None:
                if (a is None) != (b is None):
                    missing = lo if a is None else hi
                    violations.append(f"{name} missing at level {missing}")
                continue
            if b < a:
                violations.append(f"{name} decreases {lo}→{hi}")
    # dedupe while keeping order (missing-at-level can repeat)
    return LadderReport(tuple(dict.fromkeys(violations)))


@dataclass(frozen=True)
class Knob:
    """The single scalar parameter calibration is allowed to move."""

    name: str
    minimum: Scalar
    maximum: Scalar
    integral: bool = True

    def clamp(self, value: float) -> Scalar:
        value = min(max(value, self.minimum), self.maximum)
        return int(value) if self.integral else float(value)


@dataclass(frozen=True)
class TaskDescriptor:
    family_id: str
    taxonomy: TaxonomyLabel
    ladder: DifficultyLadder
    scoring_method: ScoringMethod
    answer_kind: AnswerKind
    languages: frozenset[str] = frozenset(LANGUAGES)
    knob: Knob | None = None
    gate_passed: bool = False
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "scoring_method", ScoringMethod(self.scoring_method))
        object.__setattr__(self, "answer_kind", AnswerKind(self.answer_kind))
        object.__setattr__(self, "languages", frozenset(self.languages))
        unknown = self.languages - set(LANGUAGES)
        if unknown:
            raise ValueError(f"unsupported languages {sorted(unknown)}")
        if not is_compatible(self.scoring_method, self.answer_kind):
            raise ValueError(
                f"{self.family_id}: scoring method {self.scoring_method.value} "
                f"is incompatible with answer kind {self.answer_kind.value}"
            )

    def with_ladder(self, ladder: DifficultyLadder, **changes: Any) -> "TaskDescriptor":
        from dataclasses import replace

        return replace(self, ladder=ladder, **changes)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "family_id": self.family_id,
            "description": self.description,
            "taxonomy": self.taxonomy.to_dict(),
            "scoring_method": self.scoring_method.value,
            "answer_kind": self.answer_kind.value,
            "languages": sorted(self.languages),
            "gate_passed": self.gate_passed,
            "ladder": self.ladder.to_dict(),
        }
        if self.knob is not None:
            data["knob"] = {
                "name": self.knob.name,
                "min": self.knob.minimum,
                "max": self.knob.maximum,
                "integral": self.knob.integral,
            }
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TaskDescriptor":
        knob = data.get("knob")
        return cls(
            family_id=data["family_id"],
            description=data.get("description", ""),
            taxonomy=TaxonomyLabel(**data["taxonomy"]),
            ladder=DifficultyLadder.from_dict(data["ladder"]),
            scoring_method=data["scoring_method"],
            answer_kind=data["answer_kind"],
            languages=frozenset(data.get("languages", LANGUAGES)),
            knob=Knob(knob["name"], knob["min"], knob["max"], knob.get("integral", True)) if knob else None,
            gate_passed=bool(data.get("gate_passed", False)),
        )


def dump_descriptor(descriptor: TaskDescriptor) -> str:
    return yaml.safe_dump(descriptor.to_dict(), sort_keys=False, allow_unicode=True)


def save_descriptor(descriptor: TaskDescriptor, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dump_descriptor(descriptor), encoding="utf-8")
    return path


def load_descriptor(path: str | Path) -> TaskDescriptor:
    return TaskDescriptor.from_dict(yaml.safe_load(Path(path).read_text(encoding="utf-8")))


@dataclass
class Registry:
    """Family id -> descriptor, with unique ids enforced on insert."""

    descriptors: dict[str, TaskDescriptor] = field(default_factory=dict)

    def add(self, descriptor: TaskDescriptor) -> None:
        if descriptor.family_id in self.descriptors:
            raise ValueError(f"duplicate family_id {descriptor.family_id!r}")
        self.descriptors[descriptor.family_id] = descriptor

    def __getitem__(self, family_id: str) -> TaskDescriptor:
        from .errors import UnknownFamily

        try:
            return self.descriptors[family_id]
        except KeyError:
            raise UnknownFamily(
                f"unknown family {family_id!r}; registered: {', '.join(sorted(self.descriptors))}"
            ) from None

    def __contains__(self, family_id: object) -> bool:
        return family_id in self.descriptors

    def __iter__(self):
        return iter(sorted(self.descriptors))

    def values(self) -> Iterable[TaskDescriptor]:
        return [self.descriptors[k] for k in sorted(self.descriptors)]

    @classmethod
    def from_directory(cls, directory: str | Path) -> "Registry":
        reg = cls()
        for path in sorted(Path(directory).glob("*.yaml")):
            reg.add(load_descriptor(path))
        return reg


DATA_DIR = Path(__file__).parent / "data"


def default_registry() -> Registry:
    return Registry.from_directory(DATA_DIR / "descriptors")
