"""Paired parameter generators and solvers for the shipped task families.

New families subclass :class:`Family` and are added with
:func:`register_family`; a matching descriptor YAML and template files make
them usable by the rest of the pipeline.
"""

from __future__ import annotations

from ..errors import MultipleSolutions, NoSolution, UniquenessExhausted, UnknownFamily, UnsupportedLanguage
from ..seeding import rng_for
from ..task_model import LANGUAGES, LEVELS, TaskDescriptor
from .base import Family, GroundTruth, InstanceParams, SlotFills
from .causal_chain import CausalChain
from .maze_paths import MazePaths
from .rect_paint import RectPaint
from .seal_decode import SealDecode
from .truth_teller import TruthTeller

MAX_ATTEMPTS = 64

FAMILIES: dict[str, Family] = {}


def register_family(family: Family) -> None:
    if family.family_id in FAMILIES:
        raise ValueError(f"family {family.family_id!r} already registered")
    FAMILIES[family.family_id] = family


for _fam in (TruthTeller(), MazePaths(), SealDecode(), RectPaint(), CausalChain()):
    register_family(_fam)


def get_family(family_id: str) -> Family:
    try:
        return FAMILIES[family_id]
    except KeyError:
        raise UnknownFamily(f"unknown family {family_id!r}; registered: {', '.join(sorted(FAMILIES))}") from None


def generate(descriptor: TaskDescriptor, difficulty: int, seed: int, language: str
             ) -> tuple[InstanceParams, SlotFills, GroundTruth]:
    """Like :func:`generate_params` but also returns the ground truth."""
    if difficulty not in LEVELS:
        raise ValueError(f"difficulty must be in 1..10, got {difficulty}")
    if language not in LANGUAGES or language not in descriptor.languages:
        raise UnsupportedLanguage(f"{descriptor.family_id} does not support language {language!r}")
    family = get_family(descriptor.family_id)
    level_params = descriptor.ladder.params(difficulty)
    for attempt in range(MAX_ATTEMPTS):
        payload = family.sample(level_params, rng_for(seed, "attempt", attempt))
        try:
            truth = family.solve(payload)
        except (NoSolution, MultipleSolutions):
            continue
        if not family.accept(payload, truth):
            continue
        params = InstanceParams(descriptor.family_id, seed, difficulty, payload)
        return params, SlotFills(tuple(family.fills(payload, language)), language), truth
    raise UniquenessExhausted(
        f"{descriptor.family_id} level {difficulty}: no unique-answer instance in {MAX_ATTEMPTS} attempts"
    )


def generate_params(descriptor: TaskDescriptor, difficulty: int, seed: int, language: str
                    ) -> tuple[InstanceParams, SlotFills]:
    params, fills, _ = generate(descriptor, difficulty, seed, language)
    return params, fills


def slot_fills(params: InstanceParams, language: str) -> SlotFills:
    return SlotFills(tuple(get_family(params.family_id).fills(params.payload, language)), language)


def solve(params: InstanceParams) -> GroundTruth:
    return get_family(params.family_id).solve(params.payload)


def oracle_solve(params: InstanceParams) -> GroundTruth:
    return get_family(params.family_id).oracle(params.payload)


def oracle_tractable(params: InstanceParams) -> bool:
    return get_family(params.family_id).oracle_tractable(params.payload)


__all__ = [
    "FAMILIES", "MAX_ATTEMPTS", "Family", "GroundTruth", "InstanceParams", "SlotFills",
    "generate", "generate_params", "get_family", "oracle_solve", "oracle_tractable",
    "register_family", "slot_fills", "solve",
]
