"""Closed-loop difficulty calibration and the pre-production validation gate.

Calibration moves a single scalar knob of the ladder. Each round probes the
anchor levels; every off-target anchor gets a new knob value from a bracket
on its own measurement history (a blend of regula falsi and bisection), or,
while only one side of the bracket is known, from a secant through the
neighbouring anchor's measurement or a doubling expansion. Non-anchor levels
are then linearly re-interpolated between anchors and the knob column is
forced non-decreasing.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping, Sequence

from .errors import AdapterError, AnchorInversion, AuthMissing, NonMonotoneResponse, ProbeInconclusive
from .instances import build_instance
from .rewards import extract_answer, score
from .seeding import derive_seed
from .task_model import LEVELS, DifficultyLadder, Knob, TaskDescriptor, validate_ladder
from .templating import Template, TemplateRepository, default_repository

DEFAULT_TARGETS = {1: 1.00, 3: 0.70, 5: 0.50, 7: 0.30, 10: 0.00}
Z95 = 1.96


@dataclass(frozen=True)
class AnchorTargets:
    targets: Mapping[int, float] = field(default_factory=lambda: dict(DEFAULT_TARGETS))
    tolerance: float = 0.10
    max_iterations: int = 20
    samples_per_probe: int = 200

    def __post_init__(self):
        object.__setattr__(self, "targets", MappingProxyType(dict(sorted(self.targets.items()))))
        if not 0.0 < self.tolerance < 0.5:
            raise ValueError("tolerance must lie in (0, 0.5)")
        rates = list(self.targets.values())
        if any(b > a for a, b in zip(rates, rates[1:])):
            raise ValueError("anchor targets must be non-increasing in level")
        if any(lvl not in LEVELS for lvl in self.targets):
            raise ValueError("anchor levels must lie in 1..10")

    def hit(self, level: int, rate: float) -> bool:
        target = self.targets[level]
        # exact 0/1 rates are unattainable for a stochastic model: check one-sidedly
        if target >= 1.0:
            return rate >= 1.0 - self.tolerance
        if target <= 0.0:
            return rate <= self.tolerance
        return abs(rate - target) <= self.tolerance

    def aim(self, level: int) -> float:
        target = self.targets[level]
        if target >= 1.0:
            return 1.0 - self.tolerance / 2
        if target <= 0.0:
            return self.tolerance / 2
        return target


@dataclass(frozen=True)
class ProbeResult:
    rate: float
    half_width: float
    n_scored: int
    n_failed: int

    def to_dict(self) -> dict[str, Any]:
        return {"rate": self.rate, "half_width": self.half_width, "n_scored": self.n_scored, "n_failed": self.n_failed}


def half_width(rate: float, n: int) -> float:
    """Normal-approximation 95% half-width; 1.0 when fewer than two samples."""
    if n < 2:
        return 1.0
    return Z95 * math.sqrt(rate * (1.0 - rate) / n)


def probe_success_rate(descriptor: TaskDescriptor, level: int, model, n: int, seed: int, language: str = "en",
                       template: Template | None = None, repo: TemplateRepository | None = None,
                       parallelism: int = 1) -> ProbeResult:
    """Measure the strict success rate of ``model`` on ``n`` fresh instances.

    Instance seeds depend only on (seed, family, level, language, index), so
    re-probing after a ladder change reuses the same random draws. Transport
    failures are excluded from the denominator and counted separately.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    repo = repo or default_repository()

    def one(i: int) -> bool | None:
        inst = build_instance(descriptor, level, derive_seed(seed, descriptor.family_id, level, language, i),
                              language, template=template, repo=repo, strict=False)
        try:
            reply = model.answer(inst.question, inst)
        except AuthMissing:
            raise
        except AdapterError:
            return None
        parsed = extract_answer(reply, inst.answer_kind, language, lenient=True).parsed
        return score(parsed, inst.truth, inst.scoring_method, language) == 1.0

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(one, range(n)))
    else:
        outcomes = [one(i) for i in range(n)]
    scored = [o for o in outcomes if o is not None]
    failed = len(outcomes) - len(scored)
    if not scored:
        raise ProbeInconclusive(f"all {n} calls failed for {descriptor.family_id} level {level}")
    rate = sum(scored) / len(scored)
    return ProbeResult(rate, half_width(rate, len(scored)), len(scored), failed)


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def interpolate_ladder(anchor_params: Mapping[int, float], integral: bool = True) -> dict[int, int | float]:
    """Piecewise-linear fill of levels 1..10 between anchor values."""
    if 1 not in anchor_params or 10 not in anchor_params:
        raise ValueError("anchors must include levels 1 and 10")
    levels = sorted(anchor_params)
    for a, b in zip(levels, levels[1:]):
        if anchor_params[b] < anchor_params[a]:
            raise AnchorInversion(f"anchor value decreases from level {a} to level {b}")
    out: dict[int, int | float] = {}
    for a, b in zip(levels, levels[1:]):
        va, vb = Fraction(anchor_params[a]), Fraction(anchor_params[b])
        for lvl in range(a, b + 1):
            x = va + (vb - va) * Fraction(lvl - a, b - a)
            out[lvl] = _round_half_up(x) if integral else float(x)
    return out


def _fit(value: float, knob: Knob) -> int | float:
    return knob.clamp(round(value) if knob.integral else value)


def _propose(level: int, history: Mapping[float, float], aim: float, neighbours: Sequence[tuple[float, float]],
             knob: Knob, expansions: int) -> tuple[int | float, bool]:
    """Next knob value for one off-target anchor; second item is True when the
    anchor cannot move any further (bracket collapsed or bound reached)."""
    easy = [(x, y) for x, y in history.items() if y > aim]
    hard = [(x, y) for x, y in history.items() if y < aim]
    lo = max(easy) if easy else None
    hi = min(hard) if hard else None
    step_min = 1 if knob.integral else 1e-6

    if lo and hi and lo[0] < hi[0]:
        if hi[0] - lo[0] <= step_min:
            best = min((lo, hi), key=lambda p: abs(p[1] - aim))
            return best[0], True
        falsi = lo[0] + (hi[0] - lo[0]) * (lo[1] - aim) / (lo[1] - hi[1])
        cand = (falsi + (lo[0] + hi[0]) / 2) / 2
        cand = min(max(cand, lo[0] + step_min), hi[0] - step_min)
        return _fit(cand, knob), False

    if lo and not hi:
        # too easy everywhere measured: make it harder
        if lo[0] >= knob.maximum:
            return lo[0], True
        harder = [(x, y) for x, y in neighbours if x > lo[0] and y < aim]
        if harder:
            nx, ny = min(harder)
            cand = lo[0] + (nx - lo[0]) * (lo[1] - aim) / (lo[1] - ny)
        else:
            cand = lo[0] + max(step_min, abs(lo[0]) * 0.25) * 2 ** expansions
        return _fit(max(cand, lo[0] + step_min), knob), False

    if hi and not lo:
        if hi[0] <= knob.minimum:
            return hi[0], True
        easier = [(x, y) for x, y in neighbours if x < hi[0] and y > aim]
        if easier:
            nx, ny = max(easier)
            cand = nx + (hi[0] - nx) * (ny - aim) / (ny - hi[1])
        else:
            cand = hi[0] - max(step_min, abs(hi[0]) * 0.25) * 2 ** expansions
        return _fit(min(cand, hi[0] - step_min), knob), False

    # inverted bracket only arises from noise; stay put
    current = max(history, key=lambda x: -abs(history[x] - aim))
    return current, True


def _monotone(values: Mapping[int, float]) -> dict[int, float]:
    out, running = {}, -math.inf
    for lvl in sorted(values):
        running = max(running, values[lvl])
        out[lvl] = running
    return out


def adjust_ladder(ladder: DifficultyLadder, knob: Knob, measured: Mapping[int, float], targets: AnchorTargets,
                  history: Mapping[int, Mapping[float, float]] | None = None,
                  expansions: Mapping[int, int] | None = None) -> tuple[DifficultyLadder, set[int]]:
    """One adjustment round from measured anchor rates.

    Returns the new ladder and the set of anchors that can no longer move.
    Levels 1 and 10 always act as interpolation anchors; unmeasured ones keep
    their current value.
    """
    column = ladder.column(knob.name)
    history = {lvl: dict(history.get(lvl, {})) if history else {} for lvl in measured}
    for lvl, rate in measured.items():
        history[lvl].setdefault(column[lvl], rate)
    anchors: dict[int, float] = {}
    stuck: set[int] = set()
    for lvl in sorted(measured):
        if targets.hit(lvl, measured[lvl]):
            anchors[lvl] = column[lvl]
            continue
        neighbours = [(column[o], measured[o]) for o in measured if o != lvl]
        value, blocked = _propose(lvl, history[lvl], targets.aim(lvl), neighbours, knob,
                                  (expansions or {}).get(lvl, 0))
        anchors[lvl] = value
        if blocked:
            stuck.add(lvl)
    for end in (1, 10):
        anchors.setdefault(end, column[end])
    anchors = _monotone(anchors)
    new_column = {lvl: knob.clamp(v) for lvl, v in interpolate_ladder(anchors, knob.integral).items()}
    return ladder.with_column(knob.name, new_column), stuck


@dataclass
class CalibrationReport:
    family_id: str
    knob: str
    iterations: list[dict[str, Any]] = field(default_factory=list)
    converged: bool = False
    stop_reason: str = ""
    adjustments: int = 0

    @property
    def final_rates(self) -> dict[int, float]:
        if not self.iterations:
            return {}
        return {int(k): v["rate"] for k, v in self.iterations[-1]["anchors"].items()}

    def to_dict(self) -> dict[str, Any]:
        return {
            "family_id": self.family_id,
            "knob": self.knob,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "adjustments": self.adjustments,
            "iterations": self.iterations,
        }

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return path


def _check_monotone_response(level: int, points: Mapping[float, tuple[float, float]], n: int) -> None:
    ordered = sorted(points.items())
    for (x1, (y1, h1)), (x2, (y2, h2)) in zip(ordered, ordered[1:]):
        if y2 - y1 > max(h1 + h2, 2.0 / n):
            raise NonMonotoneResponse(
                f"level {level}: success rose from {y1:.3f} to {y2:.3f} as complexity went {x1}→{x2}"
            )


def calibrate(descriptor: TaskDescriptor, model, targets: AnchorTargets | None = None, seed: int = 0,
              language: str = "en", parallelism: int = 1) -> tuple[DifficultyLadder, CalibrationReport]:
    targets = targets or AnchorTargets()
    knob = descriptor.knob
    if knob is None:
        raise ValueError(f"{descriptor.family_id} designates no tuning knob")
    ladder = descriptor.ladder
    report = CalibrationReport(descriptor.family_id, knob.name)
    history: dict[int, dict[float, tuple[float, float]]] = {lvl: {} for lvl in targets.targets}
    expansions = {lvl: 0 for lvl in targets.targets}
    stuck: set[int] = set()

    for iteration in range(targets.max_iterations + 1):
        current = descriptor.with_ladder(ladder)
        column = ladder.column(knob.name)
        anchors = {}
        measured = {}
        for lvl in targets.targets:
            value = column[lvl]
            if value in history[lvl]:
                rate, hw = history[lvl][value]
                probe = None
            else:
                probe = probe_success_rate(current, lvl, model, targets.samples_per_probe,
                                           derive_seed(seed, "probe", lvl), language, parallelism=parallelism)
                rate, hw = probe.rate, probe.half_width
                history[lvl][value] = (rate, hw)
            measured[lvl] = rate
            anchors[str(lvl)] = {
                "value": value,
                "target": targets.targets[lvl],
                "rate": rate,
                "half_width": hw,
                "hit": targets.hit(lvl, rate),
                **({"n_scored": probe.n_scored, "n_failed": probe.n_failed} if probe else {"cached": True}),
            }
        report.iterations.append({"iteration": iteration, "ladder": ladder.to_dict()["levels"], "anchors": anchors})
        if all(targets.hit(lvl, r) for lvl, r in measured.items()):
            report.converged, report.stop_reason = True, "all anchors within tolerance"
            break
        if iteration == targets.max_iterations:
            report.stop_reason = "max_iterations reached"
            break
        for lvl, pts in history.items():
            _check_monotone_response(lvl, pts, targets.samples_per_probe)

        rates_only = {lvl: {x: y for x, (y, _) in pts.items()} for lvl, pts in history.items()}
        new_ladder, stuck = adjust_ladder(ladder, knob, measured, targets, rates_only, expansions)
        for lvl in measured:
            if not targets.hit(lvl, measured[lvl]):
                expansions[lvl] += 1
        if new_ladder == ladder:
            report.stop_reason = "stalled: off-target anchors cannot move (" + ", ".join(map(str, sorted(stuck))) + ")"
            break
        assert validate_ladder(new_ladder).ok, validate_ladder(new_ladder).violations
        ladder = new_ladder
        report.adjustments += 1
    return ladder, report


def level_sweep(descriptor: TaskDescriptor, model, n: int = 200, seed: int = 0, language: str = "en",
                parallelism: int = 1) -> dict[int, ProbeResult]:
    """Probe every level 1..10 once."""
    return {lvl: probe_success_rate(descriptor, lvl, model, n, derive_seed(seed, "sweep", lvl), language,
                                    parallelism=parallelism)
            for lvl in LEVELS}


@dataclass(frozen=True)
class GateCell:
    template_id: str
    language: str
    level: int
    rate: float
    passed: bool


@dataclass
class GateReport:
    family_id: str
    threshold: float
    cells: list[GateCell] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.cells) and all(c.passed for c in self.cells)

    @property
    def failing(self) -> list[GateCell]:
        return [c for c in self.cells if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            "family_id": self.family_id,
            "threshold": self.threshold,
            "passed": self.passed,
            "cells": [c.__dict__ for c in self.cells],
            "failing": [c.__dict__ for c in self.failing],
        }

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return path


def gate_cell_passes(rate: float, threshold: float) -> bool:
    return rate > threshold


def validation_gate(descriptor: TaskDescriptor, model, threshold: float = 0.90, levels: Sequence[int] = (1, 2, 3),
                    n: int = 100, seed: int = 0, repo: TemplateRepository | None = None,
                    languages: Sequence[str] | None = None, parallelism: int = 1) -> GateReport:
    """Every template variant x level must clear ``threshold`` strictly."""
    repo = repo or default_repository()
    report = GateReport(descriptor.family_id, threshold)
    for lang in sorted(languages or descriptor.languages):
        for template in repo.variants(descriptor.family_id, lang):
            for lvl in levels:
                probe = probe_success_rate(descriptor, lvl, model, n, derive_seed(seed, "gate", template.template_id, lvl),
                                           lang, template=template, repo=repo, parallelism=parallelism)
                report.cells.append(GateCell(template.template_id, lang, lvl, probe.rate,
                                             gate_cell_passes(probe.rate, threshold)))
    return report
