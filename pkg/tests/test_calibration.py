import json

import hypothesis.strategies as st
import pytest
from hypothesis import given

from logicsynth.calibration import (
    AnchorTargets, adjust_ladder, calibrate, gate_cell_passes, half_width, interpolate_ladder, probe_success_rate,
    validation_gate,
)
from logicsynth.errors import AnchorInversion, AuthMissing, NonMonotoneResponse, ProbeInconclusive, TransportError
from logicsynth.model_adapter import MockModel, logistic, mock_for
from logicsynth.task_model import LEVELS, DifficultyLadder, Knob, validate_ladder


class Failing:
    def __init__(self, every=1, error=TransportError):
        self.every, self.error, self.inner = every, error, None

    def answer(self, question, instance):
        if instance.seed % self.every == 0:
            raise self.error("down")
        return self.inner.answer(question, instance)


class Inverted(MockModel):
    """Gets better as the knob grows, which no real solver should."""

    def success_probability(self, instance):
        return logistic(0.6 * (float(instance.level_params[self.config.complexity_key]) - 12))


def test_half_width():
    assert half_width(1.0, 1) == 1.0
    assert half_width(0.5, 100) == pytest.approx(1.96 * 0.05)
    assert half_width(1.0, 200) == 0.0


def test_probe_with_one_sample(registry):
    d = registry["maze_paths"]
    result = probe_success_rate(d, 1, mock_for(d, high_skill=True), 1, seed=3)
    assert result.rate == 1.0 and result.half_width == 1.0 and result.n_scored == 1


def test_probe_all_failures_is_inconclusive(registry):
    with pytest.raises(ProbeInconclusive):
        probe_success_rate(registry["seal_decode"], 2, Failing(), 20, seed=0)


def test_probe_excludes_transport_failures(registry):
    d = registry["seal_decode"]
    flaky = Failing(every=3)
    flaky.inner = mock_for(d, high_skill=True)
    result = probe_success_rate(d, 2, flaky, 90, seed=0)
    assert result.n_failed > 0 and result.n_scored + result.n_failed == 90
    assert result.rate == 1.0


def test_probe_propagates_auth_errors(registry):
    with pytest.raises(AuthMissing):
        probe_success_rate(registry["seal_decode"], 2, Failing(error=AuthMissing), 5, seed=0)


def test_probe_parallel_matches_serial(registry):
    d = registry["truth_teller"]
    model = mock_for(d)
    assert probe_success_rate(d, 5, model, 120, 8) == probe_success_rate(d, 5, model, 120, 8, parallelism=4)


def test_interpolation_examples():
    ladder = interpolate_ladder({1: 3, 10: 30})
    assert ladder[5] == 15 and ladder[1] == 3 and ladder[10] == 30
    full = {lvl: lvl * 2 for lvl in LEVELS}
    assert interpolate_ladder(full) == full
    with pytest.raises(AnchorInversion):
        interpolate_ladder({1: 10, 10: 5})
    with pytest.raises(ValueError):
        interpolate_ladder({1: 1, 5: 3})
    assert interpolate_ladder({1: 1.0, 10: 2.0}, integral=False)[4] == pytest.approx(4 / 3)


@given(st.lists(st.integers(0, 60), min_size=2, max_size=10), st.sets(st.sampled_from(LEVELS[1:-1])))
def test_interpolation_is_monotone_and_keeps_anchors(values, middle):
    values = sorted(values)
    levels = [1, *sorted(middle)[: len(values) - 2], 10]
    anchors = dict(zip(levels, values))
    out = interpolate_ladder(anchors)
    assert [out[lvl] for lvl in levels] == [anchors[lvl] for lvl in levels]
    assert all(out[a] <= out[b] for a, b in zip(LEVELS, LEVELS[1:]))


def _linear_ladder():
    return DifficultyLadder({lvl: {"n": 3 * lvl} for lvl in LEVELS})


def test_worked_adjustment():
    knob = Knob("n", 1, 100)
    targets = AnchorTargets({1: 1.0, 5: 0.5, 10: 0.0})
    new, stuck = adjust_ladder(_linear_ladder(), knob, {1: 1.0, 5: 0.3, 10: 0.0}, targets)
    column = new.column("n")
    assert [column[lvl] for lvl in range(1, 6)] == [3, 5, 8, 10, 12]
    assert column[10] == 30 and not stuck
    assert validate_ladder(new).ok


def test_met_targets_need_no_adjustment(registry):
    d = registry["maze_paths"]
    targets = AnchorTargets({1: 1.0, 10: 0.0}, samples_per_probe=50)

    class Oracle(MockModel):
        def success_probability(self, instance):
            return 1.0 if instance.params.difficulty == 1 else 0.0

    ladder, report = calibrate(d, Oracle(mock_for(d).config), targets, seed=1)
    assert ladder == d.ladder
    assert report.converged and report.adjustments == 0 and len(report.iterations) == 1


def test_calibration_is_deterministic_and_valid(registry, tmp_path):
    d = registry["rect_paint"]
    targets = AnchorTargets(samples_per_probe=120)
    first = calibrate(d, mock_for(d), targets, seed=5)
    second = calibrate(d, mock_for(d), targets, seed=5)
    assert first[0] == second[0]
    assert first[1].to_dict() == second[1].to_dict()
    for it in first[1].iterations:
        assert validate_ladder(DifficultyLadder(it["ladder"])).ok
    saved = json.loads(first[1].write(tmp_path / "r.json").read_text())
    assert saved["converged"] == first[1].converged


def test_inverted_response_is_reported(registry):
    d = registry["seal_decode"]
    with pytest.raises(NonMonotoneResponse):
        calibrate(d, Inverted(mock_for(d).config), AnchorTargets(samples_per_probe=200), seed=2)


def test_max_iterations_stop(registry):
    d = registry["seal_decode"]
    hopeless = mock_for(d, skill=-200)
    _, report = calibrate(d, hopeless, AnchorTargets({1: 1.0, 10: 0.0}, max_iterations=2, samples_per_probe=30))
    assert not report.converged
    assert report.stop_reason == "max_iterations reached" or report.stop_reason.startswith("stalled")


def test_anchor_target_validation():
    with pytest.raises(ValueError):
        AnchorTargets({1: 0.5, 5: 0.7})
    with pytest.raises(ValueError):
        AnchorTargets(tolerance=0.0)
    with pytest.raises(ValueError):
        AnchorTargets({0: 1.0})
    t = AnchorTargets()
    assert t.hit(1, 0.91) and not t.hit(1, 0.89)
    assert t.hit(10, 0.1) and t.hit(5, 0.4) and not t.hit(5, 0.39)


def test_gate_threshold_is_strict():
    assert not gate_cell_passes(0.90, 0.90)
    assert gate_cell_passes(0.905, 0.90)


def test_gate_with_weak_model_fails(registry, tmp_path):
    d = registry["seal_decode"]
    report = validation_gate(d, mock_for(d, skill=-50), n=20)
    assert not report.passed and report.failing
    assert json.loads(report.write(tmp_path / "g.json").read_text())["passed"] is False
