import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from logicsynth.errors import UnknownFamily
from logicsynth.task_model import (
    LEVELS, AnswerKind, CoreAbility, DifficultyLadder, DifficultySource, Knob, Registry, ScoringMethod,
    TaskDescriptor, TaskDomain, TaxonomyLabel, dump_descriptor, load_descriptor, save_descriptor, validate_ladder,
)

C4_VALUES = [3, 5, 8, 10, 12, 15, 18, 22, 26, 30]


def ladder_of(values, name="num"):
    return DifficultyLadder({lvl: {name: v} for lvl, v in zip(LEVELS, values)})


def test_enumerations_match_the_taxonomy_table():
    assert len(TaskDomain) == 11
    assert len(CoreAbility) == 6
    assert len(DifficultySource) == 7


def test_c4_ladder_is_valid():
    assert validate_ladder(ladder_of(C4_VALUES)).ok


def test_flat_ladder_is_valid():
    assert validate_ladder(ladder_of([7] * 10)).ok


def test_decrease_is_named():
    values = list(C4_VALUES)
    values[4], values[5] = 15, 12
    report = validate_ladder(ladder_of(values))
    assert not report.ok
    assert "num decreases 5→6" in report.violations


def test_missing_level_and_empty():
    ladder = DifficultyLadder({lvl: {"num": lvl} for lvl in LEVELS if lvl != 4})
    assert "missing level 4" in validate_ladder(ladder).violations
    assert validate_ladder(DifficultyLadder({})).violations == ("ladder is empty",)


def test_only_designated_params_are_checked():
    entries = {lvl: {"num": lvl, "share": 1.0 / lvl} for lvl in LEVELS}
    assert not validate_ladder(DifficultyLadder(entries)).ok
    assert validate_ladder(DifficultyLadder(entries, ("num",))).ok


ladders = st.dictionaries(
    st.sampled_from(LEVELS),
    st.fixed_dictionaries({"a": st.integers(0, 20), "b": st.integers(0, 20)}),
    min_size=1,
)


@given(ladders, st.randoms())
@settings(max_examples=100)
def test_validation_idempotent_and_order_independent(entries, rnd):
    first = validate_ladder(DifficultyLadder(entries))
    items = list(entries.items())
    rnd.shuffle(items)
    assert validate_ladder(DifficultyLadder(dict(items))) == first
    assert validate_ladder(DifficultyLadder(entries)) == first


@given(st.lists(st.integers(0, 50), min_size=10, max_size=10))
def test_validation_agrees_with_sortedness(values):
    assert validate_ladder(ladder_of(values)).ok == (values == sorted(values))


def test_ladder_is_immutable():
    ladder = ladder_of(C4_VALUES)
    with pytest.raises(TypeError):
        ladder.entries[1] = {"num": 0}
    with pytest.raises(TypeError):
        ladder[1]["num"] = 0


def test_with_column_replaces_values():
    ladder = ladder_of(C4_VALUES)
    updated = ladder.with_column("num", {5: 13})
    assert updated.column("num")[5] == 13
    assert ladder.column("num")[5] == 12


def test_knob_clamp():
    knob = Knob("num", 2, 20, True)
    assert knob.clamp(1) == 2 and knob.clamp(25) == 20 and knob.clamp(7.0) == 7
    assert isinstance(knob.clamp(7.0), int)


def _descriptor(method=ScoringMethod.F1, kind=AnswerKind.SET, **kw):
    return TaskDescriptor(
        family_id=kw.pop("family_id", "demo"),
        taxonomy=TaxonomyLabel(TaskDomain.CLASSIC_GAMES, CoreAbility.CONSTRAINT_SATISFACTION,
                               DifficultySource.LARGE_SEARCH_SPACE),
        ladder=ladder_of(C4_VALUES),
        scoring_method=method,
        answer_kind=kind,
        knob=Knob("num", 1, 40, True),
        **kw,
    )


@pytest.mark.parametrize("method,kind", [
    (ScoringMethod.F1, AnswerKind.NUMERIC),
    (ScoringMethod.ABS_DIFF_RATE, AnswerKind.SET),
    (ScoringMethod.ACCURACY, AnswerKind.SET),
])
def test_incompatible_method_rejected(method, kind):
    with pytest.raises(ValueError):
        _descriptor(method, kind)


@given(st.sampled_from(TaskDomain), st.sampled_from(CoreAbility), st.sampled_from(DifficultySource))
def test_any_taxonomy_combination_round_trips(domain, ability, source):
    d = _descriptor()
    d = TaskDescriptor.from_dict({**d.to_dict(), "taxonomy": TaxonomyLabel(domain, ability, source).to_dict()})
    assert d.taxonomy == TaxonomyLabel(domain, ability, source)
    assert TaskDescriptor.from_dict(d.to_dict()) == d


def test_shipped_descriptors_round_trip(registry, tmp_path):
    assert list(registry) == sorted(["truth_teller", "maze_paths", "seal_decode", "rect_paint", "causal_chain"])
    for d in registry.values():
        assert validate_ladder(d.ladder).ok, d.family_id
        assert d.knob is not None and d.knob.name in d.ladder.checked_params()
        path = save_descriptor(d, tmp_path / f"{d.family_id}.yaml")
        assert load_descriptor(path) == d
        assert dump_descriptor(load_descriptor(path)) == dump_descriptor(d)


def test_registry_unique_and_unknown_lists_families():
    reg = Registry()
    reg.add(_descriptor(family_id="one"))
    with pytest.raises(ValueError):
        reg.add(_descriptor(family_id="one"))
    with pytest.raises(UnknownFamily, match="registered: one"):
        reg["two"]


def test_ladder_format_version_checked():
    data = ladder_of(C4_VALUES).to_dict()
    assert DifficultyLadder.from_dict(data) == ladder_of(C4_VALUES)
    with pytest.raises(ValueError):
        DifficultyLadder.from_dict({**data, "format_version": 99})

