import json

import pytest

from logicsynth.dataset_io import (
    RECORD_KEYS, GateNotPassed, MixEntry, emit_dataset, expand_mix, read_records, report_path, respond_dataset,
    score_dataset, verify_dataset, write_responses,
)
from logicsynth.errors import MalformedLine
from logicsynth.generators import FAMILIES
from logicsynth.model_adapter import mock_for
from logicsynth.task_model import LEVELS, Registry


def test_small_mix_verifies(registry, tmp_path):
    out = tmp_path / "d.jsonl"
    report = emit_dataset(registry, [MixEntry("truth_teller", 5, "en", 10)], 42, out)
    lines = out.read_bytes().split(b"\n")
    assert len(lines) == 11 and lines[-1] == b""
    assert report.total == 10 and report.counts == {"truth_teller": {"5/en": 10}}
    assert verify_dataset(out).ok
    saved = json.loads(report_path(out).read_text())
    assert saved["total"] == 10 and saved["schema_version"] == 1


def test_empty_mix(registry, tmp_path):
    out = tmp_path / "empty.jsonl"
    assert emit_dataset(registry, [], 1, out).total == 0
    assert out.read_bytes() == b""
    assert verify_dataset(out).records == 0


def test_reruns_are_byte_identical(registry, tmp_path):
    mix = expand_mix(["maze_paths", "seal_decode"], [2, 7], ["en", "zh"], 5)
    a = emit_dataset(registry, mix, 3, tmp_path / "a.jsonl")
    b = emit_dataset(registry, mix, 3, tmp_path / "b.jsonl", parallelism=4)
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert a.sha256 == b.sha256


def test_key_order_and_sorting(registry, tmp_path):
    out = tmp_path / "d.jsonl"
    emit_dataset(registry, expand_mix(["rect_paint"], [1, 9], ["zh"], 6), 8, out)
    ids = []
    for line in out.read_text(encoding="utf-8").splitlines():
        data = json.loads(line)
        assert tuple(data) == RECORD_KEYS
        ids.append(data["id"])
    assert ids == sorted(ids)


def test_corrupted_answer_is_located(registry, tmp_path):
    out = tmp_path / "d.jsonl"
    emit_dataset(registry, [MixEntry("seal_decode", 4, "en", 8)], 5, out)
    lines = out.read_text(encoding="utf-8").splitlines(keepends=True)
    data = json.loads(lines[3])
    data["answer"] = str(int(data["answer"]) + 1)
    lines[3] = json.dumps(data, ensure_ascii=False) + "\n"
    out.write_text("".join(lines), encoding="utf-8")
    report = verify_dataset(out)
    assert [m.line for m in report.mismatches] == [4]
    assert report.mismatches[0].field == "answer"


def test_truncated_line(registry, tmp_path):
    out = tmp_path / "d.jsonl"
    emit_dataset(registry, [MixEntry("causal_chain", 3, "en", 4)], 5, out)
    out.write_bytes(out.read_bytes()[:-1])
    with pytest.raises(MalformedLine) as exc:
        list(read_records(out))
    assert "4" in str(exc.value)


def test_gate_is_enforced(registry, tmp_path):
    d = registry["maze_paths"]
    ungated = Registry()
    ungated.add(d.with_ladder(d.ladder, gate_passed=False))
    mix = [MixEntry("maze_paths", 1, "en", 2)]
    with pytest.raises(GateNotPassed):
        emit_dataset(ungated, mix, 0, tmp_path / "x.jsonl")
    report = emit_dataset(ungated, mix, 0, tmp_path / "x.jsonl", force=True)
    assert report.forced and report.ungated == ["maze_paths"]


def test_mix_validation():
    with pytest.raises(ValueError):
        MixEntry("seal_decode", 0, "en", 1)
    with pytest.raises(ValueError):
        MixEntry("seal_decode", 1, "fr", 1)
    with pytest.raises(ValueError):
        MixEntry("seal_decode", 1, "en", -1)


def test_respond_and_score(registry, tmp_path):
    data = tmp_path / "d.jsonl"
    emit_dataset(registry, expand_mix(sorted(FAMILIES), [3], ["en", "zh"], 4), 2, data)
    responses = respond_dataset(data, lambda f: mock_for(registry[f]), registry, tmp_path / "r.jsonl")
    report = score_dataset(data, responses, tmp_path / "s.jsonl")
    assert report.scored == 40 and not report.mismatch
    for line in (tmp_path / "s.jsonl").read_text().splitlines():
        row = json.loads(line)
        assert -1.0 <= row["total"] <= 1.1
        assert row["total"] == pytest.approx(row["mapped"] + row["bonus"])


def test_score_flags_missing_and_unknown(registry, tmp_path):
    data = tmp_path / "d.jsonl"
    emit_dataset(registry, [MixEntry("seal_decode", 1, "en", 3)], 0, data)
    ids = [rec.id for _, rec in read_records(data)]
    responses = write_responses(tmp_path / "r.jsonl", [(ids[0], "<answer>1</answer>"), ("nope", "x")])
    report = score_dataset(data, responses, tmp_path / "s.jsonl", scheme="graded")
    assert report.mismatch
    assert report.missing_responses == ids[1:] and report.unknown_ids == ["nope"]


def test_full_closure(registry, tmp_path):
    out = tmp_path / "all.jsonl"
    report = emit_dataset(registry, expand_mix(sorted(FAMILIES), LEVELS, ["en", "zh"], 100), 17, out,
                          parallelism=4)
    assert report.total == len(FAMILIES) * len(LEVELS) * 2 * 100
    check = verify_dataset(out)
    assert check.ok and check.records == report.total
