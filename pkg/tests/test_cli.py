import argparse
import json

import pytest

from logicsynth.cli import ConfigError, build_parser, main, resolve_config

SUBCOMMANDS = ("generate", "calibrate", "validate", "verify", "respond", "score", "sim-grpo")


def _subparsers(parser):
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return action.choices


@pytest.mark.parametrize("command", SUBCOMMANDS)
def test_help_lists_every_option(command, capsys):
    sub = _subparsers(build_parser())[command]
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for action in sub._actions:
        for option in action.option_strings:
            assert option in text, option


def _args(argv):
    return build_parser().parse_args(argv)


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("seed: 3\nparallelism: 2\nmodel: mock-highskill\n")
    args = _args(["verify", "--dataset", "x", "--config", str(cfg)])
    resolved = resolve_config(args, env={})
    assert (resolved.seed, resolved.parallelism, resolved.model) == (3, 2, "mock-highskill")
    env = {"LOGICSYNTH_SEED": "5", "LOGICSYNTH_PARALLELISM": "4"}
    assert resolve_config(args, env=env).seed == 5
    flagged = _args(["generate", "--seed", "9", "--config", str(cfg)])
    resolved = resolve_config(flagged, env=env)
    assert resolved.seed == 9 and resolved.parallelism == 4 and resolved.model == "mock-highskill"
    assert resolve_config(_args(["verify", "--dataset", "x"]), env={}).log_level == "WARNING"


def test_config_from_env_path(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("seed: 12\n")
    assert resolve_config(_args(["generate"]), env={"LOGICSYNTH_CONFIG": str(cfg)}).seed == 12


def test_bad_config(tmp_path, monkeypatch):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("sead: 3\n")
    with pytest.raises(ConfigError):
        resolve_config(_args(["generate", "--config", str(cfg)]), env={})
    monkeypatch.delenv("LOGICSYNTH_SEED", raising=False)
    monkeypatch.delenv("LOGICSYNTH_CONFIG", raising=False)
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "d.jsonl")]) == 2
    assert main(["generate", "--out", str(tmp_path / "d.jsonl"), "--parallelism", "0", "--seed", "1"]) == 2


def test_seed_is_required(tmp_path, monkeypatch):
    monkeypatch.delenv("LOGICSYNTH_SEED", raising=False)
    monkeypatch.delenv("LOGICSYNTH_CONFIG", raising=False)
    assert main(["generate", "--out", str(tmp_path / "d.jsonl")]) == 2


def test_unknown_family(tmp_path, capsys):
    assert main(["generate", "--seed", "1", "--family", "nope", "--out", str(tmp_path / "d.jsonl")]) == 1
    assert "truth_teller" in capsys.readouterr().err


def test_generate_verify_respond_score(tmp_path):
    data = tmp_path / "d.jsonl"
    assert main(["generate", "--seed", "4", "--difficulty", "2,8", "--count", "3", "--out", str(data)]) == 0
    assert main(["verify", "--dataset", str(data)]) == 0
    assert json.loads((tmp_path / "d.jsonl.verify.json").read_text())["mismatches"] == []
    responses = tmp_path / "r.jsonl"
    assert main(["respond", "--dataset", str(data), "--out", str(responses)]) == 0
    scores = tmp_path / "s.jsonl"
    assert main(["score", "--dataset", str(data), "--responses", str(responses), "--out", str(scores)]) == 0
    rows = [json.loads(line) for line in scores.read_text().splitlines()]
    assert len(rows) == 5 * 2 * 2 * 3
    assert all(-1.0 <= r["total"] <= 1.1 for r in rows)


def test_verify_mismatch_exit_code(tmp_path):
    data = tmp_path / "d.jsonl"
    main(["generate", "--seed", "4", "--family", "seal_decode", "--difficulty", "3", "--lang", "en",
          "--count", "2", "--out", str(data)])
    rows = [json.loads(line) for line in data.read_text().splitlines()]
    rows[0]["question"] += " tampered"
    data.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    assert main(["verify", "--dataset", str(data)]) == 3


def test_calibrate_writes_report(tmp_path):
    assert main(["calibrate", "--family", "maze_paths", "--seed", "7", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "maze_paths.calibration.json").read_text())
    assert report["converged"] is True
    assert (tmp_path / "maze_paths.yaml").exists()


def test_validate_with_high_skill(tmp_path):
    argv = ["validate", "--family", "seal_decode", "--model", "mock-highskill", "--samples", "30",
            "--out", str(tmp_path)]
    assert main(argv) == 0
    assert json.loads((tmp_path / "seal_decode.gate.json").read_text())["passed"] is True
    assert main(["validate", "--family", "seal_decode", "--samples", "30", "--levels", "8-10",
                 "--out", str(tmp_path)]) == 3


def test_sim_grpo_outputs(tmp_path):
    argv = ["sim-grpo", "--seed", "0", "--pairs", "2", "--steps", "300", "--out", str(tmp_path)]
    assert main(argv) == 0
    summary = json.loads((tmp_path / "sim_summary.json").read_text())
    assert summary
    assert len(list(tmp_path.glob("sim_*_seed*.csv"))) == 3 * 2
