"""Command-line entry point: ``logicsynth <command> [flags]``.

Settings resolve as flag > ``LOGICSYNTH_*`` environment variable > config
file > built-in default. Exit codes:

    0  success
    1  generator error or unknown family
    2  configuration error, or emission refused because the gate has not passed
    3  calibration did not converge, gate failed, verification or score
       mismatch, or the simulation halted
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import yaml

from .calibration import AnchorTargets, calibrate, validation_gate
from .dataset_io import (
    GateNotPassed, emit_dataset, expand_mix, report_path, respond_dataset, score_dataset, verify_dataset,
    write_json,
)
from .errors import AdapterError, LogicSynthError, UnknownFamily
from .grpo_sim import simulate_training, trap_environment
from .model_adapter import EndpointConfig, HttpModel, mock_for
from .rewards import DEFAULT_FORMAT_BONUS, Scheme
from .task_model import LANGUAGES, LEVELS, Registry, default_registry, save_descriptor
from .templating import default_repository

log = logging.getLogger("logicsynth")

EXIT_OK, EXIT_GENERATOR, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2, 3
ENV_PREFIX = "LOGICSYNTH_"

# setting -> built-in default; every one may come from flag, env or config file
DEFAULTS: dict[str, Any] = {
    "seed": None,
    "model": "mock",
    "parallelism": 1,
    "out": None,
    "log_level": "WARNING",
    "descriptors": None,
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    seed: int | None
    model: str
    parallelism: int
    out: str | None
    log_level: str
    descriptors: str | None
    endpoints: dict[str, dict]
    config_path: str | None

    def require_seed(self, command: str) -> int:
        if self.seed is None:
            raise ConfigError(f"{command} needs an explicit --seed (or {ENV_PREFIX}SEED / config 'seed')")
        return self.seed


def _load_config(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    unknown = set(data) - set(DEFAULTS) - {"endpoints"}
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def resolve_config(args: argparse.Namespace, env: dict[str, str] | None = None) -> RunConfig:
    env = dict(os.environ) if env is None else env
    config_path = args.config or env.get(ENV_PREFIX + "CONFIG")
    file_cfg = _load_config(config_path)
    values: dict[str, Any] = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        env_value = env.get(ENV_PREFIX + key.upper())
        if flag is not None:
            values[key] = flag
        elif env_value is not None:
            values[key] = env_value
        elif key in file_cfg:
            values[key] = file_cfg[key]
        else:
            values[key] = default
    try:
        seed = None if values["seed"] is None else int(values["seed"])
        parallelism = int(values["parallelism"])
    except (TypeError, ValueError):
        raise ConfigError("seed and parallelism must be integers") from None
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    endpoints = file_cfg.get("endpoints") or {}
    if not isinstance(endpoints, dict):
        raise ConfigError("'endpoints' must map names to endpoint settings")
    return RunConfig(seed, str(values["model"]), parallelism, values["out"], str(values["log_level"]).upper(),
                     values["descriptors"], endpoints, config_path)


def _registry(cfg: RunConfig) -> Registry:
    if cfg.descriptors:
        if not Path(cfg.descriptors).is_dir():
            raise ConfigError(f"descriptor directory {cfg.descriptors} does not exist")
        return Registry.from_directory(cfg.descriptors)
    return default_registry()


def _model(cfg: RunConfig, descriptor):
    if cfg.model == "mock":
        return mock_for(descriptor)
    if cfg.model == "mock-highskill":
        return mock_for(descriptor, high_skill=True)
    if cfg.model in cfg.endpoints:
        try:
            return HttpModel(EndpointConfig(**cfg.endpoints[cfg.model]), name=cfg.model)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"endpoint {cfg.model!r}: {exc}") from None
    raise ConfigError(f"unknown model {cfg.model!r}; use mock, mock-highskill or an endpoint from the config file")


def _families(spec: str | None, registry: Registry) -> list[str]:
    if not spec or spec == "all":
        return list(registry)
    names = [s.strip() for s in spec.split(",") if s.strip()]
    for name in names:
        registry[name]  # raises UnknownFamily listing what is registered
    return names


def _levels(spec: str) -> list[int]:
    try:
        if "-" in spec:
            lo, hi = (int(x) for x in spec.split("-", 1))
            levels = list(range(lo, hi + 1))
        else:
            levels = [int(x) for x in spec.split(",")]
    except ValueError:
        raise ConfigError(f"bad difficulty {spec!r}; use N, N-M or N,M,...") from None
    if not levels or any(lvl not in LEVELS for lvl in levels):
        raise ConfigError(f"difficulty {spec!r} must stay within 1..10")
    return levels


def _languages(spec: str) -> list[str]:
    if spec == "both":
        return list(LANGUAGES)
    if spec not in LANGUAGES:
        raise ConfigError(f"language must be one of en, zh, both; got {spec!r}")
    return [spec]


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(path: Path) -> None:
    print(path)


# commands

def cmd_generate(args, cfg: RunConfig) -> int:
    seed = cfg.require_seed("generate")
    if not cfg.out:
        raise ConfigError("generate needs --out")
    registry = _registry(cfg)
    families = _families(args.family, registry)
    if args.count < 0:
        raise ConfigError("--count must be >= 0")
    mix = expand_mix(families, _levels(args.difficulty), _languages(args.lang), args.count)
    Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    report = emit_dataset(registry, mix, seed, cfg.out, force=args.force, parallelism=cfg.parallelism)
    log.info("wrote %d records", report.total)
    _emit(Path(cfg.out))
    _emit(report_path(cfg.out))
    return EXIT_OK


def cmd_calibrate(args, cfg: RunConfig) -> int:
    seed = cfg.require_seed("calibrate")
    registry = _registry(cfg)
    out = _out_dir(cfg)
    targets = AnchorTargets(tolerance=args.tolerance, max_iterations=args.max_iterations,
                            samples_per_probe=args.samples)
    status = EXIT_OK
    for family in _families(args.family, registry):
        descriptor = registry[family]
        started = time.monotonic()
        ladder, report = calibrate(descriptor, _model(cfg, descriptor), targets, seed=seed,
                                   language=args.lang if args.lang != "both" else "en",
                                   parallelism=cfg.parallelism)
        log.info("%s: %s after %.1fs", family, report.stop_reason, time.monotonic() - started)
        _emit(report.write(out / f"{family}.calibration.json"))
        # a recalibrated ladder has not been through the gate yet
        _emit(save_descriptor(descriptor.with_ladder(ladder, gate_passed=False), out / f"{family}.yaml"))
        if not report.converged:
            status = EXIT_FAILED
    return status


def cmd_validate(args, cfg: RunConfig) -> int:
    seed = cfg.seed if cfg.seed is not None else 0
    registry = _registry(cfg)
    out = _out_dir(cfg)
    status = EXIT_OK
    for family in _families(args.family, registry):
        descriptor = registry[family]
        report = validation_gate(descriptor, _model(cfg, descriptor), threshold=args.threshold,
                                 levels=_levels(args.levels), n=args.samples, seed=seed,
                                 repo=default_repository(), parallelism=cfg.parallelism)
        _emit(report.write(out / f"{family}.gate.json"))
        if report.passed and args.record and cfg.descriptors:
            _emit(save_descriptor(descriptor.with_ladder(descriptor.ladder, gate_passed=True),
                                  Path(cfg.descriptors) / f"{family}.yaml"))
        if not report.passed:
            for cell in report.failing:
                log.warning("%s: %s level %d at %.3f", family, cell.template_id, cell.level, cell.rate)
            status = EXIT_FAILED
    return status


def cmd_verify(args, cfg: RunConfig) -> int:
    report = verify_dataset(args.dataset)
    out = Path(cfg.out) if cfg.out else Path(str(args.dataset) + ".verify.json")
    _emit(write_json(out, report.to_dict()))
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_respond(args, cfg: RunConfig) -> int:
    if not cfg.out:
        raise ConfigError("respond needs --out")
    registry = _registry(cfg)
    models: dict[str, Any] = {}

    def model_for(family: str):
        if family not in models:
            models[family] = _model(cfg, registry[family])
        return models[family]

    _emit(respond_dataset(args.dataset, model_for, registry, cfg.out))
    return EXIT_OK


def cmd_score(args, cfg: RunConfig) -> int:
    out = Path(cfg.out) if cfg.out else Path(str(args.dataset) + ".scores.jsonl")
    report = score_dataset(args.dataset, args.responses, out, scheme=args.scheme, bonus=args.bonus)
    _emit(out)
    _emit(write_json(out.with_name(out.name + ".report.json"), report.to_dict()))
    return EXIT_FAILED if report.mismatch else EXIT_OK


def cmd_sim(args, cfg: RunConfig) -> int:
    seed = cfg.require_seed("sim-grpo")
    out = _out_dir(cfg)
    schemes = list(Scheme) if args.scheme == "all" else [Scheme(args.scheme)]
    summary: dict[str, Any] = {"steps": args.steps, "group_size": args.group_size,
                               "learning_rate": args.learning_rate, "runs": []}
    halted = False
    for pair in range(args.pairs):
        run_seed = seed + pair
        for scheme in schemes:
            env = trap_environment(perfect_rate=args.perfect_rate, group_size=args.group_size,
                                   learning_rate=args.learning_rate, steps=args.steps, seed=run_seed)
            result = simulate_training(env, scheme)
            path = result.write_csv(out / f"sim_{scheme.value}_seed{run_seed}.csv")
            _emit(path)
            halted = halted or result.halted is not None
            summary["runs"].append({"scheme": scheme.value, "seed": run_seed,
                                    "final_perfect_mass": result.final_perfect_mass,
                                    "halted": result.halted, "trajectory": path.name})
    masses: dict[str, list[float]] = {}
    for run in summary["runs"]:
        masses.setdefault(run["scheme"], []).append(run["final_perfect_mass"])
    summary["mean_final_perfect_mass"] = {k: sum(v) / len(v) for k, v in masses.items()}
    _emit(write_json(out / "sim_summary.json", summary))
    return EXIT_FAILED if halted else EXIT_OK


# parser

def _common(p: argparse.ArgumentParser, *, seed=True, model=False, family=False) -> None:
    p.add_argument("--config", help="YAML config file (keys: seed, model, parallelism, out, log_level, "
                                    "descriptors, endpoints)")
    p.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR (default WARNING)")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--parallelism", type=int, help="bounded worker count (default 1)")
    p.add_argument("--descriptors", help="directory of descriptor YAML files (default: shipped descriptors)")
    if seed:
        p.add_argument("--seed", type=int, help="master seed; required where randomness is involved")
    if model:
        p.add_argument("--model", help="mock, mock-highskill, or an endpoint name from the config file")
    if family:
        p.add_argument("--family", default="all", help="family id, comma-separated ids, or 'all' (default)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logicsynth", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("generate", help="emit a JSON Lines dataset")
    _common(p, family=True)
    p.add_argument("--difficulty", default="1-10", help="level N, range N-M or list N,M (default 1-10)")
    p.add_argument("--lang", default="both", help="en, zh or both (default both)")
    p.add_argument("--count", type=int, default=10, help="records per family, level and language (default 10)")
    p.add_argument("--force", action="store_true", help="emit even if a family has not passed the validation gate")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("calibrate", help="tune each family's difficulty ladder against a model")
    _common(p, model=True, family=True)
    p.add_argument("--lang", default="en", help="language to probe in (default en)")
    p.add_argument("--samples", type=int, default=200, help="instances per probe (default 200)")
    p.add_argument("--tolerance", type=float, default=0.10, help="absolute anchor tolerance (default 0.10)")
    p.add_argument("--max-iterations", dest="max_iterations", type=int, default=20, help="default 20")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("validate", help="run the validation gate over every template variant")
    _common(p, model=True, family=True)
    p.add_argument("--threshold", type=float, default=0.90, help="cells must exceed this rate (default 0.90)")
    p.add_argument("--levels", default="1-3", help="levels to check (default 1-3)")
    p.add_argument("--samples", type=int, default=100, help="instances per cell (default 100)")
    p.add_argument("--record", action="store_true",
                   help="mark passing families gate_passed in the --descriptors directory")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("verify", help="re-render and re-solve every record of a dataset")
    _common(p, seed=False)
    p.add_argument("--dataset", required=True, help="JSON Lines dataset")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("respond", help="answer a dataset with a mock model (offline testing)")
    _common(p, seed=False, model=True)
    p.add_argument("--dataset", required=True, help="JSON Lines dataset")
    p.set_defaults(func=cmd_respond)

    p = sub.add_parser("score", help="score model responses against a dataset")
    _common(p, seed=False)
    p.add_argument("--dataset", required=True, help="JSON Lines dataset")
    p.add_argument("--responses", required=True, help='JSON Lines of {"id": ..., "response": ...}')
    p.add_argument("--scheme", default="bipolar", choices=[s.value for s in Scheme], help="default bipolar")
    p.add_argument("--bonus", type=float, default=DEFAULT_FORMAT_BONUS, help="format bonus (default 0.1)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sim-grpo", help="two-action trap simulation under each reward scheme")
    _common(p)
    p.add_argument("--scheme", default="all", choices=["all", *[s.value for s in Scheme]], help="default all")
    p.add_argument("--pairs", type=int, default=10, help="number of seeds, seed..seed+pairs-1 (default 10)")
    p.add_argument("--steps", type=int, default=2000, help="default 2000")
    p.add_argument("--group-size", dest="group_size", type=int, default=8, help="default 8")
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=0.1, help="default 0.1")
    p.add_argument("--perfect-rate", dest="perfect_rate", type=float, default=0.5,
                   help="chance the risky action is perfect (default 0.5)")
    p.set_defaults(func=cmd_sim)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        logging.basicConfig(level=getattr(logging, cfg.log_level, logging.WARNING),
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        return args.func(args, cfg)
    except UnknownFamily as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_GENERATOR
    except (ConfigError, GateNotPassed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdapterError as exc:
        print(f"error: model adapter: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LogicSynthError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATOR


if __name__ == "__main__":
    sys.exit(main())
