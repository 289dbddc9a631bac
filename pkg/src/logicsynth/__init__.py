"""Deterministic synthesis of verifiable logic puzzles, difficulty calibration,
bipolar reward scoring and a group-relative advantage simulator."""

__version__ = "0.1.0"
GENERATOR_VERSION = f"logicsynth-{__version__}"
