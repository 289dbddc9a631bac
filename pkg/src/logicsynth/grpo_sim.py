"""Group-relative advantages and a bandit-scale policy dynamics simulator.

Advantages follow the group z-score ``(R_i - mean(R)) / std(R)`` with the
population standard deviation. A group whose rewards are all equal gets
all-zero advantages.

The simulator keeps softmax preferences over a handful of actions, samples a
group per step, maps each action's correctness score through a reward scheme
and ascends the advantage-weighted log-probability gradient. It is the
smallest setting where the difference between graded and bipolar rewards
shows up in the learned policy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DivergedPolicy, EmptyGroup
from .rewards import Scheme, map_rewards

UNDERFLOW = 1e-12


def group_advantages(rewards: Sequence[float]) -> np.ndarray:
    r = np.asarray(rewards, dtype=float)
    if r.size == 0:
        raise EmptyGroup("group_advantages needs at least one reward")
    if np.all(r == r[0]):
        return np.zeros_like(r)
    centered = r - r.mean()
    std = np.sqrt(np.mean(centered ** 2))
    if std == 0.0:
        return np.zeros_like(r)
    return centered / std


@dataclass(frozen=True)
class Action:
    """An action whose correctness score S is drawn from ``outcomes``."""

    name: str
    outcomes: tuple[tuple[float, float], ...]  # (probability, S)

    def __post_init__(self):
        probs = [p for p, _ in self.outcomes]
        if any(p < 0 for p in probs) or not np.isclose(sum(probs), 1.0):
            raise ValueError(f"{self.name}: outcome probabilities must be non-negative and sum to 1")
        if any(not 0.0 <= s <= 1.0 for _, s in self.outcomes):
            raise ValueError(f"{self.name}: S values must lie in [0, 1]")

    @property
    def can_be_perfect(self) -> bool:
        return any(s == 1.0 and p > 0 for p, s in self.outcomes)

    def expected_reward(self, scheme: Scheme | str) -> float:
        probs = np.array([p for p, _ in self.outcomes])
        return float(probs @ map_rewards(np.array([s for _, s in self.outcomes]), scheme))


@dataclass(frozen=True)
class SimEnvironment:
    actions: tuple[Action, ...]
    group_size: int = 8
    learning_rate: float = 0.1
    steps: int = 2000
    seed: int = 0
    format_bonus: float = 0.0
    format_ok_rate: float = 1.0

    def __post_init__(self):
        if not self.actions:
            raise ValueError("environment needs at least one action")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")


def trap_environment(perfect_rate: float = 0.5, safe_score: float = 0.8, miss_score: float = 0.2,
                     **kwargs) -> SimEnvironment:
    """Two actions: a safe one that always scores ``safe_score`` and a risky
    one that is perfect with probability ``perfect_rate`` and scores
    ``miss_score`` otherwise.

    With the defaults the safe action has the higher expected graded reward
    (0.8 vs 0.6) while the risky one has the higher expected bipolar reward
    (0.1 vs -0.2).
    """
    return SimEnvironment(
        actions=(
            Action("safe_partial", ((1.0, safe_score),)),
            Action("risky_perfect", ((perfect_rate, 1.0), (1.0 - perfect_rate, miss_score))),
        ),
        **kwargs,
    )


@dataclass
class PolicyState:
    preferences: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        z = self.preferences - self.preferences.max()
        e = np.exp(z)
        return e / e.sum()


@dataclass
class SimResult:
    scheme: Scheme
    probabilities: np.ndarray  # (steps + 1, n_actions)
    mean_rewards: np.ndarray   # (steps,)
    perfect_action: int | None
    halted: str | None = None
    action_names: tuple[str, ...] = field(default_factory=tuple)

    @property
    def final_probabilities(self) -> np.ndarray:
        return self.probabilities[-1]

    @property
    def final_perfect_mass(self) -> float:
        if self.perfect_action is None:
            return 0.0
        return float(self.probabilities[-1, self.perfect_action])

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", *[f"p_{n}" for n in self.action_names], "mean_reward"])
            for step in range(len(self.mean_rewards)):
                probs = self.probabilities[step + 1]
                writer.writerow([step + 1, *[f"{p:.10f}" for p in probs], f"{self.mean_rewards[step]:.10f}"])
        return path


def simulate_training(env: SimEnvironment, scheme: Scheme | str, strict: bool = False) -> SimResult:
    """Run ``env.steps`` policy-gradient updates under ``scheme``.

    The run halts early (``halted == "diverged"``) if any action probability
    underflows below 1e-12; with ``strict`` that raises DivergedPolicy instead.
    """
    scheme = Scheme(scheme)
    rng = np.random.default_rng(env.seed)
    n = len(env.actions)
    state = PolicyState(np.zeros(n))
    perfect = [i for i, a in enumerate(env.actions) if a.can_be_perfect]
    perfect_action = perfect[0] if perfect else None

    width = max(len(a.outcomes) for a in env.actions)
    cum = np.ones((n, width))
    table = np.zeros((n, width))
    for i, a in enumerate(env.actions):
        k = len(a.outcomes)
        cum[i, :k] = np.cumsum([p for p, _ in a.outcomes])
        table[i, :k] = [s for _, s in a.outcomes]
        table[i, k:] = table[i, k - 1]
    cum[:, -1] = 1.0

    history = [state.probabilities]
    mean_rewards = []
    halted = None
    for _ in range(env.steps):
        probs = state.probabilities
        picks = rng.choice(n, size=env.group_size, p=probs)
        u = rng.random(env.group_size)
        scores = table[picks, (u[:, None] >= cum[picks]).sum(axis=1)]
        rewards = map_rewards(scores, scheme)
        if env.format_bonus:
            rewards = rewards + env.format_bonus * (rng.random(env.group_size) < env.format_ok_rate)
        adv = group_advantages(rewards)
        onehot = np.eye(n)[picks]
        grad = (adv[:, None] * (onehot - probs[None, :])).mean(axis=0)
        state.preferences = state.preferences + env.learning_rate * grad
        history.append(state.probabilities)
        mean_rewards.append(float(rewards.mean()))
        if np.any(history[-1] < UNDERFLOW):
            halted = "diverged"
            if strict:
                raise DivergedPolicy(f"action probability fell below {UNDERFLOW} at step {len(mean_rewards)}")
            break
    return SimResult(
        scheme=scheme,
        probabilities=np.array(history),
        mean_rewards=np.array(mean_rewards),
        perfect_action=perfect_action,
        halted=halted,
        action_names=tuple(a.name for a in env.actions),
    )
