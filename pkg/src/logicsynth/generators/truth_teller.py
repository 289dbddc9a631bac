"""Truth-teller counting puzzles.

Each of N speakers claims "there are exactly/at least k people telling the
truth/lie". The truth-tellers are exactly the speakers whose claim holds for
the global truth count t, and t must equal their number.
"""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from ..errors import MultipleSolutions, NoSolution, TooLarge
from ..task_model import LANGUAGES
from .base import Family, GroundTruth, set_truth
from .lexicon import NAMES

ORACLE_MAX_SPEAKERS = 20
MODES = ("exactly", "at_least")
SUBJECTS = ("truth", "lie")


def _holds(statement, t: int, n: int) -> bool:
    mode, subject, k = statement
    count = t if subject == "truth" else n - t
    return count == k if mode == "exactly" else count >= k


def _random_statement(rng, n: int, exact_share: float) -> list:
    mode = "exactly" if rng.random() < exact_share else "at_least"
    subject = rng.choice(SUBJECTS)
    k = rng.randint(0, n) if mode == "exactly" else rng.randint(1, n)
    return [mode, subject, k]


class TruthTeller(Family):
    family_id = "truth_teller"
    arity = 2

    def sample(self, level_params: Mapping[str, Any], rng) -> dict[str, Any]:
        n = int(level_params["num_speakers"])
        n = max(1, min(n, len(NAMES["en"])))
        exact_share = float(level_params.get("exact_share", 0.3))
        target = rng.randint(1, n)
        honest = set(rng.sample(range(n), target))
        statements = []
        for i in range(n):
            # redraw until the claim's truth value matches the speaker's role at t = target
            while True:
                st = _random_statement(rng, n, exact_share)
                if _holds(st, target, n) == (i in honest):
                    break
            statements.append(st)
        names = rng.sample(range(len(NAMES["en"])), n)
        return {"names": names, "statements": statements}

    def _truth(self, payload, honest: list[int]) -> GroundTruth:
        names = payload["names"]
        items = {lang: [NAMES[lang][names[i]] for i in honest] for lang in LANGUAGES}
        choices = {lang: [NAMES[lang][j] for j in names] for lang in LANGUAGES}
        return set_truth(honest, items, choices)

    def solve(self, payload: Mapping[str, Any]) -> GroundTruth:
        statements = payload["statements"]
        n = len(statements)
        consistent = []
        for t in range(n + 1):
            true_now = [i for i, st in enumerate(statements) if _holds(st, t, n)]
            if len(true_now) == t:
                consistent.append(true_now)
        if not consistent:
            raise NoSolution("no truth count is self-consistent")
        if len(consistent) > 1:
            raise MultipleSolutions(f"{len(consistent)} self-consistent truth counts")
        return self._truth(payload, consistent[0])

    def oracle_tractable(self, payload) -> bool:
        return len(payload["statements"]) <= ORACLE_MAX_SPEAKERS

    def oracle(self, payload: Mapping[str, Any]) -> GroundTruth:
        """Enumerate all 2^N honest/liar assignments.

        A mask is consistent when every speaker marked honest makes a true
        claim and every liar a false one, given the mask's own popcount.
        """
        statements = payload["statements"]
        n = len(statements)
        if n > ORACLE_MAX_SPEAKERS:
            raise TooLarge(f"oracle handles at most {ORACLE_MAX_SPEAKERS} speakers, got {n}")
        masks = np.arange(1 << n, dtype=np.int64)
        popcount = np.zeros_like(masks)
        for bit in range(n):
            popcount += (masks >> bit) & 1
        # claim truth per (truth count, speaker), evaluated independently of the solver
        claim = np.zeros((n + 1, n), dtype=bool)
        for j, (mode, subject, k) in enumerate(statements):
            counts = np.arange(n + 1) if subject == "truth" else n - np.arange(n + 1)
            claim[:, j] = (counts == k) if mode == "exactly" else (counts >= k)
        weights = (1 << np.arange(n, dtype=np.int64))
        implied = (claim.astype(np.int64) * weights).sum(axis=1)
        ok = masks[implied[popcount] == masks]
        if len(ok) == 0:
            raise NoSolution("no consistent assignment")
        if len(ok) > 1:
            raise MultipleSolutions(f"{len(ok)} consistent assignments")
        mask = int(ok[0])
        return self._truth(payload, [i for i in range(n) if mask >> i & 1])

    def fills(self, payload: Mapping[str, Any], language: str) -> list[str]:
        names = payload["names"]
        statements = payload["statements"]
        lines = []
        for idx, (mode, subject, k) in zip(names, statements):
            name = NAMES[language][idx]
            if language == "en":
                noun = "person" if k == 1 else "people"
                verb = "is" if k == 1 else "are"
                what = "telling the truth" if subject == "truth" else "lying"
                how = "exactly" if mode == "exactly" else "at least"
                lines.append(f"{name}: There {verb} {how} {k} {noun} {what}.")
            else:
                how = "恰好" if mode == "exactly" else "至少"
                what = "说真话" if subject == "truth" else "在说谎"
                lines.append(f"{name}：{how}有{k}个人{what}。")
        return [str(len(statements)), "\n".join(lines)]
