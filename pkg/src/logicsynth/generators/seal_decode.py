"""Seal decoding: drop lowercase, keep uppercase in order, append digit-run sum.

The answer is the length of the new seal. A '-' directly before a digit run
makes that run negative; a negative sum contributes its minus sign to the
length.
"""

from __future__ import annotations

import re
import string
from typing import Any, Mapping

from .base import Family, GroundTruth, numeric_truth


def decode(seal: str) -> str:
    kept = []
    total = 0
    i, n = 0, len(seal)
    while i < n:
        ch = seal[i]
        if ch.isdigit() or (ch == "-" and i + 1 < n and seal[i + 1].isdigit()):
            j = i + 1
            while j < n and seal[j].isdigit():
                j += 1
            total += int(seal[i:j])
            i = j
            continue
        if "A" <= ch <= "Z":
            kept.append(ch)
        i += 1
    return "".join(kept) + str(total)


class SealDecode(Family):
    family_id = "seal_decode"
    arity = 1

    def sample(self, level_params: Mapping[str, Any], rng) -> dict[str, Any]:
        length = max(3, int(level_params["length"]))
        runs = max(1, min(int(level_params.get("digit_runs", 1)), length // 3))
        negatives = min(int(level_params.get("negative_runs", 0)), runs)
        run_lens = [rng.randint(1, 4) for _ in range(runs)]
        # every run needs a separating letter on at least one side
        while sum(run_lens) + negatives + (runs - 1) > length - 1 and max(run_lens) > 1:
            run_lens[run_lens.index(max(run_lens))] -= 1
        n_letters = length - sum(run_lens) - negatives
        letters = [rng.choice(string.ascii_uppercase if rng.random() < 0.5 else string.ascii_lowercase)
                   for _ in range(n_letters)]
        if not any(ch.isupper() for ch in letters):
            letters[rng.randrange(n_letters)] = rng.choice(string.ascii_uppercase)
        # distinct gaps between letters keep runs maximal and separate
        gaps = sorted(rng.sample(range(n_letters + 1), runs))
        neg_flags = [True] * negatives + [False] * (runs - negatives)
        rng.shuffle(neg_flags)
        pieces = {}
        for gap, rl, neg in zip(gaps, run_lens, neg_flags):
            digits = str(rng.randint(1, 9)) + "".join(rng.choice(string.digits) for _ in range(rl - 1))
            pieces[gap] = ("-" if neg else "") + digits
        out = []
        for pos in range(n_letters + 1):
            if pos in pieces:
                out.append(pieces[pos])
            if pos < n_letters:
                out.append(letters[pos])
        return {"seal": "".join(out)}

    def solve(self, payload: Mapping[str, Any]) -> GroundTruth:
        return numeric_truth(len(decode(payload["seal"])))

    def oracle(self, payload: Mapping[str, Any]) -> GroundTruth:
        seal = payload["seal"]
        upper = re.findall(r"[A-Z]", seal)
        total = sum(int(tok) for tok in re.findall(r"-?[0-9]+", seal))
        return numeric_truth(len(upper) + len(str(total)))

    def fills(self, payload: Mapping[str, Any], language: str) -> list[str]:
        return [payload["seal"]]
