"""Maze path checking: which candidate move sequences reach the exit.

The grid is stored as row strings ('.' open, '#' wall). The walker starts at
the top-left cell; a move into a wall or off the grid is skipped. A path
succeeds once the walker stands on the bottom-right cell (the walker leaves the
maze there, so later moves do not matter).
"""

from __future__ import annotations

import string
from typing import Any, Mapping

from ..task_model import LANGUAGES
from .base import Family, GroundTruth, set_truth
from .lexicon import DIRECTIONS

STEP = {"U": (-1, 0), "D": (1, 0), "L": (0, -1), "R": (0, 1)}
PATH_IDS = string.ascii_uppercase


def _reaches_exit(grid: list[str], moves) -> bool:
    h, w = len(grid), len(grid[0])
    r = c = 0
    if (h, w) == (1, 1):
        return True
    for m in moves:
        dr, dc = STEP[m]
        nr, nc = r + dr, c + dc
        if 0 <= nr < h and 0 <= nc < w and grid[nr][nc] == ".":
            r, c = nr, nc
            if (r, c) == (h - 1, w - 1):
                return True
    return False


def _mutate(moves: list[str], rng, n_ops: int) -> list[str]:
    moves = list(moves)
    for _ in range(n_ops):
        op = rng.randrange(4)
        if op == 0 and len(moves) > 1:
            del moves[rng.randrange(len(moves))]
        elif op == 1 and len(moves) > 1:
            i = rng.randrange(len(moves) - 1)
            moves[i], moves[i + 1] = moves[i + 1], moves[i]
        elif op == 2:
            moves.insert(rng.randrange(len(moves) + 1), rng.choice("UDLR"))
        else:
            moves[rng.randrange(len(moves))] = rng.choice("UDLR")
    return moves


class MazePaths(Family):
    family_id = "maze_paths"
    arity = 2

    def sample(self, level_params: Mapping[str, Any], rng) -> dict[str, Any]:
        size = max(2, int(level_params["size"]))
        num_paths = max(1, min(int(level_params.get("num_paths", 4)), len(PATH_IDS)))
        open_ratio = float(level_params.get("open_ratio", 0.3))
        h = w = size
        cells = [["#"] * w for _ in range(h)]
        # monotone corridor from entrance to exit guarantees solvability
        steps = ["D"] * (h - 1) + ["R"] * (w - 1)
        rng.shuffle(steps)
        r = c = 0
        cells[0][0] = "."
        for m in steps:
            dr, dc = STEP[m]
            r, c = r + dr, c + dc
            cells[r][c] = "."
        for i in range(h):
            for j in range(w):
                if cells[i][j] == "#" and rng.random() < open_ratio:
                    cells[i][j] = "."
        grid = ["".join(row) for row in cells]
        paths = []
        for _ in range(num_paths):
            # sprinkle blocked moves so skip-on-block actually matters
            base = []
            for m in steps:
                if rng.random() < 0.25:
                    base.append(rng.choice("UDLR"))
                base.append(m)
            paths.append("".join(_mutate(base, rng, rng.randint(0, 3))))
        return {"grid": grid, "paths": paths}

    def _truth(self, payload, winners: list[int]) -> GroundTruth:
        ids = [PATH_IDS[i] for i in winners]
        all_ids = [PATH_IDS[i] for i in range(len(payload["paths"]))]
        return set_truth(winners, {lang: ids for lang in LANGUAGES}, {lang: all_ids for lang in LANGUAGES})

    def solve(self, payload: Mapping[str, Any]) -> GroundTruth:
        grid = payload["grid"]
        winners = [i for i, p in enumerate(payload["paths"]) if _reaches_exit(grid, p)]
        return self._truth(payload, winners)

    def oracle(self, payload: Mapping[str, Any]) -> GroundTruth:
        """Replay every path over a coordinate set using complex positions."""
        grid = payload["grid"]
        open_cells = {complex(j, i) for i, row in enumerate(grid) for j, ch in enumerate(row) if ch == "."}
        goal = complex(len(grid[0]) - 1, len(grid) - 1)
        delta = {"U": -1j, "D": 1j, "L": -1, "R": 1}
        winners = []
        for idx, path in enumerate(payload["paths"]):
            trail = [0j]
            for m in path:
                nxt = trail[-1] + delta[m]
                trail.append(nxt if nxt in open_cells else trail[-1])
            if goal in trail:
                winners.append(idx)
        return self._truth(payload, winners)

    def accept(self, payload, truth) -> bool:
        n = len(payload["paths"])
        winners = len(truth.value)
        if n == 1:
            return True
        return 0 < winners < n

    def fills(self, payload: Mapping[str, Any], language: str) -> list[str]:
        grid = "\n".join(row.replace(".", "□").replace("#", "■") for row in payload["grid"])
        words = DIRECTIONS[language]
        sep, colon = (", ", ": ") if language == "en" else ("，", "：")
        lines = [f"{PATH_IDS[i]}{colon}{sep.join(words[m] for m in p)}" for i, p in enumerate(payload["paths"])]
        return [grid, "\n".join(lines)]
