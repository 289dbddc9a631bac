"""Rectangle painting feasibility.

Every color in the target grid is painted exactly once as a filled
axis-aligned rectangle; later paints cover earlier ones. The question is
whether some painting order reproduces the target.
"""

from __future__ import annotations

import itertools
from typing import Any, Mapping

from ..task_model import LANGUAGES
from .base import Family, GroundTruth, single_truth
from .lexicon import YES_NO

ORACLE_MAX_SIDE = 4
ORACLE_MAX_COLORS = 7


def _bboxes(grid) -> dict[int, tuple[int, int, int, int]]:
    boxes: dict[int, list[int]] = {}
    for i, row in enumerate(grid):
        for j, color in enumerate(row):
            b = boxes.setdefault(color, [i, i, j, j])
            b[0], b[1] = min(b[0], i), max(b[1], i)
            b[2], b[3] = min(b[2], j), max(b[3], j)
    return {k: tuple(v) for k, v in boxes.items()}


def feasible(grid) -> bool:
    """Peel colors last-painted-first until none is left or none can be peeled."""
    cells = [list(row) for row in grid]
    boxes = _bboxes(grid)
    remaining = set(boxes)
    while remaining:
        peeled = None
        for color in sorted(remaining):
            top, bottom, left, right = boxes[color]
            if all(cells[i][j] in (color, None) for i in range(top, bottom + 1) for j in range(left, right + 1)):
                peeled = color
                break
        if peeled is None:
            return False
        top, bottom, left, right = boxes[peeled]
        for i in range(top, bottom + 1):
            for j in range(left, right + 1):
                cells[i][j] = None
        remaining.discard(peeled)
    return True


def _truth(ok: bool) -> GroundTruth:
    key = "yes" if ok else "no"
    return single_truth(key, {lang: YES_NO[lang][key] for lang in LANGUAGES})


class RectPaint(Family):
    family_id = "rect_paint"
    arity = 1

    def sample(self, level_params: Mapping[str, Any], rng) -> dict[str, Any]:
        size = max(1, int(level_params["size"]))
        k = max(1, min(int(level_params["num_colors"]), size * size))
        want_yes = rng.random() < 0.5
        grid = self._painted(size, k, rng)
        if not want_yes and len({c for row in grid for c in row}) > 1:
            for _ in range(32):
                cand = [row[:] for row in grid]
                present = sorted({c for row in cand for c in row})
                for _ in range(rng.randint(1, 2)):
                    i, j = rng.randrange(size), rng.randrange(size)
                    cand[i][j] = rng.choice([c for c in present if c != cand[i][j]])
                if not feasible(cand):
                    grid = cand
                    break
        return {"grid": grid}

    @staticmethod
    def _painted(size: int, k: int, rng) -> list[list[int]]:
        best = None
        for _ in range(16):
            grid = [[1] * size for _ in range(size)]
            for color in range(2, k + 1):
                hgt = rng.randint(1, max(1, size // 2))
                wid = rng.randint(1, max(1, size // 2))
                top, left = rng.randrange(size - hgt + 1), rng.randrange(size - wid + 1)
                for i in range(top, top + hgt):
                    for j in range(left, left + wid):
                        grid[i][j] = color
            visible = len({c for row in grid for c in row})
            if best is None or visible > best[0]:
                best = (visible, grid)
            if visible == k:
                break
        grid = best[1]
        present = sorted({c for row in grid for c in row})
        # random labels hide the painting order
        relabel = dict(zip(present, rng.sample(range(1, k + 1), len(present))))
        return [[relabel[c] for c in row] for row in grid]

    def solve(self, payload: Mapping[str, Any]) -> GroundTruth:
        return _truth(feasible(payload["grid"]))

    def oracle_tractable(self, payload) -> bool:
        grid = payload["grid"]
        colors = {c for row in grid for c in row}
        return len(grid) <= ORACLE_MAX_SIDE and len(grid[0]) <= ORACLE_MAX_SIDE and len(colors) <= ORACLE_MAX_COLORS

    def oracle(self, payload: Mapping[str, Any]) -> GroundTruth:
        """Try every painting order, each color covering its bounding box."""
        from ..errors import TooLarge

        if not self.oracle_tractable(payload):
            raise TooLarge("rect_paint oracle handles grids up to 4x4 with at most 7 colors")
        grid = payload["grid"]
        h, w = len(grid), len(grid[0])
        target = tuple(tuple(row) for row in grid)
        colors = sorted({c for row in grid for c in row})
        rects = {}
        for c in colors:
            rows = [i for i in range(h) if c in grid[i]]
            cols = [j for j in range(w) if any(grid[i][j] == c for i in range(h))]
            rects[c] = [(i, j) for i in range(rows[0], rows[-1] + 1) for j in range(cols[0], cols[-1] + 1)]
        for order in itertools.permutations(colors):
            canvas = {}
            for c in order:
                for cell in rects[c]:
                    canvas[cell] = c
            if tuple(tuple(canvas.get((i, j)) for j in range(w)) for i in range(h)) == target:
                return _truth(True)
        return _truth(False)

    def fills(self, payload: Mapping[str, Any], language: str) -> list[str]:
        rows = payload["grid"]
        if language == "en":
            lines = [f"row {i}: color: " + ", ".join(map(str, row)) for i, row in enumerate(rows, 1)]
        else:
            lines = [f"第{i}行颜色：" + "，".join(map(str, row)) for i, row in enumerate(rows, 1)]
        return ["\n".join(lines)]
