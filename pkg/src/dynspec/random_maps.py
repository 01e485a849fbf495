"""Random piecewise linear Markov maps for property checks.

Images are chosen as unions of consecutive partition elements first and the
slope/intercept are solved from them, so every generated map is Markov up to
rounding of a single affine evaluation.
"""

from __future__ import annotations

from typing import Literal

import numpy as np

from .errors import ParameterOutOfRange
from .map_model import (
    PiecewiseLinearMarkovMap,
    is_topologically_mixing,
    markov_entries,
)

SignScenario = Literal["mixed", "positive", "negative"]

MIN_GAP = 0.02


def random_markov_map(
    rng: np.random.Generator,
    *,
    sizes: tuple[int, int] = (2, 6),
    signs: SignScenario = "mixed",
    slope_range: tuple[float, float] = (1.1, 10.0),
    require_mixing: bool = True,
    max_tries: int = 10_000,
) -> PiecewiseLinearMarkovMap:
    for _ in range(max_tries):
        n = int(rng.integers(sizes[0], sizes[1] + 1))
        bp = _breakpoints(rng, n)
        if bp is None:
            continue
        branches = _branches(rng, bp, signs, slope_range)
        if branches is None:
            continue
        fmap = PiecewiseLinearMarkovMap.from_branches(bp.tolist(), branches)
        if require_mixing and is_topologically_mixing(markov_entries(fmap)[0]) is None:
            continue
        return fmap
    raise ParameterOutOfRange(f"No admissible random map found in {max_tries} tries")


def random_full_branch_map(
    rng: np.random.Generator,
    *,
    sizes: tuple[int, int] = (2, 6),
    signs: SignScenario = "mixed",
) -> PiecewiseLinearMarkovMap:
    n = int(rng.integers(sizes[0], sizes[1] + 1))
    weights = rng.uniform(0.2, 1.0, size=n)
    bp = np.concatenate(([0.0], np.cumsum(weights / weights.sum())))
    bp[-1] = 1.0
    branches = []
    for k in range(n):
        lo, hi = bp[k], bp[k + 1]
        up = _pick_sign(rng, signs)
        slope = (1.0 if up else -1.0) / (hi - lo)
        branches.append((slope, -slope * lo if up else 1.0 - slope * lo))
    return PiecewiseLinearMarkovMap.from_branches(bp.tolist(), branches)


def _breakpoints(rng: np.random.Generator, n: int) -> np.ndarray | None:
    interior = np.sort(rng.uniform(0.0, 1.0, size=n - 1))
    bp = np.concatenate(([0.0], interior, [1.0]))
    if np.min(np.diff(bp)) < MIN_GAP:
        return None
    return bp


def _branches(
    rng: np.random.Generator,
    bp: np.ndarray,
    signs: SignScenario,
    slope_range: tuple[float, float],
) -> list[tuple[float, float]] | None:
    n = len(bp) - 1
    out: list[tuple[float, float]] = []
    for k in range(n):
        length = bp[k + 1] - bp[k]
        candidates = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n + 1)
            if slope_range[0] <= (bp[j] - bp[i]) / length <= slope_range[1]
        ]
        if not candidates:
            return None
        i, j = candidates[int(rng.integers(len(candidates)))]
        magnitude = (bp[j] - bp[i]) / length
        if _pick_sign(rng, signs):
            out.append((magnitude, bp[i] - magnitude * bp[k]))
        else:
            out.append((-magnitude, bp[j] + magnitude * bp[k]))
    return out


def _pick_sign(rng: np.random.Generator, signs: SignScenario) -> bool:
    if signs == "positive":
        return True
    if signs == "negative":
        return False
    return bool(rng.integers(2))
