from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from dynspec.map_model import PiecewiseLinearMarkovMap


def build_tent() -> PiecewiseLinearMarkovMap:
    return PiecewiseLinearMarkovMap.from_branches(
        [0.0, 0.5, 1.0], [(2.0, 0.0), (-2.0, 2.0)]
    )


def build_doubling() -> PiecewiseLinearMarkovMap:
    return PiecewiseLinearMarkovMap.from_branches(
        [0.0, 0.5, 1.0], [(2.0, 0.0), (2.0, -1.0)]
    )


def build_golden23() -> PiecewiseLinearMarkovMap:
    """Branch 0 covers both elements, branch 1 only the first."""
    return PiecewiseLinearMarkovMap.from_branches(
        [0.0, 2.0 / 3.0, 1.0], [(1.5, 0.0), (2.0, -4.0 / 3.0)]
    )


def build_non_markov() -> PiecewiseLinearMarkovMap:
    return PiecewiseLinearMarkovMap.from_branches(
        [0.0, 0.5, 1.0], [(1.7, 0.0), (-2.0, 2.0)]
    )


def build_contracting() -> PiecewiseLinearMarkovMap:
    return PiecewiseLinearMarkovMap.from_branches(
        [0.0, 0.5, 1.0], [(0.5, 0.0), (2.0, -1.0)]
    )


def build_periodic() -> PiecewiseLinearMarkovMap:
    """Expanding Markov map that swaps [0, 1/2] and [1/2, 1]; not mixing."""
    return PiecewiseLinearMarkovMap.from_branches(
        [0.0, 0.25, 0.5, 0.75, 1.0],
        [(2.0, 0.5), (2.0, 0.0), (2.0, -1.0), (2.0, -1.5)],
    )


def write_map(tmp_path: Path, data: PiecewiseLinearMarkovMap | dict[str, Any], name: str = "map.json") -> Path:
    payload = data if isinstance(data, dict) else data.to_dict()
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path
