"""Piecewise linear approximations of smooth full-branch maps.

Level-n cylinders are pulled back one branch at a time from level n-1, so
adjacent cylinders share endpoint values exactly. The level-n map f_n is
affine on each level-n cylinder and sends it onto the level-(n-1)
cylinder named by dropping the first symbol of its word.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray

from .config import CYLINDER_CAP
from .errors import LevelTooDeep, NoConvergence, ParameterOutOfRange
from .logging import get_logger
from .map_model import Interval, PiecewiseLinearMarkovMap, SmoothFullBranchMap
from .spectral import eigenvalues, lyapunov_exact, mixing_rate, perron
from .transfer_matrix import PiecewisePolynomial, block

log = get_logger(__name__)


@dataclass(frozen=True)
class CylinderSet:
    word: tuple[int, ...]
    interval: Interval


def _refine(F: SmoothFullBranchMap, level: list[CylinderSet]) -> list[CylinderSet]:
    points = np.array([level[0].interval.lo] + [c.interval.hi for c in level])
    refined: list[CylinderSet] = []
    for b in range(F.branch_count):
        q = F.branch_inverse(b, points)
        cells = [
            CylinderSet(
                (b,) + cell.word,
                Interval(float(min(q[j], q[j + 1])), float(max(q[j], q[j + 1]))),
            )
            for j, cell in enumerate(level)
        ]
        if not F.increasing(b):
            cells.reverse()
        refined.extend(cells)
    return refined


def _positional(F: SmoothFullBranchMap, n: int, cap: int) -> list[list[CylinderSet]]:
    """Cylinders for levels 0..n, each level sorted by position."""
    if n < 1:
        raise ParameterOutOfRange(f"Cylinder level must be >= 1, got {n}")
    if F.branch_count**n > cap:
        raise LevelTooDeep(
            f"{F.branch_count}**{n} cylinders exceed the cap of {cap}"
        )
    levels = [[CylinderSet((), F.domain)]]
    for _ in range(n):
        levels.append(_refine(F, levels[-1]))
    return levels


def cylinders(
    F: SmoothFullBranchMap, n: int, cap: int = CYLINDER_CAP
) -> list[CylinderSet]:
    """Level-n cylinders in lexicographic word order."""
    return sorted(_positional(F, n, cap)[n], key=lambda c: c.word)


def linearize(
    F: SmoothFullBranchMap, n: int, cap: int = CYLINDER_CAP
) -> PiecewiseLinearMarkovMap:
    levels = _positional(F, n, cap)
    images = {c.word: c.interval for c in levels[n - 1]}
    cells = levels[n]

    breakpoints = [cells[0].interval.lo] + [c.interval.hi for c in cells]
    branches: list[tuple[float, float]] = []
    for cell in cells:
        image = images[cell.word[1:]]
        dom = cell.interval
        if F.increasing(cell.word[0]):
            slope = image.length / dom.length
            branches.append((slope, image.lo - slope * dom.lo))
        else:
            slope = -image.length / dom.length
            branches.append((slope, image.hi - slope * dom.lo))
    log.debug("linearized %s at level %d into %d branches", F.family, n, len(cells))
    return PiecewiseLinearMarkovMap.from_branches(breakpoints, branches)


@dataclass
class LevelTraceRow:
    level: int
    nu0_subleading: complex
    nu1: complex
    nu2: float
    lyapunov: float
    mixing_rate: float

    @property
    def exp_minus_lambda(self) -> float:
        return float(np.exp(-self.lyapunov))

    @property
    def exp_minus_2lambda(self) -> float:
        return float(np.exp(-2.0 * self.lyapunov))

    def as_dict(self) -> dict[str, Any]:
        return {
            "level": self.level,
            "nu0_subl": abs(self.nu0_subleading),
            "nu1": abs(self.nu1),
            "nu2": self.nu2,
            "lyapunov": self.lyapunov,
            "mixing_rate": self.mixing_rate,
            "exp_minus_lambda": self.exp_minus_lambda,
            "exp_minus_2lambda": self.exp_minus_2lambda,
        }


def level_trace(F: SmoothFullBranchMap, levels: Iterable[int]) -> list[LevelTraceRow]:
    """Leading block eigenvalues and Lyapunov exponent of f_n for each level."""
    rows = []
    for n in levels:
        fn = linearize(F, n)
        spectrum0 = eigenvalues(block(fn, 1.0, 0, 0))
        row = LevelTraceRow(
            level=n,
            nu0_subleading=complex(spectrum0[1]) if len(spectrum0) > 1 else 0j,
            nu1=complex(eigenvalues(block(fn, 1.0, 1, 1))[0]),
            nu2=perron(block(fn, 1.0, 2, 2))[0],
            lyapunov=lyapunov_exact(fn),
            mixing_rate=mixing_rate(fn, 2).mixing_rate,
        )
        log.info("level %d: nu2=%.10g Lambda=%.10g", n, row.nu2, row.lyapunov)
        rows.append(row)
    return rows


@dataclass
class EigenfunctionSample:
    level: int
    eigenvalue: float
    x: NDArray[np.float64]
    u: NDArray[np.float64]
    discontinuities: tuple[float, ...]
    polynomial: PiecewisePolynomial


def nu2_eigenfunction(
    F: SmoothFullBranchMap, n: int, samples: int = 512
) -> EigenfunctionSample:
    """Eigenfunction of L_1 on f_n for nu_2, scaled to unit L1 norm.

    The degree-2 part is the Perron vector of T^(22); the lower degrees
    follow by back substitution through the triangular block structure.
    """
    fn = linearize(F, n)
    nu2, v2 = perron(block(fn, 1.0, 2, 2))
    eye = np.eye(fn.size)
    try:
        v1 = scipy.linalg.solve(
            block(fn, 1.0, 1, 1) - nu2 * eye, -block(fn, 1.0, 1, 2) @ v2
        )
        v0 = scipy.linalg.solve(
            block(fn, 1.0, 0, 0) - nu2 * eye,
            -block(fn, 1.0, 0, 1) @ v1 - block(fn, 1.0, 0, 2) @ v2,
        )
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"nu_2 is degenerate with a lower block at level {n}") from exc

    u = PiecewisePolynomial(np.column_stack([v0, v1, v2]), fn)
    u = PiecewisePolynomial(u.coefficients / _l1_norm(u), fn)

    x = np.linspace(fn.domain.lo, fn.domain.hi, samples)
    values = u(x)
    if values[np.argmax(np.abs(values))] < 0:
        u = PiecewisePolynomial(-u.coefficients, fn)
        values = -values
    return EigenfunctionSample(
        level=n,
        eigenvalue=nu2,
        x=x,
        u=values,
        discontinuities=tuple(fn.breakpoints[1:-1]),
        polynomial=u,
    )


def _l1_norm(u: PiecewisePolynomial, points: int = 16) -> float:
    nodes, weights = leggauss(points)
    total = 0.0
    for cell in u.fmap.branches:
        dom = cell.domain
        x = dom.midpoint + 0.5 * dom.length * nodes
        total += 0.5 * dom.length * float(np.dot(weights, np.abs(u(x))))
    return total
