"""Checks of the mixing-rate bounds and pressure properties of Markov maps.

Both reports follow the ``ValidationReport`` shape: a list of failure
messages plus an ``ok`` flag, so the CLI can print them and pick an exit
code without knowing which check produced them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Sequence

import numpy as np

from .config import FD_STEP
from .errors import ParameterOutOfRange
from .map_model import PiecewiseLinearMarkovMap
from .spectral import (
    eigenvalues,
    leading_eigenvalue,
    lyapunov_exact,
    mixing_rate,
    perron,
    pressure,
    pressure_derivative,
)
from .transfer_matrix import block

BOUND_TOL = 1e-9
BLOCK_BETAS = (0.5, 1.0, 2.0)


@dataclass
class BoundsVerdict:
    alpha: float
    lambda_exp: float
    minus_p3: float
    minus_log_nu2: float
    bound_2L: bool
    jensen_chain: bool
    nu_identity: float
    block_bound: float
    minus_p2: float | None = None
    bound_1L: bool | None = None
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "alpha": self.alpha,
            "lyapunov": self.lambda_exp,
            "minus_log_nu2": self.minus_log_nu2,
            "minus_p3": self.minus_p3,
            "minus_p2": self.minus_p2,
            "bound_2L": self.bound_2L,
            "bound_1L": "n/a" if self.bound_1L is None else self.bound_1L,
            "jensen_chain": self.jensen_chain,
            "nu_identity": self.nu_identity,
            "block_bound": self.block_bound,
            "failures": list(self.failures),
        }


def verify_bounds(
    fmap: PiecewiseLinearMarkovMap,
    degree: int = 2,
    betas: Sequence[float] = BLOCK_BETAS,
    tol: float = BOUND_TOL,
) -> BoundsVerdict:
    report = mixing_rate(fmap, degree)
    alpha = report.mixing_rate
    lam = report.lyapunov

    nu2 = perron(block(fmap, 1.0, 2, 2))[0]
    minus_log_nu2 = float(-np.log(nu2))
    minus_p3 = -pressure(fmap, 3.0)

    failures: list[str] = []
    bound_2L = alpha <= 2.0 * lam + tol
    if not bound_2L:
        failures.append(f"alpha={alpha!r} exceeds 2*Lambda={2.0 * lam!r}")

    jensen_chain = (
        alpha <= minus_log_nu2 + tol
        and abs(minus_log_nu2 - minus_p3) <= tol
        and minus_p3 <= 2.0 * lam + tol
    )
    if not jensen_chain:
        failures.append(
            f"chain alpha <= -ln nu2 = -P(3) <= 2*Lambda broken: "
            f"{alpha!r}, {minus_log_nu2!r}, {minus_p3!r}, {2.0 * lam!r}"
        )

    minus_p2 = None
    bound_1L = None
    sign = fmap.same_sign
    if sign != 0:
        nu1 = perron(sign * block(fmap, 1.0, 1, 1))[0]
        minus_p2 = -pressure(fmap, 2.0)
        bound_1L = (
            alpha <= float(-np.log(nu1)) + tol
            and abs(float(-np.log(nu1)) - minus_p2) <= tol
            and minus_p2 <= lam + tol
        )
        if not bound_1L:
            failures.append(
                f"same-sign chain alpha <= -P(2) <= Lambda broken: "
                f"{alpha!r}, {minus_p2!r}, {lam!r}"
            )

    nu_identity = 0.0
    block_bound = -np.inf
    min_slope = float(np.min(np.abs(fmap.slopes)))
    for beta in betas:
        deviation = np.max(np.abs(block(fmap, beta, 2, 2) - block(fmap, beta + 2.0, 0, 0)))
        nu_identity = max(nu_identity, float(deviation))
        ceiling = leading_eigenvalue(fmap, beta) / min_slope
        for m in range(1, degree + 1):
            radius = float(np.max(np.abs(eigenvalues(block(fmap, beta, m, m)))))
            block_bound = max(block_bound, radius - ceiling)
    if nu_identity != 0.0:
        failures.append(f"T22(beta) differs from T00(beta+2) by {nu_identity!r}")
    if block_bound > tol:
        failures.append(f"diagonal block radius exceeds nu0/min|slope| by {block_bound!r}")

    return BoundsVerdict(
        alpha=alpha,
        lambda_exp=lam,
        minus_p3=minus_p3,
        minus_log_nu2=minus_log_nu2,
        bound_2L=bound_2L,
        jensen_chain=jensen_chain,
        nu_identity=nu_identity,
        block_bound=float(block_bound),
        minus_p2=minus_p2,
        bound_1L=bound_1L,
        failures=failures,
    )


@dataclass
class PressureReport:
    betas: list[float]
    pressures: list[float]
    p_at_one: float
    convexity_gap: float
    decreasing: bool
    derivative_gap: float
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "beta": list(self.betas),
            "pressure": list(self.pressures),
            "p_at_one": self.p_at_one,
            "convexity_gap": self.convexity_gap,
            "decreasing": self.decreasing,
            "derivative_gap": self.derivative_gap,
            "failures": list(self.failures),
        }


def verify_pressure_properties(
    fmap: PiecewiseLinearMarkovMap,
    beta_grid: Sequence[float] = tuple(np.linspace(0.0, 4.0, 9)),
    step: float = FD_STEP,
) -> PressureReport:
    grid = sorted(float(b) for b in beta_grid)
    if not grid or grid[0] < 0.0 or grid[-1] > 4.0:
        raise ParameterOutOfRange("Pressure grid must lie within [0, 4]")
    values = [pressure(fmap, b) for b in grid]
    failures: list[str] = []

    p_at_one = pressure(fmap, 1.0)
    if abs(p_at_one) > 1e-10:
        failures.append(f"P(1)={p_at_one!r} is not zero")

    # Largest excess of P over the chord through any two grid points.
    gap = 0.0
    for i, j, k in combinations(range(len(grid)), 3):
        t = (grid[j] - grid[i]) / (grid[k] - grid[i])
        chord = (1.0 - t) * values[i] + t * values[k]
        gap = max(gap, values[j] - chord)
    if gap > BOUND_TOL:
        failures.append(f"pressure is not convex on the grid (excess {gap!r})")

    decreasing = all(b < a for a, b in zip(values, values[1:]))
    if not decreasing:
        failures.append("pressure is not strictly decreasing on the grid")

    derivative_gap = abs(pressure_derivative(fmap, 1.0, step) + lyapunov_exact(fmap))
    if derivative_gap > 1e-6:
        failures.append(f"|P'(1) + Lambda| = {derivative_gap!r} exceeds 1e-6")

    return PressureReport(
        betas=grid,
        pressures=values,
        p_at_one=p_at_one,
        convexity_gap=gap,
        decreasing=decreasing,
        derivative_gap=derivative_gap,
        failures=failures,
    )
