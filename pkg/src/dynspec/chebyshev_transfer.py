"""Chebyshev collocation of the transfer operator of a smooth full-branch map.

The operator acts on values at n first-kind Chebyshev points. Row i sums,
over branches b, the weight |phi_b'(x_i)|**beta times the Lagrange cardinal
functions evaluated at the preimage phi_b(x_i); cardinals are evaluated in
barycentric form with the closed-form weights for these nodes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize_scalar

from .config import CHEB_MIN_ORDER, INF_GRID_POINTS, QUADRATURE_POINTS
from .errors import (
    InverseBranchFailure,
    NoConvergence,
    NonPositiveVector,
    ParameterOutOfRange,
)
from .linearize import cylinders
from .logging import get_logger
from .map_model import Interval, SmoothFullBranchMap, moebius
from .spectral import eigenvalues

log = get_logger(__name__)

Array = NDArray[np.float64]

BV_TOL = 1e-6


def chebyshev_nodes(domain: Interval, n: int) -> Array:
    theta = (2 * np.arange(n) + 1) * np.pi / (2 * n)
    return domain.midpoint + 0.5 * domain.length * np.cos(theta)


def barycentric_weights(n: int) -> Array:
    j = np.arange(n)
    return (-1.0) ** j * np.sin((2 * j + 1) * np.pi / (2 * n))


def fejer_weights(domain: Interval, n: int) -> Array:
    """Fejer's first rule on the first-kind Chebyshev points of ``domain``."""
    theta = (2 * np.arange(n) + 1) * np.pi / (2 * n)
    k = np.arange(1, n // 2 + 1)
    series = np.cos(2 * np.outer(theta, k)) / (4 * k**2 - 1)
    w = (2.0 / n) * (1.0 - 2.0 * series.sum(axis=1))
    return 0.5 * domain.length * w


def cardinal_matrix(nodes: Array, weights: Array, y: ArrayLike) -> Array:
    """Row r holds every cardinal function l_j evaluated at y[r]."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    diff = y[:, None] - nodes[None, :]
    hit = diff == 0.0
    diff = np.where(hit, 1.0, diff)
    kernel = weights[None, :] / diff
    out = kernel / kernel.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    out[rows] = hit[rows].astype(float)
    return out


@dataclass(frozen=True, eq=False)
class ChebyshevOperator:
    order: int
    beta: float
    nodes: Array
    matrix: Array
    fmap: SmoothFullBranchMap

    @property
    def weights(self) -> Array:
        return barycentric_weights(self.order)

    @property
    def quadrature(self) -> Array:
        return fejer_weights(self.fmap.domain, self.order)

    def apply(self, values: ArrayLike) -> Array:
        return self.matrix @ np.asarray(values, dtype=float)

    def eigenvalues(self) -> NDArray[np.complex128]:
        return eigenvalues(self.matrix)

    def interpolate(self, values: ArrayLike, x: ArrayLike) -> Array:
        x = np.asarray(x, dtype=float)
        flat = cardinal_matrix(self.nodes, self.weights, x.ravel()) @ np.asarray(values)
        return flat.reshape(x.shape)


def build(F: SmoothFullBranchMap, beta: float, n: int) -> ChebyshevOperator:
    if n < CHEB_MIN_ORDER:
        raise ParameterOutOfRange(f"Chebyshev order must be >= {CHEB_MIN_ORDER}, got {n}")
    nodes = chebyshev_nodes(F.domain, n)
    weights = barycentric_weights(n)
    matrix = np.zeros((n, n))
    for b in range(F.branch_count):
        pre = F.branch_inverse(b, nodes)
        scale = np.abs(F.branch_inverse_deriv(b, nodes)) ** beta
        matrix += scale[:, None] * cardinal_matrix(nodes, weights, pre)
    if not np.all(np.isfinite(matrix)):
        raise InverseBranchFailure("Collocation matrix has non-finite rows")
    matrix.setflags(write=False)
    log.debug("built order-%d operator for %s at beta=%s", n, F.to_dict(), beta)
    return ChebyshevOperator(n, float(beta), nodes, matrix, F)


def subleading(op: ChebyshevOperator) -> complex:
    return complex(op.eigenvalues()[1])


def mixing_rate_smooth(F: SmoothFullBranchMap, n: int) -> float:
    return float(-np.log(abs(subleading(build(F, 1.0, n)))))


@dataclass
class SweepRow:
    c: float
    rank: int
    eigenvalue: complex

    @property
    def modulus(self) -> float:
        return abs(self.eigenvalue)

    @property
    def sign(self) -> int:
        """+1/-1 for real eigenvalues, 0 for complex ones."""
        if abs(self.eigenvalue.imag) > 1e-12 * max(1.0, self.modulus):
            return 0
        return 1 if self.eigenvalue.real >= 0 else -1


def spectrum_vs_parameter(
    c_grid: Sequence[float],
    beta: float = 1.0,
    n: int = 25,
    top: int = 8,
    threads: int = 1,
) -> list[SweepRow]:
    grid = [float(c) for c in c_grid]
    for c in grid:
        if not -0.25 < c < 0.5:
            raise ParameterOutOfRange(f"Moebius parameter c={c!r} must lie in (-1/4, 1/2)")

    def one(c: float) -> list[SweepRow]:
        values = build(moebius(c), beta, n).eigenvalues()[:top]
        return [SweepRow(c, rank, complex(z)) for rank, z in enumerate(values)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(one, grid))
    else:
        chunks = [one(c) for c in grid]
    return [row for chunk in chunks for row in chunk]


def sweep_minimum(rows: Sequence[SweepRow]) -> tuple[float, float]:
    second = [row for row in rows if row.rank == 1]
    best = min(second, key=lambda row: row.modulus)
    return best.c, best.modulus


@dataclass
class DensityInterpolant:
    nodes: Array
    values: Array
    normalization: float
    operator: ChebyshevOperator

    def __call__(self, x: ArrayLike) -> Array:
        return self.operator.interpolate(self.values, x)

    def integral(self) -> float:
        return float(np.dot(self.operator.quadrature, self.values))


def invariant_density_smooth(F: SmoothFullBranchMap, n: int) -> DensityInterpolant:
    op = build(F, 1.0, n)
    try:
        values, vectors = scipy.linalg.eig(op.matrix)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence("Eigensolver failed on the collocation matrix") from exc
    index = int(np.argmax(values.real))
    v = vectors[:, index].real
    mass = float(np.dot(op.quadrature, v))
    h = v / mass
    if np.min(h) < 0:
        raise NonPositiveVector("Invariant density is negative at a collocation node")
    return DensityInterpolant(op.nodes, h, mass, op)


def lyapunov_smooth(
    F: SmoothFullBranchMap, n: int, points: int = QUADRATURE_POINTS
) -> float:
    density = invariant_density_smooth(F, n)
    t, w = leggauss(points)
    total = 0.0
    for b, dom in enumerate(F.branch_domains):
        x = dom.midpoint + 0.5 * dom.length * t
        integrand = np.log(np.abs(F.branch_deriv(b, x))) * density(x)
        total += 0.5 * dom.length * float(np.dot(w, integrand))
    return total


@dataclass
class EssentialRadius:
    s: list[float]
    sigma: list[float]
    alpha_bv: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "k": list(range(1, len(self.s) + 1)),
            "s": list(self.s),
            "sigma_ess": list(self.sigma),
            "alpha_bv_bound": self.alpha_bv,
        }


def _log_iterate_derivative(
    F: SmoothFullBranchMap, word: Sequence[int], x: ArrayLike
) -> Array:
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for b in word:
        total = total + np.log(np.abs(F.branch_deriv(b, x)))
        x = F.branch_eval(b, x)
    return total


def _inf_log_derivative(F: SmoothFullBranchMap, k: int, grid: int) -> float:
    best = np.inf
    per_cell = max(8, grid)
    for cell in cylinders(F, k):
        x = np.linspace(cell.interval.lo, cell.interval.hi, per_cell)
        g = _log_iterate_derivative(F, cell.word, x)
        i = int(np.argmin(g))
        value = float(g[i])
        if 0 < i < per_cell - 1 and g[i] < g[i - 1] and g[i] < g[i + 1]:
            refined = minimize_scalar(
                lambda t: float(_log_iterate_derivative(F, cell.word, t)),
                bracket=(x[i - 1], x[i], x[i + 1]),
                method="golden",
            )
            value = min(value, float(refined.fun))
        best = min(best, value)
    return float(best)


def essential_radius_bound(
    F: SmoothFullBranchMap, k_max: int, grid: int = INF_GRID_POINTS
) -> EssentialRadius:
    """s_k = ln inf |(F^k)'| / k for k = 1..k_max.

    Each of the B^k branch compositions is sampled on ``grid`` points; an
    interior smallest sample is refined by golden-section search.
    """
    if k_max < 1:
        raise ParameterOutOfRange(f"k_max must be >= 1, got {k_max}")
    s = [_inf_log_derivative(F, k, grid) / k for k in range(1, k_max + 1)]
    sigma = [float(np.exp(-v)) for v in s]
    return EssentialRadius(s=s, sigma=sigma, alpha_bv=max(s))


@dataclass
class SmoothVerdict:
    alpha: float
    lyapunov: float
    analytic_violation: bool
    essential: EssentialRadius
    findings: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "alpha": self.alpha,
            "lyapunov": self.lyapunov,
            "analytic_violation": self.analytic_violation,
            "essential_radius": self.essential.as_dict(),
            "findings": list(self.findings),
            "failures": list(self.failures),
        }


def verify_smooth(
    F: SmoothFullBranchMap, n: int = 25, k_max: int = 10
) -> SmoothVerdict:
    """Analytic-observable rate versus 2*Lambda, and the BV chain s_k <= Lambda.

    Only the BV chain can fail: analytic observables are allowed to mix
    faster than 2*Lambda, so that comparison is reported as a finding.
    """
    alpha = mixing_rate_smooth(F, n)
    lam = lyapunov_smooth(F, n)
    essential = essential_radius_bound(F, k_max)
    verdict = SmoothVerdict(
        alpha=alpha,
        lyapunov=lam,
        analytic_violation=alpha > 2.0 * lam,
        essential=essential,
    )
    if verdict.analytic_violation:
        verdict.findings.append(
            f"analytic mixing rate {alpha:.6g} exceeds 2*Lambda={2.0 * lam:.6g} (expected)"
        )
    for k, value in enumerate(essential.s, start=1):
        if value > lam + BV_TOL:
            verdict.failures.append(f"s_{k}={value!r} exceeds Lambda={lam!r}")
    return verdict
