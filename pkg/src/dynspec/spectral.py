"""Eigenvalues, pressure, Lyapunov exponents and mixing rates of Markov maps.

Everything here works block by block: the spectrum of the assembled
operator is the union of the spectra of its diagonal blocks, so nothing
larger than N x N is ever handed to the eigensolver.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .config import FD_STEP, PERRON_MAX_ITER, PERRON_TOL
from .errors import (
    DegreeOrder,
    DimensionMismatch,
    InputError,
    NoConvergence,
    NonPositiveVector,
    NotConverged,
    ParameterOutOfRange,
)
from .logging import get_logger
from .map_model import PiecewiseLinearMarkovMap, transition_matrix
from .transfer_matrix import PiecewisePolynomial, block

log = get_logger(__name__)

# Moduli closer than this count as ties when ordering a spectrum.
_TIE_DECIMALS = 12


def eigenvalues(A: ArrayLike) -> NDArray[np.complex128]:
    """All eigenvalues with multiplicity, by descending modulus, real, imag."""
    a = np.asarray(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch("Matrix has non-finite entries")
    try:
        values = scipy.linalg.eigvals(a, overwrite_a=False, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"Eigensolver failed on a {a.shape[0]}x{a.shape[0]} matrix") from exc
    return _sort_spectrum(np.asarray(values, dtype=complex))


def _sort_spectrum(values: NDArray[np.complex128]) -> NDArray[np.complex128]:
    modulus = np.round(np.abs(values), _TIE_DECIMALS)
    order = np.lexsort((-values.imag, -values.real, -modulus))
    return values[order]


def perron(A: ArrayLike, tol: float = PERRON_TOL) -> tuple[float, NDArray[np.float64]]:
    """Perron root and positive right eigenvector (unit 1-norm).

    The dense solver supplies the starting vector; power iteration then
    polishes it until the relative change drops below ``tol``.
    """
    a = np.asarray(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {a.shape}")
    if np.any(a < 0):
        raise NonPositiveVector("Perron iteration needs a nonnegative matrix")
    try:
        values, vectors = scipy.linalg.eig(a, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence("Eigensolver failed while seeding Perron iteration") from exc

    index = int(np.argmax(values.real))
    v = np.abs(vectors[:, index].real)
    if not np.all(v > 0):
        raise NonPositiveVector(
            "Leading eigenvector has zero components; matrix is reducible"
        )
    v = v / v.sum()

    for iteration in range(1, PERRON_MAX_ITER + 1):
        w = a @ v
        total = w.sum()
        if total <= 0:
            raise NonPositiveVector("Perron iterate collapsed to zero")
        w = w / total
        change = np.max(np.abs(w - v)) / np.max(np.abs(w))
        v = w
        if change <= tol:
            break
    else:
        raise NotConverged(f"Power iteration did not reach {tol} in {PERRON_MAX_ITER} steps")

    if not np.all(v > 0):
        raise NonPositiveVector("Perron vector has non-positive components")
    nu = float(np.sum(a @ v) / np.sum(v))
    log.debug("perron root %.16g after %d polishing steps", nu, iteration)
    return nu, v


def _check_mixing(fmap: PiecewiseLinearMarkovMap) -> None:
    if transition_matrix(fmap).mixing_power is None:
        log.warning("map is not topologically mixing; leading eigenvalue may not be simple")


def leading_eigenvalue(fmap: PiecewiseLinearMarkovMap, beta: float) -> float:
    return perron(block(fmap, beta, 0, 0))[0]


def pressure(fmap: PiecewiseLinearMarkovMap, beta: float) -> float:
    _check_mixing(fmap)
    return float(np.log(leading_eigenvalue(fmap, beta)))


def pressure_derivative(
    fmap: PiecewiseLinearMarkovMap, beta: float = 1.0, step: float = FD_STEP
) -> float:
    if step <= 0:
        raise ParameterOutOfRange(f"Finite-difference step must be positive, got {step}")
    return (pressure(fmap, beta + step) - pressure(fmap, beta - step)) / (2.0 * step)


def invariant_density(fmap: PiecewiseLinearMarkovMap) -> PiecewisePolynomial:
    _check_mixing(fmap)
    _, v = perron(block(fmap, 1.0, 0, 0))
    mass = float(np.dot(v, fmap.lengths))
    return PiecewisePolynomial.constant(v / mass, fmap)


def lyapunov_exact(fmap: PiecewiseLinearMarkovMap) -> float:
    h = invariant_density(fmap).coefficients[:, 0]
    weights = h * fmap.lengths
    return float(np.dot(weights, np.log(np.abs(fmap.slopes))))


def block_spectrum(
    fmap: PiecewiseLinearMarkovMap, beta: float, degree: int
) -> list[tuple[complex, int]]:
    """Eigenvalues of every diagonal block up to ``degree``, tagged with the block."""
    tagged: list[tuple[complex, int]] = []
    for m in range(degree + 1):
        tagged.extend((complex(z), m) for z in eigenvalues(block(fmap, beta, m, m)))
    values = np.array([z for z, _ in tagged], dtype=complex)
    order = np.lexsort(
        (-values.imag, -values.real, -np.round(np.abs(values), _TIE_DECIMALS))
    )
    return [tagged[i] for i in order]


@dataclass
class SpectralReport:
    beta: float
    degree: int
    leading: float
    subleading: complex
    subleading_block: int
    spectrum: list[tuple[complex, int]]
    pressure: float
    lyapunov: float
    mixing_rate: float
    invariant_density: PiecewisePolynomial

    def as_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta,
            "degree": self.degree,
            "leading": self.leading,
            "subleading": [self.subleading.real, self.subleading.imag, self.subleading_block],
            "eigenvalues": [[z.real, z.imag, m] for z, m in self.spectrum],
            "pressure": self.pressure,
            "lyapunov": self.lyapunov,
            "mixing_rate": self.mixing_rate,
            "density": self.invariant_density.coefficients[:, 0].tolist(),
        }


def mixing_rate(fmap: PiecewiseLinearMarkovMap, degree: int = 2) -> SpectralReport:
    if degree < 2:
        raise DegreeOrder(f"Mixing rate needs degree >= 2 so that nu_2 is present, got {degree}")
    _check_mixing(fmap)
    leading = leading_eigenvalue(fmap, 1.0)
    spectrum = block_spectrum(fmap, 1.0, degree)

    # Drop exactly one copy of the leading eigenvalue, taken from block 0.
    drop = min(
        (i for i, (_, m) in enumerate(spectrum) if m == 0),
        key=lambda i: abs(spectrum[i][0] - leading),
    )
    rest = spectrum[:drop] + spectrum[drop + 1 :]
    subleading, origin = rest[0] if rest else (0j, 0)
    modulus = abs(subleading)
    alpha = float(-np.log(modulus)) if modulus > 0 else float("inf")
    log.info("lambda_1=%s from block %d, alpha=%.12g", subleading, origin, alpha)

    return SpectralReport(
        beta=1.0,
        degree=degree,
        leading=leading,
        subleading=subleading,
        subleading_block=origin,
        spectrum=spectrum,
        pressure=float(np.log(leading)),
        lyapunov=lyapunov_exact(fmap),
        mixing_rate=alpha,
        invariant_density=invariant_density(fmap),
    )


def full_branch_eigenvalues(
    fmap: PiecewiseLinearMarkovMap, degree: int, beta: float = 1.0
) -> NDArray[np.float64]:
    """Closed-form nu_m(beta) = sum_k |g_k|^-beta g_k^-m for full-branch maps."""
    if not np.all(transition_matrix(fmap).entries == 1):
        raise InputError("Closed-form eigenvalues need every branch to be full")
    slopes = np.asarray(fmap.slopes)
    m = np.arange(degree + 1)[:, None]
    return np.sum(np.abs(slopes) ** (-beta) * slopes ** (-m.astype(float)), axis=1)


@dataclass
class PressureCurve:
    betas: list[float]
    pressures: list[float]
    lyapunov: float
    minus_p2: float
    minus_p3: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "beta": list(self.betas),
            "pressure": list(self.pressures),
            "lyapunov": self.lyapunov,
            "two_lyapunov": 2.0 * self.lyapunov,
            "minus_p2": self.minus_p2,
            "minus_p3": self.minus_p3,
        }


def pressure_curve(
    fmap: PiecewiseLinearMarkovMap,
    betas: Sequence[float],
    threads: int = 1,
) -> PressureCurve:
    grid = [float(b) for b in betas]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda b: pressure(fmap, b), grid))
    else:
        values = [pressure(fmap, b) for b in grid]
    return PressureCurve(
        betas=grid,
        pressures=values,
        lyapunov=lyapunov_exact(fmap),
        minus_p2=-pressure(fmap, 2.0),
        minus_p3=-pressure(fmap, 3.0),
    )
