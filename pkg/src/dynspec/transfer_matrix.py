"""Finite matrix representation of L_beta on piecewise polynomials.

Coefficients are laid out degree-major: index ``m * N + k`` holds the
coefficient of ``x**m`` on partition element ``k``. In that layout the
operator is block upper triangular with N x N blocks ``T^(mn)``; block
``(m, n)`` maps degree-``n`` input to degree-``m`` output.

The monomial basis is centred at 0 as in the defining formula. It is well
conditioned on unit-scale domains up to degree ~30.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import BINOMIAL_MAX_DEGREE
from .errors import DegreeOrder, DimensionMismatch
from .logging import get_logger
from .map_model import PiecewiseLinearMarkovMap, transition_matrix

log = get_logger(__name__)

Array = NDArray[np.float64]


@lru_cache(maxsize=1)
def _pascal(n_max: int = BINOMIAL_MAX_DEGREE) -> tuple[tuple[int, ...], ...]:
    rows = [(1,)]
    for _ in range(n_max):
        prev = rows[-1]
        rows.append((1,) + tuple(a + b for a, b in zip(prev, prev[1:])) + (1,))
    return tuple(rows)


def binomial(n: int, k: int) -> int:
    if n > BINOMIAL_MAX_DEGREE:
        raise DegreeOrder(f"Degree {n} exceeds supported maximum {BINOMIAL_MAX_DEGREE}")
    if k < 0 or k > n:
        return 0
    return _pascal()[n][k]


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """Coefficients ``a[k, m]`` of ``sum_m a[k, m] x**m`` on element ``k``."""

    coefficients: Array
    fmap: PiecewiseLinearMarkovMap

    def __post_init__(self) -> None:
        coeffs = np.atleast_2d(np.asarray(self.coefficients, dtype=float))
        if coeffs.shape[0] != self.fmap.size:
            raise DimensionMismatch(
                f"Expected {self.fmap.size} rows of coefficients, got {coeffs.shape[0]}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return self.coefficients.shape[1] - 1

    @classmethod
    def from_vector(
        cls, vector: ArrayLike, fmap: PiecewiseLinearMarkovMap
    ) -> "PiecewisePolynomial":
        vec = np.asarray(vector, dtype=float)
        return cls(vec.reshape(-1, fmap.size).T, fmap)

    @classmethod
    def constant(
        cls, values: ArrayLike, fmap: PiecewiseLinearMarkovMap
    ) -> "PiecewisePolynomial":
        return cls(np.asarray(values, dtype=float).reshape(-1, 1), fmap)

    def to_vector(self) -> Array:
        return self.coefficients.T.reshape(-1)

    def padded(self, degree: int) -> "PiecewisePolynomial":
        if degree < self.degree:
            raise DimensionMismatch(f"Cannot pad degree {self.degree} down to {degree}")
        extra = np.zeros((self.fmap.size, degree - self.degree))
        return PiecewisePolynomial(np.hstack([self.coefficients, extra]), self.fmap)

    def __call__(self, x: ArrayLike) -> Array:
        x = np.asarray(x, dtype=float)
        k = self.fmap.branch_of(x)
        # Horner per point, coefficients of the owning element.
        out = np.zeros_like(x)
        for m in range(self.degree, -1, -1):
            out = out * x + self.coefficients[k, m]
        return out

    def integral(self) -> float:
        bp = np.asarray(self.fmap.breakpoints)
        powers = np.arange(self.degree + 1) + 1
        upper = bp[1:, None] ** powers / powers
        lower = bp[:-1, None] ** powers / powers
        return float(np.sum(self.coefficients * (upper - lower)))


@dataclass(frozen=True, eq=False)
class BlockTransferMatrix:
    beta: float
    degree: int
    blocks: Array
    fmap: PiecewiseLinearMarkovMap

    @property
    def size(self) -> int:
        return self.fmap.size

    @property
    def dimension(self) -> int:
        return self.size * (self.degree + 1)

    def block(self, m: int, n: int) -> Array:
        return self.blocks[m, n]

    def diagonal(self, m: int) -> Array:
        return self.blocks[m, m]

    @property
    def matrix(self) -> Array:
        dim = self.dimension
        return self.blocks.transpose(0, 2, 1, 3).reshape(dim, dim)


def block(fmap: PiecewiseLinearMarkovMap, beta: float, m: int, n: int) -> Array:
    """Block ``T^(mn)(beta)``; entry (k, l) comes from branch l landing on element k."""
    if m > n or m < 0:
        raise DegreeOrder(f"Block ({m}, {n}) lies below the diagonal")
    entries = transition_matrix(fmap).entries
    slopes = np.asarray(fmap.slopes)
    intercepts = np.asarray(fmap.intercepts)
    # sign^n |g|^-(beta+n) keeps T^(nn)(beta) bit-identical to T^(00)(beta+n) up to sign.
    weight = np.sign(slopes) ** n * np.abs(slopes) ** (-(beta + n))
    column = weight * (-intercepts) ** (n - m) * float(binomial(n, n - m))
    return entries.T * column[None, :]


def assemble(
    fmap: PiecewiseLinearMarkovMap, beta: float, degree: int
) -> BlockTransferMatrix:
    if degree < 0:
        raise DegreeOrder(f"Degree must be non-negative, got {degree}")
    size = fmap.size
    blocks = np.zeros((degree + 1, degree + 1, size, size))
    for n in range(degree + 1):
        for m in range(n + 1):
            blocks[m, n] = block(fmap, beta, m, n)
    blocks.setflags(write=False)
    log.debug("assembled beta=%s degree=%d size=%d", beta, degree, size)
    return BlockTransferMatrix(float(beta), degree, blocks, fmap)


def apply(T: BlockTransferMatrix, p: PiecewisePolynomial) -> PiecewisePolynomial:
    if p.fmap.size != T.size or p.fmap != T.fmap:
        raise DimensionMismatch("Polynomial and operator are defined on different maps")
    if p.degree > T.degree:
        raise DimensionMismatch(
            f"Polynomial degree {p.degree} exceeds operator degree {T.degree}"
        )
    vec = p.padded(T.degree).to_vector()
    return PiecewisePolynomial.from_vector(T.matrix @ vec, T.fmap)


def transfer_pointwise(
    fmap: PiecewiseLinearMarkovMap,
    h: PiecewisePolynomial,
    x: ArrayLike,
    beta: float = 1.0,
) -> Array:
    """Sum of h(y) / |f'(y)|**beta over preimages y of x, evaluated directly."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for branch in fmap.branches:
        y = branch.inverse(x)
        inside = (y >= branch.domain.lo) & (y < branch.domain.hi)
        weight = abs(branch.slope) ** (-beta)
        total = total + np.where(inside, weight * h(np.where(inside, y, branch.domain.lo)), 0.0)
    return total
