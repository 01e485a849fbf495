"""Interval maps: piecewise linear Markov maps and smooth full-branch maps.

Both kinds share the small vectorised surface used by the orbit code
(``branch_of``, ``step``, ``derivative``) so that correlation and Lyapunov
estimators never need to know which kind they are iterating.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Protocol, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import bisect

from .config import ALIGNMENT_TOL, BISECTION_TOL, MIXING_POWER_CAP
from .errors import (
    InverseBranchFailure,
    NoSuchBranch,
    NotAPartition,
    NotExpanding,
    NotMarkov,
    OutOfDomain,
    ParameterOutOfRange,
)

Array = NDArray[np.float64]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise NotAPartition(f"Interval needs finite lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def as_list(self) -> list[float]:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class AffineBranch:
    slope: float
    intercept: float
    domain: Interval

    def __call__(self, x: float) -> float:
        return self.slope * x + self.intercept

    @property
    def image(self) -> Interval:
        a = self(self.domain.lo)
        b = self(self.domain.hi)
        return Interval(min(a, b), max(a, b))

    def inverse(self, y: float) -> float:
        return (y - self.intercept) / self.slope


class IntervalMap(Protocol):
    @property
    def domain(self) -> Interval: ...

    @property
    def breakpoints(self) -> Sequence[float]: ...

    def branch_of(self, x: ArrayLike) -> NDArray[np.intp]: ...

    def step(self, x: ArrayLike) -> Array: ...

    def derivative(self, x: ArrayLike) -> Array: ...


@dataclass(frozen=True)
class TransitionMatrix:
    """Topological transition matrix; ``entries[k, l] == 1`` iff I_l lies in f(I_k)."""

    entries: NDArray[np.int8]
    mixing_power: int | None = None

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.int8)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise NotAPartition("Transition matrix must be square")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    def __hash__(self) -> int:
        return hash((self.entries.tobytes(), self.entries.shape, self.mixing_power))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return (
            np.array_equal(self.entries, other.entries)
            and self.mixing_power == other.mixing_power
        )


@dataclass(frozen=True)
class PiecewiseLinearMarkovMap:
    """Piecewise affine map on ``domain`` with one branch per partition element.

    Breakpoints are stored once; branch ``k`` lives on
    ``[breakpoints[k], breakpoints[k + 1]]``. A breakpoint belongs to the
    branch on its right, except the right end of the domain.
    """

    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]
    _branches: tuple[AffineBranch, ...] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        bp = tuple(float(v) for v in self.breakpoints)
        slopes = tuple(float(v) for v in self.slopes)
        intercepts = tuple(float(v) for v in self.intercepts)
        if len(slopes) == 0:
            raise NotAPartition("A map needs at least one branch")
        if len(bp) != len(slopes) + 1 or len(intercepts) != len(slopes):
            raise NotAPartition(
                f"{len(slopes)} branches need {len(slopes) + 1} breakpoints "
                f"and {len(slopes)} intercepts"
            )
        if not all(np.isfinite(bp)) or any(b <= a for a, b in zip(bp, bp[1:])):
            raise NotAPartition(f"Breakpoints must be finite and increasing: {bp}")
        if not all(np.isfinite(slopes)) or not all(np.isfinite(intercepts)):
            raise NotAPartition("Slopes and intercepts must be finite")
        if any(s == 0.0 for s in slopes):
            raise NotExpanding(slopes.index(0.0), 0.0)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "intercepts", intercepts)
        branches = tuple(
            AffineBranch(s, d, Interval(a, b))
            for s, d, a, b in zip(slopes, intercepts, bp, bp[1:])
        )
        object.__setattr__(self, "_branches", branches)

    @classmethod
    def from_branches(
        cls, breakpoints: Sequence[float], branches: Sequence[tuple[float, float]]
    ) -> "PiecewiseLinearMarkovMap":
        return cls(
            tuple(breakpoints),
            tuple(s for s, _ in branches),
            tuple(d for _, d in branches),
        )

    @property
    def domain(self) -> Interval:
        return Interval(self.breakpoints[0], self.breakpoints[-1])

    @property
    def size(self) -> int:
        return len(self.slopes)

    @property
    def branches(self) -> tuple[AffineBranch, ...]:
        return self._branches

    @property
    def lengths(self) -> Array:
        return np.diff(np.asarray(self.breakpoints))

    @property
    def same_sign(self) -> int:
        """+1 or -1 when all slopes share a sign, else 0."""
        signs = {1 if s > 0 else -1 for s in self.slopes}
        return signs.pop() if len(signs) == 1 else 0

    def evaluate(self, x: float) -> tuple[float, int]:
        if not self.domain.contains(x):
            raise OutOfDomain(f"x={x!r} is outside {self.domain.as_list()}")
        k = int(self.branch_of(x))
        return self._branches[k](x), k

    def inverse_branch(self, element: int, branch: int, x: float) -> float:
        """Preimage of ``x`` in ``element`` under the branch living on ``branch``."""
        entries = transition_matrix(self).entries
        in_range = 0 <= element < self.size and 0 <= branch < self.size
        if not in_range or entries[branch, element] == 0:
            raise NoSuchBranch(f"No branch maps element {branch} onto element {element}")
        if not self._branches[element].domain.contains(x):
            raise OutOfDomain(f"x={x!r} is outside element {element}")
        return self._branches[branch].inverse(x)

    def branch_of(self, x: ArrayLike) -> NDArray[np.intp]:
        k = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(k, 0, self.size - 1)

    def step(self, x: ArrayLike) -> Array:
        x = np.asarray(x, dtype=float)
        k = self.branch_of(x)
        out = np.asarray(self.slopes)[k] * x + np.asarray(self.intercepts)[k]
        return np.clip(out, self.breakpoints[0], self.breakpoints[-1])

    def derivative(self, x: ArrayLike) -> Array:
        return np.asarray(self.slopes)[self.branch_of(x)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "piecewise_linear",
            "domain": self.domain.as_list(),
            "breakpoints": list(self.breakpoints),
            "branches": [
                {"slope": s, "intercept": d}
                for s, d in zip(self.slopes, self.intercepts)
            ],
        }


@dataclass(frozen=True)
class MarkovProblem:
    branch: int
    element: int
    endpoint: float


def markov_entries(
    fmap: PiecewiseLinearMarkovMap, tol: float = ALIGNMENT_TOL
) -> tuple[NDArray[np.int8], list[MarkovProblem]]:
    """Transition entries from branch images, plus every misaligned endpoint."""
    bp = np.asarray(fmap.breakpoints)
    entries = np.zeros((fmap.size, fmap.size), dtype=np.int8)
    problems: list[MarkovProblem] = []
    for k, branch in enumerate(fmap.branches):
        a = branch(branch.domain.lo)
        b = branch(branch.domain.hi)
        lo, hi = min(a, b), max(a, b)
        ia, ib = _align(lo, bp, tol), _align(hi, bp, tol)
        for endpoint, index in ((lo, ia), (hi, ib)):
            if index is None:
                element = int(np.clip(np.searchsorted(bp, endpoint) - 1, 0, fmap.size - 1))
                problems.append(MarkovProblem(k, element, endpoint))
        if ia is not None and ib is not None and ib > ia:
            entries[k, ia:ib] = 1
    return entries, problems


def is_topologically_mixing(
    entries: ArrayLike, p_max: int = MIXING_POWER_CAP
) -> int | None:
    """Smallest p <= p_max with every entry of A^p positive, else None."""
    a = (np.asarray(entries) > 0).astype(np.int64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotAPartition("Transition matrix must be square")
    power = a.copy()
    for p in range(1, p_max + 1):
        if power.all():
            return p
        power = np.minimum(power @ a, 1)
    return None


@lru_cache(maxsize=512)
def transition_matrix(
    fmap: PiecewiseLinearMarkovMap, tol: float = ALIGNMENT_TOL
) -> TransitionMatrix:
    for index, slope in enumerate(fmap.slopes):
        if abs(slope) <= 1.0:
            raise NotExpanding(index, slope)
    entries, problems = markov_entries(fmap, tol)
    if problems:
        first = problems[0]
        raise NotMarkov(
            first.branch,
            first.element,
            f"Branch {first.branch} image endpoint {first.endpoint!r} falls inside "
            f"partition element {first.element}",
        )
    return TransitionMatrix(entries, is_topologically_mixing(entries))


def _align(value: float, breakpoints: Array, tol: float) -> int | None:
    index = int(np.argmin(np.abs(breakpoints - value)))
    return index if abs(breakpoints[index] - value) <= tol else None


class SmoothFullBranchMap(ABC):
    """Full-branch map: every branch is monotone and maps onto the whole domain.

    Subclasses supply the branch formula and derivative. The inverse falls
    back to bisection unless a closed form is provided.
    """

    family: str = "smooth"

    @property
    @abstractmethod
    def domain(self) -> Interval: ...

    @property
    @abstractmethod
    def branch_domains(self) -> tuple[Interval, ...]: ...

    @abstractmethod
    def branch_eval(self, b: int, x: ArrayLike) -> Array: ...

    @abstractmethod
    def branch_deriv(self, b: int, x: ArrayLike) -> Array: ...

    @abstractmethod
    def parameters(self) -> dict[str, Any]: ...

    @property
    def branch_count(self) -> int:
        return len(self.branch_domains)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.branch_domains[0].lo,) + tuple(d.hi for d in self.branch_domains)

    def increasing(self, b: int) -> bool:
        dom = self.branch_domains[b]
        return bool(self.branch_eval(b, dom.hi) > self.branch_eval(b, dom.lo))

    def branch_inverse(self, b: int, y: ArrayLike) -> Array:
        y = np.asarray(y, dtype=float)
        flat = np.array([self._bisect_inverse(b, float(v)) for v in y.ravel()])
        return self._snap(b, y, flat.reshape(y.shape))

    def branch_inverse_deriv(self, b: int, y: ArrayLike) -> Array:
        return 1.0 / self.branch_deriv(b, self.branch_inverse(b, y))

    def branch_of(self, x: ArrayLike) -> NDArray[np.intp]:
        k = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(k, 0, self.branch_count - 1)

    def evaluate(self, x: float) -> tuple[float, int]:
        if not self.domain.contains(x):
            raise OutOfDomain(f"x={x!r} is outside {self.domain.as_list()}")
        b = int(self.branch_of(x))
        return float(self.branch_eval(b, x)), b

    def step(self, x: ArrayLike) -> Array:
        x = np.asarray(x, dtype=float)
        k = self.branch_of(x)
        out = np.empty_like(x)
        for b in range(self.branch_count):
            mask = k == b
            out[mask] = self.branch_eval(b, x[mask])
        return np.clip(out, self.domain.lo, self.domain.hi)

    def derivative(self, x: ArrayLike) -> Array:
        x = np.asarray(x, dtype=float)
        k = self.branch_of(x)
        out = np.empty_like(x)
        for b in range(self.branch_count):
            mask = k == b
            out[mask] = self.branch_deriv(b, x[mask])
        return out

    def to_dict(self) -> dict[str, Any]:
        return {"type": self.family, **self.parameters()}

    def _bisect_inverse(self, b: int, y: float) -> float:
        dom = self.branch_domains[b]

        def residual(x: float) -> float:
            return float(self.branch_eval(b, x)) - y

        lo, hi = residual(dom.lo), residual(dom.hi)
        if lo == 0.0:
            return dom.lo
        if hi == 0.0:
            return dom.hi
        if lo * hi > 0:
            raise InverseBranchFailure(
                f"y={y!r} is not in the image of branch {b}; map is not full-branch"
            )
        return bisect(residual, dom.lo, dom.hi, xtol=BISECTION_TOL)

    def _snap(self, b: int, y: Array, x: Array) -> Array:
        # Domain endpoints pull back to the exact branch endpoints.
        dom = self.branch_domains[b]
        up = self.increasing(b)
        at_lo = y == self.domain.lo
        at_hi = y == self.domain.hi
        x = np.where(at_lo, dom.lo if up else dom.hi, x)
        return np.where(at_hi, dom.hi if up else dom.lo, x)


@dataclass(frozen=True)
class MoebiusMap(SmoothFullBranchMap):
    """F_c(x) = (1 - 2(c+1)|x|) / (1 + 2c|x|) on [-1, 1], c in (-1/4, 1/2)."""

    c: float
    family = "moebius"

    def __post_init__(self) -> None:
        if not (-0.25 < self.c < 0.5):
            raise ParameterOutOfRange(
                f"Moebius parameter c={self.c!r} must lie in (-1/4, 1/2)"
            )

    @property
    def domain(self) -> Interval:
        return Interval(-1.0, 1.0)

    @property
    def branch_domains(self) -> tuple[Interval, ...]:
        return (Interval(-1.0, 0.0), Interval(0.0, 1.0))

    def branch_eval(self, b: int, x: ArrayLike) -> Array:
        ax = np.abs(np.asarray(x, dtype=float))
        return (1.0 - 2.0 * (self.c + 1.0) * ax) / (1.0 + 2.0 * self.c * ax)

    def branch_deriv(self, b: int, x: ArrayLike) -> Array:
        x = np.asarray(x, dtype=float)
        sign = -1.0 if b == 1 else 1.0
        return sign * (4.0 * self.c + 2.0) / (1.0 + 2.0 * self.c * np.abs(x)) ** 2

    def branch_inverse(self, b: int, y: ArrayLike) -> Array:
        y = np.asarray(y, dtype=float)
        x = (1.0 - y) / (2.0 * (self.c + 1.0) + 2.0 * self.c * y)
        return self._snap(b, y, x if b == 1 else -x)

    def branch_inverse_deriv(self, b: int, y: ArrayLike) -> Array:
        y = np.asarray(y, dtype=float)
        mag = (4.0 * self.c + 2.0) / (2.0 * (self.c + 1.0) + 2.0 * self.c * y) ** 2
        return -mag if b == 1 else mag

    def increasing(self, b: int) -> bool:
        return b == 0

    def parameters(self) -> dict[str, Any]:
        return {"c": self.c}


def moebius(c: float) -> MoebiusMap:
    return MoebiusMap(float(c))
