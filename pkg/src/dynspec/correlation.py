"""Monte Carlo correlation functions and orbit Lyapunov exponents.

Ensembles are split into shards. Each shard draws its initial conditions
from a Philox stream keyed by ``(seed, shard)``, which also supplies an
ulp-sized dither after every step, and returns raw sums; the
pooled estimate merges those sums in shard order, and the spread of the
per-shard estimates gives the standard error. Results therefore depend on
the shard count but never on the number of worker threads.
"""

from __future__ import annotations

from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import CORRELATION
from .errors import (
    BudgetExceeded,
    DerivativeUndefined,
    ParameterOutOfRange,
    WindowTooNoisy,
)
from .logging import get_logger
from .map_model import IntervalMap, PiecewiseLinearMarkovMap, SmoothFullBranchMap
from .transfer_matrix import PiecewisePolynomial

log = get_logger(__name__)

Array = NDArray[np.float64]

ObservableKind = Literal[
    "identity", "step", "folded_step", "piecewise_polynomial", "sampled", "constant"
]

# Relative size of the shift applied to orbit points sitting on a breakpoint.
NUDGE = 1e-15
# Relative half-width of the uniform noise added after every ensemble step.
# Dyadic slopes shift one mantissa bit out per step; the noise refills it.
DITHER = 4.0 * np.finfo(float).eps
MIN_SAMPLES = 10_000
MIN_FIT_LAGS = 4


def shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, shard])))


@dataclass(frozen=True)
class Observable:
    kind: ObservableKind
    rule: Callable[[Array], Array]
    label: str

    def __call__(self, x: ArrayLike) -> Array:
        return self.rule(np.asarray(x, dtype=float))

    @classmethod
    def identity(cls) -> "Observable":
        return cls("identity", lambda x: x, "identity")

    @classmethod
    def step(cls, h: float) -> "Observable":
        """x inside |x| < 1/2, shifted towards zero by ``h`` outside."""
        h = float(h)
        return cls(
            "step",
            lambda x: np.where(np.abs(x) > 0.5, x - np.sign(x) * h, x),
            f"step({h!r})",
        )

    @classmethod
    def folded_step(cls, h: float) -> "Observable":
        """The step observable evaluated at |x|, jump ``h`` at |x| = 1/2.

        The transfer operator of a map that is even about 0 annihilates odd
        functions, so on the Moebius family ``step(h)`` has C(n) = 0 for n >= 1.
        """
        h = float(h)
        return cls(
            "folded_step",
            lambda x: np.where(np.abs(x) > 0.5, np.abs(x) - h, np.abs(x)),
            f"folded_step({h!r})",
        )

    @classmethod
    def constant(cls, value: float) -> "Observable":
        value = float(value)
        return cls("constant", lambda x: np.full_like(x, value), f"constant({value!r})")

    @classmethod
    def polynomial(cls, p: PiecewisePolynomial) -> "Observable":
        return cls("piecewise_polynomial", p, "piecewise_polynomial")

    @classmethod
    def sampled(cls, xs: ArrayLike, ys: ArrayLike) -> "Observable":
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        return cls("sampled", lambda x: np.interp(x, xs, ys), "sampled")


@dataclass
class CorrelationSeries:
    lags: NDArray[np.int64]
    values: Array
    stderr: Array
    seed: int
    ensemble: int
    length: int
    transient: int
    shards: int

    @property
    def normalized(self) -> Array:
        return self.values / self.values[0]

    def as_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "ensemble": self.ensemble,
            "length": self.length,
            "transient": self.transient,
            "shards": self.shards,
            "C": self.values.tolist(),
            "stderr": self.stderr.tolist(),
        }


@dataclass
class _ShardSums:
    lagged: Array
    counts: Array
    phi: float
    psi: float
    samples: int

    def estimate(self) -> Array:
        return self.lagged / self.counts - (self.phi / self.samples) * (
            self.psi / self.samples
        )


def _dithered_step(fmap: IntervalMap, x: Array, rng: np.random.Generator) -> Array:
    dom = fmap.domain
    noise = rng.uniform(-DITHER, DITHER, size=x.shape) * dom.length
    return np.clip(fmap.step(x) + noise, dom.lo, dom.hi)


def _run_shard(
    fmap: IntervalMap,
    phi: Observable,
    psi: Observable,
    n_max: int,
    size: int,
    length: int,
    transient: int,
    rng: np.random.Generator,
) -> _ShardSums:
    dom = fmap.domain
    x = rng.uniform(dom.lo, dom.hi, size=size)
    for _ in range(transient):
        x = _dithered_step(fmap, x, rng)

    width = n_max + 1
    history = np.zeros((width, size))
    lags = np.arange(width)
    lagged = np.zeros(width)
    phi_sum = 0.0
    psi_sum = 0.0
    for t in range(length):
        phi_t = phi(x)
        psi_t = psi(x)
        history[t % width] = psi_t
        products = history @ phi_t
        lagged += np.where(lags <= t, products[(t - lags) % width], 0.0)
        phi_sum += float(phi_t.sum())
        psi_sum += float(psi_t.sum())
        x = _dithered_step(fmap, x, rng)

    counts = size * (length - lags).astype(float)
    return _ShardSums(lagged, counts, phi_sum, psi_sum, size * length)


def simulate(
    fmap: IntervalMap,
    phi: Observable,
    psi: Observable,
    n_max: int = CORRELATION.n_max,
    ensemble: int = CORRELATION.ensemble,
    length: int = CORRELATION.length,
    transient: int = CORRELATION.transient,
    seed: int = 0,
    shards: int = CORRELATION.shards,
    threads: int = 1,
    budget: int = CORRELATION.budget,
) -> CorrelationSeries:
    if ensemble * length < MIN_SAMPLES:
        raise ParameterOutOfRange(
            f"Ensemble size times length must be >= {MIN_SAMPLES}, got {ensemble * length}"
        )
    if transient < 0 or n_max < 0 or n_max >= length:
        raise ParameterOutOfRange("Need transient >= 0 and 0 <= n_max < length")
    if shards < 2 or shards > ensemble:
        raise ParameterOutOfRange(f"Shard count must be in [2, {ensemble}], got {shards}")
    if ensemble * length * n_max > budget:
        raise BudgetExceeded(
            f"E*L*n_max = {ensemble * length * n_max} exceeds budget {budget}"
        )

    sizes = [len(part) for part in np.array_split(np.arange(ensemble), shards)]

    def run(shard: int) -> _ShardSums:
        sums = _run_shard(
            fmap, phi, psi, n_max, sizes[shard], length, transient, shard_rng(seed, shard)
        )
        log.debug("shard %d/%d done (%d orbits)", shard + 1, shards, sizes[shard])
        return sums

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(shards)))
    else:
        parts = [run(s) for s in range(shards)]

    pooled = parts[0]
    for part in parts[1:]:
        pooled = _ShardSums(
            pooled.lagged + part.lagged,
            pooled.counts + part.counts,
            pooled.phi + part.phi,
            pooled.psi + part.psi,
            pooled.samples + part.samples,
        )
    per_shard = np.array([part.estimate() for part in parts])
    stderr = per_shard.std(axis=0, ddof=1) / np.sqrt(shards)
    log.info("correlation estimate over %d orbits of length %d", ensemble, length)

    return CorrelationSeries(
        lags=np.arange(n_max + 1),
        values=pooled.estimate(),
        stderr=stderr,
        seed=seed,
        ensemble=ensemble,
        length=length,
        transient=transient,
        shards=shards,
    )


@dataclass
class DecayFit:
    rate: float
    window: tuple[int, int]
    residual: float
    lags: tuple[int, ...]

    def as_dict(self) -> dict[str, Any]:
        return {
            "rate": self.rate,
            "window": list(self.window),
            "residual": self.residual,
            "lags": list(self.lags),
        }


def usable_lags(series: CorrelationSeries) -> NDArray[np.int64]:
    magnitude = np.abs(series.values)
    keep = (magnitude > 3.0 * series.stderr) & (magnitude > 0)
    return series.lags[keep]


def tail_window(
    series: CorrelationSeries, count: int = CORRELATION.tail_lags
) -> tuple[int, int]:
    lags = usable_lags(series)
    lags = lags[lags >= 1]
    if len(lags) < MIN_FIT_LAGS:
        raise WindowTooNoisy(f"Only {len(lags)} lags pass the 3-sigma filter")
    tail = lags[-count:]
    return int(tail[0]), int(tail[-1])


def fit_decay(
    series: CorrelationSeries,
    window: tuple[int, int] | Literal["early", "tail"] = "early",
) -> DecayFit:
    """Least-squares rate of ln|C(n)| over lags in ``window`` (inclusive)."""
    if window == "early":
        window = CORRELATION.early_window
    elif window == "tail":
        window = tail_window(series)
    lo, hi = window
    if lo > hi:
        raise ParameterOutOfRange(f"Empty fit window {window}")

    lags = usable_lags(series)
    lags = lags[(lags >= lo) & (lags <= hi)]
    if len(lags) < MIN_FIT_LAGS:
        raise WindowTooNoisy(
            f"Only {len(lags)} lags in [{lo}, {hi}] pass the 3-sigma filter"
        )
    y = np.log(np.abs(series.values[lags]))
    slope, intercept = np.polyfit(lags.astype(float), y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * lags + intercept)) ** 2)))
    return DecayFit(float(-slope), (lo, hi), residual, tuple(int(n) for n in lags))


def _nudge(fmap: IntervalMap, x: Array) -> Array:
    bp = np.asarray(fmap.breakpoints)
    on = np.isin(x, bp)
    if not on.any():
        return x
    delta = NUDGE * fmap.domain.length
    shifted = np.where(x >= fmap.domain.hi, x - delta, x + delta)
    return np.where(on, shifted, x)


def _scalar_step(fmap: IntervalMap) -> Callable[[float], float]:
    if isinstance(fmap, PiecewiseLinearMarkovMap):
        bp = list(fmap.breakpoints)
        slopes, intercepts = fmap.slopes, fmap.intercepts
        last = fmap.size - 1
        lo, hi = bp[0], bp[-1]

        def step(x: float) -> float:
            k = min(max(bisect_right(bp, x) - 1, 0), last)
            return min(max(slopes[k] * x + intercepts[k], lo), hi)

        return step
    if isinstance(fmap, SmoothFullBranchMap):
        lo, hi = fmap.domain.lo, fmap.domain.hi

        def smooth_step(x: float) -> float:
            b = int(fmap.branch_of(x))
            return min(max(float(fmap.branch_eval(b, x)), lo), hi)

        return smooth_step
    return lambda x: float(fmap.step(np.asarray(x)))


def orbit(
    fmap: IntervalMap, x0: float, n: int, transient: int = 0, perturb: bool = True
) -> Array:
    """Points x_0 .. x_{n-1} after ``transient`` steps, off every breakpoint."""
    step = _scalar_step(fmap)
    breakpoints = set(fmap.breakpoints)
    delta = NUDGE * fmap.domain.length
    hi = fmap.domain.hi
    x = float(x0)
    points = np.empty(n)
    for i in range(transient + n):
        if x in breakpoints:
            if not perturb:
                raise DerivativeUndefined(f"Orbit hit breakpoint {x!r} at step {i}")
            x = x - delta if x >= hi else x + delta
        if i >= transient:
            points[i - transient] = x
        x = step(x)
    return points


def lyapunov_orbit(
    fmap: IntervalMap,
    x0: float,
    n: int,
    transient: int = 0,
    perturb: bool = True,
) -> float:
    if n < 1000:
        raise ParameterOutOfRange(f"Orbit length must be >= 1000, got {n}")
    points = orbit(fmap, x0, n, transient, perturb)
    return float(np.mean(np.log(np.abs(fmap.derivative(points)))))


@dataclass
class OrbitEstimate:
    value: float
    stderr: float
    orbits: int
    steps: int


def lyapunov_orbit_estimate(
    fmap: IntervalMap,
    steps: int = 10_000,
    orbits: int = 100,
    transient: int = CORRELATION.transient,
    seed: int = 0,
) -> OrbitEstimate:
    """Mean of ln|f'| over many orbits; stderr from the spread of orbit means."""
    if orbits < 2 or steps < 1:
        raise ParameterOutOfRange("Need at least two orbits of positive length")
    dom = fmap.domain
    rng = shard_rng(seed, 0)
    x = rng.uniform(dom.lo, dom.hi, size=orbits)
    for _ in range(transient):
        x = _dithered_step(fmap, _nudge(fmap, x), rng)
    totals = np.zeros(orbits)
    for _ in range(steps):
        x = _nudge(fmap, x)
        totals += np.log(np.abs(fmap.derivative(x)))
        x = _dithered_step(fmap, x, rng)
    means = totals / steps
    return OrbitEstimate(
        value=float(means.mean()),
        stderr=float(means.std(ddof=1) / np.sqrt(orbits)),
        orbits=orbits,
        steps=steps,
    )


@dataclass
class StepExperiment:
    h: float
    series: CorrelationSeries
    early: DecayFit | None
    tail: DecayFit | None


def step_observable_experiment(
    fmap: IntervalMap,
    hs: Sequence[float] = (0.0, 0.1, 0.25, 0.5),
    folded: bool = True,
    **options: Any,
) -> list[StepExperiment]:
    """Autocorrelation of the (folded) step observable for each jump size ``h``.

    ``options`` are passed to :func:`simulate`; both the early and the tail
    window are fitted, and a window too noisy to fit is recorded as None.
    """
    results = []
    for h in hs:
        obs = Observable.folded_step(h) if folded else Observable.step(h)
        series = simulate(fmap, obs, obs, **options)
        fits: dict[str, DecayFit | None] = {}
        for name in ("early", "tail"):
            try:
                fits[name] = fit_decay(series, name)
            except WindowTooNoisy as exc:
                log.warning("h=%s: %s window not fitted: %s", h, name, exc)
                fits[name] = None
        results.append(StepExperiment(float(h), series, fits["early"], fits["tail"]))
    return results
