from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import MapFileError

THREADS_ENV = "DYN_SPEC_THREADS"

ALIGNMENT_TOL = 1e-9
MIXING_POWER_CAP = 64
FD_STEP = 1e-4
PERRON_TOL = 1e-13
PERRON_MAX_ITER = 100_000
BINOMIAL_MAX_DEGREE = 60
CYLINDER_CAP = 4096
BISECTION_TOL = 1e-14
CHEB_MIN_ORDER = 4
QUADRATURE_POINTS = 64
# Sample points per branch composition when minimising |(F^k)'|.
INF_GRID_POINTS = 2**14


@dataclass(frozen=True)
class CorrelationDefaults:
    ensemble: int = 1_000_000
    length: int = 2_000
    transient: int = 100
    n_max: int = 20
    shards: int = 16
    budget: int = 10**11
    early_window: tuple[int, int] = (1, 5)
    tail_lags: int = 8


CORRELATION = CorrelationDefaults()


def resolve_threads(explicit: int | None = None) -> int:
    if explicit is not None:
        if explicit < 1:
            raise MapFileError("--threads must be a positive integer")
        return explicit
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise MapFileError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        if value < 1:
            raise MapFileError(f"{THREADS_ENV} must be positive, got {value}")
        return value
    return os.cpu_count() or 1
