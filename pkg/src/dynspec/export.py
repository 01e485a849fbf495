"""CSV and JSON renderings of results.

Every writer returns text; floats go through ``repr`` so identical inputs
give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, Sequence

import numpy as np

from .chebyshev_transfer import SweepRow
from .correlation import CorrelationSeries
from .linearize import EigenfunctionSample, LevelTraceRow
from .storage import write_text
from .transfer_matrix import BlockTransferMatrix


def _csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
        )
    return buffer.getvalue()


def matrix_csv(T: BlockTransferMatrix) -> str:
    dense = T.matrix
    return _csv(
        ("row", "col", "value"),
        ((i, j, dense[i, j]) for i in range(dense.shape[0]) for j in range(dense.shape[1])),
    )


def blocks_csv(T: BlockTransferMatrix) -> str:
    def rows() -> Iterable[tuple[Any, ...]]:
        for n in range(T.degree + 1):
            for m in range(n + 1):
                blk = T.block(m, n)
                for k in range(T.size):
                    for col in range(T.size):
                        yield m, n, k, col, blk[k, col]

    return _csv(("m", "n", "k", "l", "value"), rows())


def eigenvalues_csv(spectrum: Sequence[tuple[complex, int]]) -> str:
    return _csv(
        ("m", "re", "im", "modulus"),
        ((m, z.real, z.imag, abs(z)) for z, m in spectrum),
    )


def pressure_csv(betas: Sequence[float], pressures: Sequence[float]) -> str:
    return _csv(("beta", "P"), zip(map(float, betas), map(float, pressures)))


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    return _csv(
        ("c", "rank", "re", "im", "modulus"),
        (
            (r.c, r.rank, r.eigenvalue.real, r.eigenvalue.imag, r.modulus)
            for r in rows
        ),
    )


def density_csv(x: Sequence[float], h: Sequence[float]) -> str:
    return _csv(("x", "h(x)"), zip(map(float, x), map(float, h)))


def correlation_csv(series: CorrelationSeries) -> str:
    return _csv(
        ("n", "C", "Cnorm", "stderr"),
        zip(
            series.lags.tolist(),
            series.values.tolist(),
            series.normalized.tolist(),
            series.stderr.tolist(),
        ),
    )


def level_trace_csv(rows: Sequence[LevelTraceRow]) -> str:
    header = ("level", "nu0_subl", "nu1", "nu2", "exp_minus_lambda", "exp_minus_2lambda")
    return _csv(
        header,
        (
            (
                r.level,
                abs(r.nu0_subleading),
                abs(r.nu1),
                r.nu2,
                r.exp_minus_lambda,
                r.exp_minus_2lambda,
            )
            for r in rows
        ),
    )


def eigenfunction_csv(samples: Sequence[EigenfunctionSample]) -> str:
    return _csv(
        ("level", "x", "u"),
        ((s.level, float(x), float(u)) for s in samples for x, u in zip(s.x, s.u)),
    )


def to_json(payload: Any, pretty: bool = False) -> str:
    return json.dumps(payload, indent=2 if pretty else None) + "\n"


def emit(text: str, output: str | None) -> None:
    if output:
        write_text(output, text)
    else:
        print(text, end="")
