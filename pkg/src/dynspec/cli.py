from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from typing import Any, Literal

import numpy as np

from .bounds import verify_bounds, verify_pressure_properties
from .chebyshev_transfer import (
    SweepRow,
    build,
    invariant_density_smooth,
    lyapunov_smooth,
    spectrum_vs_parameter,
    sweep_minimum,
    verify_smooth,
)
from .config import CORRELATION, resolve_threads
from .correlation import (
    Observable,
    fit_decay,
    lyapunov_orbit_estimate,
    simulate,
)
from .errors import MapFileError, NumericalError, WindowTooNoisy
from .export import (
    blocks_csv,
    correlation_csv,
    density_csv,
    eigenfunction_csv,
    eigenvalues_csv,
    emit,
    level_trace_csv,
    matrix_csv,
    pressure_csv,
    sweep_csv,
    to_json,
)
from .linearize import level_trace, linearize, nu2_eigenfunction
from .logging import get_logger, set_verbosity
from .map_model import PiecewiseLinearMarkovMap, SmoothFullBranchMap
from .mapfile import AnyMap, save_map
from .resources import EXAMPLE_PREFIX, resolve_map
from .spectral import (
    block_spectrum,
    leading_eigenvalue,
    lyapunov_exact,
    mixing_rate,
    pressure_curve,
)
from .transfer_matrix import assemble
from .validate import validate_map

log = get_logger(__name__)

Command = Literal[
    "validate",
    "spectrum",
    "pressure",
    "lyapunov",
    "linearize",
    "cheb",
    "sweep",
    "correlate",
    "verify",
]

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


@dataclass(frozen=True)
class RunConfig:
    command: Command
    map_path: str | None = None
    beta: float = 1.0
    degree: int = 2
    order: int = 25
    level: int = 1
    betas: str | None = None
    c_min: float = -0.24
    c_max: float = 0.49
    c_step: float = 0.01
    top: int = 8
    observable: str = "identity"
    h: float = 0.0
    n_max: int = CORRELATION.n_max
    ensemble: int = CORRELATION.ensemble
    length: int = CORRELATION.length
    transient: int = CORRELATION.transient
    seed: int = 0
    shards: int = CORRELATION.shards
    fit: str = "early"
    orbit: int | None = None
    k_max: int = 10
    emit: str | None = None
    trace: bool = False
    eigenfunctions: bool = False
    density: bool = False
    dump_matrix: str | None = None
    dump_blocks: str | None = None
    output: str | None = None
    format: str = "json"
    pretty: bool = False
    threads: int | None = None

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        values = vars(args)
        return cls(**{f.name: values[f.name] for f in fields(cls) if f.name in values})

    def check(self) -> None:
        positive = {
            "degree": self.degree + 1,
            "order": self.order,
            "level": self.level,
            "top": self.top - 1,
            "ensemble": self.ensemble,
            "length": self.length,
            "shards": self.shards,
            "k_max": self.k_max,
        }
        for name, value in positive.items():
            if value < 1:
                raise MapFileError(f"--{name.replace('_', '-')} is out of range")
        if self.c_step <= 0 or self.c_min > self.c_max:
            raise MapFileError("Sweep grid needs c_min <= c_max and a positive step")
        if self.orbit is not None and self.orbit < 1000:
            raise MapFileError("--orbit needs at least 1000 steps")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dynspec",
        description="Transfer-operator spectra, pressure and mixing rates of interval maps.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="Log progress (-vv for debug)"
    )
    parser.add_argument(
        "--threads", type=int, help="Worker threads (default: DYN_SPEC_THREADS or CPU count)"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_map(sub: argparse.ArgumentParser) -> None:
        sub.add_argument(
            "map_path", help=f"Map JSON path or fsspec URI, or {EXAMPLE_PREFIX}<name>"
        )

    def add_output(sub: argparse.ArgumentParser, csv: bool = True) -> None:
        sub.add_argument("--output", help="Optional output path (default: stdout)")
        sub.add_argument(
            "--format",
            choices=["json", "csv"] if csv else ["json"],
            default="json",
        )
        sub.add_argument("--pretty", action="store_true", help="Pretty-print JSON")

    validate_parser = subparsers.add_parser(
        "validate", help="Check partition, Markov alignment and expansivity"
    )
    add_map(validate_parser)

    spectrum_parser = subparsers.add_parser(
        "spectrum", help="Block eigenvalues, leading eigenvalue and mixing rate"
    )
    add_map(spectrum_parser)
    spectrum_parser.add_argument("--beta", type=float, default=1.0)
    spectrum_parser.add_argument("--degree", type=int, default=2)
    spectrum_parser.add_argument("--dump-matrix", help="Write the assembled matrix CSV")
    spectrum_parser.add_argument("--dump-blocks", help="Write the block CSV")
    add_output(spectrum_parser)

    pressure_parser = subparsers.add_parser("pressure", help="Pressure P(beta) on a grid")
    add_map(pressure_parser)
    pressure_parser.add_argument(
        "--betas", help="Comma-separated beta values (default 0,0.5,...,4)"
    )
    add_output(pressure_parser)

    lyapunov_parser = subparsers.add_parser("lyapunov", help="Lyapunov exponent")
    add_map(lyapunov_parser)
    lyapunov_parser.add_argument("--order", type=int, default=25)
    lyapunov_parser.add_argument(
        "--orbit", type=int, help="Also estimate from orbits with this many steps each"
    )
    lyapunov_parser.add_argument("--seed", type=int, default=0)
    add_output(lyapunov_parser, csv=False)

    linearize_parser = subparsers.add_parser(
        "linearize", help="Piecewise linear approximation on cylinder sets"
    )
    add_map(linearize_parser)
    linearize_parser.add_argument("--level", type=int, default=1)
    linearize_parser.add_argument("--emit", help="Write f_n as a map file")
    linearize_parser.add_argument(
        "--trace", action="store_true", help="Eigenvalue trace for levels 1..level"
    )
    linearize_parser.add_argument(
        "--eigenfunctions",
        action="store_true",
        help="Sampled nu_2 eigenfunctions for levels 1..level",
    )
    add_output(linearize_parser)

    cheb_parser = subparsers.add_parser("cheb", help="Chebyshev collocation spectrum")
    add_map(cheb_parser)
    cheb_parser.add_argument("--order", type=int, default=25)
    cheb_parser.add_argument("--beta", type=float, default=1.0)
    cheb_parser.add_argument("--top", type=int, default=8)
    cheb_parser.add_argument(
        "--density", action="store_true", help="Emit the invariant density at the nodes"
    )
    add_output(cheb_parser)

    sweep_parser = subparsers.add_parser(
        "sweep", help="Leading eigenvalues of the Moebius family against c"
    )
    sweep_parser.add_argument("--c-min", type=float, default=-0.24)
    sweep_parser.add_argument("--c-max", type=float, default=0.49)
    sweep_parser.add_argument("--c-step", type=float, default=0.01)
    sweep_parser.add_argument("--order", type=int, default=25)
    sweep_parser.add_argument("--beta", type=float, default=1.0)
    sweep_parser.add_argument("--top", type=int, default=8)
    add_output(sweep_parser)

    correlate_parser = subparsers.add_parser(
        "correlate", help="Monte Carlo autocorrelation function"
    )
    add_map(correlate_parser)
    correlate_parser.add_argument(
        "--observable", choices=["identity", "step", "folded-step"], default="identity"
    )
    correlate_parser.add_argument("--h", type=float, default=0.0, help="Step size")
    correlate_parser.add_argument("--n-max", type=int, default=CORRELATION.n_max)
    correlate_parser.add_argument("--ensemble", type=int, default=CORRELATION.ensemble)
    correlate_parser.add_argument("--length", type=int, default=CORRELATION.length)
    correlate_parser.add_argument("--transient", type=int, default=CORRELATION.transient)
    correlate_parser.add_argument("--seed", type=int, default=0)
    correlate_parser.add_argument("--shards", type=int, default=CORRELATION.shards)
    correlate_parser.add_argument(
        "--fit", choices=["early", "tail", "none"], default="early"
    )
    add_output(correlate_parser)

    verify_parser = subparsers.add_parser(
        "verify", help="Check every applicable bound; exit 1 on failure"
    )
    add_map(verify_parser)
    verify_parser.add_argument("--degree", type=int, default=2)
    verify_parser.add_argument("--order", type=int, default=25)
    verify_parser.add_argument("--k-max", type=int, default=10)
    add_output(verify_parser, csv=False)

    args = parser.parse_args(argv)
    set_verbosity(args.verbose)

    try:
        config = RunConfig.from_namespace(args)
        config.check()
        return run(config)
    except NumericalError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, FileNotFoundError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run(config: RunConfig) -> int:
    if config.command == "validate":
        return _handle_validate(config)
    if config.command == "spectrum":
        return _handle_spectrum(config)
    if config.command == "pressure":
        return _handle_pressure(config)
    if config.command == "lyapunov":
        return _handle_lyapunov(config)
    if config.command == "linearize":
        return _handle_linearize(config)
    if config.command == "cheb":
        return _handle_cheb(config)
    if config.command == "sweep":
        return _handle_sweep(config)
    if config.command == "correlate":
        return _handle_correlate(config)
    if config.command == "verify":
        return _handle_verify(config)
    raise MapFileError(f"Unknown command {config.command!r}")


def _handle_validate(config: RunConfig) -> int:
    fmap = resolve_map(config.map_path)
    if isinstance(fmap, SmoothFullBranchMap):
        print(f"Validation OK ({fmap.family} map, parameters {fmap.parameters()})")
        return EXIT_OK

    report = validate_map(fmap)
    if report.ok:
        print("Validation OK")
        if report.transition is not None:
            print(f"- transition matrix: {report.transition.entries.tolist()}")
            print(f"- mixing power: {report.transition.mixing_power}")
        for warning in report.warnings:
            print(f"- warning: {warning}")
        return EXIT_OK

    print("Validation failed:")
    for error in report.errors:
        print(f"- {error}")
    for warning in report.warnings:
        print(f"- warning: {warning}")
    return EXIT_INPUT


def _handle_spectrum(config: RunConfig) -> int:
    fmap = _require_linear(resolve_map(config.map_path), "spectrum")
    if config.dump_matrix or config.dump_blocks:
        T = assemble(fmap, config.beta, config.degree)
        if config.dump_matrix:
            emit(matrix_csv(T), config.dump_matrix)
            print(f"Wrote {config.dump_matrix}")
        if config.dump_blocks:
            emit(blocks_csv(T), config.dump_blocks)
            print(f"Wrote {config.dump_blocks}")

    if config.beta == 1.0 and config.degree >= 2:
        report = mixing_rate(fmap, config.degree)
        spectrum = report.spectrum
        payload = report.as_dict()
    else:
        spectrum = block_spectrum(fmap, config.beta, config.degree)
        leading = leading_eigenvalue(fmap, config.beta)
        payload = {
            "beta": config.beta,
            "degree": config.degree,
            "leading": leading,
            "pressure": float(np.log(leading)),
            "eigenvalues": [[z.real, z.imag, m] for z, m in spectrum],
        }

    if config.format == "csv":
        return _write(eigenvalues_csv(spectrum), config)
    return _write(to_json(payload, config.pretty), config)


def _handle_pressure(config: RunConfig) -> int:
    fmap = _require_linear(resolve_map(config.map_path), "pressure")
    betas = _parse_floats(config.betas) if config.betas else list(np.linspace(0.0, 4.0, 9))
    curve = pressure_curve(fmap, betas, threads=resolve_threads(config.threads))
    if config.format == "csv":
        return _write(pressure_csv(curve.betas, curve.pressures), config)
    return _write(to_json(curve.as_dict(), config.pretty), config)


def _handle_lyapunov(config: RunConfig) -> int:
    fmap = resolve_map(config.map_path)
    payload: dict[str, Any] = {}
    if isinstance(fmap, PiecewiseLinearMarkovMap):
        payload["lyapunov"] = lyapunov_exact(fmap)
        payload["method"] = "invariant density"
    else:
        payload["lyapunov"] = lyapunov_smooth(fmap, config.order)
        payload["method"] = f"quadrature, Chebyshev order {config.order}"
    if config.orbit:
        estimate = lyapunov_orbit_estimate(fmap, steps=config.orbit, seed=config.seed)
        payload["orbit"] = {
            "value": estimate.value,
            "stderr": estimate.stderr,
            "orbits": estimate.orbits,
            "steps": estimate.steps,
        }
    return _write(to_json(payload, config.pretty), config)


def _handle_linearize(config: RunConfig) -> int:
    F = _require_smooth(resolve_map(config.map_path), "linearize")
    levels = range(1, config.level + 1)

    if config.emit:
        save_map(linearize(F, config.level), config.emit)
        print(f"Wrote {config.emit}")

    if config.trace:
        rows = level_trace(F, levels)
        if config.format == "csv":
            return _write(level_trace_csv(rows), config)
        return _write(to_json([row.as_dict() for row in rows], config.pretty), config)

    if config.eigenfunctions:
        samples = [nu2_eigenfunction(F, n) for n in levels]
        if config.format == "csv":
            return _write(eigenfunction_csv(samples), config)
        payload = [
            {
                "level": s.level,
                "eigenvalue": s.eigenvalue,
                "discontinuities": list(s.discontinuities),
                "x": s.x.tolist(),
                "u": s.u.tolist(),
            }
            for s in samples
        ]
        return _write(to_json(payload, config.pretty), config)

    if config.emit:
        return EXIT_OK
    row = level_trace(F, [config.level])[0]
    payload = row.as_dict()
    payload["branches"] = F.branch_count**config.level
    return _write(to_json(payload, config.pretty), config)


def _handle_cheb(config: RunConfig) -> int:
    F = _require_smooth(resolve_map(config.map_path), "cheb")
    if config.density:
        density = invariant_density_smooth(F, config.order)
        if config.format == "csv":
            return _write(density_csv(density.nodes, density.values), config)
        payload = {"x": density.nodes.tolist(), "h": density.values.tolist()}
        return _write(to_json(payload, config.pretty), config)

    op = build(F, config.beta, config.order)
    values = op.eigenvalues()[: config.top]
    c = float(F.parameters().get("c", np.nan))
    if config.format == "csv":
        rows = [SweepRow(c, rank, complex(z)) for rank, z in enumerate(values)]
        return _write(sweep_csv(rows), config)

    payload: dict[str, Any] = {
        "map": F.to_dict(),
        "order": config.order,
        "beta": config.beta,
        "eigenvalues": [[z.real, z.imag] for z in values],
        "leading": [values[0].real, values[0].imag],
        "subleading": [values[1].real, values[1].imag],
        "subleading_modulus": abs(values[1]),
    }
    if config.beta == 1.0:
        payload["mixing_rate"] = float(-np.log(abs(values[1])))
        payload["lyapunov"] = lyapunov_smooth(F, config.order)
    return _write(to_json(payload, config.pretty), config)


def _handle_sweep(config: RunConfig) -> int:
    count = int(round((config.c_max - config.c_min) / config.c_step)) + 1
    grid = [round(config.c_min + i * config.c_step, 12) for i in range(count)]
    rows = spectrum_vs_parameter(
        grid,
        config.beta,
        config.order,
        top=config.top,
        threads=resolve_threads(config.threads),
    )
    if config.format == "csv":
        return _write(sweep_csv(rows), config)
    c_best, modulus = sweep_minimum(rows)
    payload = {
        "order": config.order,
        "beta": config.beta,
        "rows": [
            [r.c, r.rank, r.eigenvalue.real, r.eigenvalue.imag, r.modulus, r.sign]
            for r in rows
        ],
        "minimum": {"c": c_best, "subleading_modulus": modulus},
    }
    return _write(to_json(payload, config.pretty), config)


def _handle_correlate(config: RunConfig) -> int:
    fmap = resolve_map(config.map_path)
    if config.observable == "step":
        obs = Observable.step(config.h)
    elif config.observable == "folded-step":
        obs = Observable.folded_step(config.h)
    else:
        obs = Observable.identity()
    series = simulate(
        fmap,
        obs,
        obs,
        n_max=config.n_max,
        ensemble=config.ensemble,
        length=config.length,
        transient=config.transient,
        seed=config.seed,
        shards=config.shards,
        threads=resolve_threads(config.threads),
    )
    if config.format == "csv":
        return _write(correlation_csv(series), config)

    payload: dict[str, Any] = {"observable": obs.label, "series": series.as_dict()}
    if config.fit != "none":
        try:
            payload["fit"] = fit_decay(series, config.fit).as_dict()  # type: ignore[arg-type]
        except WindowTooNoisy as exc:
            payload["fit"] = {"error": str(exc)}
    return _write(to_json(payload, config.pretty), config)


def _handle_verify(config: RunConfig) -> int:
    fmap = resolve_map(config.map_path)
    if isinstance(fmap, SmoothFullBranchMap):
        verdict = verify_smooth(fmap, config.order, config.k_max)
        payload = {"kind": "smooth", **verdict.as_dict()}
        ok = verdict.ok
    else:
        report = validate_map(fmap)
        report.raise_for_errors()
        bounds = verify_bounds(fmap, max(config.degree, 2))
        pressure = verify_pressure_properties(fmap)
        ok = bounds.ok and pressure.ok
        payload = {
            "kind": "piecewise_linear",
            "ok": ok,
            "bounds": bounds.as_dict(),
            "pressure": pressure.as_dict(),
            "failures": bounds.failures + pressure.failures,
        }
    _write(to_json(payload, config.pretty), config)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def _require_linear(fmap: AnyMap, command: str) -> PiecewiseLinearMarkovMap:
    if not isinstance(fmap, PiecewiseLinearMarkovMap):
        raise MapFileError(
            f"'{command}' needs a piecewise_linear map; use 'cheb' or 'linearize' "
            "for smooth maps"
        )
    return fmap


def _require_smooth(fmap: AnyMap, command: str) -> SmoothFullBranchMap:
    if not isinstance(fmap, SmoothFullBranchMap):
        raise MapFileError(f"'{command}' needs a smooth full-branch map")
    return fmap


def _parse_floats(value: str) -> list[float]:
    try:
        return [float(token) for token in value.split(",") if token.strip()]
    except ValueError as exc:
        raise MapFileError(f"Expected comma-separated numbers, got {value!r}") from exc


def _write(text: str, config: RunConfig) -> int:
    emit(text, config.output)
    if config.output:
        print(f"Wrote {config.output}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
