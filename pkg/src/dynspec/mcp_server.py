from __future__ import annotations

from typing import Any

import numpy as np
from fastmcp import FastMCP

from .bounds import verify_bounds, verify_pressure_properties
from .chebyshev_transfer import (
    build,
    lyapunov_smooth,
    spectrum_vs_parameter,
    sweep_minimum,
    verify_smooth,
)
from .config import resolve_threads
from .linearize import level_trace
from .linearize import linearize as _linearize
from .map_model import PiecewiseLinearMarkovMap, SmoothFullBranchMap
from .mapfile import save_map
from .resources import resolve_map
from .spectral import lyapunov_exact, mixing_rate, pressure_curve
from .validate import validate_map as _validate_map

mcp = FastMCP("dynspec")


def _linear(path: str) -> PiecewiseLinearMarkovMap:
    fmap = resolve_map(path)
    if not isinstance(fmap, PiecewiseLinearMarkovMap):
        raise ValueError("This tool needs a piecewise_linear map")
    return fmap


def _smooth(path: str) -> SmoothFullBranchMap:
    fmap = resolve_map(path)
    if not isinstance(fmap, SmoothFullBranchMap):
        raise ValueError("This tool needs a smooth full-branch map")
    return fmap


@mcp.tool()
def validate_map(path: str) -> dict[str, Any]:
    """Check partition, Markov alignment and expansivity of a map file."""
    fmap = resolve_map(path)
    if isinstance(fmap, SmoothFullBranchMap):
        return {"ok": True, "map": fmap.to_dict()}
    return _validate_map(fmap).as_dict()


@mcp.tool()
def spectrum(path: str, degree: int = 2) -> dict[str, Any]:
    """Return block eigenvalues, pressure, Lyapunov exponent and mixing rate."""
    return mixing_rate(_linear(path), degree).as_dict()


@mcp.tool()
def pressure(path: str, betas: list[float] | None = None) -> dict[str, Any]:
    """Return the pressure P(beta) on a grid (default 0, 0.5, ..., 4)."""
    grid = betas if betas else list(np.linspace(0.0, 4.0, 9))
    return pressure_curve(_linear(path), grid, threads=resolve_threads(None)).as_dict()


@mcp.tool()
def lyapunov(path: str, order: int = 25) -> dict[str, Any]:
    """Return the Lyapunov exponent of a map."""
    fmap = resolve_map(path)
    if isinstance(fmap, PiecewiseLinearMarkovMap):
        return {"lyapunov": lyapunov_exact(fmap), "method": "invariant density"}
    return {"lyapunov": lyapunov_smooth(fmap, order), "method": "quadrature"}


@mcp.tool()
def linearize(path: str, level: int = 1, output: str | None = None) -> dict[str, Any]:
    """Linearize a smooth map on level-n cylinders; optionally write f_n."""
    F = _smooth(path)
    payload = level_trace(F, [level])[0].as_dict()
    payload["branches"] = F.branch_count**level
    if output:
        save_map(_linearize(F, level), output)
        payload["output"] = output
    return payload


@mcp.tool()
def cheb(path: str, order: int = 25, beta: float = 1.0, top: int = 8) -> dict[str, Any]:
    """Return the leading Chebyshev collocation eigenvalues of a smooth map."""
    values = build(_smooth(path), beta, order).eigenvalues()[: max(top, 2)]
    return {
        "order": order,
        "beta": beta,
        "eigenvalues": [[z.real, z.imag] for z in values],
        "subleading_modulus": abs(values[1]),
    }


@mcp.tool()
def sweep(
    c_min: float = -0.24,
    c_max: float = 0.49,
    c_step: float = 0.01,
    order: int = 25,
    top: int = 4,
) -> dict[str, Any]:
    """Sweep the Moebius family and locate the minimum of |lambda_1|."""
    if c_step <= 0 or c_min > c_max:
        raise ValueError("Sweep grid needs c_min <= c_max and a positive step")
    count = int(round((c_max - c_min) / c_step)) + 1
    grid = [round(c_min + i * c_step, 12) for i in range(count)]
    rows = spectrum_vs_parameter(grid, 1.0, order, top=top, threads=resolve_threads(None))
    c_best, modulus = sweep_minimum(rows)
    return {
        "rows": [[r.c, r.rank, r.eigenvalue.real, r.eigenvalue.imag] for r in rows],
        "minimum": {"c": c_best, "subleading_modulus": modulus},
    }


@mcp.tool()
def verify(path: str, degree: int = 2, order: int = 25, k_max: int = 10) -> dict[str, Any]:
    """Check every applicable bound and return the verdict with its failures."""
    fmap = resolve_map(path)
    if isinstance(fmap, SmoothFullBranchMap):
        return {"kind": "smooth", **verify_smooth(fmap, order, k_max).as_dict()}
    _validate_map(fmap).raise_for_errors()
    bounds = verify_bounds(fmap, max(degree, 2))
    props = verify_pressure_properties(fmap)
    return {
        "kind": "piecewise_linear",
        "ok": bounds.ok and props.ok,
        "bounds": bounds.as_dict(),
        "pressure": props.as_dict(),
        "failures": bounds.failures + props.failures,
    }


def main() -> None:
    """Run the dynspec MCP server over stdio."""
    mcp.run()
