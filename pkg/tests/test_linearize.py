from __future__ import annotations

import math

import numpy as np
import pytest

from dynspec.bounds import verify_bounds
from dynspec.chebyshev_transfer import lyapunov_smooth
from dynspec.errors import LevelTooDeep, ParameterOutOfRange
from dynspec.linearize import (
    _l1_norm,
    cylinders,
    level_trace,
    linearize,
    nu2_eigenfunction,
)
from dynspec.map_model import moebius
from dynspec.transfer_matrix import apply, assemble
from dynspec.validate import validate_map


def test_cylinders_tile_the_domain() -> None:
    F = moebius(-0.11)
    cells = cylinders(F, 3)
    assert [c.word for c in cells[:3]] == [(0, 0, 0), (0, 0, 1), (0, 1, 0)]
    assert len(cells) == 8
    ordered = sorted(cells, key=lambda c: c.interval.lo)
    assert ordered[0].interval.lo == -1.0
    assert ordered[-1].interval.hi == 1.0
    for left, right in zip(ordered, ordered[1:]):
        assert left.interval.hi == right.interval.lo


def test_cylinders_map_onto_shifted_words() -> None:
    F = moebius(0.2)
    images = {c.word: c.interval for c in cylinders(F, 2)}
    for cell in cylinders(F, 3):
        b, rest = cell.word[0], cell.word[1:]
        ends = F.branch_eval(b, np.array([cell.interval.lo, cell.interval.hi]))
        np.testing.assert_allclose(
            sorted(ends), [images[rest].lo, images[rest].hi], atol=1e-12
        )


def test_cylinder_level_limits() -> None:
    F = moebius(0.0)
    with pytest.raises(ParameterOutOfRange):
        cylinders(F, 0)
    with pytest.raises(LevelTooDeep):
        cylinders(F, 13)
    assert len(cylinders(F, 4, cap=16)) == 16


def test_level_one_linearization_is_the_tent() -> None:
    fn = linearize(moebius(-0.11), 1)
    assert fn.breakpoints == (-1.0, 0.0, 1.0)
    assert fn.slopes == pytest.approx((2.0, -2.0))
    assert fn.intercepts == pytest.approx((1.0, 1.0))


def test_linearization_is_a_valid_markov_map() -> None:
    fn = linearize(moebius(-0.11), 4)
    assert fn.size == 16
    report = validate_map(fn)
    assert report.ok, report.errors
    assert report.checks["mixing"]


def test_linearizing_the_tent_keeps_slopes() -> None:
    fn = linearize(moebius(0.0), 3)
    np.testing.assert_allclose(np.abs(fn.slopes), 2.0, rtol=1e-12)


def test_level_trace_approaches_lyapunov() -> None:
    rows = level_trace(moebius(-0.11), range(1, 6))
    assert [row.level for row in rows] == [1, 2, 3, 4, 5]
    assert rows[0].lyapunov == pytest.approx(math.log(2.0), rel=1e-10)
    assert abs(rows[-1].lyapunov - 0.685) < abs(rows[0].lyapunov - 0.685)
    assert rows[-1].lyapunov == pytest.approx(0.685, abs=1e-2)
    for row in rows:
        # -ln nu_2 = -P(3) <= 2 Lambda
        assert row.nu2 >= row.exp_minus_2lambda - 1e-12
        assert row.mixing_rate <= 2.0 * row.lyapunov + 1e-9
        payload = row.as_dict()
        assert payload["nu2"] == row.nu2


def test_nu2_eigenfunction() -> None:
    sample = nu2_eigenfunction(moebius(-0.11), 3, samples=200)
    u = sample.polynomial
    assert _l1_norm(u) == pytest.approx(1.0, rel=1e-10)
    assert len(sample.discontinuities) == 7
    assert sample.u[np.argmax(np.abs(sample.u))] > 0
    T = assemble(u.fmap, 1.0, 2)
    np.testing.assert_allclose(
        apply(T, u).coefficients, sample.eigenvalue * u.coefficients, atol=1e-9
    )


def test_linearizations_pass_the_bound_chain_to_level_six() -> None:
    F = moebius(-0.11)
    for n in range(1, 7):
        fn = linearize(F, n)
        verdict = verify_bounds(fn, degree=4)
        assert verdict.ok, (n, verdict.failures)
        assert verdict.bound_1L is None
    [row] = level_trace(F, [6])
    assert row.nu2 >= row.exp_minus_2lambda - 1e-12
    assert row.lyapunov == pytest.approx(lyapunov_smooth(F, 25), abs=2e-2)
