from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import build_doubling, build_golden23, build_tent

from dynspec.bounds import BoundsVerdict, verify_bounds, verify_pressure_properties
from dynspec.correlation import shard_rng
from dynspec.errors import ParameterOutOfRange
from dynspec.random_maps import random_markov_map


def test_golden23_bounds() -> None:
    verdict = verify_bounds(build_golden23())
    assert verdict.ok, verdict.failures
    assert verdict.bound_2L and verdict.jensen_chain
    assert verdict.bound_1L is True
    assert verdict.nu_identity == 0.0
    assert verdict.minus_p2 == pytest.approx(verdict.alpha, rel=1e-10)
    assert verdict.minus_log_nu2 == verdict.minus_p3


def test_tent_bounds_to_degree_four() -> None:
    verdict = verify_bounds(build_tent(), degree=4)
    assert verdict.ok, verdict.failures
    assert verdict.bound_1L is None
    assert verdict.as_dict()["bound_1L"] == "n/a"
    assert verdict.alpha == pytest.approx(2.0 * verdict.lambda_exp, rel=1e-10)


def test_doubling_saturates_same_sign_bound() -> None:
    verdict = verify_bounds(build_doubling())
    assert verdict.ok, verdict.failures
    assert verdict.alpha == pytest.approx(math.log(2.0), rel=1e-10)
    assert verdict.minus_p2 == pytest.approx(verdict.lambda_exp, rel=1e-10)


def test_verdict_ok_tracks_failures() -> None:
    verdict = BoundsVerdict(
        alpha=1.0,
        lambda_exp=0.4,
        minus_p3=0.8,
        minus_log_nu2=0.8,
        bound_2L=False,
        jensen_chain=False,
        nu_identity=0.0,
        block_bound=-0.1,
        failures=["alpha=1.0 exceeds 2*Lambda=0.8"],
    )
    assert not verdict.ok
    assert verdict.as_dict()["failures"] == ["alpha=1.0 exceeds 2*Lambda=0.8"]


def test_pressure_properties_doubling() -> None:
    report = verify_pressure_properties(build_doubling())
    assert report.ok, report.failures
    assert report.convexity_gap <= 1e-9
    np.testing.assert_allclose(
        report.pressures, [(1.0 - b) * math.log(2.0) for b in report.betas], atol=1e-12
    )


def test_pressure_grid_range() -> None:
    with pytest.raises(ParameterOutOfRange):
        verify_pressure_properties(build_doubling(), beta_grid=[0.0, 5.0])


def _check_random_maps(count: int, seed: int) -> None:
    rng = shard_rng(seed, 0)
    for index in range(count):
        signs = ("mixed", "positive", "negative")[index % 3]
        fmap = random_markov_map(rng, signs=signs)
        verdict = verify_bounds(fmap, degree=4)
        assert verdict.ok, (fmap.to_dict(), verdict.failures)
        if signs != "mixed":
            assert verdict.bound_1L is True
        report = verify_pressure_properties(fmap)
        assert report.ok, (fmap.to_dict(), report.failures)


def test_bounds_on_random_maps() -> None:
    _check_random_maps(15, seed=31)


@pytest.mark.slow
def test_bounds_on_hundred_random_maps() -> None:
    _check_random_maps(100, seed=32)


def test_random_map_gives_up_with_typed_error() -> None:
    # Breakpoint gaps of at least MIN_GAP cap every slope at 50.
    with pytest.raises(ParameterOutOfRange, match="5 tries"):
        random_markov_map(shard_rng(3, 0), slope_range=(60.0, 70.0), max_tries=5)
