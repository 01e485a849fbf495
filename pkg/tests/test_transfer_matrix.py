from __future__ import annotations

import numpy as np
import pytest
from conftest import build_golden23, build_tent

from dynspec.correlation import shard_rng
from dynspec.errors import DegreeOrder, DimensionMismatch
from dynspec.random_maps import random_markov_map
from dynspec.spectral import eigenvalues
from dynspec.transfer_matrix import (
    PiecewisePolynomial,
    apply,
    assemble,
    binomial,
    block,
    transfer_pointwise,
)


def test_binomial() -> None:
    assert binomial(5, 2) == 10
    assert binomial(60, 30) == 118264581564861424
    assert binomial(3, 5) == 0
    with pytest.raises(DegreeOrder):
        binomial(61, 1)


def test_block_golden23() -> None:
    fmap = build_golden23()
    np.testing.assert_allclose(
        block(fmap, 1.0, 0, 0), [[2.0 / 3.0, 0.5], [2.0 / 3.0, 0.0]], rtol=1e-15
    )
    with pytest.raises(DegreeOrder):
        block(fmap, 1.0, 2, 1)


def test_degree_shift_identity_is_exact() -> None:
    rng = shard_rng(3, 0)
    maps = [build_golden23(), build_tent()] + [random_markov_map(rng) for _ in range(20)]
    for fmap in maps:
        for beta in (0.5, 1.0, 2.0):
            assert np.array_equal(block(fmap, beta, 2, 2), block(fmap, beta + 2.0, 0, 0))


def test_assembled_matrix_is_block_upper_triangular() -> None:
    fmap = build_golden23()
    T = assemble(fmap, 1.0, 3)
    assert T.dimension == 8
    dense = T.matrix
    for m in range(4):
        for n in range(4):
            tile = dense[2 * m : 2 * m + 2, 2 * n : 2 * n + 2]
            if m > n:
                assert not tile.any()
            else:
                np.testing.assert_array_equal(tile, T.block(m, n))
    with pytest.raises(ValueError):
        T.blocks[0, 0, 0, 0] = 1.0


def test_vector_layout_is_degree_major() -> None:
    fmap = build_golden23()
    p = PiecewisePolynomial.from_vector([1.0, 2.0, 3.0, 4.0], fmap)
    np.testing.assert_array_equal(p.coefficients, [[1.0, 3.0], [2.0, 4.0]])
    np.testing.assert_array_equal(p.to_vector(), [1.0, 2.0, 3.0, 4.0])
    assert p(np.array(0.5)) == pytest.approx(1.0 + 3.0 * 0.5)
    assert p(np.array(0.9)) == pytest.approx(2.0 + 4.0 * 0.9)


def test_integral_of_invariant_density() -> None:
    h = PiecewisePolynomial.constant([9.0 / 8.0, 0.75], build_golden23())
    assert h.integral() == pytest.approx(1.0)


@pytest.mark.parametrize("builder", [build_golden23, build_tent])
def test_apply_matches_pointwise_transfer(builder) -> None:
    fmap = builder()
    rng = shard_rng(5, 0)
    p = PiecewisePolynomial(rng.normal(size=(fmap.size, 4)), fmap)
    x = np.linspace(0.013, 0.987, 37)
    for beta in (0.5, 1.0, 2.5):
        T = assemble(fmap, beta, 4)
        np.testing.assert_allclose(
            apply(T, p)(x), transfer_pointwise(fmap, p, x, beta), rtol=1e-11, atol=1e-10
        )


def test_apply_rejects_mismatches() -> None:
    fmap = build_golden23()
    T = assemble(fmap, 1.0, 2)
    with pytest.raises(DimensionMismatch):
        apply(T, PiecewisePolynomial(np.ones((2, 4)), fmap))
    with pytest.raises(DimensionMismatch):
        apply(T, PiecewisePolynomial(np.ones((2, 2)), build_tent()))
    with pytest.raises(DimensionMismatch):
        PiecewisePolynomial(np.ones((3, 2)), fmap)


def _nonzero(values) -> list[complex]:
    return [complex(z) for z in values if abs(z) > 1e-3]


def _assert_contained(inner: list[complex], outer: list[complex], tol: float) -> None:
    remaining = list(outer)
    for z in inner:
        k = int(np.argmin([abs(z - w) for w in remaining]))
        assert abs(z - remaining.pop(k)) < tol, (z, outer)


def test_spectrum_is_union_of_diagonal_blocks_and_nests() -> None:
    rng = shard_rng(41, 0)
    for _ in range(50):
        fmap = random_markov_map(rng)
        T = assemble(fmap, 1.0, 3)
        full = _nonzero(eigenvalues(T.matrix))
        union = _nonzero(
            np.concatenate([eigenvalues(T.diagonal(m)) for m in range(4)])
        )
        assert len(full) == len(union)
        _assert_contained(full, union, 1e-8)
        larger = _nonzero(eigenvalues(assemble(fmap, 1.0, 4).matrix))
        _assert_contained(full, larger, 1e-8)


def test_same_sign_degree_one_identity() -> None:
    rng = shard_rng(43, 0)
    for signs, s in (("positive", 1.0), ("negative", -1.0)):
        for _ in range(10):
            fmap = random_markov_map(rng, signs=signs)
            assert fmap.same_sign == s
            for beta in (0.5, 1.0, 2.0):
                np.testing.assert_array_equal(
                    block(fmap, beta, 1, 1), s * block(fmap, beta + 1.0, 0, 0)
                )


def test_apply_matches_pointwise_transfer_on_random_maps() -> None:
    rng = shard_rng(47, 0)
    fractions = np.array([0.17, 0.5, 0.83])
    for _ in range(50):
        fmap = random_markov_map(rng)
        bp = np.asarray(fmap.breakpoints)
        x = (bp[:-1, None] + fractions * np.diff(bp)[:, None]).ravel()
        p = PiecewisePolynomial(rng.normal(size=(fmap.size, 4)), fmap)
        T = assemble(fmap, 1.0, 3)
        np.testing.assert_allclose(
            apply(T, p)(x), transfer_pointwise(fmap, p, x, 1.0), rtol=1e-10, atol=1e-9
        )
