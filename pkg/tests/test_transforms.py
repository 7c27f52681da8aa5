"""Operator construction, dense vs factored paths, materialization."""

import itertools
import math

import numpy as np
import pytest

from kronjl.errors import ShapeError
from kronjl.fwht import hadamard_matrix
from kronjl.indexing import KronDims, PartialIndex, linearize
from kronjl.transforms import (
    KfjltOperator,
    RademacherFactors,
    SampleSet,
    apply_dense,
    apply_dense_mat,
    apply_factored,
    build_operator,
    gaussian_baseline,
    kron_materialize,
    materialize,
)


def _brute_matrix(op):
    # independent oracle: entry-by-entry construction through the index
    # algebra, H_full[L(i)-1, L(j)-1] = prod_l H_l[i_l-1, j_l-1]
    dims = op.dims
    n = dims.total
    hs = [hadamard_matrix(nl) for nl in dims]
    h_full = np.zeros((n, n))
    ranges = [range(1, nl + 1) for nl in dims]
    for i_coords in itertools.product(*ranges):
        li = linearize(dims, PartialIndex.full(i_coords))
        for j_coords in itertools.product(*ranges):
            lj = linearize(dims, PartialIndex.full(j_coords))
            h_full[li - 1, lj - 1] = math.prod(
                h[ic - 1, jc - 1] for h, ic, jc in zip(hs, i_coords, j_coords)
            )
    signs = np.zeros(n)
    for j_coords in itertools.product(*ranges):
        lj = linearize(dims, PartialIndex.full(j_coords))
        signs[lj - 1] = math.prod(
            f[c - 1] for f, c in zip(op.signs.factors, j_coords)
        )
    return op.scale * h_full[op.samples.rows - 1] * signs[None, :]


def test_kron_materialize_frozen_example():
    out = kron_materialize([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    assert np.array_equal(out, [0.0, 0.0, 1.0, 0.0])


def test_kron_materialize_matches_vectorized_outer():
    rng = np.random.default_rng(5)
    xs = [rng.standard_normal(n) for n in (3, 2, 4)]
    grid = np.multiply.outer(np.multiply.outer(xs[0], xs[1]), xs[2])
    from kronjl.indexing import vectorize

    assert np.allclose(
        kron_materialize(xs), vectorize(KronDims((3, 2, 4)), grid)
    )


def test_build_operator_determinism():
    a = build_operator((4, 8), 6, seed=123)
    b = build_operator((4, 8), 6, seed=123)
    assert np.array_equal(a.samples.rows, b.samples.rows)
    for fa, fb in zip(a.signs.factors, b.signs.factors):
        assert np.array_equal(fa, fb)


def test_seeds_give_distinct_samples():
    seen = set()
    for seed in range(100):
        op = build_operator((16, 16), 12, seed=seed)
        seen.add(tuple(op.samples.rows))
    assert len(seen) == 100


def test_build_operator_validation():
    with pytest.raises(ShapeError):
        build_operator((3, 4), 2, seed=0)  # non power of two
    with pytest.raises(ShapeError):
        build_operator((4, 4), 0, seed=0)


def test_m_larger_than_n_allowed():
    op = build_operator((2, 2), 9, seed=1)
    assert op.m == 9
    assert op.scale == math.sqrt(4 / 9)


def test_sample_rows_in_range_and_with_replacement():
    op = build_operator((2,), 64, seed=7)
    assert op.samples.rows.min() >= 1 and op.samples.rows.max() <= 2
    # 64 draws from {1,2} must repeat
    assert len(set(op.samples.rows)) < 64


def test_apply_dense_matches_brute_matrix():
    rng = np.random.default_rng(17)
    for dims in [(2, 2), (4, 2), (2, 4, 2), (8,)]:
        op = build_operator(dims, 5, seed=rng.integers(10**6))
        mat = _brute_matrix(op)
        for _ in range(3):
            x = rng.standard_normal(op.dims.total)
            assert np.max(np.abs(apply_dense(op, x) - mat @ x)) <= 1e-10


def test_materialize_matches_brute_matrix():
    for dims in [(2, 2), (4, 2, 2)]:
        op = build_operator(dims, 7, seed=99)
        assert np.max(np.abs(materialize(op) - _brute_matrix(op))) <= 1e-12


def test_factored_equals_dense_on_rank_one():
    rng = np.random.default_rng(23)
    for _ in range(50):
        d = rng.integers(1, 4)
        dims = tuple(int(2 ** rng.integers(1, 5)) for _ in range(d))
        m = int(rng.integers(1, 2 * math.prod(dims)))
        op = build_operator(dims, m, seed=int(rng.integers(10**9)))
        factors = [rng.standard_normal(n) for n in dims]
        dense = apply_dense(op, kron_materialize(factors))
        fact = apply_factored(op, factors)
        scale = max(1.0, np.max(np.abs(dense)))
        assert np.max(np.abs(dense - fact)) <= 1e-10 * scale


def test_apply_dense_mat_matches_rowwise():
    rng = np.random.default_rng(31)
    op = build_operator((4, 4, 2), 9, seed=5)
    xs = rng.standard_normal((6, 32))
    batch = apply_dense_mat(op, xs)
    for i in range(6):
        assert np.allclose(batch[i], apply_dense(op, xs[i]), atol=1e-12)


def test_duplicate_rows_counted_twice():
    dims = KronDims((4,))
    signs = RademacherFactors((np.ones(4),))
    samples = SampleSet(np.array([2, 2]), total=4)
    op = KfjltOperator(dims=dims, signs=signs, samples=samples)
    x = np.array([1.0, 2.0, 3.0, 4.0])
    y = apply_dense(op, x)
    assert y[0] == y[1]
    h = hadamard_matrix(4)
    assert np.isclose(y[0], math.sqrt(4 / 2) * (h @ x)[1])


def test_operator_validation():
    dims = KronDims((4,))
    with pytest.raises(ShapeError):
        RademacherFactors((np.array([1.0, 0.5]),))
    with pytest.raises(ShapeError):
        SampleSet(np.array([0]), total=4)
    with pytest.raises(ShapeError):
        SampleSet(np.array([5]), total=4)
    with pytest.raises(ShapeError):
        KfjltOperator(
            dims=dims,
            signs=RademacherFactors((np.ones(2),)),
            samples=SampleSet(np.array([1]), total=4),
        )
    with pytest.raises(ShapeError):
        apply_dense(build_operator((4,), 2, seed=0), np.ones(5))
    with pytest.raises(ShapeError):
        apply_factored(build_operator((4, 2), 2, seed=0), [np.ones(4)])


def test_gaussian_baseline():
    g1 = gaussian_baseline(8, 32, seed=4)
    g2 = gaussian_baseline(8, 32, seed=4)
    assert np.array_equal(g1.matrix, g2.matrix)
    assert g1.matrix.shape == (8, 32)
    # row norms concentrate around N/m scaling: E||Ax||^2 = ||x||^2
    rng = np.random.default_rng(0)
    xs = rng.standard_normal((200, 32))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    vals = [np.linalg.norm(gaussian_baseline(8, 32, seed=s).apply(x)) ** 2
            for s, x in enumerate(xs)]
    assert abs(np.mean(vals) - 1.0) < 0.15


def test_unit_norm_preserved_in_expectation():
    # sanity: with the full sample (m = N, every row once) the operator is
    # orthonormal times sqrt(N/m) = 1, so norms are preserved exactly
    dims = KronDims((4, 2))
    signs = RademacherFactors(tuple(np.ones(n) for n in dims))
    samples = SampleSet(np.arange(1, 9), total=8)
    op = KfjltOperator(dims=dims, signs=signs, samples=samples)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(8)
    assert np.isclose(np.linalg.norm(apply_dense(op, x)), np.linalg.norm(x))
