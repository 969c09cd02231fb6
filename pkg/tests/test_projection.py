import itertools
import math

import numpy as np
import pytest

from wjl.oracle import WeightedPair, weighted_sq_norm
from wjl.projection import (
    PlanParams,
    ProvenanceError,
    ReducedVector,
    hoeffding_k,
    reduce,
    reduce_sparse,
    required_k,
    rho,
    rho_pairwise,
    sample_matrix,
)
from wjl.units import UNIT_VALUES


def _manual_reduced(exponent_rows, x, seed=0):
    """Build a ReducedVector from explicit unit exponent rows (k x d)."""
    rows = np.atleast_2d(exponent_rows)
    k = rows.shape[0]
    vals = (UNIT_VALUES[rows] @ np.asarray(x, dtype=float)) / math.sqrt(k)
    return ReducedVector(k, vals, seed, rows.shape[1])


def test_sample_matrix_deterministic():
    a = sample_matrix(3, 2, 42)
    b = sample_matrix(3, 2, 42)
    assert np.array_equal(a.toarray(), b.toarray())


def test_sample_matrix_rejects_bad_dims():
    with pytest.raises(ValueError):
        sample_matrix(0, 1, 0)
    with pytest.raises(ValueError):
        sample_matrix(1, 0, 0)


def test_entry_histogram_uniform():
    A = sample_matrix(10**6, 1, 7)
    e = A.entry_exponents(np.zeros(10**6, dtype=np.uint64), np.arange(10**6, dtype=np.uint64))
    freqs = np.bincount(e, minlength=4) / 1e6
    assert np.all(freqs >= 0.245) and np.all(freqs <= 0.255)


def test_seed_coverage_single_entry():
    seen = {int(sample_matrix(1, 1, s).entry_exponents(0, 0)) for s in range(64)}
    assert seen == {0, 1, 2, 3}


def test_reduce_basis_vector_selects_column():
    A = sample_matrix(5, 4, 11)
    e1 = np.zeros(5)
    e1[0] = 1.0
    g = reduce(A, e1)
    col = A.toarray()[:, 0] / math.sqrt(4)
    assert np.allclose(g.values, col, atol=0)


def test_reduce_zero_vector():
    A = sample_matrix(7, 3, 1)
    assert np.all(reduce(A, np.zeros(7)).values == 0)


def test_reduce_dimension_mismatch():
    A = sample_matrix(7, 3, 1)
    with pytest.raises(ValueError):
        reduce(A, np.zeros(6))


def test_reduce_linearity():
    rng = np.random.default_rng(0)
    A = sample_matrix(100, 16, 5)
    x = rng.uniform(-1, 1, 100)
    y = rng.uniform(-1, 1, 100)
    lhs = reduce(A, x + y).values
    rhs = reduce(A, x).values + reduce(A, y).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12
    for alpha, beta in [(-1.0, 0.5), (0.5, 3.0), (3.0, -1.0)]:
        lhs = reduce(A, alpha * x + beta * y).values
        rhs = alpha * reduce(A, x).values + beta * reduce(A, y).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_reduce_sparse_matches_dense():
    rng = np.random.default_rng(2)
    A = sample_matrix(200, 8, 13)
    x = np.zeros(200)
    idx = rng.choice(200, 10, replace=False)
    x[idx] = rng.standard_normal(10)
    dense = reduce(A, x)
    sparse = reduce_sparse(A, idx, x[idx])
    assert np.allclose(dense.values, sparse.values, atol=1e-15)


def test_rho_d1_exact():
    for seed in (0, 1, 99):
        for k in (1, 5, 64):
            A = sample_matrix(1, k, seed)
            est = rho(reduce(A, [3.0]), reduce(A, [2.0]))
            assert est == pytest.approx(36.0, rel=1e-12)


def test_rho_brute_force_mean_d2():
    ests = [
        rho(_manual_reduced([row], [1.0, 1.0]), _manual_reduced([row], [1.0, 1.0]))
        for row in itertools.product(range(4), repeat=2)
    ]
    assert np.mean(ests) == pytest.approx(2.0, abs=1e-12)


def test_rho_brute_force_disjoint_supports():
    x = [1.0, 2.0, 0.0, 0.0]
    w = [0.0, 0.0, 3.0, 1.0]
    ests = [
        rho(_manual_reduced([row], x), _manual_reduced([row], w))
        for row in itertools.product(range(4), repeat=4)
    ]
    assert np.mean(ests) == pytest.approx(0.0, abs=1e-9)


def test_rho_provenance_check():
    A = sample_matrix(4, 2, 1)
    B = sample_matrix(4, 2, 2)
    x = np.ones(4)
    with pytest.raises(ProvenanceError):
        rho(reduce(A, x), reduce(B, x))


def test_rho_scale_equivariance():
    rng = np.random.default_rng(8)
    A = sample_matrix(30, 8, 3)
    x = rng.standard_normal(30)
    w = np.abs(rng.standard_normal(30))
    gx, gw = reduce(A, x), reduce(A, w)
    for alpha in (0.5, 2.0, -3.0):
        got = rho(reduce(A, alpha * x), gw)
        assert got == pytest.approx(alpha**2 * rho(gx, gw), rel=1e-12)


def test_rho_pairwise_zero_and_d1():
    A = sample_matrix(3, 4, 6)
    gx = reduce(A, [1.0, 2.0, 3.0])
    gw = reduce(A, [1.0, 1.0, 0.0])
    assert rho_pairwise(gx, gx, gw) == 0.0
    B = sample_matrix(1, 7, 0)
    assert rho_pairwise(reduce(B, [5.0]), reduce(B, [2.0]), reduce(B, [3.0])) == pytest.approx(81.0, rel=1e-12)


def test_rho_pairwise_matches_reduced_difference():
    rng = np.random.default_rng(9)
    A = sample_matrix(50, 8, 21)
    x, y = rng.standard_normal(50), rng.standard_normal(50)
    w = np.abs(rng.standard_normal(50))
    gx, gy, gw = reduce(A, x), reduce(A, y), reduce(A, w)
    direct = rho(reduce(A, x - y), gw)
    assert rho_pairwise(gx, gy, gw) == pytest.approx(direct, abs=1e-12 * max(1, abs(direct)))


def test_required_k_examples():
    e = math.exp(1)
    assert required_k(PlanParams(1.0, 1 / e, 1.0, c=1.0)) == 1
    assert required_k(PlanParams(0.5, 1 / e, 2.0, c=1.0)) == 64
    prev = None
    for eps in (0.8, 0.4, 0.2, 0.1):
        k = required_k(PlanParams(eps, 0.01, 1.5))
        if prev is not None:
            assert k >= prev * 3.9  # halving epsilon roughly quadruples k
        prev = k


def test_hoeffding_k_examples():
    e = math.exp(1)
    assert hoeffding_k([1.0], [1.0], 1.0, 2 / e) == 1
    # (||x||_1 ||w||_1 / ||x||_w)^4 = (4 / sqrt(2))^4 = 64
    assert hoeffding_k([1.0, 1.0], [1.0, 1.0], 1.0, 2 / e) == 64
    with pytest.raises(ValueError):
        hoeffding_k([1.0, 0.0], [0.0, 1.0], 0.5, 0.1)


def test_hoeffding_vs_required_on_one_sparse():
    # 1-sparse vectors: 1-norm equals 2-norm, so the two planners differ only
    # in constants and the log base convention.
    x, w = [0.0, 2.0], [0.0, 3.0]
    delta = 0.1
    h = hoeffding_k(x, w, 0.5, delta)
    r = required_k(PlanParams(0.5, delta, 1.0, c=1.0))
    ratio = h / r
    expected = math.log(2 / delta) / math.log(1 / delta)
    assert ratio == pytest.approx(expected, rel=0.1)


def test_reduced_vector_serialization():
    rng = np.random.default_rng(12)
    A = sample_matrix(20, 6, 31)
    g = reduce(A, rng.standard_normal(20))
    data = g.to_bytes()
    assert data[:4] == b"WJLR"
    back = ReducedVector.from_bytes(data)
    assert back.k == g.k and back.matrix_seed == g.matrix_seed and back.dims_d == g.dims_d
    assert np.array_equal(back.values, g.values)
    csv = g.to_csv()
    assert csv.splitlines()[0] == "index,re,im"
    assert len(csv.splitlines()) == 7


def test_concentration_improves_with_k():
    # Small-scale version of the fig-1 scaling law; the full check lives in
    # the acceptance suite.
    rng = np.random.default_rng(77)
    x = np.zeros(200)
    idx = rng.choice(200, 10, replace=False)
    x[idx] = rng.standard_normal(10)
    x /= np.linalg.norm(x)
    w = np.zeros(200)
    w[idx[:8]] = 1.0
    stds = []
    for k in (16, 256):
        ests = []
        for s in range(150):
            A = sample_matrix(200, k, s)
            ests.append(rho(reduce_sparse(A, idx, x[idx]), reduce_sparse(A, idx[:8], w[idx[:8]])))
        stds.append(np.std(ests))
    assert stds[1] < stds[0] / 2
