"""Basis primitives against independent oracles: brute-force index enumeration,
Gaussian moment identities, and direct quadrature of products/derivatives."""

import itertools
from math import factorial

import numpy as np
import pytest

from vpblab import HermiteBasis, basis_size
from vpblab.hermite import multi_indices


def brute_count(K):
    return sum(1 for a in itertools.product(range(K + 1), repeat=3) if sum(a) <= K)


@pytest.mark.parametrize("K,expected", [(0, 1), (2, 10), (8, 165)])
def test_basis_size_frozen(K, expected):
    assert basis_size(K) == expected
    assert brute_count(K) == expected


@pytest.mark.parametrize("K", [1, 3, 5, 7])
def test_basis_size_matches_enumeration(K):
    assert basis_size(K) == brute_count(K)


def test_basis_size_rejects_negative():
    with pytest.raises(ValueError):
        basis_size(-1)


def test_index_map_bijection(basis6):
    for i, a in enumerate(basis6.indices):
        assert basis6.flat_index(a) == i
        assert basis6.multi_index(i) == a
    assert len(set(basis6.indices)) == basis6.size


@pytest.mark.parametrize("K", [2, 6, 10])
def test_gram_orthonormality(K):
    b = HermiteBasis(K)
    P = b.eval_matrix
    G = P.T @ (b.weights[:, None] * P)
    assert np.abs(G - np.eye(b.size)).max() < 1e-12


def test_weighted_inner_orthonormality(basis6, rng):
    for _ in range(5):
        i, j = rng.integers(0, basis6.size, 2)
        e_i = np.zeros(basis6.size)
        e_j = np.zeros(basis6.size)
        e_i[i] = 1.0
        e_j[j] = 1.0
        assert basis6.weighted_inner(e_i, e_j) == (1.0 if i == j else 0.0)


def test_weighted_inner_chi4_and_moment(basis6):
    chi4 = basis6.chi[:, 4]
    assert abs(basis6.weighted_inner(chi4, chi4) - 1.0) < 1e-14
    # <v1^2, 1> = E v1^2 = 1 (Gaussian moment oracle)
    v1sq = basis6.multiply_v(basis6.multiply_v(basis6.chi[:, 0], 0), 0)
    assert abs(basis6.weighted_inner(v1sq, basis6.chi[:, 0]) - 1.0) < 1e-14


def test_weighted_inner_conjugate_symmetry(basis6, rng):
    f = rng.standard_normal(basis6.size) + 1j * rng.standard_normal(basis6.size)
    g = rng.standard_normal(basis6.size) + 1j * rng.standard_normal(basis6.size)
    assert np.isclose(basis6.weighted_inner(f, g),
                      np.conj(basis6.weighted_inner(g, f)))


def test_weighted_inner_rejects_mismatch(basis6):
    with pytest.raises(ValueError):
        basis6.weighted_inner(np.ones(3), np.ones(basis6.size))


def test_lambda_norm_zero_and_constant(basis6):
    assert basis6.lambda_norm(np.zeros(basis6.size)) == 0.0
    # f = 1: sqrt(1 + E|v|), E|v| = 2 sqrt(2/pi) for the 3D Gaussian
    one = basis6.chi[:, 0]
    expect = np.sqrt(1.0 + 2.0 * np.sqrt(2.0 / np.pi))
    assert abs(basis6.lambda_norm(one) - expect) < 1e-13


def test_lambda_norm_dominates_plain(basis6, rng):
    for _ in range(50):
        f = rng.standard_normal(basis6.size)
        assert basis6.lambda_norm(f) >= np.sqrt(basis6.weighted_inner(f, f).real) - 1e-12


def test_multiply_project_identity_and_symmetry(basis6, rng):
    one = basis6.chi[:, 0]
    g = rng.standard_normal(basis6.size)
    assert np.allclose(basis6.multiply_project(one, g), g, atol=1e-12)
    f = rng.standard_normal(basis6.size)
    assert np.allclose(basis6.multiply_project(f, g), basis6.multiply_project(g, f),
                       atol=1e-12)


def test_multiply_project_v1_squared(basis6):
    # v1 * v1 = 1 + sqrt(2) psi_(2,0,0)  (quadrature oracle for the expansion)
    v1 = basis6.chi[:, 1]
    out = basis6.multiply_project(v1, v1)
    expect = np.zeros(basis6.size)
    expect[basis6.flat_index((0, 0, 0))] = 1.0
    expect[basis6.flat_index((2, 0, 0))] = np.sqrt(2.0)
    assert np.abs(out - expect).max() < 1e-12


def test_multiply_project_matches_quadrature(basis6, rng):
    # independent oracle: pointwise product on the tensor grid, then projection
    for _ in range(3):
        f = rng.standard_normal(basis6.size)
        g = rng.standard_normal(basis6.size)
        fv = basis6.evaluate(f)
        gv = basis6.evaluate(g)
        oracle = basis6.project_values(fv * gv)
        assert np.abs(basis6.multiply_project(f, g) - oracle).max() < 1e-10


def test_multiplier_matrix_identity_weight(basis6):
    M = basis6.multiplier_matrix(lambda pts: np.ones(len(pts)))
    assert np.abs(M - np.eye(basis6.size)).max() < 1e-12


def test_multiplier_matrix_one_plus_v(basis6):
    M = basis6.multiplier_matrix(lambda pts: 1.0 + np.linalg.norm(pts, axis=1))
    assert np.abs(M - M.T).max() < 1e-12
    # tensor Gauss-Hermite carries O(1e-3) error on the kinked radial weight;
    # the exact radial assembly is the reference
    expect = 1.0 + 2.0 * np.sqrt(2.0 / np.pi)
    assert abs(M[0, 0] - expect) < 5e-3
    assert abs(basis6.lambda_matrix[0, 0] - expect) < 1e-13
    assert np.linalg.eigvalsh(M)[0] >= 1.0 - 1e-10
    assert np.linalg.eigvalsh(basis6.lambda_matrix)[0] >= 1.0 - 1e-10


def test_exact_lambda_matrix_vs_tensor_quadrature(basis6):
    M = basis6.multiplier_matrix(lambda pts: 1.0 + np.linalg.norm(pts, axis=1))
    assert np.abs(M - basis6.lambda_matrix).max() < 5e-3


def test_gradient_ladder(basis6):
    # d/dv1 psi_(1,0,0) = psi_0; gradient of a constant vanishes
    e100 = np.zeros(basis6.size)
    e100[basis6.flat_index((1, 0, 0))] = 1.0
    out = basis6.gradient_v(e100, 0)
    expect = np.zeros(basis6.size)
    expect[basis6.flat_index((0, 0, 0))] = 1.0
    assert np.abs(out - expect).max() < 1e-14
    assert np.abs(basis6.gradient_v(basis6.chi[:, 0], 1)).max() == 0.0


def test_multiply_v_ladder(basis6):
    out = basis6.multiply_v(basis6.chi[:, 0], 0)
    expect = np.zeros(basis6.size)
    expect[basis6.flat_index((1, 0, 0))] = 1.0
    assert np.abs(out - expect).max() < 1e-14


def test_ladder_consistency_with_quadrature(basis6, rng):
    # random f of degree <= K-1: quadrature values of df/dv1 match coefficients
    sub = [i for i, a in enumerate(basis6.indices) if sum(a) <= basis6.K - 1]
    f = np.zeros(basis6.size)
    f[sub] = rng.standard_normal(len(sub))
    df = basis6.gradient_v(f, 0)
    # oracle: finite differences on the quadrature values are inexact; instead
    # differentiate the 1D Hermite recursion independently via He'_n = n He_{n-1}
    # evaluated pointwise, then project
    pts = basis6.points
    h = 1e-5
    shifted_p = pts.copy()
    shifted_p[:, 0] += h
    shifted_m = pts.copy()
    shifted_m[:, 0] -= h
    vals = (basis6.evaluate(f, shifted_p) - basis6.evaluate(f, shifted_m)) / (2 * h)
    oracle = basis6.project_values(vals)
    assert np.abs(df - oracle).max() < 1e-8


def test_chi_vectors_exact(basis6):
    # chi columns orthonormal and equal to the moment functions on the grid
    C = basis6.chi
    assert np.abs(C.T @ C - np.eye(5)).max() < 1e-14
    pts = basis6.points
    vals4 = (np.sum(pts**2, axis=1) - 3.0) / np.sqrt(6.0)
    assert np.abs(basis6.evaluate(C[:, 4]) - vals4).max() < 1e-10


def test_quadrature_order_floor():
    with pytest.raises(ValueError):
        HermiteBasis(4, quad_order=8)


def test_graded_order_is_deterministic():
    idx = multi_indices(3)
    assert idx[0] == (0, 0, 0)
    assert idx[1:4] == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    degs = [sum(a) for a in idx]
    assert degs == sorted(degs)
