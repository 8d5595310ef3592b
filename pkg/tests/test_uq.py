"""Collocation layer: grid exactness, interpolant derivatives, mixed norms,
ensemble determinism, stability contraction, and the per-node limit scaling."""

import numpy as np
import pytest

from vpblab import CollocationGrid, SimulationConfig, ensemble_run, stability_experiment
from vpblab.uq import (mixed_l2, mixed_l2_sup, runge_flag, z_derivative,
                       z_derivative_fd)


def test_grid_basics():
    g1 = CollocationGrid.gauss_legendre(1)
    assert np.allclose(g1.nodes, [0.0]) and np.allclose(g1.weights, [1.0])
    g = CollocationGrid.gauss_legendre(6)
    assert np.all(g.weights > 0.0)
    assert abs(g.weights.sum() - 1.0) < 1e-14
    assert abs(g.quad(g.nodes**2) - 1.0 / 3.0) < 1e-14
    with pytest.raises(ValueError):
        CollocationGrid.gauss_legendre(0)


def test_diff_matrix_poly_exact():
    g = CollocationGrid.gauss_legendre(7)
    D = g.diff_matrix()
    for k in (1, 2, 5):
        err = np.abs(D @ g.nodes**k - k * g.nodes ** (k - 1)).max()
        assert err < 1e-10


def test_z_derivative_examples(rng):
    g = CollocationGrid.gauss_legendre(9)
    base = rng.standard_normal((4, 3))
    # z-independent ensemble -> 0
    const = np.repeat(base[None, :, :], g.count, axis=0)
    assert np.abs(z_derivative(g, const)).max() < 1e-10
    # data (1+z) g0: derivative recovers g0 to interpolation accuracy
    fields = np.array([(1.0 + z) * base for z in g.nodes])
    dz = z_derivative(g, fields)
    assert np.abs(dz - base[None]).max() < 1e-10
    with pytest.raises(ValueError):
        z_derivative(CollocationGrid.gauss_legendre(3), fields[:3])


def test_fd_cross_check_and_runge_flag():
    g = CollocationGrid.gauss_legendre(11)
    smooth = np.sin(1.5 * g.nodes)[:, None]
    dp = z_derivative(g, smooth)[1:-1]
    df = z_derivative_fd(g, smooth)[1:-1]
    assert np.abs(dp - df).max() < 5e-2
    assert not runge_flag(g, smooth)
    rng = np.random.default_rng(0)
    noisy = rng.standard_normal((g.count, 1))
    assert runge_flag(g, noisy)
    alternating = ((-1.0) ** np.arange(g.count))[:, None]
    assert runge_flag(g, alternating)


def test_mixed_norm_inequality_and_symmetry(rng):
    g = CollocationGrid.gauss_legendre(8)
    vals = rng.uniform(0.1, 2.0, g.count)
    assert mixed_l2(g, vals) <= mixed_l2_sup(g, vals)
    assert mixed_l2(g, vals) <= vals.max() + 1e-14
    # node-exchange symmetry: permuting nodes with their weights leaves norms fixed
    perm = rng.permutation(g.count)
    g2 = CollocationGrid(nodes=g.nodes[perm], weights=g.weights[perm])
    assert np.isclose(mixed_l2(g, vals), mixed_l2(g2, vals[perm]))
    assert np.isclose(mixed_l2_sup(g, vals), mixed_l2_sup(g2, vals[perm]))


@pytest.fixture(scope="module")
def small_cfg():
    return SimulationConfig(eps=0.5, spatial_dim=1, n_modes=2, degree=4, dt=2e-3,
                            t_final=0.2, seed=101, amplitude=0.02, snapshot_every=20)


def test_ensemble_no_randomness_identical_nodes(small_cfg, basis4):
    grid = CollocationGrid.gauss_legendre(5)
    ens = ensemble_run(small_cfg, grid, basis=basis4)      # eta defaults to 0.0
    ref = ens.node_snaps[0]
    for snaps in ens.node_snaps[1:]:
        assert np.array_equal(np.asarray(snaps), np.asarray(ref))
    series = ens.mixed_norm_series()
    assert np.abs(series["dz"]).max() < 1e-16 * max(series["total"].max(), 1.0)


def test_ensemble_z_lipschitz(small_cfg, basis4):
    from dataclasses import replace
    cfg = replace(small_cfg, eta=0.2)
    grid = CollocationGrid.gauss_legendre(5)
    ens = ensemble_run(cfg, grid, basis=basis4, initial_z_slope=0.3)
    final = [np.asarray(s)[-1] for s in ens.node_snaps]
    z = grid.nodes
    for i in range(len(z) - 1):
        d = np.linalg.norm(final[i + 1] - final[i])
        assert d <= 5.0 * abs(z[i + 1] - z[i]) * max(np.linalg.norm(final[i]), 1e-12)


def test_ensemble_decay_series(small_cfg, basis4):
    from dataclasses import replace
    cfg = replace(small_cfg, eta=0.2, t_final=0.4)
    grid = CollocationGrid.gauss_legendre(5)
    ens = ensemble_run(cfg, grid, basis=basis4)
    series = ens.mixed_norm_series()
    assert series["total"][0] > 0.0
    assert series["total"][-1] < series["total"][0]
    assert np.all(series["l2z"] <= series["l2supz"] + 1e-14)


def test_stability_identical_data_zero_difference(small_cfg, basis4):
    rep = stability_experiment(small_cfg, CollocationGrid.gauss_legendre(3),
                               perturbation=0.0, basis=basis4)
    assert np.abs(rep.diff_norms).max() < 1e-25


def test_stability_contraction(small_cfg, basis4):
    from dataclasses import replace
    cfg = replace(small_cfg, eta=0.2, t_final=0.5)
    rep = stability_experiment(cfg, CollocationGrid.gauss_legendre(3),
                               perturbation=1e-3, basis=basis4)
    assert rep.diff_norms[0] > 0.0
    assert rep.rate > 0.0


def test_random_fluid_limit_eta_zero_consistency(basis6):
    from vpblab.uq import random_fluid_limit
    cfg = SimulationConfig(eps=0.5, spatial_dim=1, n_modes=2, degree=6, dt=1e-3,
                           t_final=0.2, seed=103, amplitude=0.02, snapshot_every=20,
                           eta=0.0)
    grid = CollocationGrid.gauss_legendre(3)
    rep = random_fluid_limit(cfg, grid, eps_values=[0.5, 0.25, 0.125, 0.0625],
                             basis=basis6)
    # no kernel randomness: every node sees the same deterministic experiment
    for row in rep.node_errors:
        assert np.abs(row - row[0]).max() < 1e-12 * max(row[0], 1e-30)
    assert rep.monotone_in_eps()
