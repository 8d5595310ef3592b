"""Random-input layer: stochastic collocation in the scalar random coordinate z.

Each collocation node is a fully deterministic solver run (the kernel strength
and/or initial data depend on z); mixed norms combine the quadrature L^2_z
average with the node maximum as the sup_z surrogate, and d/dz fields come from
differentiating the node interpolant.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial.legendre import leggauss

from .energy import fit_decay
from .fluid import FluidSolver, FluidState
from .kinetic import KineticState, SimulationConfig, Stepper
from .limits import compare_trajectories, hx_norm_sq, prepare_initial
from .parallel import parallel_map


@dataclass
class CollocationGrid:
    """Gauss-Legendre nodes on I_z = [-1, 1] for the uniform density pi = 1/2;
    weights are normalized to sum to one."""

    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss_legendre(cls, n: int) -> "CollocationGrid":
        if n < 1:
            raise ValueError("need at least one node")
        x, w = leggauss(n)
        return cls(nodes=x, weights=w / 2.0)

    @property
    def count(self) -> int:
        return len(self.nodes)

    def quad(self, values: np.ndarray) -> float:
        """int f(z) pi(z) dz with f sampled at the nodes (axis 0)."""
        return float(np.tensordot(self.weights, values, axes=([0], [0])))

    def diff_matrix(self) -> np.ndarray:
        """Derivative of the Lagrange interpolant at the nodes (barycentric)."""
        x = self.nodes
        n = len(x)
        if n < 2:
            raise ValueError("derivative needs at least two nodes")
        c = np.array([1.0 / np.prod(x[i] - np.delete(x, i)) for i in range(n)])
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    D[i, j] = (c[j] / c[i]) / (x[i] - x[j])
        D[np.diag_indices(n)] = -D.sum(axis=1)
        return D


# -- mixed norms ---------------------------------------------------------------------


def mixed_l2(grid: CollocationGrid, node_values: np.ndarray) -> float:
    """||.||^2_{L^2 L^2_z} from per-node squared norms."""
    return grid.quad(np.asarray(node_values))


def sup_estimate(grid: CollocationGrid, node_values: np.ndarray,
                 refine: int = 201) -> float:
    """sup_z surrogate: node maximum sharpened by the barycentric interpolant on
    a fine grid (Gauss nodes exclude the endpoints, where smooth decaying norms
    typically attain their maximum)."""
    v = np.asarray(node_values, dtype=float)
    if grid.count < 3:
        return float(v.max())
    x = grid.nodes
    c = np.array([1.0 / np.prod(x[i] - np.delete(x, i)) for i in range(len(x))])
    zz = np.linspace(-1.0, 1.0, refine)
    num = np.zeros_like(zz)
    den = np.zeros_like(zz)
    exact = np.full_like(zz, np.nan)
    for i in range(len(x)):
        d = zz - x[i]
        hit = np.abs(d) < 1e-14
        exact[hit] = v[i]
        d[hit] = 1.0
        w = c[i] / d
        num += w * v[i]
        den += w
    vals = num / den
    vals[~np.isnan(exact)] = exact[~np.isnan(exact)]
    return float(max(v.max(), vals.max()))


def mixed_l2_sup(grid: CollocationGrid, node_values: np.ndarray) -> float:
    """||.||^2_{L^2 L^{2 cap inf}_z}: quadrature average plus the sup surrogate."""
    v = np.asarray(node_values)
    return grid.quad(v) + sup_estimate(grid, v)


def z_derivative(grid: CollocationGrid, node_fields: np.ndarray) -> np.ndarray:
    """d/dz of the node interpolant, applied along axis 0 of the stacked fields."""
    if grid.count < 5:
        raise ValueError("z-derivative needs at least 5 nodes")
    D = grid.diff_matrix()
    return np.tensordot(D, node_fields, axes=([1], [0]))


def z_derivative_fd(grid: CollocationGrid, node_fields: np.ndarray) -> np.ndarray:
    """Non-uniform central differences at the nodes (cross-check oracle)."""
    x = grid.nodes
    f = node_fields
    out = np.empty_like(f)
    for i in range(len(x)):
        if i == 0:
            out[i] = (f[1] - f[0]) / (x[1] - x[0])
        elif i == len(x) - 1:
            out[i] = (f[-1] - f[-2]) / (x[-1] - x[-2])
        else:
            hl = x[i] - x[i - 1]
            hr = x[i + 1] - x[i]
            out[i] = (hr / hl * (f[i] - f[i - 1]) + hl / hr * (f[i + 1] - f[i])) / (hl + hr)
    return out


def runge_flag(grid: CollocationGrid, node_fields: np.ndarray, tol: float = 0.35) -> bool:
    """True when the interpolant derivative disagrees with finite differences by
    more than tol in relative Frobenius norm (interior nodes only)."""
    dp = z_derivative(grid, node_fields)[1:-1]
    df = z_derivative_fd(grid, node_fields)[1:-1]
    na = np.linalg.norm(dp - df)
    nb = max(np.linalg.norm(dp), 1e-300)
    return bool(na / nb > tol)


# -- ensemble runs -----------------------------------------------------------------


@dataclass
class EnsembleResult:
    grid: CollocationGrid
    times: np.ndarray
    node_snaps: list                     # per node: (n_snap, count, size) arrays
    steppers: list
    s_index: int = 1

    def node_norms(self, k: int = 0) -> np.ndarray:
        """Per-node, per-time squared H^k_x norms of (g, grad phi)."""
        out = np.empty((self.grid.count, len(self.times)))
        for j, (snaps, st) in enumerate(zip(self.node_snaps, self.steppers)):
            ms = st.mode_set
            w = ms.hx_weights(k)
            for it, g in enumerate(snaps):
                gn = np.sum(np.abs(g) ** 2, axis=1)
                phi = np.zeros(ms.count, dtype=complex)
                nz = ms.nsq > 0
                rho = g @ st.chi0
                phi[nz] = -rho[nz] / ms.nsq[nz]
                out[j, it] = ms.volume * float(np.sum(w * (gn + ms.nsq * np.abs(phi) ** 2)))
        return out

    def mixed_norm_series(self) -> dict:
        """Time series of the headline decay quantity: H^s_{x,z} of (g, grad phi)
        plus eps^2 ||grad_v g||^2_{H^{s-1} L^2_z}; pieces reported separately."""
        s = self.s_index
        grid = self.grid
        hs = self.node_norms(k=s)                               # (nodes, nt)
        eps = self.steppers[0].eps
        ms = self.steppers[0].mode_set
        D = self.steppers[0].basis.gradient_matrices
        nt = len(self.times)
        l2z = np.empty(nt)
        l2sup = np.empty(nt)
        dz_part = np.empty(nt)
        gv_part = np.empty(nt)
        stack = np.array([snaps for snaps in self.node_snaps])   # (nodes, nt, count, S)
        dz_stack = z_derivative(grid, stack) if grid.count >= 5 else np.zeros_like(stack)
        w = ms.hx_weights(max(s - 1, 0))
        for it in range(nt):
            l2z[it] = mixed_l2(grid, hs[:, it])
            l2sup[it] = mixed_l2_sup(grid, hs[:, it])
            dnorm = [ms.volume * float(np.sum(w * np.sum(np.abs(dz_stack[j, it]) ** 2, axis=1)))
                     for j in range(grid.count)]
            dz_part[it] = mixed_l2(grid, np.array(dnorm))
            gn = []
            for j in range(grid.count):
                g = stack[j, it]
                gv = sum(np.sum(np.abs(g @ D[a].T) ** 2, axis=1) for a in range(3))
                gn.append(ms.volume * float(np.sum(w * gv)))
            gv_part[it] = mixed_l2_sup(grid, np.array(gn))
        total = l2sup + dz_part + eps**2 * gv_part
        return {"total": total, "l2z": l2z, "l2supz": l2sup, "dz": dz_part,
                "gradv": gv_part, "times": self.times}


def _node_config(config: SimulationConfig, z: float) -> SimulationConfig:
    return replace(config, z=z)


def ensemble_run(config: SimulationConfig, grid: CollocationGrid,
                 nonlinear: bool = True, initial_z_slope: float = 0.0,
                 basis=None, model_factory=None) -> EnsembleResult:
    """Run the kinetic solver at every collocation node.

    Kernel modulation comes from config.eta (shared); initial data can depend on
    z through an amplitude factor (1 + initial_z_slope * z).  Node runs share the
    basis; failures at any node abort the ensemble.
    """
    def one(z):
        cfg = _node_config(config, float(z))
        st = Stepper(cfg, basis=basis) if model_factory is None else \
            Stepper(cfg, model=model_factory(cfg), basis=basis)
        state, _ = prepare_initial(st, kind=cfg.initial_kind, seed=cfg.seed,
                                   amplitude=cfg.amplitude,
                                   z_factor=1.0 + initial_z_slope * float(z))
        times, snaps, _ = st.run(state, nonlinear=nonlinear)
        return times, snaps, st

    results = parallel_map(one, list(grid.nodes))
    times = results[0][0]
    return EnsembleResult(grid=grid, times=times,
                          node_snaps=[r[1] for r in results],
                          steppers=[r[2] for r in results])


# -- stability ---------------------------------------------------------------------------


@dataclass
class StabilityReport:
    times: np.ndarray
    diff_norms: np.ndarray       # H^ell_x L^{2 cap inf}_z of the difference, per time
    rate: float
    amplitude: float


def stability_experiment(config: SimulationConfig, grid: CollocationGrid,
                         perturbation: float = 1e-3, ell: int | None = None,
                         basis=None) -> StabilityReport:
    """Run two nearby initial data through the ensemble and fit the contraction
    of the difference in H^ell_x L^{2 cap inf}_z."""
    if ell is None:
        ell = 1
    def one(z):
        cfg = _node_config(config, float(z))
        st = Stepper(cfg, basis=basis)
        s1, _ = prepare_initial(st, kind=cfg.initial_kind, seed=cfg.seed,
                                amplitude=cfg.amplitude)
        s2 = KineticState(s1.ghat.copy(), 0.0)
        rng = np.random.default_rng(cfg.seed + 999)
        bump = rng.standard_normal(st.basis.size)
        bump -= (bump @ st.basis.chi) @ st.basis.chi.T
        bump *= perturbation / max(np.abs(bump).max(), 1e-300)
        nz1 = st.mode_set.index[(1,) + (0,) * (cfg.spatial_dim - 1)]
        s2.ghat[nz1] += bump
        s2.ghat[st.mode_set.conj_index[nz1]] += np.conj(bump)
        t1, snap1, _ = st.run(s1)
        t2, snap2, _ = st.run(s2)
        w = st.mode_set.hx_weights(ell)
        diffs = [st.mode_set.volume * float(np.sum(w * np.sum(np.abs(a - b) ** 2, axis=1)))
                 for a, b in zip(snap1, snap2)]
        return t1, np.array(diffs)

    results = parallel_map(one, list(grid.nodes))
    times = results[0][0]
    node_diffs = np.array([r[1] for r in results])     # (nodes, nt)
    mixed = np.array([mixed_l2_sup(grid, node_diffs[:, it]) for it in range(len(times))])
    if mixed.max() < 1e-250:
        return StabilityReport(times=times, diff_norms=mixed, rate=np.inf, amplitude=0.0)
    fit = fit_decay(times, np.maximum(mixed, 1e-300),
                    min_samples=min(10, max(3, len(times) - 1)))
    return StabilityReport(times=times, diff_norms=mixed, rate=fit.rate,
                           amplitude=fit.amplitude)


# -- random fluid limit -------------------------------------------------------------------


@dataclass
class RandomLimitReport:
    eps_values: np.ndarray
    node_errors: np.ndarray      # (n_eps, n_nodes) integrated squared errors
    sup_errors: np.ndarray       # max over nodes per eps

    def monotone_in_eps(self) -> bool:
        return bool(np.all(np.diff(self.sup_errors) < 0.0))


def random_fluid_limit(config: SimulationConfig, grid: CollocationGrid, eps_values,
                       ell: int = 1, basis=None) -> RandomLimitReport:
    """Per-node eps-sweep against the node's own limiting system (transport
    coefficients rescaled by 1/(1 + eta m(z)))."""
    eps_values = np.asarray(sorted(eps_values, reverse=True), dtype=float)
    errors = np.empty((len(eps_values), grid.count))
    for ie, eps in enumerate(eps_values):
        def one(z):
            cfg = replace(config, eps=float(eps), z=float(z))
            st = Stepper(cfg, basis=basis)
            state, fluid0 = prepare_initial(st, kind="well_prepared", seed=cfg.seed,
                                            amplitude=cfg.amplitude)
            times, snaps, _ = st.run(state)
            tc = st.model.transport_coefficients("galerkin")
            fac = st.model.factor(float(z))
            fs = FluidSolver(st.mode_set, nu=tc.viscosity / fac, kappa=tc.kappa / fac,
                             dt=cfg.dt)
            _, fl_states = fs.run(fluid0.copy(), cfg.t_final,
                                  snapshot_every=cfg.snapshot_every)
            n = min(len(times), len(fl_states))
            cmp = compare_trajectories(times[:n], list(snaps)[:n], fl_states[:n],
                                       st.mode_set, st.basis, ell)
            return cmp.integrated_err

        errors[ie] = parallel_map(one, list(grid.nodes))
    return RandomLimitReport(eps_values=eps_values, node_errors=errors,
                             sup_errors=errors.max(axis=1))
