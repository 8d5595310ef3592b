"""Time integration of the diffusively scaled kinetic fluctuation system.

Evolved equation (dissipative sign convention, L >= 0):

    dg/dt + (1/eps) v.grad_x g + (1/eps^2) L g - (v/eps).grad phi = N1 + N2,
    Laplace phi = rho := int g M dv,        x on the torus [0,2*pi)^d,

with N1 = (v g - grad_v g).grad phi and N2 = (1/eps) Gamma(g, g).  In Fourier the
linear part is block-diagonal over modes with generator

    G(n) = -(1/eps^2) L(z) - (i/eps) (v.n) - (i/eps) (v.n)/|n|^2 * rho-extraction,

equal to (1/eps^2) B_eps(eps n) for the frequency operator of the spectral module.
The stepper is an exponential-Euler scheme: the stiff linear part is propagated by
the exact matrix exponential (precomputed per mode via a Pade block-exponential
that also yields phi_1), so the scheme is uniformly stable in eps and exact when
the nonlinearity vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .collision import CollisionModel
from .hermite import HermiteBasis
from .modes import ModeSet


@dataclass
class SimulationConfig:
    eps: float = 0.5
    spatial_dim: int = 1
    n_modes: int = 8               # Fourier cut: |n|_inf <= n_modes
    degree: int = 6                # Hermite degree K
    dt: float | None = None        # default min(1e-3, eps^2/4)
    t_final: float = 1.0
    z: float = 0.0
    eta: float = 0.0
    seed: int = 1234
    amplitude: float = 0.02
    initial_kind: str = "well_prepared"
    snapshot_every: int | None = None
    weight: str = "hard_sphere"

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0):
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if self.spatial_dim not in (1, 2):
            raise ValueError("spatial_dim must be 1 or 2")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.degree < 4:
            raise ValueError("degree must be >= 4")
        if self.dt is None:
            self.dt = min(1e-3, self.eps**2 / 4.0)
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.snapshot_every is None:
            steps = max(1, round(self.t_final / self.dt))
            self.snapshot_every = max(1, steps // 100)


@dataclass
class KineticState:
    """Hermite-Fourier coefficients ghat with shape (n_modes_total, basis_size)."""

    ghat: np.ndarray
    t: float = 0.0

    def copy(self) -> "KineticState":
        return KineticState(self.ghat.copy(), self.t)


def poisson_solve(rho_hat: np.ndarray, nsq: np.ndarray) -> np.ndarray:
    """phi_hat(n) = -rho_hat(n)/|n|^2 for n != 0, mean-free."""
    phi = np.zeros_like(rho_hat)
    nz = nsq > 0
    phi[nz] = -rho_hat[nz] / nsq[nz]
    return phi


def assemble_generator(model: CollisionModel, mode_set: ModeSet, eps: float,
                       mode_index: int, z: float = 0.0) -> np.ndarray:
    """Dense complex generator G(n) of the linear flow at one Fourier mode."""
    b = model.basis
    n3 = mode_set.modes3[mode_index]
    nsq = mode_set.nsq[mode_index]
    V = b.multiply_v_matrices
    G = -(model.factor(z) / eps**2) * model.L_matrix.astype(complex)
    if nsq > 0:
        Vn = sum(n3[a] * V[a] for a in range(3) if n3[a] != 0.0)
        G -= (1j / eps) * Vn
        # field term: +(v/eps).grad phi with phi_hat = -rho_hat/|n|^2
        G -= (1j / (eps * nsq)) * np.outer(Vn @ b.chi[:, 0], b.chi[:, 0])
    return G


def expm_with_phi1(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(e^A, phi_1(A)) via the block exponential of [[A, I], [0, 0]]."""
    S = A.shape[0]
    M = np.zeros((2 * S, 2 * S), dtype=complex)
    M[:S, :S] = A
    M[:S, S:] = np.eye(S)
    E = sla.expm(M)
    return E[:S, :S], E[:S, S:]


@dataclass
class ConservationEntry:
    t: float
    mass: complex
    momentum: np.ndarray          # 3 components
    energy_combo: float           # int (|v|^2-3) g M dv dx + eps ||grad phi||^2
    field_energy: float
    mean_drift_residual: float


class Stepper:
    """Owns the per-mode propagators and the nonlinear apparatus for one config."""

    def __init__(self, config: SimulationConfig, model: CollisionModel | None = None,
                 basis: HermiteBasis | None = None):
        self.config = config
        self.basis = basis if basis is not None else HermiteBasis(config.degree)
        if model is None:
            model = CollisionModel(self.basis, weight=config.weight, eta=config.eta)
        self.model = model
        self.mode_set = ModeSet(config.spatial_dim, config.n_modes)
        self.eps = config.eps
        self.z = config.z
        b = self.basis
        ms = self.mode_set
        self.chi0 = b.chi[:, 0]
        self.chiu = b.chi[:, 1:4]
        self.chi4 = b.chi[:, 4]
        self.generators = np.array([
            assemble_generator(model, ms, self.eps, i, config.z) for i in range(ms.count)
        ])
        self._E = None
        self._P1 = None
        # (v_a - d/dv_a) for the field nonlinearity
        self.field_ops = [b.multiply_v_matrices[a] - b.gradient_matrices[a]
                          for a in range(config.spatial_dim)]
        self.fac_z = model.factor(config.z)

    # -- propagators -----------------------------------------------------------

    def _ensure_propagators(self):
        if self._E is not None:
            return
        dt = self.config.dt
        E = np.empty_like(self.generators)
        P1 = np.empty_like(self.generators)
        for i, G in enumerate(self.generators):
            Ei, Phi = expm_with_phi1(dt * G)
            E[i] = Ei
            P1[i] = dt * Phi
        self._E = E
        self._P1 = P1

    # -- moments / fields --------------------------------------------------------

    def rho_hat(self, state: KineticState) -> np.ndarray:
        return state.ghat @ self.chi0

    def u_hat(self, state: KineticState) -> np.ndarray:
        return state.ghat @ self.chiu

    def theta_hat(self, state: KineticState) -> np.ndarray:
        return np.sqrt(2.0 / 3.0) * (state.ghat @ self.chi4)

    def phi_hat(self, state: KineticState) -> np.ndarray:
        return poisson_solve(self.rho_hat(state), self.mode_set.nsq)

    def grad_phi_sq(self, state: KineticState) -> float:
        """||grad phi||_{L^2}^2 = volume * sum |n|^2 |phi_hat|^2."""
        phi = self.phi_hat(state)
        return self.mode_set.volume * float(np.sum(self.mode_set.nsq * np.abs(phi) ** 2))

    # -- nonlinear right-hand side -------------------------------------------------

    def rhs_parts(self, state: KineticState) -> tuple[np.ndarray, np.ndarray]:
        """(N1_hat, N2_hat): field nonlinearity and bilinear collision term."""
        ms = self.mode_set
        g = state.ghat
        phi = self.phi_hat(state)
        # N1 = sum_a (v_a g - d_{v_a} g) * d_{x_a} phi, spectral convolution
        N1 = np.zeros_like(g)
        for a in range(self.config.spatial_dim):
            Wa = g @ self.field_ops[a].T                     # (count, S)
            dphi = 1j * ms.modes3[:, a] * phi                # (count,)
            N1 += self._convolve_scalar_field(dphi, Wa)
        # N2 = (1/eps) Gamma(g, g): truncated products then L
        T = self.basis.product_tensor
        C = np.tensordot(g, T, axes=([1], [0]))              # (count, S, S): sum_a g_a T[a,b,c]
        P = self._pair_products(C, g)                        # (count_out, S)
        N2 = (self.fac_z / self.eps) * (P @ self.model.L_matrix.T)
        return N1, N2

    def _convolve_scalar_field(self, shat: np.ndarray, Fhat: np.ndarray) -> np.ndarray:
        """sum_{n1+n2=n} shat(n1) Fhat(n2, :) over the truncated mode set."""
        ms = self.mode_set
        out = np.zeros_like(Fhat)
        P = ms.pair_index
        for i in range(ms.count):
            if shat[i] == 0.0:
                continue
            tgt = P[i]
            ok = tgt >= 0
            out[tgt[ok]] += shat[i] * Fhat[ok]
        return out

    def _pair_products(self, C: np.ndarray, g: np.ndarray) -> np.ndarray:
        """sum over mode pairs of the Galerkin product tensor contraction."""
        ms = self.mode_set
        S = g.shape[1]
        out = np.zeros((ms.count, S), dtype=complex)
        P = ms.pair_index
        # R[i, j, :] = product coefficients of g(n_i) * g(n_j)
        for i in range(ms.count):
            tgt = P[i]
            ok = tgt >= 0
            out[tgt[ok]] += g[ok] @ C[i]                     # (n_ok, S) @ (S, S)
        return out

    def nonlinear_rhs(self, state: KineticState) -> np.ndarray:
        N1, N2 = self.rhs_parts(state)
        return N1 + N2

    # -- stepping ----------------------------------------------------------------

    def step(self, state: KineticState, nonlinear: bool = True) -> KineticState:
        """Exponential-Euler update g <- E g + dt phi_1(dt G) N(g)."""
        self._ensure_propagators()
        g = state.ghat
        new = np.einsum("mij,mj->mi", self._E, g)
        if nonlinear:
            N = self.nonlinear_rhs(state)
            new += np.einsum("mij,mj->mi", self._P1, N)
        if not np.all(np.isfinite(new)):
            raise FloatingPointError(
                "non-finite state: integration unstable, reduce dt")
        return KineticState(new, state.t + self.config.dt)

    def run(self, state: KineticState | None = None, nonlinear: bool = True,
            t_final: float | None = None, callback: Callable | None = None):
        """Advance to t_final; returns (times, snapshots, conservation entries).

        Snapshots are taken every `snapshot_every` steps plus the final state;
        deterministic for a fixed config and initial state.
        """
        cfg = self.config
        if state is None:
            from .limits import prepare_initial
            state, _ = prepare_initial(self, kind=cfg.initial_kind, seed=cfg.seed,
                                       amplitude=cfg.amplitude)
        T = cfg.t_final if t_final is None else t_final
        nsteps = max(0, round(T / cfg.dt))
        ref = self.conservation_reference(state)
        times = [state.t]
        snaps = [state.ghat.copy()]
        ledger = [self.check_conservation(state, ref)]
        for k in range(nsteps):
            state = self.step(state, nonlinear=nonlinear)
            if (k + 1) % cfg.snapshot_every == 0 or k == nsteps - 1:
                times.append(state.t)
                snaps.append(state.ghat.copy())
                ledger.append(self.check_conservation(state, ref))
                if callback is not None:
                    callback(state)
        return np.array(times), np.array(snaps), ledger

    # -- conservation ---------------------------------------------------------------

    def conservation_reference(self, state: KineticState) -> dict:
        vol = self.mode_set.volume
        z0 = self.mode_set.zero
        g0 = state.ghat[z0]
        return {
            "mass": vol * (g0 @ self.chi0),
            "momentum": vol * (g0 @ self.chiu),
            "energy_combo": vol * np.sqrt(6.0) * (g0 @ self.chi4).real
                            + self.eps * self.grad_phi_sq(state),
            "theta_mean": vol * np.sqrt(2.0 / 3.0) * (g0 @ self.chi4),
            "grad_phi_sq": self.grad_phi_sq(state),
        }

    def check_conservation(self, state: KineticState, ref: dict) -> ConservationEntry:
        """Drifts of the discrete invariants relative to the reference entry.

        The conserved energy combination is int (|v|^2 - 3) g M dv dx
        + eps ||grad_x phi||^2 (the weight pairing that the continuity equation
        makes exact; with the (|v|^2-3)/2 weight the field term would carry eps/2).
        """
        cur = self.conservation_reference(state)
        mean_res = abs(cur["theta_mean"] + (self.eps / 3.0) * cur["grad_phi_sq"]
                       - (ref["theta_mean"] + (self.eps / 3.0) * ref["grad_phi_sq"]))
        return ConservationEntry(
            t=state.t,
            mass=cur["mass"] - ref["mass"],
            momentum=np.asarray(cur["momentum"] - ref["momentum"]),
            energy_combo=float(cur["energy_combo"] - ref["energy_combo"]),
            field_energy=cur["grad_phi_sq"],
            mean_drift_residual=float(mean_res),
        )

    def mean_drift_residual(self, state: KineticState) -> float:
        """Residual of the mean identity int P g dx = -(eps/3)||grad phi||^2 * e_theta
        (+ conserved mass/momentum means), for data satisfying the global constraint."""
        vol = self.mode_set.volume
        g0 = state.ghat[self.mode_set.zero]
        theta_mean = vol * np.sqrt(2.0 / 3.0) * (g0 @ self.chi4)
        res = abs(theta_mean + (self.eps / 3.0) * self.grad_phi_sq(state))
        res += abs(vol * (g0 @ self.chi0))
        res += float(np.abs(vol * (g0 @ self.chiu)).max())
        return float(res)

    # -- exact linear propagation ------------------------------------------------------

    def linear_propagate(self, state: KineticState, times: np.ndarray) -> list[KineticState]:
        """Exact linear flow (N = 0) sampled at the given times (uniformly spaced,
        starting at state.t), via per-mode matrix exponentials of the sample step."""
        times = np.asarray(times, dtype=float)
        if len(times) < 2:
            return [state.copy()]
        dts = np.diff(times)
        if not np.allclose(dts, dts[0]):
            raise ValueError("linear_propagate needs uniformly spaced times")
        Es = np.array([sla.expm(G * dts[0]) for G in self.generators])
        out = [KineticState(state.ghat.copy(), times[0])]
        g = state.ghat.copy()
        for t in times[1:]:
            g = np.einsum("mij,mj->mi", Es, g)
            out.append(KineticState(g.copy(), t))
        return out
