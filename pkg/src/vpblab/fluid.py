"""Pseudo-spectral solver for the limiting incompressible system on the torus:

    du/dt + u.grad u - nu Laplace u + grad P = rho grad theta,
    d(sigma)/dt + u.grad sigma - (5 kappa/2) Laplace theta = 0,   sigma = (3/2) theta - rho,
    div u = 0,   Laplace(rho + theta) = rho,   E = grad(rho + theta).

Evolved variables are (u, sigma); (rho, theta, phi) are recovered algebraically
each step from the elliptic constraint, which in Fourier gives

    rho_hat = -(2/3)|n|^2 sigma_hat / (1 + (5/3)|n|^2),   theta_hat = (2/3)(sigma_hat + rho_hat),

so the theta-diffusion is a diagonal damping of sigma_hat with rate
(5 kappa/3) |n|^2 (1+|n|^2) / (1+(5/3)|n|^2), integrated exactly.  Advection and
the rho grad theta forcing are explicit, dealiased by the exact truncated
convolution, and Leray-projected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermite import HermiteBasis
from .modes import ModeSet


def recover_rho_theta(sigma_hat: np.ndarray, nsq: np.ndarray):
    """(rho_hat, theta_hat, phi_hat) from sigma_hat under Laplace(rho+theta) = rho.

    phi is the field potential rho + theta (E = grad phi); at n = 0 the
    constraint forces rho_hat = 0 and theta_hat = (2/3) sigma_hat.
    """
    rho = -(2.0 / 3.0) * nsq * sigma_hat / (1.0 + (5.0 / 3.0) * nsq)
    theta = (2.0 / 3.0) * (sigma_hat + rho)
    phi = rho + theta
    return rho, theta, phi


def leray_project(u_hat: np.ndarray, modes3: np.ndarray, nsq: np.ndarray) -> np.ndarray:
    """Remove the gradient part: u -> u - n (n.u)/|n|^2 per mode; n = 0 untouched."""
    out = u_hat.copy()
    nz = nsq > 0
    ndotu = np.einsum("ma,ma->m", modes3[nz], u_hat[nz])
    out[nz] -= modes3[nz] * (ndotu / nsq[nz])[:, None]
    return out


def sigma_damping(nsq: np.ndarray, kappa: float) -> np.ndarray:
    """Diagonal damping rate of sigma_hat induced by -(5 kappa/2) Laplace(theta)."""
    return (5.0 * kappa / 3.0) * nsq * (1.0 + nsq) / (1.0 + (5.0 / 3.0) * nsq)


def _phi1(x: np.ndarray) -> np.ndarray:
    """phi_1(x) = (e^x - 1)/x, stable near zero."""
    out = np.ones_like(x)
    big = np.abs(x) > 1e-8
    out[big] = np.expm1(x[big]) / x[big]
    return out


@dataclass
class FluidState:
    u_hat: np.ndarray        # (count, 3) complex, div-free in the first dim components
    sigma_hat: np.ndarray    # (count,) complex
    t: float = 0.0

    def copy(self) -> "FluidState":
        return FluidState(self.u_hat.copy(), self.sigma_hat.copy(), self.t)


class FluidSolver:
    def __init__(self, mode_set: ModeSet, nu: float, kappa: float, dt: float,
                 full_gradient_forcing: bool = False):
        if nu <= 0.0 or kappa <= 0.0:
            raise ValueError("transport coefficients must be positive")
        self.mode_set = mode_set
        self.nu = nu
        self.kappa = kappa
        self.dt = dt
        self.full_gradient_forcing = full_gradient_forcing
        nsq = mode_set.nsq
        self.Eu = np.exp(-nu * nsq * dt)
        self.Pu = dt * _phi1(-nu * nsq * dt)
        dsig = sigma_damping(nsq, kappa)
        self.Es = np.exp(-dsig * dt)
        self.Ps = dt * _phi1(-dsig * dt)

    def recover(self, state: FluidState):
        return recover_rho_theta(state.sigma_hat, self.mode_set.nsq)

    def rhs(self, state: FluidState):
        """Explicit terms: (-P(u.grad u) + P(rho grad theta), -u.grad sigma)."""
        ms = self.mode_set
        m3 = ms.modes3
        u = state.u_hat
        rho, theta, _ = self.recover(state)
        # u.grad u (component-wise) and u.grad sigma
        adv_u = np.zeros_like(u)
        adv_s = np.zeros(ms.count, dtype=complex)
        for a in range(ms.dim):
            da_u = 1j * m3[:, a][:, None] * u
            da_s = 1j * m3[:, a] * state.sigma_hat
            adv_u += ms.convolve(u[:, a][:, None], da_u)
            adv_s += ms.convolve(u[:, a], da_s)
        grad_t = theta if not self.full_gradient_forcing else theta + rho
        force = np.zeros_like(u)
        for a in range(ms.dim):
            force[:, a] = ms.convolve(rho, 1j * m3[:, a] * grad_t)
        du = leray_project(-adv_u + force, m3, ms.nsq)
        return du, -adv_s

    def step(self, state: FluidState) -> FluidState:
        du, dsig = self.rhs(state)
        u = self.Eu[:, None] * state.u_hat + self.Pu[:, None] * du
        sig = self.Es * state.sigma_hat + self.Ps * dsig
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(sig))):
            raise FloatingPointError("non-finite fluid state: reduce dt")
        return FluidState(u, sig, state.t + self.dt)

    def run(self, state: FluidState, t_final: float, snapshot_every: int = 1):
        nsteps = max(0, round(t_final / self.dt))
        times = [state.t]
        snaps = [state.copy()]
        for k in range(nsteps):
            state = self.step(state)
            if (k + 1) % snapshot_every == 0 or k == nsteps - 1:
                times.append(state.t)
                snaps.append(state.copy())
        return np.array(times), snaps

    def divergence_defect(self, state: FluidState) -> float:
        ms = self.mode_set
        return float(np.abs(np.einsum("ma,ma->m", ms.modes3, state.u_hat)).max())

    def constraint_residual(self, state: FluidState) -> float:
        """max_n | |n|^2 (rho+theta) + rho | (the Poisson constraint)."""
        rho, theta, _ = self.recover(state)
        return float(np.abs(self.mode_set.nsq * (rho + theta) + rho).max())

    def energy(self, state: FluidState) -> float:
        """||u||^2 + weighted sigma norm (the mode-wise theta/sigma pairing weight)."""
        ms = self.mode_set
        w = (2.0 / 3.0) * (1.0 + ms.nsq) / (1.0 + (5.0 / 3.0) * ms.nsq)
        return ms.volume * float(np.sum(np.abs(state.u_hat) ** 2)
                                 + np.sum(w * np.abs(state.sigma_hat) ** 2))


def lift_to_kinetic(state: FluidState, basis: HermiteBasis, mode_set: ModeSet) -> np.ndarray:
    """Kinetic representation rho + u.v + (theta/2)(|v|^2 - 3) per mode, as
    Hermite coefficients of shape (count, size)."""
    rho, theta, _ = recover_rho_theta(state.sigma_hat, mode_set.nsq)
    chi = basis.chi
    out = np.zeros((mode_set.count, basis.size), dtype=complex)
    out += rho[:, None] * chi[:, 0][None, :]
    for i in range(3):
        out += state.u_hat[:, i][:, None] * chi[:, 1 + i][None, :]
    out += (np.sqrt(6.0) / 2.0) * theta[:, None] * chi[:, 4][None, :]
    return out
