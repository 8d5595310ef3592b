"""Orchestrated experiments shared by the command-line tools and the acceptance
suite: epsilon sweeps against the fluid reference, linear-semigroup sweeps, and
the energy-decay report across epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .energy import fit_decay, measure_constants, select_coefficients, energy_functional
from .fluid import FluidSolver
from .hermite import HermiteBasis
from .kinetic import KineticState, SimulationConfig, Stepper
from .limits import (compare_trajectories, hx_norm_sq, limit_semigroup_coefficients,
                     linear_semigroup_error, perp_budget, prepare_initial)
from .parallel import parallel_map


@dataclass
class SweepRow:
    eps: float
    ell: int
    time_avg_err: float
    integrated_err: float
    perp_budget: float
    decay_rate: float
    linear_err: float


def run_limit_sweep(eps_values, base: SimulationConfig, ell: int = 1,
                    t_final: float | None = None, basis: HermiteBasis | None = None,
                    sobolev: int = 3) -> list[SweepRow]:
    """Nonlinear kinetic runs vs the fluid reference for each eps, with the perp
    budget and the well-prepared linear-semigroup error alongside."""
    basis = basis if basis is not None else HermiteBasis(base.degree)
    T = base.t_final if t_final is None else t_final

    def one(eps):
        cfg = replace(base, eps=float(eps), dt=None, snapshot_every=None,
                      t_final=T)
        st = Stepper(cfg, basis=basis)
        state, fluid0 = prepare_initial(st, kind="well_prepared", seed=cfg.seed,
                                        amplitude=cfg.amplitude)
        times, snaps, _ = st.run(state)
        tc = st.model.transport_coefficients("galerkin")
        fs = FluidSolver(st.mode_set, nu=tc.viscosity, kappa=tc.kappa, dt=cfg.dt)
        _, fl = fs.run(fluid0.copy(), cfg.t_final, snapshot_every=cfg.snapshot_every)
        n = min(len(times), len(fl))
        cmp = compare_trajectories(times[:n], list(snaps)[:n], fl[:n],
                                   st.mode_set, st.basis, ell)
        pb = perp_budget(times, snaps, st.model, st.mode_set, ell=0)
        pt = np.maximum(cmp.pointwise, 1e-300)
        rate = fit_decay(times[:n], pt[:n]).rate if len(times) >= 12 else 0.0
        a22, a44 = limit_semigroup_coefficients(st.model)
        lin = linear_semigroup_error(st, state, cfg.t_final,
                                     n_samples=41, ell=ell, a22=a22, a44=a44)
        return SweepRow(eps=float(eps), ell=ell,
                        time_avg_err=cmp.time_avg_err,
                        integrated_err=cmp.integrated_err + cmp.tail_estimate,
                        perp_budget=pb, decay_rate=float(rate), linear_err=lin)

    return parallel_map(one, sorted(eps_values, reverse=True))


@dataclass
class DecayReportRow:
    eps: float
    times: np.ndarray
    energy: np.ndarray
    plain: np.ndarray
    rate: float


def run_energy_report(eps_values, base: SimulationConfig, t_final: float = 3.0,
                      n_samples: int = 41, basis: HermiteBasis | None = None):
    """Exact linear flows across eps with the selected-coefficient functional
    evaluated along each; returns the ledger, selections, and decay rows."""
    basis = basis if basis is not None else HermiteBasis(base.degree)
    probe = Stepper(replace(base, eps=float(eps_values[0])), basis=basis)
    ledger = measure_constants(probe.model)
    rows = []
    selections = {}
    for eps in eps_values:
        cfg = replace(base, eps=float(eps))
        st = Stepper(cfg, basis=basis)
        sel = select_coefficients(ledger, eps=float(eps))
        selections[float(eps)] = sel
        state, _ = prepare_initial(st, kind=cfg.initial_kind, seed=cfg.seed,
                                   amplitude=cfg.amplitude)
        times = np.linspace(0.0, t_final, n_samples)
        snaps = st.linear_propagate(state, times)
        vals = [energy_functional(st, snap, sel, s=1) for snap in snaps]
        evals = np.array([v.value for v in vals])
        plain = np.array([v.plain for v in vals])
        fit = fit_decay(times, evals)
        rows.append(DecayReportRow(eps=float(eps), times=times, energy=evals,
                                   plain=plain, rate=fit.rate))
    return ledger, selections, rows
