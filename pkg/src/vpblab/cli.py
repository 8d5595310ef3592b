"""Command-line entry points.

Subcommands: simulate, spectrum, limit-sweep, uq, energy-report.  Each writes
CSV outputs plus a JSON manifest with checksums into --out-dir.  Exit codes:
0 success, 2 configuration/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time as _time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, save_config
from .energy import SelectionInfeasible
from .hermite import HermiteBasis
from .kinetic import SimulationConfig, Stepper
from .limits import prepare_initial
from .output import (BRANCH_COLUMNS, DECAY_COLUMNS, RATE_COLUMNS, UQ_COLUMNS,
                     save_snapshot, write_csv, write_manifest)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3


def _base_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vpblab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="key=value config file")
    common.add_argument("--epsilon", type=float, default=None)
    common.add_argument("--eps-list", type=str, default=None,
                        help="comma-separated sweep values")
    common.add_argument("--modes", type=int, default=None)
    common.add_argument("--degree", type=int, default=None)
    common.add_argument("--dt", type=float, default=None)
    common.add_argument("--T", type=float, default=None, dest="t_final")
    common.add_argument("--nodes", type=int, default=None)
    common.add_argument("--out-dir", type=str, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--profile", type=str, choices=("smoke", "full"), default=None)
    sub.add_parser("simulate", parents=[common], help="nonlinear kinetic run")
    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalue branches")
    sp.add_argument("--smax", type=float, default=1.0)
    sp.add_argument("--spoints", type=int, default=24)
    sub.add_parser("limit-sweep", parents=[common], help="eps sweep vs fluid limit")
    sub.add_parser("uq", parents=[common], help="collocation ensemble")
    sub.add_parser("energy-report", parents=[common], help="constants, selection, decay")
    return p


def _merge_config(args) -> RunConfig:
    if args.config and args.config != "default":
        cfg = load_config(args.config)
    else:
        cfg = RunConfig()
    overrides = {
        "epsilon": args.epsilon, "modes": args.modes, "degree": args.degree,
        "dt": args.dt, "t_final": args.t_final, "nodes": args.nodes,
        "out_dir": args.out_dir, "seed": args.seed, "profile": args.profile,
    }
    if args.eps_list:
        overrides["eps_list"] = tuple(float(x) for x in args.eps_list.split(","))
    for k, v in overrides.items():
        if v is not None:
            cfg = replace(cfg, **{k: v})
    return cfg.validate()


def _sim_config(cfg: RunConfig, **kw) -> SimulationConfig:
    base = dict(eps=cfg.epsilon, spatial_dim=cfg.spatial_dim, n_modes=cfg.modes,
                degree=cfg.degree, dt=cfg.dt, t_final=cfg.t_final, eta=cfg.eta,
                seed=cfg.seed, amplitude=cfg.amplitude)
    base.update(kw)
    return SimulationConfig(**base)


def cmd_simulate(cfg: RunConfig, args) -> int:
    t0 = _time.perf_counter()
    out = Path(cfg.out_dir)
    sim = _sim_config(cfg)
    if cfg.profile == "smoke":
        sim = replace(sim, t_final=min(sim.t_final, 0.5))
    st = Stepper(sim)
    state, _ = prepare_initial(st, kind=sim.initial_kind, seed=sim.seed,
                               amplitude=sim.amplitude)
    times, snaps, ledger = st.run(state)
    rows = [(sim.eps, e.t, abs(e.mass), float(np.abs(e.momentum).max()),
             e.energy_combo, e.mean_drift_residual) for e in ledger]
    csv = write_csv(out / "conservation.csv",
                    ("epsilon", "time", "mass_drift", "momentum_drift",
                     "energy_drift", "mean_residual"), rows)
    snap_csv, snap_man = save_snapshot(out, "final_state", snaps[-1], times[-1],
                                       sim, st.mode_set)
    write_manifest(out / "simulate_manifest.json", sim,
                   {"conservation": csv, "final_state": snap_csv},
                   seed=sim.seed, wall_seconds=_time.perf_counter() - t0)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, args) -> int:
    from .spectrum import choose_r0, dispersion_roots, eigen_branches
    from .collision import CollisionModel
    t0 = _time.perf_counter()
    out = Path(cfg.out_dir)
    basis = HermiteBasis(cfg.degree)
    model = CollisionModel(basis)
    eps = cfg.epsilon
    r0 = choose_r0(model, eps, s_max=max(args.smax, 0.1))
    grid = np.linspace(args.smax / args.spoints, min(args.smax, r0), args.spoints)
    branches = eigen_branches(model, eps, grid)
    rows = []
    for br in branches:
        for s, lam in zip(br.s, br.lam):
            rows.append((eps, s, br.j, lam.real, lam.imag,
                         br.fit_c.real, br.fit_c.imag, br.fit_residual))
    csv = write_csv(out / "branches.csv", BRANCH_COLUMNS, rows)
    disp = dispersion_roots(model, eps, float(grid[len(grid) // 2]))
    write_manifest(out / "spectrum_manifest.json", cfg,
                   {"branches": csv},
                   extra={"r0": r0, "dispersion_mid": [repr(z) for z in disp]},
                   seed=cfg.seed, wall_seconds=_time.perf_counter() - t0)
    return EXIT_OK


def cmd_limit_sweep(cfg: RunConfig, args) -> int:
    from .experiments import run_limit_sweep
    t0 = _time.perf_counter()
    out = Path(cfg.out_dir)
    T = 1.0 if cfg.profile == "smoke" else 4.0
    eps_list = cfg.eps_list if cfg.profile == "full" else cfg.eps_list[:4]
    base = _sim_config(cfg, t_final=T)
    rows = run_limit_sweep(eps_list, base, ell=min(cfg.sobolev - 2, 1), t_final=T)
    csv = write_csv(out / "rates.csv", RATE_COLUMNS,
                    [(r.eps, r.ell, r.time_avg_err, r.integrated_err,
                      r.perp_budget, r.decay_rate) for r in rows])
    write_manifest(out / "limit_manifest.json", base,
                   {"rates": csv},
                   extra={"linear_errs": {repr(r.eps): r.linear_err for r in rows}},
                   seed=cfg.seed, wall_seconds=_time.perf_counter() - t0)
    return EXIT_OK


def cmd_uq(cfg: RunConfig, args) -> int:
    from .uq import CollocationGrid, ensemble_run
    t0 = _time.perf_counter()
    out = Path(cfg.out_dir)
    grid = CollocationGrid.gauss_legendre(cfg.nodes)
    T = 1.0 if cfg.profile == "smoke" else cfg.t_final
    sim = _sim_config(cfg, t_final=T)
    ens = ensemble_run(sim, grid)
    series = ens.mixed_norm_series()
    rows = [(sim.eps, t, series["total"][i], series["l2z"][i], series["l2supz"][i],
             series["dz"][i], series["gradv"][i]) for i, t in enumerate(series["times"])]
    csv = write_csv(out / "uq_norms.csv", UQ_COLUMNS, rows)
    import hashlib
    from dataclasses import asdict
    node_cfgs = []
    for z in grid.nodes:
        d = asdict(replace(sim, z=float(z)))
        digest = hashlib.sha256(repr(sorted(d.items())).encode()).hexdigest()
        node_cfgs.append({"z": float(z), "config_sha256": digest})
    write_manifest(out / "uq_manifest.json", sim,
                   {"uq_norms": csv},
                   extra={"nodes": grid.nodes.tolist(), "weights": grid.weights.tolist(),
                          "node_configs": node_cfgs},
                   seed=cfg.seed, wall_seconds=_time.perf_counter() - t0)
    return EXIT_OK


def cmd_energy_report(cfg: RunConfig, args) -> int:
    from .experiments import run_energy_report
    t0 = _time.perf_counter()
    out = Path(cfg.out_dir)
    eps_list = sorted(set(cfg.eps_list) | {cfg.epsilon}, reverse=True)
    base = _sim_config(cfg)
    ledger, selections, rows = run_energy_report(eps_list, base)
    csv_rows = []
    for r in rows:
        for t, e, p in zip(r.times, r.energy, r.plain):
            csv_rows.append((r.eps, t, e, p))
    csv = write_csv(out / "decay.csv", DECAY_COLUMNS, csv_rows)
    ledger_path = Path(out) / "ledger.json"
    ledger_path.parent.mkdir(parents=True, exist_ok=True)
    ledger_path.write_text(ledger.to_json())
    write_manifest(out / "energy_manifest.json", base,
                   {"decay": csv, "ledger": ledger_path},
                   extra={"rates": {repr(r.eps): r.rate for r in rows},
                          "selections": {repr(e): s.as_dict() for e, s in selections.items()}},
                   seed=cfg.seed, wall_seconds=_time.perf_counter() - t0)
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "limit-sweep": cmd_limit_sweep,
    "uq": cmd_uq,
    "energy-report": cmd_energy_report,
}


def main(argv=None) -> int:
    parser = _base_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = _merge_config(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, SelectionInfeasible, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
