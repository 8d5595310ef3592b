"""Hypocoercive energy machinery: measured structural constants, coefficient
selection for the augmented functional, functional evaluation, and decay fits.

All constants are measured on the truncated discrete operator, so the selection
inequalities and the monotone decay of the functional are checkable statements
about the implemented system rather than continuum quotations.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .collision import CollisionModel


class SelectionInfeasible(RuntimeError):
    """Raised when no admissible coefficient set exists; names the failing piece."""

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"coefficient selection infeasible: {name}" +
                         (f" ({detail})" if detail else ""))


@dataclass
class EnergyLedger:
    a2: float
    a3: float
    a4: float
    a5: float
    a6: float | None = None
    atilde: float = 1.0
    C_u: float = 0.0
    C_delta: float = 0.0
    C_delta1: float = 0.0
    C_delta2: float = 0.0
    delta: float = 0.0
    mixing_table: dict = field(default_factory=dict)   # delta -> C_delta
    defect_grid: list = field(default_factory=list)    # (ratio, a3, a4) candidates

    def to_json(self) -> str:
        d = asdict(self)
        d["defect_grid"] = [list(map(float, row)) for row in self.defect_grid]
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EnergyLedger":
        d = json.loads(text)
        d["mixing_table"] = {float(k): v for k, v in d.get("mixing_table", {}).items()}
        return cls(**d)


@dataclass
class LambdaSelection:
    eps: float
    delta: float
    lam1: float
    lam2: float
    lam3: float
    lam4: float
    a6: float
    lt1: float
    lt2: float
    lam5: float
    lam6: float
    lam7: float
    c_l: float
    c_u: float

    def as_dict(self) -> dict:
        return asdict(self)


# -- measured constants ------------------------------------------------------------


def _defect_forms(model: CollisionModel):
    b = model.basis
    D = b.gradient_matrices
    M = model.lambda_matrix
    R = sum(D[a].T @ M @ D[a] for a in range(3))
    R = 0.5 * (R + R.T)
    S_def = sum((D[a] @ M).T @ D[a] for a in range(3))
    S_def = 0.5 * (S_def + S_def.T)
    Km = model.K_matrix
    S_mix = sum((D[a] @ Km).T @ D[a] for a in range(3))
    S_mix = 0.5 * (S_mix + S_mix.T)
    return R, S_def, S_mix


def mixing_constant(model: CollisionModel, delta: float) -> float:
    """Smallest C with |<grad_v K h, grad_v h>| <= C ||h||^2 + delta ||grad_v h||_Lambda^2
    on the truncated space (dense eigenvalue bound)."""
    R, _, S_mix = _defect_forms(model)
    w1 = np.linalg.eigvalsh(S_mix - delta * R)[-1]
    w2 = np.linalg.eigvalsh(-S_mix - delta * R)[-1]
    return float(max(0.0, w1, w2))


def defect_constants(model: CollisionModel, n_ratios: int = 50):
    """Best (a3, a4) with <grad_v Lambda(h), grad_v h> >= a3 ||grad_v h||_Lambda^2 - a4 ||h||^2.

    For each ratio r = a3/a4 on a log grid the largest feasible a3 solves
    lambda_min(S - a3 (R - I/r)) = 0; secant iteration on the concave minimum
    eigenvalue.  Returns the grid of candidates and the pair maximizing
    a3/(1 + a4) (large dissipation share, moderate zeroth-order sacrifice).
    """
    R, S_def, _ = _defect_forms(model)
    n = R.shape[0]
    eye = np.eye(n)
    ratios = np.logspace(-2, 2, n_ratios)
    rows = []
    for r in ratios:
        B = R - eye / r

        def f(t):
            return np.linalg.eigvalsh(S_def - t * B)[0]

        t0, t1 = 0.0, 1.0
        f0, f1 = f(t0), f(t1)
        # expand until sign change (f concave, f(0) >= 0 since S_def is PSD here)
        k = 0
        while f1 > 0 and k < 60:
            t0, f0 = t1, f1
            t1 *= 2.0
            f1 = f(t1)
            k += 1
        if f1 > 0:
            rows.append((r, t1, t1 / r))
            continue
        for _ in range(60):
            if abs(f1 - f0) < 1e-300:
                break
            t = t1 - f1 * (t1 - t0) / (f1 - f0)
            t = min(max(t, min(t0, t1)), max(t0, t1))
            ft = f(t)
            if abs(ft) < 1e-12:
                t1 = t
                break
            if ft > 0:
                t0, f0 = t, ft
            else:
                t1, f1 = t, ft
        a3 = t1 if f(t1) >= -1e-10 else t0
        rows.append((r, a3, a3 / r))
    best = max(rows, key=lambda row: row[1] / (1.0 + row[2]))
    return float(best[1]), float(best[2]), rows


def measure_constants(model: CollisionModel, n_min_sq: float = 1.0,
                      mixing_deltas=(0.1, 0.01), n_ratios: int = 50) -> EnergyLedger:
    """Measure every structural constant of the ledger on the discrete operator."""
    b = model.basis
    proj = model.projection
    Q = proj.kerp_basis
    L = model.L_matrix
    M = model.lambda_matrix
    Lred = Q.T @ L @ Q
    Mred = Q.T @ M @ Q
    # a2 = min Rayleigh quotient of <Lg,g> / ||g_perp||_Lambda^2 over Ker^perp,
    # i.e. the smallest generalized eigenvalue of (L, M_Lambda) there
    a2 = float(min(np.real(np.linalg.eigvals(np.linalg.solve(Mred, Lred)))))
    a3, a4, grid = defect_constants(model, n_ratios=n_ratios)
    delta = a3 / 12.0
    mixing = {float(d): mixing_constant(model, d) for d in (*mixing_deltas, delta)}
    # C_u: |<L h, f>| <= C_u ||h||_Lambda ||f||_Lambda
    w, U = np.linalg.eigh(M)
    Mh = U @ np.diag(w**-0.5) @ U.T
    C_u = float(np.linalg.norm(Mh @ L @ Mh, 2))
    # atilde ||h||_Lambda^2 <= <Lambda h, h>: equality for the multiplier itself
    atilde = 1.0
    return EnergyLedger(a2=a2, a3=a3, a4=a4, a5=1.0 / float(n_min_sq), atilde=atilde,
                        C_u=C_u, C_delta=mixing[delta],
                        C_delta1=1.0 / (4.0 * delta), C_delta2=1.0 / (4.0 * delta),
                        delta=delta, mixing_table=mixing,
                        defect_grid=[list(map(float, rw)) for rw in grid])


# -- coefficient selection ------------------------------------------------------------


def select_coefficients(ledger: EnergyLedger, eps: float,
                        delta: float | None = None) -> LambdaSelection:
    """Choose lambda_1..lambda_4 satisfying the absorption inequalities with slack
    >= delta/2, following the proof's order: lambda_4 first, then lambda_3 small,
    then a6, lambda_1, lambda_2.

    Raises SelectionInfeasible naming the first derived coefficient forced
    nonpositive.
    """
    a2, a3, a4, a5 = ledger.a2, ledger.a3, ledger.a4, ledger.a5
    C_u = ledger.C_u
    if delta is None:
        delta = ledger.delta
    if delta not in ledger.mixing_table:
        raise ValueError(f"no mixing constant measured for delta={delta}")
    Cd = ledger.mixing_table[delta]
    Cd1 = 1.0 / (4.0 * delta)
    Cd2 = 1.0 / (4.0 * delta)
    slack = 0.5 * delta

    if a3 - 3.0 * delta <= 0.0:
        raise SelectionInfeasible("lambda5", f"a3 - 3*delta = {a3 - 3*delta:.3g} <= 0")
    lam4 = 2.0 * delta * a5 + 2.0 * a5 + slack
    b1 = (0.5 * lam4 - delta - slack) / (a5 * (a4 + Cd) + Cd1 * eps**2)
    b2 = (lam4 / a5 - delta - slack) / (Cd2 * eps**2) if Cd2 * eps**2 > 0 else np.inf
    lam3 = min(b1, b2)
    if lam3 <= 0.0:
        name = "lambda6" if b1 <= b2 else "lambda7"
        raise SelectionInfeasible(name, "no positive lambda3 under the absorption bounds")
    a6 = 0.5 * lam3 * (a3 - 3.0 * delta) / lam4
    lam1 = 1.0 + lam3 * eps**2 + eps**2 * (lam3 * (a4 + Cd) + delta + slack)
    lam2 = max(lam4 + eps**2 * (lam4 * C_u**2 / a6 + delta + slack),
               lam4 + 2.0 * lam4**2 / lam3)

    lt1 = lam1 * a2 / eps**2 - lam3 * (a4 + Cd)
    lt2 = lam2 * a2 / eps**2 - lam4 * C_u**2 / a6 - lam3 * a5 * (a4 + Cd)
    lam5 = lam3 * (a3 - 3.0 * delta) - lam4 * a6
    lam6 = lam4 - lam3 * Cd1 * eps**2 - a5 * (a4 + Cd) * lam3
    lam7 = 2.0 * lam4 - lam3 * a5 * Cd2 * eps**2
    derived = {"lt1": lt1, "lt2": lt2, "lambda5": lam5, "lambda6": lam6, "lambda7": lam7}
    for name, val in derived.items():
        if not val > 0.0:
            raise SelectionInfeasible(name, f"{name} = {val:.3g}")
    c_l, c_u = equivalence_bounds(lam1, lam2, lam3, lam4, eps)
    if c_l <= 0.0:
        raise SelectionInfeasible("equivalence", f"c_l = {c_l:.3g}")
    return LambdaSelection(eps=eps, delta=delta, lam1=lam1, lam2=lam2, lam3=lam3,
                           lam4=lam4, a6=a6, lt1=lt1, lt2=lt2, lam5=lam5, lam6=lam6,
                           lam7=lam7, c_l=c_l, c_u=c_u)


def selection_slack(sel: LambdaSelection, ledger: EnergyLedger) -> dict:
    """Left-minus-right of every selection inequality (the substitution oracle)."""
    a3, a4, a5 = ledger.a3, ledger.a4, ledger.a5
    Cd = ledger.mixing_table[sel.delta]
    Cd1 = Cd2 = 1.0 / (4.0 * sel.delta)
    eps, d = sel.eps, sel.delta
    return {
        "lam4_floor": sel.lam4 - (2.0 * d * a5 + 2.0 * a5),
        "lam3_absorb": 0.5 * sel.lam4 - (sel.lam3 * (a5 * (a4 + Cd) + Cd1 * eps**2) + d),
        "lam3_field": sel.lam4 / a5 - (sel.lam3 * Cd2 * eps**2 + d),
        "a6_identity": abs(sel.lam4 * sel.a6 - 0.5 * sel.lam3 * (a3 - 3.0 * d)),
        "lam1_bound": (sel.lam1 - sel.lam3 * eps**2 - 1.0) / eps**2
                      - (sel.lam3 * (a4 + Cd) + d),
        "lam2_bound": (sel.lam2 - sel.lam4) / eps**2 - (sel.lam4 * ledger.C_u**2 / sel.a6 + d),
    }


def equivalence_bounds(lam1, lam2, lam3, lam4, eps) -> tuple[float, float]:
    """Analytic c_l, c_u with c_l * E <= frak-E^1 <= c_u * E for the order-one
    functional (the cross term bounded by the 2x2 block spectrum)."""
    block = np.array([[lam2, lam4], [lam4, lam3]])
    ev = np.linalg.eigvalsh(block)
    c_l = min(lam1, lam1 - lam3 * eps**2, ev[0])
    c_u = max(lam1, lam2, ev[1])
    return float(c_l), float(c_u)


# -- energy functional -------------------------------------------------------------


@dataclass
class EnergyValue:
    value: float               # with the printed minus sign on the phi part
    value_plus: float          # alternative sign variant
    part_e1: float
    part_e21: float
    part_e22: float
    plain: float               # E^s = ||(g, grad phi)||_{H^s_x}^2 + eps^2 ||grad_v g||_{H^{s-1}}^2
    cross: float
    c_l: float
    c_u: float

    @property
    def equivalent(self) -> bool:
        return self.c_l * self.plain - 1e-9 <= self.value <= self.c_u * self.plain + 1e-9

    @property
    def satisfying_variant(self) -> str:
        lo, hi = self.c_l * self.plain - 1e-9, self.c_u * self.plain + 1e-9
        minus = lo <= self.value <= hi
        plus = lo <= self.value_plus <= hi
        if minus and plus:
            return "both"
        return "minus" if minus else ("plus" if plus else "neither")


def _v_derivative_stack(ghat: np.ndarray, D: list[np.ndarray], order: int):
    """All ordered v-derivative tuples of the given order: list of arrays."""
    stack = [ghat]
    for _ in range(order):
        stack = [g @ D[a].T for g in stack for a in range(3)]
    return stack


def energy_functional(stepper, state, sel: LambdaSelection, s: int = 1) -> EnergyValue:
    """Evaluate the augmented functional frak-E^s_eps and the plain norm E^s_eps.

    Spectral x-derivatives (multipliers (i n)^k), ladder v-derivatives; the
    lambda_3 phi term is reported in both sign variants; the minus variant is the default.
    """
    ms = stepper.mode_set
    eps = stepper.eps
    dim = stepper.config.spatial_dim
    D = stepper.basis.gradient_matrices
    g = state.ghat
    vol = ms.volume
    nsq = ms.nsq
    phi = stepper.phi_hat(state)
    rho = stepper.rho_hat(state)

    gnorm = np.sum(np.abs(g) ** 2, axis=1)              # per-mode ||ghat||^2
    Dg = [g @ D[a].T for a in range(3)]
    gv = sum(np.sum(np.abs(x) ** 2, axis=1) for x in Dg)
    cross_mode = sum((1j * ms.modes3[:, a] * np.einsum("mi,mi->m", np.conj(Dg[a]), g)).real
                     for a in range(dim))
    phi_grad = nsq * np.abs(phi) ** 2                   # per-mode ||grad phi||^2
    lap_phi = np.abs(rho) ** 2

    lam1, lam2, lam3, lam4 = sel.lam1, sel.lam2, sel.lam3, sel.lam4
    part_e1 = 0.0
    cross_total = 0.0
    plain = 0.0
    phi_part = 0.0
    for k in range(s):
        wk = nsq**k
        part_e1 += lam1 * vol * float(np.sum(wk * (gnorm + phi_grad)))
        part_e1 += lam2 * vol * float(np.sum(wk * (nsq * gnorm + lap_phi)))
        part_e1 += lam3 * eps**2 * vol * float(np.sum(wk * gv))
        phi_part += lam3 * eps**2 * vol * float(np.sum(wk * phi_grad))
        cross_total += 2.0 * lam4 * eps * vol * float(np.sum(wk * cross_mode))
    part_e1 += cross_total

    # plain E^s: H^s_x of (g, grad phi) plus eps^2 * mixed H^{s-1} of grad_v g
    w_hs = ms.hx_weights(s)
    plain = vol * float(np.sum(w_hs * (gnorm + phi_grad)))
    for i in range(s):                        # x-order i, v-order j, i + j <= s-1
        for j in range(s - i):
            stack = _v_derivative_stack(g, D, j + 1)
            lvl = sum(np.sum(np.abs(x) ** 2, axis=1) for x in stack)
            plain += eps**2 * vol * float(np.sum(nsq**i * lvl))

    # higher v-derivative parts of the functional (present only for s >= 2)
    part_e21 = 0.0
    part_e22 = 0.0
    for i in range(2, s + 1):
        j = s - i
        stack = _v_derivative_stack(g, D, i)
        lvl = sum(np.sum(np.abs(x) ** 2, axis=1) for x in stack)
        contrib = eps**2 * vol * float(np.sum(nsq**j * lvl))
        if i == 2:
            part_e21 += contrib
        else:
            part_e22 += contrib

    value = part_e1 - phi_part + part_e21 + part_e22
    value_plus = part_e1 + phi_part + part_e21 + part_e22
    return EnergyValue(value=value, value_plus=value_plus, part_e1=part_e1 - phi_part,
                       part_e21=part_e21, part_e22=part_e22, plain=plain,
                       cross=cross_total, c_l=sel.c_l, c_u=sel.c_u)


# -- decay fits ----------------------------------------------------------------------


@dataclass
class DecayFit:
    rate: float
    amplitude: float
    residual: float
    monotone_tail: bool


def fit_decay(times, values, tail_fraction: float = 0.5, min_samples: int = 10) -> DecayFit:
    """Least-squares fit of log(values) ~ log(A) - rate * t on the tail.

    The tail keeps the trailing `tail_fraction` of samples (at least
    `min_samples`); a non-monotone tail is flagged but still fitted.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(t) < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {len(t)}")
    if np.any(v <= 0.0):
        raise ValueError("decay fit needs positive values")
    n0 = min(len(t) - min_samples, int(len(t) * (1.0 - tail_fraction)))
    n0 = max(n0, 0)
    tt, vv = t[n0:], np.log(v[n0:])
    A = np.vstack([np.ones_like(tt), -tt]).T
    coef, res, *_ = np.linalg.lstsq(A, vv, rcond=None)
    resid = float(np.sqrt(res[0] / len(tt))) if len(res) else 0.0
    monotone = bool(np.all(np.diff(v[n0:]) <= 1e-12 * max(v[0], 1.0)))
    return DecayFit(rate=float(coef[1]), amplitude=float(np.exp(coef[0])),
                    residual=resid, monotone_tail=monotone)
