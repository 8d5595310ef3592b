"""Spectral decomposition of the linearized generator at fixed frequency.

The frequency operator (dissipative convention, collision matrix L >= 0) is

    B_eps(xi) h = -L h - i (v.xi) h - eps^2 * i (v.xi)/|xi|^2 * <h, 1>,

so the mode-n generator of the kinetic solver is G(n) = (1/eps^2) B_eps(eps n).
For |xi| <= r0 exactly five eigenvalues stay above Re = -a2/2: an acoustic
conjugate pair lambda_{+-1}(s) = +-i eps + O(s^2) (plasma oscillation), a thermal
branch lambda_0(s) = a44 s^2 + O(s^3), and a degenerate transverse (shear) pair
lambda_2 = lambda_3 = a22 s^2 + O(s^3).  The acoustic/thermal triple solves the
self-consistent dispersion cubic whose coefficients are resolvent moments
a_ij(lambda, s); at s = 0 the cubic degenerates to lambda (lambda^2 + eps^2).

The semigroup splits as exp(t B) = S1 + S2 with S1 the five spectral projections
(indicator |xi| <= r0) and S2 the exponentially decaying remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .collision import CollisionModel

BRANCH_LABELS = (-1, 0, 1, 2, 3)


def assemble_B(model: CollisionModel, eps: float, xi) -> np.ndarray:
    """Dense matrix of B_eps(xi); xi is a 3-vector (or shorter, zero-padded).

    At xi = 0 the field term is dropped (the n = 0 convention) and B = -L.
    """
    b = model.basis
    xi3 = np.zeros(3)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xi3[: len(xi)] = xi
    s2 = float(xi3 @ xi3)
    B = -model.L_matrix.astype(complex)
    if s2 > 0.0:
        V = b.multiply_v_matrices
        Vxi = sum(xi3[a] * V[a] for a in range(3) if xi3[a] != 0.0)
        B = B - 1j * Vxi - (1j * eps**2 / s2) * np.outer(Vxi @ b.chi[:, 0], b.chi[:, 0])
    return B


def origin_eigenvalues(eps: float) -> np.ndarray:
    """The s -> 0 limit of the five branches: {0, 0, 0, +i eps, -i eps}.

    The acoustic/thermal triple are the roots of the dispersion cubic at s = 0,
    D_eps(lambda, 0) = lambda (lambda^2 + eps^2); the shear pair tends to zero.
    """
    triple = np.roots([1.0, 0.0, eps**2, 0.0])
    return np.sort_complex(np.concatenate([triple, [0.0, 0.0]]))


# -- resolvent moments and the dispersion cubic ---------------------------------------


def resolvent_aij(model: CollisionModel, lam: complex, s: float,
                  axis: int = 0) -> np.ndarray:
    """4x4 table a_ij = <R(lambda, s e) P_perp(v_e chi_i), v_e chi_j> over
    chi_1..chi_4, with R = -(lambda P_perp + L + i s P_perp (v.e) P_perp)^{-1}
    restricted to Ker(L)^perp.

    Requires Re(lambda) > -a2 so the restricted operator is invertible.
    """
    b = model.basis
    proj = model.projection
    Q = proj.kerp_basis
    nk = Q.shape[1]
    V = b.multiply_v_matrices[axis]
    M = lam * np.eye(nk) + Q.T @ model.L_matrix @ Q + 1j * s * (Q.T @ V @ Q)
    chis = [b.chi[:, k] for k in range(1, 5)]
    vchi = np.array([V @ c for c in chis])                     # (4, S)
    rhs = Q.T @ vchi.T                                         # (nk, 4); Q^T applies P_perp
    sol = -np.linalg.solve(M, rhs)                             # R applied columnwise
    return (Q @ sol).T @ vchi.T                                # a[i, j] = <R Pperp(v chi_i), v chi_j>


def dispersion_cubic(tab: np.ndarray, eps: float, s: float) -> np.ndarray:
    """Coefficients (highest first) of D_eps(lambda, s) with frozen a_ij table."""
    a11, a14 = tab[0, 0], tab[0, 3]
    a41, a44 = tab[3, 0], tab[3, 3]
    return np.array([
        1.0,
        -s**2 * (a11 + a44),
        eps**2 + (5.0 / 3.0) * s**2 + 1j * np.sqrt(2.0 / 3.0) * s**3 * (a41 + a14)
        + s**4 * (a44 * a11 - a41 * a14),
        -(s**2 * eps**2 + s**4) * a44,
    ])


def dispersion_roots(model: CollisionModel, eps: float, s: float,
                     seed: np.ndarray | None = None, tol: float = 1e-10,
                     max_iter: int = 50) -> np.ndarray:
    """Self-consistent roots of the dispersion cubic at one s.

    Fixed point: freeze the a_ij table at each current root, re-solve the cubic,
    and re-assign roots jointly (optimal matching) to avoid branch collapse; the
    update is damped by 0.5 whenever the residual grows.  Seeds default to the
    s = 0 roots {0, +-i eps}.
    """
    lam = np.array([0.0, 1j * eps, -1j * eps], dtype=complex) if seed is None \
        else np.asarray(seed, dtype=complex).copy()
    prev_res = np.inf
    for _ in range(max_iter):
        new = np.empty_like(lam)
        for k in range(3):
            tab = resolvent_aij(model, lam[k], s)
            roots = np.roots(dispersion_cubic(tab, eps, s))
            new[k] = roots[np.argmin(np.abs(roots - lam[k]))]
        cost = np.abs(new[:, None] - lam[None, :])
        rr, cc = linear_sum_assignment(cost)
        new = new[rr[np.argsort(cc)]]
        res = float(np.abs(new - lam).max())
        if res > prev_res:
            new = 0.5 * (new + lam)
            res = float(np.abs(new - lam).max())
        lam = new
        prev_res = res
        if res < tol:
            return lam
    raise RuntimeError(f"dispersion fixed point did not converge at s={s} (res={prev_res:.2e})")


# -- eigenvalue branches ----------------------------------------------------------------


@dataclass
class EigenBranch:
    j: int
    s: np.ndarray
    lam: np.ndarray
    vectors: np.ndarray                 # (len(s), size)
    lam0: complex = 0.0                 # branch value at s = 0
    fit_c: complex = 0.0                # quadratic coefficient of lam(s) - lam(0)
    fit_residual: float = 0.0
    min_overlap: float = 1.0

    def fit_quadratic(self, s_max: float | None = None):
        sel = np.ones(len(self.s), dtype=bool) if s_max is None else (self.s <= s_max)
        ss = self.s[sel] ** 2
        dl = self.lam[sel] - self.lam0
        c = np.vdot(ss, dl) / np.vdot(ss, ss)
        self.fit_c = complex(c)
        self.fit_residual = float(np.abs(dl - c * ss).max())
        return self.fit_c


def _select_low_eigs(B: np.ndarray, a2: float):
    w, V = sla.eig(B)
    keep = w.real > -0.5 * a2
    return w[keep], V[:, keep]


def eigen_branches(model: CollisionModel, eps: float, s_grid, axis: int = 0,
                   a2: float = 1.0) -> list[EigenBranch]:
    """Trace the five low-frequency branches over the s grid by eigenvector overlap.

    Raises RuntimeError when the count Re(lambda) > -a2/2 differs from five
    (counted with the shear multiplicity), which signals s beyond r0.
    """
    b = model.basis
    s_grid = np.asarray(sorted(s_grid), dtype=float)
    e = np.zeros(3)
    e[axis] = 1.0
    lam_hist = {j: [] for j in BRANCH_LABELS}
    vec_hist = {j: [] for j in BRANCH_LABELS}
    overlaps = {j: 1.0 for j in BRANCH_LABELS}
    prev = None
    for s in s_grid:
        w, V = _select_low_eigs(assemble_B(model, eps, s * e), a2)
        if len(w) != 5:
            raise RuntimeError(
                f"expected five low eigenvalues at s={s:.4g}, found {len(w)} (r0 exceeded)")
        V = V / np.linalg.norm(V, axis=0)
        if prev is None:
            order = _classify_at_origin(w, V, b, eps, axis)
        else:
            # match against previous eigenvectors by modulus of inner products
            cost = -np.abs(prev.conj().T @ V)
            rr, cc = linear_sum_assignment(cost)
            order = np.empty(5, dtype=int)
            order[rr] = cc
            for idx, j in enumerate(BRANCH_LABELS[:3]):
                overlaps[j] = min(overlaps[j], float(np.abs(prev[:, idx].conj() @ V[:, order[idx]])))
            # the shear pair is degenerate: continuity is a subspace statement
            # (principal-angle cosines of orthonormalized pair bases)
            Qp, _ = np.linalg.qr(prev[:, 3:5])
            Qn, _ = np.linalg.qr(V[:, order[3:5]])
            sv = np.linalg.svd(Qp.conj().T @ Qn, compute_uv=False)
            for j in (2, 3):
                overlaps[j] = min(overlaps[j], float(sv.min()))
        w, V = w[order], V[:, order]
        for idx, j in enumerate(BRANCH_LABELS):
            lam_hist[j].append(w[idx])
            vec_hist[j].append(V[:, idx])
        prev = V
    out = []
    for j in BRANCH_LABELS:
        lam0 = 1j * eps * j if j in (-1, 1) else 0.0
        br = EigenBranch(j=j, s=s_grid, lam=np.array(lam_hist[j]),
                         vectors=np.array(vec_hist[j]), lam0=lam0,
                         min_overlap=overlaps[j])
        br.fit_quadratic()
        out.append(br)
    return out


def _classify_at_origin(w, V, basis, eps, axis):
    """Order the five eigenpairs as (-1, 0, +1, 2, 3) at the smallest s:
    acoustic by the sign of Im(lambda), thermal by the chi_4 component, shear
    as the transverse-momentum pair."""
    chi4 = basis.chi[:, 4]
    chiu = basis.chi[:, 1:4]
    idx = list(range(5))
    imag = np.abs(w.imag)
    ac = sorted(np.argsort(-imag)[:2], key=lambda i: w[i].imag)   # (-, +)
    rest = [i for i in idx if i not in ac]
    th4 = [abs(np.vdot(chi4, V[:, i])) for i in rest]
    thermal = rest[int(np.argmax(th4))]
    shear = [i for i in rest if i != thermal]
    # shear pair ordered by transverse momentum component for determinism
    def tkey(i):
        m = chiu.T @ V[:, i]
        return -abs(m[(axis + 1) % 3])
    shear = sorted(shear, key=tkey)
    return np.array([ac[0], thermal, ac[1], shear[0], shear[1]])


def choose_r0(model: CollisionModel, eps: float, a2: float = 1.0,
              s_min: float = 1e-3, s_max: float = 2.0, n: int = 40) -> float:
    """Largest grid radius with exactly five eigenvalues above Re = -a2/2 and a
    successful branch continuation from the origin up to it."""
    grid = np.logspace(np.log10(s_min), np.log10(s_max), n)
    good = 0
    e = np.array([1.0, 0.0, 0.0])
    for k, s in enumerate(grid):
        w, _ = _select_low_eigs(assemble_B(model, eps, s * e), a2)
        if len(w) != 5:
            break
        good = k + 1
    if good == 0:
        raise RuntimeError("no admissible radius found")
    r0 = float(grid[good - 1])
    eigen_branches(model, eps, grid[:good], a2=a2)   # continuation must succeed
    return r0


# -- spectral projections and the semigroup split ------------------------------------------


def projections(model: CollisionModel, eps: float, xi, a2: float = 1.0) -> dict:
    """Spectral projectors {j: P_j} onto the five low branches at xi (|xi| <= r0),
    built from right and left eigenvectors (the degenerate shear pair is returned
    as a single rank-2 projector under the key 2).

    Right eigenvectors within each branch are orthonormalized under the
    xi-weighted inner product (f,g)_xi = (f,g) + eps^2/|xi|^2 (P_d f)(conj P_d g).
    """
    B = assemble_B(model, eps, xi)
    w, Vl, Vr = sla.eig(B, left=True, right=True)
    keep = np.where(w.real > -0.5 * a2)[0]
    if len(keep) != 5:
        raise RuntimeError(f"expected five low eigenvalues, found {len(keep)}")
    wk = w[keep]
    # group: acoustic pair (largest |Im|), thermal (remaining, most chi4), shear pair
    b = model.basis
    order = _classify_at_origin(wk, Vr[:, keep] / np.linalg.norm(Vr[:, keep], axis=0),
                                b, eps, 0)
    keep = keep[order]
    wk = w[keep]
    groups = {-1: [keep[0]], 0: [keep[1]], 1: [keep[2]], 2: [keep[3], keep[4]]}
    out = {}
    for j, cols in groups.items():
        R = Vr[:, cols]
        Lc = Vl[:, cols]
        P = R @ np.linalg.solve(Lc.conj().T @ R, Lc.conj().T)
        out[j] = P
    return out


def xi_inner_product_matrix(basis, eps: float, xi) -> np.ndarray:
    """Gram matrix of (f,g)_xi = (f,g) + eps^2/|xi|^2 * (P_d f)(conj P_d g)."""
    xi3 = np.zeros(3)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xi3[: len(xi)] = xi
    s2 = float(xi3 @ xi3)
    if s2 <= 0.0:
        raise ValueError("xi inner product needs xi != 0")
    chi0 = basis.chi[:, 0]
    return np.eye(basis.size) + (eps**2 / s2) * np.outer(chi0, chi0)


def xi_numerical_abscissa(model: CollisionModel, eps: float, xi) -> float:
    """Numerical abscissa of B_eps(xi) under the xi-weighted inner product.

    The field and transport contributions cancel exactly in this metric, leaving
    Sym_xi(B) = -L, so the abscissa is zero (attained on the kernel) and the
    operator is dissipative; in the plain inner product the rank-one field term
    would make the abscissa positive.
    """
    B = assemble_B(model, eps, xi)
    G = xi_inner_product_matrix(model.basis, eps, xi)
    w, U = np.linalg.eigh(G)
    Gh = U @ np.diag(np.sqrt(w)) @ U.T
    Ghi = U @ np.diag(w**-0.5) @ U.T
    Bi = Gh @ B @ Ghi
    return float(np.linalg.eigvalsh(0.5 * (Bi + Bi.conj().T))[-1])


def semigroup_split(model: CollisionModel, eps: float, xi, t: float, g: np.ndarray,
                    r0: float, a2: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """(S1 g, S2 g) with S1 = sum_j exp(t lambda_j) P_j g for |xi| <= r0 (else 0)
    and S2 = exp(t B) g - S1."""
    B = assemble_B(model, eps, xi)
    full = sla.expm(t * B) @ g
    xi3 = np.zeros(3)
    xiv = np.atleast_1d(np.asarray(xi, dtype=float))
    xi3[: len(xiv)] = xiv
    s = float(np.linalg.norm(xi3))
    if s > r0 or s == 0.0:
        return np.zeros_like(full), full
    projs = projections(model, eps, xi, a2=a2)
    S1 = np.zeros_like(full)
    for j, P in projs.items():
        Pg = P @ g
        # eigenvalue of this branch: Rayleigh quotient through the projector
        denom = np.vdot(Pg, Pg)
        lam = np.vdot(Pg, B @ Pg) / denom if abs(denom) > 1e-28 else 0.0
        S1 += np.exp(t * lam) * Pg
    return S1, full - S1


def high_frequency_decay(model: CollisionModel, eps: float, r0: float,
                         s_values, t_values, g: np.ndarray, a2: float = 1.0):
    """Fit ||S2(t, xi) g|| <= C e^{-sigma t} ||g|| on an (s, t) grid.

    sigma is the least-squares slope of log sup_s(||S2 g||/||g||) against t and C
    the smallest prefactor with no violation on the grid; returns
    (sigma, C, max_violation) with max_violation <= 0 by construction of C.
    """
    g = np.asarray(g, dtype=complex)
    gn = np.linalg.norm(g)
    ratios = np.empty((len(s_values), len(t_values)))
    e = np.array([1.0, 0.0, 0.0])
    for i, s in enumerate(s_values):
        for k, t in enumerate(t_values):
            _, S2 = semigroup_split(model, eps, s * e, t, g, r0, a2=a2)
            ratios[i, k] = np.linalg.norm(S2) / gn
    sup_t = ratios.max(axis=0)
    mask = sup_t > 1e-300
    tt = np.asarray(t_values, dtype=float)[mask]
    A = np.vstack([np.ones_like(tt), -tt]).T
    coef, *_ = np.linalg.lstsq(A, np.log(sup_t[mask]), rcond=None)
    sigma = float(coef[1])
    C = float(np.exp(np.max(np.log(sup_t[mask]) + sigma * tt)))
    bound = C * np.exp(-sigma * tt)
    viol = float(np.max((sup_t[mask] - bound) / bound))
    return sigma, C, viol
