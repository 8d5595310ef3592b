"""Orthonormal tensor Hermite basis for velocity space R^3 under the Maxwellian weight.

The basis functions are products of normalized probabilists' Hermite polynomials,
psi_alpha(v) = prod_i He_{alpha_i}(v_i)/sqrt(alpha_i!), orthonormal with respect to
M(v) dv, M = (2*pi)^{-3/2} exp(-|v|^2/2).  All velocity-space operators used by the
collision models and solvers (moments, pointwise products, multiplier matrices,
ladder derivatives, weighted norms) are built here.

Two quadratures are kept:

* a tensor Gauss-Hermite grid of order >= 2K+2 per axis (exact for polynomial
  integrands of degree <= 4K+3), used for generic multiplier matrices and as the
  independent oracle for products;
* a radial x spherical pair of grids that integrates poly(v) and |v|*poly(v)
  against M exactly (Gauss-Laguerre in r^2/2 with alpha = 1/2 resp. 1, times an
  antipodally symmetric sphere rule), used for the 1+|v| multiplier so that the
  collision-model matrices carry no quadrature error in the weight.
"""

from __future__ import annotations

import itertools
from functools import cached_property
from math import comb, factorial

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_genlaguerre


def basis_size(K: int) -> int:
    """Number of multi-indices alpha in N^3 with |alpha| <= K, i.e. C(K+3,3)."""
    if K < 0:
        raise ValueError(f"degree must be nonnegative, got {K}")
    return comb(K + 3, 3)


def multi_indices(K: int) -> list[tuple[int, int, int]]:
    """All 3D multi-indices of total degree <= K in graded lexicographic order."""
    idx = [a for a in itertools.product(range(K + 1), repeat=3) if sum(a) <= K]
    idx.sort(key=lambda a: (sum(a), a))
    return idx


def hermite_eval(x: np.ndarray, K: int) -> np.ndarray:
    """Evaluate He_n(x)/sqrt(n!) for n = 0..K; output shape x.shape + (K+1,)."""
    V = np.zeros(np.shape(x) + (K + 1,))
    V[..., 0] = 1.0
    if K >= 1:
        V[..., 1] = x
    for n in range(1, K):
        V[..., n + 1] = x * V[..., n] - n * V[..., n - 1]
    for n in range(K + 1):
        V[..., n] /= np.sqrt(factorial(n))
    return V


def sphere_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Antipodally symmetric product rule on S^2, exact for polynomials of the
    given degree.  Weights sum to one (spherical average)."""
    nt = degree // 2 + 1
    nph = degree + 1
    ct, wt = leggauss(nt)
    st = np.sqrt(1.0 - ct**2)
    ph = 2.0 * np.pi * np.arange(nph) / nph
    cph, sph = np.cos(ph), np.sin(ph)
    pts = np.empty((nt * nph, 3))
    pts[:, 0] = np.outer(st, cph).ravel()
    pts[:, 1] = np.outer(st, sph).ravel()
    pts[:, 2] = np.repeat(ct, nph)
    wts = np.repeat(wt, nph) / (2.0 * nph)  # leggauss weights sum to 2
    return pts, wts


def _radial_rule(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    # E[f(|V|)] = (2/sqrt(pi)) int f(sqrt(2u)) sqrt(u) e^-u du   (u = r^2/2)
    # alpha=1/2 grid: exact for even f; alpha=1 grid (with the extra sqrt(2u) of an
    # odd f folded in): exact for |v| times even polynomials.
    u, w = roots_genlaguerre(n, alpha)
    return np.sqrt(2.0 * u), w


class HermiteBasis:
    """Degree-K tensor Hermite basis with flat-index bookkeeping and quadrature.

    Immutable after construction; safe to share between workers.
    """

    def __init__(self, K: int, quad_order: int | None = None):
        if K < 0:
            raise ValueError(f"degree must be nonnegative, got {K}")
        self.K = K
        self.indices = multi_indices(K)
        self.size = len(self.indices)
        assert self.size == basis_size(K)
        self.index_of = {a: i for i, a in enumerate(self.indices)}
        self._A = np.array(self.indices)
        self.quad_order = quad_order if quad_order is not None else 2 * K + 2
        if self.quad_order < 2 * K + 2:
            raise ValueError("quadrature order must be at least 2K+2")

    # -- flat index map -------------------------------------------------------

    def flat_index(self, alpha: tuple[int, int, int]) -> int:
        return self.index_of[tuple(alpha)]

    def multi_index(self, i: int) -> tuple[int, int, int]:
        return self.indices[i]

    # -- tensor Gauss-Hermite quadrature (generic oracle grid) ----------------

    @cached_property
    def points(self) -> np.ndarray:
        x1, _ = hermegauss(self.quad_order)
        return np.array(list(itertools.product(x1, repeat=3)))

    @cached_property
    def weights(self) -> np.ndarray:
        _, w1 = hermegauss(self.quad_order)
        w1 = w1 / np.sqrt(2.0 * np.pi)
        return np.array([wi * wj * wk for wi, wj, wk in itertools.product(w1, repeat=3)])

    @cached_property
    def eval_matrix(self) -> np.ndarray:
        """Values psi_alpha(points): shape (n_points, size)."""
        return self._eval_on(self.points)

    def _eval_on(self, pts: np.ndarray) -> np.ndarray:
        V = [hermite_eval(pts[:, ax], self.K) for ax in range(3)]
        A = self._A
        return V[0][:, A[:, 0]] * V[1][:, A[:, 1]] * V[2][:, A[:, 2]]

    def evaluate(self, coeffs: np.ndarray, pts: np.ndarray | None = None) -> np.ndarray:
        """Pointwise values of the function with the given coefficients."""
        P = self.eval_matrix if pts is None else self._eval_on(pts)
        return P @ coeffs

    def project_values(self, values: np.ndarray) -> np.ndarray:
        """L^2(M)-projection of point values on the tensor grid onto the basis."""
        return self.eval_matrix.T @ (self.weights * values)

    # -- exact radial-sphere grids for radial weights --------------------------

    @cached_property
    def _radial_grids(self):
        deg = 2 * self.K
        sp, sw = sphere_rule(max(deg, 2))
        out = []
        for alpha, scale in ((0.5, 2.0 / np.sqrt(np.pi)), (1.0, 2.0 * np.sqrt(2.0) / np.sqrt(np.pi))):
            r, w = _radial_rule(self.K + 2, alpha)
            pts = (r[:, None, None] * sp[None, :, :]).reshape(-1, 3)
            wts = (scale * w[:, None] * sw[None, :]).reshape(-1)
            out.append((pts, wts))
        return out

    @cached_property
    def lambda_matrix(self) -> np.ndarray:
        """Multiplier matrix of the dissipation weight 1+|v|, assembled exactly.

        The Gram part is the identity; the |v| part is integrated on the odd-parity
        radial grid, which is exact for |v| * poly(deg <= 2K).
        """
        pts, wts = self._radial_grids[1]
        P = self._eval_on(pts)
        M = P.T @ (wts[:, None] * P)
        return np.eye(self.size) + 0.5 * (M + M.T)

    # -- inner products and norms ----------------------------------------------

    def weighted_inner(self, f: np.ndarray, g: np.ndarray):
        """<f, g> = int f conj(g) M dv; by orthonormality the coefficient dot product."""
        f = np.asarray(f)
        g = np.asarray(g)
        if f.shape != (self.size,) or g.shape != (self.size,):
            raise ValueError("coefficient length does not match basis size")
        return np.vdot(g, f)  # sum f * conj(g)

    def norm(self, f: np.ndarray) -> float:
        return float(np.linalg.norm(f))

    def lambda_norm(self, f: np.ndarray) -> float:
        """(int |f|^2 (1+|v|) M dv)^{1/2} via the exact 1+|v| multiplier matrix."""
        f = np.asarray(f)
        val = np.vdot(f, self.lambda_matrix @ f).real
        return float(np.sqrt(max(val, 0.0)))

    # -- products ---------------------------------------------------------------

    @cached_property
    def _triple_1d(self) -> np.ndarray:
        """1D normalized triple products t[m,n,k] = E[psi_m psi_n psi_k] from the
        Hermite linearization formula (closed form, no quadrature)."""
        K = self.K
        t = np.zeros((K + 1, K + 1, K + 1))
        for m in range(K + 1):
            for n in range(K + 1):
                for k in range(K + 1):
                    tot = m + n + k
                    if tot % 2:
                        continue
                    s = tot // 2
                    if s < m or s < n or s < k:
                        continue
                    t[m, n, k] = np.sqrt(float(factorial(m) * factorial(n) * factorial(k))) / (
                        factorial(s - m) * factorial(s - n) * factorial(s - k)
                    )
        return t

    @cached_property
    def product_tensor(self) -> np.ndarray:
        """T[a, b, c] = <psi_a psi_b, psi_c>, shape (size,)*3."""
        t = self._triple_1d
        A = self._A
        T = t[np.ix_(A[:, 0], A[:, 0], A[:, 0])].copy()
        T *= t[np.ix_(A[:, 1], A[:, 1], A[:, 1])]
        T *= t[np.ix_(A[:, 2], A[:, 2], A[:, 2])]
        return T

    def multiply_project(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Galerkin truncation of the pointwise product f*g (orthogonal projection
        of the product back onto degree <= K)."""
        f = np.asarray(f)
        g = np.asarray(g)
        if f.shape != (self.size,) or g.shape != (self.size,):
            raise ValueError("coefficient length does not match basis size")
        return np.einsum("abc,a,b->c", self.product_tensor, f, g, optimize=True)

    def multiplier_matrix(self, weight) -> np.ndarray:
        """Symmetric matrix (M_w)_{ab} = <w psi_b, psi_a> of multiplication by the
        weight, assembled on the tensor Gauss-Hermite grid.

        `weight` is called with the (n_points, 3) node array.
        """
        w = np.asarray(weight(self.points), dtype=float)
        P = self.eval_matrix
        M = P.T @ ((self.weights * w)[:, None] * P)
        return 0.5 * (M + M.T)

    # -- ladder operators ---------------------------------------------------------

    @cached_property
    def gradient_matrices(self) -> list[np.ndarray]:
        """d/dv_a in coefficients: psi_n -> sqrt(n) psi_{n-1} along each axis."""
        D = [np.zeros((self.size, self.size)) for _ in range(3)]
        for i, a in enumerate(self.indices):
            for ax in range(3):
                n = a[ax]
                if n >= 1:
                    b = list(a)
                    b[ax] = n - 1
                    D[ax][self.index_of[tuple(b)], i] = np.sqrt(n)
        return D

    @cached_property
    def multiply_v_matrices(self) -> list[np.ndarray]:
        """Multiplication by v_a truncated at degree K:
        psi_n -> sqrt(n+1) psi_{n+1} + sqrt(n) psi_{n-1}."""
        V = [np.zeros((self.size, self.size)) for _ in range(3)]
        for i, a in enumerate(self.indices):
            for ax in range(3):
                n = a[ax]
                if n >= 1:
                    b = list(a)
                    b[ax] = n - 1
                    V[ax][self.index_of[tuple(b)], i] = np.sqrt(n)
                if sum(a) < self.K:
                    b = list(a)
                    b[ax] = n + 1
                    V[ax][self.index_of[tuple(b)], i] = np.sqrt(n + 1)
        return V

    def gradient_v(self, f: np.ndarray, axis: int) -> np.ndarray:
        return self.gradient_matrices[axis] @ f

    def multiply_v(self, f: np.ndarray, axis: int) -> np.ndarray:
        return self.multiply_v_matrices[axis] @ f

    # -- distinguished vectors ------------------------------------------------------

    @cached_property
    def chi(self) -> np.ndarray:
        """Columns chi_0 = 1, chi_i = v_i, chi_4 = (|v|^2-3)/sqrt(6); exact
        coefficients (no quadrature), orthonormal.  Requires K >= 2."""
        if self.K < 2:
            raise ValueError("kernel vectors need K >= 2")
        C = np.zeros((self.size, 5))
        C[self.index_of[(0, 0, 0)], 0] = 1.0
        for i, e in enumerate([(1, 0, 0), (0, 1, 0), (0, 0, 1)]):
            C[self.index_of[e], i + 1] = 1.0
        for e in [(2, 0, 0), (0, 2, 0), (0, 0, 2)]:
            C[self.index_of[e], 4] = 1.0 / np.sqrt(3.0)
        return C

    @cached_property
    def vsq_vector(self) -> np.ndarray:
        """Coefficients of |v|^2 = 3*chi_0 + sqrt(6)*chi_4."""
        return 3.0 * self.chi[:, 0] + np.sqrt(6.0) * self.chi[:, 4]

    def __repr__(self) -> str:  # pragma: no cover
        return f"HermiteBasis(K={self.K}, size={self.size})"
