"""Fourier bookkeeping on the torus [0, 2*pi)^d, d in {1, 2}.

Fields are represented by coefficients on modes n with |n|_inf <= N, ordered
lexicographically; f(x) = sum_n fhat(n) e^{i n.x}.  Real fields satisfy
fhat(-n) = conj(fhat(n)).  The pair table supports exact (unaliased) Galerkin
convolutions by direct summation over mode pairs.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


class ModeSet:
    def __init__(self, dim: int, N: int):
        if dim not in (1, 2):
            raise ValueError("spatial dimension must be 1 or 2")
        if N < 1:
            raise ValueError("need at least one nonzero mode")
        self.dim = dim
        self.N = N
        self.modes = np.array(sorted(itertools.product(range(-N, N + 1), repeat=dim)))
        self.count = len(self.modes)
        self.index = {tuple(m): i for i, m in enumerate(self.modes)}
        self.nsq = np.sum(self.modes.astype(float) ** 2, axis=1)
        self.zero = self.index[(0,) * dim]
        self.volume = TWO_PI**dim

    @cached_property
    def conj_index(self) -> np.ndarray:
        """Index of -n for each mode n."""
        return np.array([self.index[tuple(-m)] for m in self.modes])

    @cached_property
    def pair_index(self) -> np.ndarray:
        """pair_index[i, j] = flat index of modes[i] + modes[j], or -1 if outside."""
        out = np.full((self.count, self.count), -1, dtype=np.int64)
        for i, mi in enumerate(self.modes):
            for j, mj in enumerate(self.modes):
                s = tuple(mi + mj)
                if all(abs(c) <= self.N for c in s):
                    out[i, j] = self.index[s]
        return out

    def padded(self, vec: np.ndarray) -> np.ndarray:
        """Embed d-dimensional mode vectors into R^3 (zero-padded)."""
        out = np.zeros((len(vec), 3))
        out[:, : self.dim] = vec
        return out

    @cached_property
    def modes3(self) -> np.ndarray:
        return self.padded(self.modes.astype(float))

    def reality_defect(self, fhat: np.ndarray) -> float:
        """max |fhat(-n) - conj(fhat(n))| over modes (fhat indexed on axis 0)."""
        return float(np.abs(fhat[self.conj_index] - np.conj(fhat)).max())

    def symmetrize(self, fhat: np.ndarray) -> np.ndarray:
        """Project onto the reality-symmetric subspace."""
        return 0.5 * (fhat + np.conj(fhat[self.conj_index]))

    def convolve(self, fhat: np.ndarray, ghat: np.ndarray) -> np.ndarray:
        """Truncated convolution sum_{n1+n2=n} f(n1) g(n2) (pointwise product in x).

        Inputs indexed (count, ...); exact Galerkin truncation (no aliasing).
        """
        sample = fhat[0] * ghat[0]
        out = np.zeros((self.count,) + np.shape(sample), dtype=np.result_type(fhat, ghat))
        P = self.pair_index
        for i in range(self.count):
            tgt = P[i]
            ok = tgt >= 0
            # targets are distinct for fixed i, so fancy-index add is safe
            out[tgt[ok]] += fhat[i] * ghat[ok]
        return out

    def parseval(self, fhat: np.ndarray) -> float:
        """int |f|^2 dx = volume * sum_n |fhat(n)|^2 (fhat indexed on axis 0)."""
        return float(self.volume * np.sum(np.abs(fhat) ** 2))

    def hx_weights(self, ell: int) -> np.ndarray:
        """Multipliers sum_{k<=ell} |n|^{2k} for the H^ell_x norm."""
        w = np.ones(self.count)
        p = np.ones(self.count)
        for _ in range(ell):
            p = p * self.nsq
            w = w + p
        return w
