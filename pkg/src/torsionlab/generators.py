"""Seeded random complexes, chiralities and metrics.

Randomness comes from SplitMix64 so that a seed means the same thing in
every implementation; floats are the top 53 bits of each draw and normals
use Box-Muller.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg_core import as_exact, conj_transpose, det, gaussian, identity, inverse, kernel, matmul, rank
from .z2complex import Chirality, Z2Complex

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (inclusive)."""
        span = hi - lo + 1
        return lo + self.next_u64() % span

    def normal(self) -> float:
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def complex_matrix(self, rows: int, cols: int, real: bool = False) -> np.ndarray:
        out = np.zeros((rows, cols), dtype=complex)
        for i in range(rows):
            for j in range(cols):
                out[i, j] = self.normal() + (0.0 if real else 1j * self.normal())
        return out

    def gaussian_integer_matrix(self, rows: int, cols: int, bound: int = 2) -> np.ndarray:
        out = np.empty((rows, cols), dtype=object)
        for i in range(rows):
            for j in range(cols):
                out[i, j] = gaussian(self.integer(-bound, bound), self.integer(-bound, bound))
        return out


def _matrix(rng: SplitMix64, rows: int, cols: int, exact: bool) -> np.ndarray:
    return rng.gaussian_integer_matrix(rows, cols) if exact else rng.complex_matrix(rows, cols)


def _left_null_rows(a: np.ndarray) -> np.ndarray:
    return conj_transpose(kernel(conj_transpose(a)))


def random_differentials(
    rng: SplitMix64, n0: int, n1: int, r0: int | None = None, r1: int | None = None, exact: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """d0 of rank r0 and d1 of rank r1 with d1 d0 = d0 d1 = 0 by construction.

    d1 = K R L where the columns of K span ker d0 and the rows of L annihilate im d0.
    """
    if r0 is None:
        r0 = rng.integer(0, min(n0, n1))
    if r0 > min(n0, n1):
        raise ValueError("rank of d0 too large")
    max_r1 = min(n0 - r0, n1 - r0)
    if r1 is None:
        r1 = rng.integer(0, max_r1)
    if r1 > max_r1:
        raise ValueError("rank of d1 too large")
    d0 = _full_rank_product(rng, n1, n0, r0, exact)
    k = kernel(d0)
    left = _left_null_rows(d0)
    r = _full_rank_product(rng, k.shape[1], left.shape[0], r1, exact)
    d1 = matmul(k, r, left)
    return d0, d1


def _full_rank_product(rng: SplitMix64, rows: int, cols: int, r: int, exact: bool) -> np.ndarray:
    while True:
        m = matmul(_matrix(rng, rows, r, exact), _matrix(rng, r, cols, exact))
        if r == 0 or not exact or rank(m) == r:
            return m


def random_invertible(rng: SplitMix64, n: int, exact: bool = False) -> np.ndarray:
    while True:
        g = _matrix(rng, n, n, exact)
        if exact:
            g = g + as_exact(np.eye(n, dtype=int) * 2) if n else g
            if det(g):
                return g
        elif n == 0 or np.linalg.cond(g) < 1e4:
            return g


def random_metric(rng: SplitMix64, n: int, exact: bool = False) -> np.ndarray:
    m = _matrix(rng, n, n, exact)
    base = matmul(m, conj_transpose(m))
    if exact:
        return base + identity(n, True)
    return base + n * np.eye(n)


def random_complex(
    rng: SplitMix64,
    n0: int,
    n1: int | None = None,
    r0: int | None = None,
    r1: int | None = None,
    exact: bool = False,
    metric: bool = False,
) -> Z2Complex:
    n1 = n0 if n1 is None else n1
    d0, d1 = random_differentials(rng, n0, n1, r0, r1, exact)
    gram = (random_metric(rng, n0, exact), random_metric(rng, n1, exact)) if metric else (None, None)
    return Z2Complex(d0, d1, *gram)


def random_acyclic(rng: SplitMix64, n: int, exact: bool = False, metric: bool = False) -> Z2Complex:
    r0 = rng.integer(0, n)
    return random_complex(rng, n, n, r0, n - r0, exact, metric)


def random_chirality(rng: SplitMix64, n: int, exact: bool = False) -> Chirality:
    g0 = random_invertible(rng, n, exact)
    return Chirality(g0, inverse(g0))


def isometric_chirality(rng: SplitMix64, cx: Z2Complex) -> Chirality:
    """Random chirality that is an isometry (hence self-adjoint) for the complex's metrics."""
    n = cx.n0
    l0 = np.linalg.cholesky(cx.G0)
    l1 = np.linalg.cholesky(cx.G1)
    u, _ = np.linalg.qr(rng.complex_matrix(n, n))
    g0 = np.linalg.solve(l1.conj().T, u @ l0.conj().T)
    return Chirality(g0, np.linalg.inv(g0))


def random_parity_operator(rng: SplitMix64, n0: int, n1: int, supertrace=None) -> tuple[np.ndarray, np.ndarray]:
    """A random grading-preserving pair (beta0, beta1); optionally shifted to a given supertrace."""
    b0 = rng.complex_matrix(n0, n0)
    b1 = rng.complex_matrix(n1, n1)
    if supertrace is not None and n0:
        current = np.trace(b0) - np.trace(b1)
        b0 = b0 + (supertrace - current) / n0 * np.eye(n0)
    return b0, b1
