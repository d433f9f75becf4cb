"""Two-mode Fock-space rotation coefficients.

For the N-excitation subspace, B[m, n](theta) is the amplitude of
|n, N-n> in the rotated modes (c = cos a + sin b, d = -sin a + cos b)
inside |m, N-m>_ab. Each entry is a short alternating sum of scalar
weights Bbar times trigonometric powers.

The weights are assembled from exact integer binomials,

    Bbar[N, m, n, l] = (-1)^(m-l) C(m, l) C(N-m, n-l) sqrt(C(N, m) / C(N, n)),

which equals the factorial form but is correctly rounded and never overflows.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import InvalidIndexError


def _check(N: int, m: int, n: int, ell: int) -> None:
    if N < 0 or not (0 <= m <= N and 0 <= n <= N):
        raise InvalidIndexError(f"(N, m, n) = {(N, m, n)} out of range")
    if not max(0, m + n - N) <= ell <= min(m, n):
        raise InvalidIndexError(f"l = {ell} outside [{max(0, m + n - N)}, {min(m, n)}]")


def bbar(N: int, m: int, n: int, ell: int) -> float:
    _check(N, m, n, ell)
    sign = -1.0 if (m - ell) % 2 else 1.0
    count = math.comb(m, ell) * math.comb(N - m, n - ell)
    return sign * count * math.sqrt(math.comb(N, m) / math.comb(N, n))


def log_bbar(N: int, m: int, n: int, ell: int) -> tuple[float, float]:
    """(sign, log|Bbar|) from log-gamma; for cutoffs where binomials exceed float range."""
    _check(N, m, n, ell)
    lg = math.lgamma
    num = 0.5 * (lg(m + 1) + lg(n + 1) + lg(N - m + 1) + lg(N - n + 1))
    den = lg(ell + 1) + lg(m - ell + 1) + lg(n - ell + 1) + lg(N - m - n + ell + 1)
    return (-1.0 if (m - ell) % 2 else 1.0), num - den


class BbarTable:
    """Immutable per-N arrays table[N][m, n, l] (zero outside the valid l range)."""

    def __init__(self, n_max: int):
        self.n_max = n_max
        self._tables = tuple(_bbar_block(N) for N in range(n_max + 1))

    def __getitem__(self, N: int) -> np.ndarray:
        return self._tables[N]

    def value(self, N: int, m: int, n: int, ell: int) -> float:
        _check(N, m, n, ell)
        return float(self._tables[N][m, n, ell])


@lru_cache(maxsize=None)
def _bbar_block(N: int) -> np.ndarray:
    out = np.zeros((N + 1, N + 1, N + 1))
    for m in range(N + 1):
        for n in range(N + 1):
            for ell in range(max(0, m + n - N), min(m, n) + 1):
                out[m, n, ell] = bbar(N, m, n, ell)
    out.setflags(write=False)
    return out


# above this size the alternating l-sum cancels too much in floating point
DIRECT_SUM_MAX_N = 30


def _cos_sin(theta: float) -> tuple[float, float]:
    """cos and sin, exact at multiples of pi/2 (to within a few ulp of theta)."""
    quarter = round(theta / (math.pi / 2))
    if abs(theta - quarter * (math.pi / 2)) <= 4 * math.ulp(max(abs(theta), 1.0)):
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[quarter % 4]
    return math.cos(theta), math.sin(theta)


def b_matrix(N: int, theta: float) -> np.ndarray:
    """(N+1) x (N+1) rotation matrix with entries sum_l Bbar cos^(N-m-n+2l) sin^(m+n-2l).

    Terms are summed with math.fsum; only the power of sin depends on l through
    u = m + n - 2l, so one table of cos^p sin^(N-p) products serves all entries.
    For N > 30 the individual terms exceed the result by more than 1e6 and the
    matrix is evaluated from its exact Fourier coefficients instead.
    """
    if N < 0:
        raise InvalidIndexError("N must be non-negative")
    if N > DIRECT_SUM_MAX_N:
        k = 2 * np.arange(N + 1) - N
        return (fourier_table(N) @ np.exp(1j * k * theta)).real
    c, s = _cos_sin(theta)
    # trig[q] = cos^(N-q) sin^q, built multiplicatively; 0**0 stays 1
    cpow = [1.0] * (N + 1)
    spow = [1.0] * (N + 1)
    for k in range(1, N + 1):
        cpow[k] = cpow[k - 1] * c
        spow[k] = spow[k - 1] * s
    trig = [cpow[N - q] * spow[q] for q in range(N + 1)]
    table = _bbar_block(N)
    out = np.empty((N + 1, N + 1))
    for m in range(N + 1):
        for n in range(N + 1):
            lo, hi = max(0, m + n - N), min(m, n)
            out[m, n] = math.fsum(table[m, n, ell] * trig[m + n - 2 * ell]
                                  for ell in range(lo, hi + 1))
    return out


@lru_cache(maxsize=None)
def fourier_table(N: int) -> np.ndarray:
    """Fourier coefficients of B^(N)(theta) in the basis exp(i k theta), k = 2j - N.

    Returns a complex array T[m, n, j]. Expanding cos^p sin^q with Newton's
    binomial gives the coefficient of x^j in (1 + x)^p (x - 1)^q, divided by
    2^N i^q. The sum over l is carried out in exact integers because the
    alternating terms grow like 2^N while the result stays below one.
    """
    size = N + 1
    # poly[q] = coefficients of (1 + x)^(N-q) (x - 1)^q, exact integers
    poly = np.empty((size, size), dtype=object)
    for q in range(size):
        coeffs = [1]
        for _ in range(N - q):
            coeffs = [x + y for x, y in zip(coeffs + [0], [0] + coeffs)]
        for _ in range(q):
            coeffs = [y - x for x, y in zip(coeffs + [0], [0] + coeffs)]
        poly[q, :] = coeffs
    weights = np.zeros((size, size, size), dtype=object)
    for m in range(size):
        for n in range(size):
            for ell in range(max(0, m + n - N), min(m, n) + 1):
                weights[m, n, m + n - 2 * ell] = math.comb(m, ell) * math.comb(N - m, n - ell)
    exact = weights.reshape(size * size, size).dot(poly).reshape(size, size, size)

    out = np.empty((size, size, size), dtype=complex)
    two_n = 2 ** N
    for m in range(size):
        for n in range(size):
            # (-1)^(m-l) from Bbar and i^(-q) = i^-(m+n) (-1)^l leave (-1)^m i^-(m+n)
            pref = (-1) ** m * (1j) ** (-(m + n) % 4) \
                * math.sqrt(math.comb(N, m) / math.comb(N, n))
            row = exact[m, n]
            # int / int is correctly rounded, also for operands beyond float range
            out[m, n] = [pref * (v / two_n) for v in row]
    out.setflags(write=False)
    return out


def b_matrix_batch(N: int, thetas) -> np.ndarray:
    """B^(N)(theta) for an array of angles, shape (len(thetas), N+1, N+1); plain float sums."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    q = np.arange(N + 1)
    c = np.cos(thetas)[:, None]
    s = np.sin(thetas)[:, None]
    trig = c ** (N - q) * s ** q  # numpy defines 0.0**0 = 1
    table = _bbar_block(N)
    weights = np.zeros((N + 1, N + 1, N + 1))
    for m in range(N + 1):
        for n in range(N + 1):
            for ell in range(max(0, m + n - N), min(m, n) + 1):
                weights[m, n, m + n - 2 * ell] = table[m, n, ell]
    return np.einsum("tq,mnq->tmn", trig, weights)
