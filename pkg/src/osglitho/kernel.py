"""Analytic Fourier transforms and the atomic momentum distribution W(p, phi).

Momenta are in units of the photon recoil hbar*k. For every excitation
subspace N and rotated-mode photon number n, the transform of the pinhole
amplitude is a finite Fourier series in the azimuth,

    F(p, phi) = sum_k (i e^{i phi})^k A[m, n, k] S(k, n, p),

where A holds the binomial-expanded rotation coefficients (grid independent)
and S is the radial Hankel factor. W is assembled per p-ring: the field and
atom amplitudes are contracted into coefficient vectors once, and each ring
evaluates every azimuth with one FFT.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .bogoliubov import bbar, fourier_table
from .errors import BudgetExceededError, InvalidIndexError
from .states import AtomPrep, SimParams, TwoModeFockState

SQRT_2PI = math.sqrt(2 * math.pi)
DEFAULT_MAX_TERMS = 5e10
RING_BLOCK = 8


def upsilon(nu: int) -> int:
    """1 for odd negative orders, else 0: J_nu = (-1)^upsilon(nu) J_|nu|."""
    return 1 if (nu < 0 and nu % 2) else 0


def gamma_factor(n: int, params: SimParams) -> complex:
    return complex(-params.decay, math.sqrt(n) * params.lam)


def _radial_root(gamma, p, branch: str):
    root = np.sqrt(gamma * gamma + np.square(p))
    if branch == "continuous":
        # the branch that reduces to gamma itself at p = 0 (Re < 0)
        return -root
    if branch == "principal":
        return root
    raise ValueError(f"unknown branch {branch!r}")


def s_factor(v_eff: int, n: int, p: float, params: SimParams,
             branch: str = "continuous") -> complex:
    """Radial factor of order v_eff for the n-photon branch at scaled momentum p.

    ``branch="continuous"`` takes sqrt(p^2 + gamma^2) on the sheet through gamma,
    which makes the expression equal the Hankel transform of rho*exp(gamma*rho).
    ``"principal"`` is the naive principal root, kept for mutation checks.
    """
    if p < 0 or n < 0:
        raise ValueError("need p >= 0 and n >= 0")
    g = gamma_factor(n, params)
    order = abs(v_eff)
    root = complex(_radial_root(g, p, branch))
    base = (p / (g + root)) ** order if order else 1.0
    sign = -1.0 if upsilon(v_eff) else 1.0
    return sign * (root * order + g) / root ** 3 * base / (SQRT_2PI * params.k_dr)


def s_table(p: np.ndarray, n_max: int, k_max: int, params: SimParams,
            branch: str = "continuous") -> np.ndarray:
    """S without its upsilon sign, shape (len(p), n_max + 1, k_max + 1) indexed [p, n, |k|]."""
    p = np.asarray(p, dtype=float)[:, None, None]
    n = np.arange(n_max + 1)[None, :, None]
    order = np.arange(k_max + 1)[None, None, :]
    g = -params.decay + 1j * np.sqrt(n) * params.lam
    root = _radial_root(g, p, branch)
    base = p / (g + root)
    with np.errstate(invalid="ignore"):
        powers = np.where(order == 0, 1.0 + 0j, base ** order)
    return (root * order + g) / root ** 3 * powers / (SQRT_2PI * params.k_dr)


@dataclass(frozen=True)
class ATensor:
    """A[m, n, j] for one atomic label and subspace; azimuthal order k = 2j - (N - delta)."""

    label: str
    N: int
    values: np.ndarray

    @property
    def delta(self) -> int:
        return 1 if self.label == "e" else 0

    @property
    def orders(self) -> np.ndarray:
        inner = self.N - self.delta
        return 2 * np.arange(inner + 1) - inner


def _delta(label: str) -> int:
    if label not in ("g", "e"):
        raise ValueError(f"atomic label must be 'g' or 'e', got {label!r}")
    return 1 if label == "e" else 0


def a_tensor(label: str, N: int) -> ATensor:
    """Coefficient tensor for the label-branch of subspace N.

    Entries are indexed by the external (m, n); for the excited branch rows
    and columns m = 0, n = 0 are structurally zero.
    """
    d = _delta(label)
    if N < d:
        raise InvalidIndexError(f"branch {label!r} needs N >= {d}")
    inner = fourier_table(N - d)
    values = np.zeros((N + 1, N + 1, N - d + 1), dtype=complex)
    values[d:, d:, :] = inner
    values.setflags(write=False)
    return ATensor(label, N, values)


def _check_indices(label: str, N: int, m: int, n: int) -> int:
    d = _delta(label)
    if N < d or not (d <= m <= N and d <= n <= N):
        raise InvalidIndexError(f"({label}, N={N}, m={m}, n={n}) outside the summation range")
    return d


def f_transform(label: str, N: int, m: int, n: int, p: float, phi: float,
                params: SimParams, branch: str = "continuous") -> complex:
    """Analytic transform of the pinhole amplitude for one (label, N, m, n)."""
    d = _check_indices(label, N, m, n)
    inner = fourier_table(N - d)[m - d, n - d]
    orders = 2 * np.arange(N - d + 1) - (N - d)
    total = 0j
    for k, a in zip(orders, inner):
        if a == 0:
            continue
        total += (1j * np.exp(1j * phi)) ** k * a * s_factor(int(k), n, p, params, branch)
    return complex(total)


def f_transform_literal(label: str, N: int, m: int, n: int, p: float, phi: float,
                        params: SimParams) -> complex:
    """Direct triple sum over (l, s, t) with the binomial R weights; reference only."""
    d = _check_indices(label, N, m, n)
    terms = []
    lo, hi = max(0, m + n - N - d), min(m - d, n - d)
    for ell in range(lo, hi + 1):
        u = m + n - 2 * ell
        weight = bbar(N - d, m - d, n - d, ell)
        for s in range(N - u + d + 1):
            for t in range(u - 2 * d + 1):
                v = 2 * (s + t) - N
                r = ((-1) ** (u - t - 2 * d) / (2 ** (N - d) * (1j) ** (u - 2 * d))
                     * math.comb(N - u + d, s) * math.comb(u - 2 * d, t) * weight)
                terms.append((1j * np.exp(1j * phi)) ** (v + d) * r
                             * s_factor(v + d, n, p, params))
    return complex(math.fsum(z.real for z in terms), math.fsum(z.imag for z in terms))


# --- distribution on a polar grid ---------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    n_p: int = 256
    n_phi: int = 256
    p_max: Optional[float] = None

    def resolve_p_max(self, n_total_max: int, params: SimParams) -> float:
        if self.p_max is not None:
            return float(self.p_max)
        outer = math.sqrt(n_total_max) * params.lam
        # room for the algebraic tails of the outermost ring and of the central peak
        return max(1.2 * outer, outer + 12 * params.decay)


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    p: np.ndarray
    phi: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def dphi(self) -> float:
        return 2 * math.pi / self.phi.size

    def radial_marginal(self) -> np.ndarray:
        """Azimuthal integral of W at each p (no p weight)."""
        return self.values.sum(axis=1) * self.dphi

    def integral(self) -> float:
        """Integral of W p dp dphi: Simpson in p, periodic trapezoid in phi."""
        return float(simpson(self.radial_marginal() * self.p, x=self.p))

    def ring_weights(self, lam: float, n_max: int) -> list[float]:
        """Probability in annuli centred on p = sqrt(n) lam, split at midpoints."""
        radii = np.sqrt(np.arange(n_max + 2)) * lam
        edges = np.r_[0.0, 0.5 * (radii[1:] + radii[:-1])]
        edges[-1] = max(edges[-1], self.p[-1])
        cum = cumulative_simpson(self.radial_marginal() * self.p, x=self.p, initial=0.0)
        # interpolating the running integral keeps the pieces summing to the total
        at = np.interp(np.clip(edges, self.p[0], self.p[-1]), self.p, cum)
        return [float(v) for v in np.diff(at)]




# --- assembly ------------------------------------------------------------------

MODELS = ("exact", "literal")


def _dense(N: int) -> np.ndarray:
    """Fourier table of B^(N) on the dense order axis k = -N..N (odd-parity slots zero)."""
    table = fourier_table(N)
    out = np.zeros((N + 1, N + 1, 2 * N + 1), dtype=complex)
    out[:, :, ::2] = table
    return out


def _excited_dense(N: int) -> np.ndarray:
    """B^(N-1)[m, n-1] placed at [m, n] on the order axis -N..N; column n = 0 is zero."""
    out = np.zeros((N, N + 1, 2 * N + 1), dtype=complex)
    out[:, 1:, 1:-1] = _dense(N - 1)
    return out


def _convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product of trig polynomials: x[r, n, a] * y[n, b] -> out[r, n, a + b]."""
    la, lb = x.shape[-1], y.shape[-1]
    out = np.zeros(x.shape[:-1] + (la + lb - 1,), dtype=complex)
    for a in range(la):
        out[..., a:a + lb] += x[..., a, None] * y[None]
    return out


@dataclass(frozen=True)
class _Block:
    """Amplitude coefficients of subspace N: rows are output channels.

    Each row's amplitude is sum_n sum_k (U+[r, n, k] i^k S(k, n) +
    U-[r, n, k] (-i)^k conj S(-k, n)) e^{i k phi}, k = -K..K.
    """

    N: int
    plus: np.ndarray
    minus: np.ndarray

    @property
    def k_max(self) -> int:
        return (self.plus.shape[-1] - 1) // 2


def _projections(N: int, fld: TwoModeFockState, dense: np.ndarray):
    """G[n, k] and E[n, k]: the field block projected on the rotated-mode basis."""
    C = fld.block(N)
    G = np.einsum("m,mnk->nk", C, dense)
    E = np.zeros_like(G)
    if N >= 1:
        E = np.einsum("m,mnk->nk", fld.block(N - 1), _excited_dense(N))
    return G, E


def _exact_block(N: int, fld: TwoModeFockState, atom: AtomPrep) -> _Block:
    # Evolve in the rotated basis, then rotate back onto |m, N-m>_ab before
    # squaring: final ground rows use B^(N)[m', n], excited rows B^(N-1)[m', n-1].
    dense = _dense(N)
    G, E = _projections(N, fld, dense)
    cg, ce = atom.c_g, atom.c_e
    plus = 0.5 * (cg * G + ce * E)
    minus_g = 0.5 * (cg * G - ce * E)
    up = [_convolve(dense, plus)]
    um = [_convolve(dense, minus_g)]
    if N >= 1:
        exc = _excited_dense(N)
        up.append(_convolve(exc, plus))
        um.append(_convolve(exc, -minus_g))
    return _Block(N, np.concatenate(up), np.concatenate(um))


def _literal_block(N: int, fld: TwoModeFockState, atom: AtomPrep) -> _Block:
    # Literal squared moduli per rotated-mode index n; the conjugated line is
    # the counter-propagating branch exp(-i sqrt(n) lam rho).
    dense = _dense(N)
    G, E = _projections(N, fld, dense)
    cg, ce = atom.c_g, atom.c_e
    width = 2 * N + 1
    plus = np.zeros((2 * N + 1, N + 1, width), dtype=complex)
    minus = np.zeros_like(plus)
    plus[0, 0] = cg * G[0]
    root_half = math.sqrt(0.5)
    for n in range(1, N + 1):
        plus[n, n] = root_half * (cg * G[n] + ce * E[n])
        minus[N + n, n] = root_half * (cg * G[n] - ce * E[n])
    return _Block(N, plus, minus)


def predicted_terms(n_total_max: int, n_rings: int, model: str = "exact") -> int:
    """Complex multiply-adds needed to build the amplitude coefficients of every ring."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    per_ring = 0
    for N in range(n_total_max + 1):
        if model == "exact":
            per_ring += 2 * (2 * N + 1) * (N + 1) * (4 * N + 1)
        else:
            per_ring += (N + 1) ** 2 * (2 * N + 1)
    return per_ring * n_rings


def _radial_factors(s_base: np.ndarray, k_max: int, n_top: int):
    """Signed S(k) and the counter-propagating factors for k = -k_max..k_max.

    Returns (plus, minus) with shape [ring, n, k]: plus = i^k S(k, n),
    minus = (-i)^k conj S(-k, n).
    """
    orders = np.arange(-k_max, k_max + 1)
    mag = s_base[:, : n_top + 1, np.abs(orders)]
    odd_neg = np.where((orders < 0) & (orders % 2 == 1), -1.0, 1.0)
    odd_pos = np.where((orders > 0) & (orders % 2 == 1), -1.0, 1.0)
    ik = (1j) ** (orders % 4)
    plus = mag * (ik * odd_neg)
    minus = np.conj(mag) * (np.conj(ik) * odd_pos)
    return plus, minus


def _ring_block_values(block: _Block, plus_s: np.ndarray, minus_s: np.ndarray,
                       n_phi: int) -> np.ndarray:
    """Sum over output rows of |amplitude(phi)|^2 for a block of rings."""
    n_rings = plus_s.shape[0]
    rows = block.plus.shape[0]
    k_max = block.k_max
    amp = np.zeros((n_rings, rows, 2 * k_max + 1), dtype=complex)
    # fixed ascending-n order keeps every ring's sum independent of the blocking
    for n in range(block.plus.shape[1]):
        amp += block.plus[None, :, n, :] * plus_s[:, None, n, :]
        amp += block.minus[None, :, n, :] * minus_s[:, None, n, :]
    # fold order k into FFT bin k mod n_phi, then evaluate at phi_j = 2 pi j / n_phi
    bins = np.zeros((n_rings, rows, n_phi), dtype=complex)
    slots = np.arange(-k_max, k_max + 1) % n_phi
    if 2 * k_max + 1 <= n_phi:
        bins[:, :, slots] = amp
    else:
        for col, slot in enumerate(slots):
            bins[:, :, slot] += amp[:, :, col]
    field_vals = np.fft.ifft(bins, axis=-1) * n_phi
    return np.sum(field_vals.real ** 2 + field_vals.imag ** 2, axis=1)


def momentum_distribution(fld: TwoModeFockState, atom: AtomPrep, params: SimParams,
                          grid: GridSpec = GridSpec(), threads: int = 1,
                          max_terms: float = DEFAULT_MAX_TERMS, model: str = "exact",
                          branch: str = "continuous") -> MomentumGrid:
    """W(p, phi) on a polar grid, phi_j = 2 pi j / n_phi (endpoint excluded).

    ``model="exact"`` traces the final state over the fixed cavity basis and is
    normalized to the captured field weight. ``model="literal"`` squares the
    amplitudes per rotated-mode photon number instead; it is kept for
    comparison and does not conserve probability in general.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    n_top = fld.n_total_max
    cost = predicted_terms(n_top, grid.n_p, model)
    if cost > max_terms:
        raise BudgetExceededError(
            f"{cost:.3g} terms exceed the cap {max_terms:.3g}; lower the cutoff or the grid")
    p_max = grid.resolve_p_max(n_top, params)
    p = np.linspace(0.0, p_max, grid.n_p)
    phi = 2 * np.pi * np.arange(grid.n_phi) / grid.n_phi
    k_cap = 2 * n_top if model == "exact" else n_top
    s_base = s_table(p, n_top, k_cap, params, branch)

    build = _exact_block if model == "exact" else _literal_block
    starts = list(range(0, grid.n_p, RING_BLOCK))
    total = np.zeros((grid.n_p, grid.n_phi))
    carry = np.zeros_like(total)

    def ring_task(block, lo):
        hi = min(lo + RING_BLOCK, grid.n_p)
        plus_s, minus_s = _radial_factors(s_base[lo:hi], block.k_max, block.N)
        return _ring_block_values(block, plus_s, minus_s, grid.n_phi)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for N in range(n_top + 1):
            if not (np.any(fld.block(N)) or (N >= 1 and np.any(fld.block(N - 1)))):
                continue
            block = build(N, fld, atom)
            parts = pool.map(lambda lo: ring_task(block, lo), starts)
            term = np.concatenate(list(parts))
            # Kahan step over N keeps the result independent of worker count
            y = term - carry
            t = total + y
            carry = (t - total) - y
            total = t

    values = np.maximum(total, 0.0)
    out = MomentumGrid(p, phi, values, {
        "model": model,
        "lam": params.lam,
        "k_dr": params.k_dr,
        "n_total_max": n_top,
        "captured_weight": fld.captured_weight,
        "field": fld.description,
        "atom": [atom.c_g, atom.c_e],
        "n_p": grid.n_p,
        "n_phi": grid.n_phi,
        "p_max": p_max,
    })
    out.meta["integral"] = out.integral()
    out.meta["ring_weights"] = out.ring_weights(params.lam, n_top)
    return out
