"""Initial states of the two cavity modes and of the two-level atom.

Mode expansions are built by recurrence on a log-scaled mantissa, so large
amplitudes neither overflow nor underflow before the final normalization.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, CutoffTooSmallError, UnreachableToleranceError

DEFAULT_EPS = 1e-6
# window growth stops here; beyond this the state is not a desk-scale input
MAX_WINDOW = 4096


@dataclass(frozen=True)
class Generator:
    kind: str  # "fock" | "coherent" | "squeezed" | "raw"
    alpha: complex = 0j
    r: float = 0.0
    phi_sq: float = math.pi
    n: int = 0


@dataclass(frozen=True, eq=False)
class ModeCoeffs:
    """Single-mode Fock amplitudes, renormalized over the kept window.

    ``captured_weight`` is the true norm of the window before renormalization.
    """

    amplitudes: np.ndarray
    generator: Generator
    captured_weight: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty 1D sequence")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_max(self) -> int:
        return self.amplitudes.size - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class TwoModeFockState:
    """Coefficients C[m, n] of |m, n>_ab kept on the triangle m + n <= n_total_max."""

    coeffs: np.ndarray
    n_total_max: int
    captured_weight: float
    description: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        size = self.n_total_max + 1
        if c.shape != (size, size):
            raise ValueError(f"coeffs must have shape {(size, size)}, got {c.shape}")
        m, n = np.indices(c.shape)
        if np.any(c[m + n > self.n_total_max] != 0):
            raise ValueError("coefficients beyond the excitation cutoff must be zero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_matrix(cls, coeffs, n_total_max: Optional[int] = None) -> "TwoModeFockState":
        """Wrap a raw C-matrix, truncating it to the excitation triangle."""
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim != 2:
            raise ValueError("C-matrix must be two-dimensional")
        if n_total_max is None:
            n_total_max = c.shape[0] + c.shape[1] - 2
        out = np.zeros((n_total_max + 1, n_total_max + 1), dtype=complex)
        rows = min(c.shape[0], n_total_max + 1)
        cols = min(c.shape[1], n_total_max + 1)
        out[:rows, :cols] = c[:rows, :cols]
        m, n = np.indices(out.shape)
        out[m + n > n_total_max] = 0
        weight = float(np.sum(np.abs(out) ** 2))
        return cls(out, n_total_max, weight, {"kind": "raw"})

    def block(self, total: int) -> np.ndarray:
        """C[m, total - m] for m = 0..total (zero where a row is missing)."""
        if total < 0:
            return np.zeros(0, dtype=complex)
        m = np.arange(total + 1)
        out = np.zeros(total + 1, dtype=complex)
        if total <= self.n_total_max:
            out[:] = self.coeffs[m, total - m]
        return out

    def transposed(self) -> "TwoModeFockState":
        return TwoModeFockState(self.coeffs.T, self.n_total_max, self.captured_weight,
                                dict(self.description))


@dataclass(frozen=True)
class AtomPrep:
    c_g: complex
    c_e: complex

    def __post_init__(self):
        norm = abs(self.c_g) ** 2 + abs(self.c_e) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"atomic amplitudes not normalized: |c_g|^2 + |c_e|^2 = {norm!r}")

    @classmethod
    def from_phase(cls, kappa: float) -> "AtomPrep":
        """(|g> + exp(i kappa)|e>)/sqrt(2)."""
        s = 1.0 / math.sqrt(2.0)
        return cls(complex(s), cmath.exp(1j * kappa) * s)

    @classmethod
    def ground(cls) -> "AtomPrep":
        return cls(1 + 0j, 0j)

    @classmethod
    def excited(cls) -> "AtomPrep":
        return cls(0j, 1 + 0j)


@dataclass(frozen=True)
class SimParams:
    lam: float
    k_dr: float = 2 * math.pi / 10
    eps_trunc: float = DEFAULT_EPS
    n_max: Optional[int] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("interaction parameter must be positive")
        if not self.k_dr > 0:
            raise ConfigError("pinhole scale k*dr must be positive")
        if not 0 < self.eps_trunc < 1:
            raise ConfigError("eps_trunc must lie in (0, 1)")
        if self.n_max is not None and self.n_max < 0:
            raise ConfigError("n_max must be non-negative")
        if self.k_dr > 1:
            warnings.warn(f"k*dr = {self.k_dr:g} > 1: outside the linearized-node regime",
                          RuntimeWarning, stacklevel=3)

    @property
    def decay(self) -> float:
        """Radial decay rate of the pinhole amplitude in units of k, 1/(2 k dr)."""
        return 1.0 / (2.0 * self.k_dr)


# --- single-mode expansions -------------------------------------------------

def _finish(logmag: np.ndarray, phase: np.ndarray, generator: Generator,
            eps: Optional[float]) -> ModeCoeffs:
    # logmag carries the true magnitude, so the window weight is exact
    top = np.max(logmag)
    rel = np.exp(2 * (logmag - top))
    weight = float(math.exp(2 * top) * math.fsum(rel))
    if eps is not None and weight < 1 - eps:
        raise CutoffTooSmallError(
            f"window n <= {logmag.size - 1} keeps weight {weight:.3e} < 1 - {eps:g}; raise n_max")
    # exponentiate the half-log directly so amplitudes below 1e-154 survive
    amps = np.exp(logmag - top - 0.5 * math.log(math.fsum(rel))) * phase
    return ModeCoeffs(amps, generator, min(weight, 1.0))


def fock_coeffs(n: int, n_max: Optional[int] = None) -> ModeCoeffs:
    if n < 0:
        raise ValueError("photon number must be non-negative")
    n_max = n if n_max is None else n_max
    if n_max < n:
        raise CutoffTooSmallError(f"Fock state |{n}> does not fit a window of size {n_max}")
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[n] = 1
    return ModeCoeffs(amps, Generator("fock", n=n))


def coherent_coeffs(alpha: complex, n_max: int, eps: Optional[float] = DEFAULT_EPS) -> ModeCoeffs:
    """Coherent amplitudes alpha^n exp(-|alpha|^2/2)/sqrt(n!) via c[n+1] = c[n] alpha/sqrt(n+1)."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    alpha = complex(alpha)
    gen = Generator("coherent", alpha=alpha, r=0.0)
    if alpha == 0:
        return _finish(np.r_[0.0, np.full(n_max, -np.inf)], np.ones(n_max + 1), gen, eps)
    logmag = np.empty(n_max + 1)
    phase = np.empty(n_max + 1, dtype=complex)
    mant, offset = 1.0 + 0j, -abs(alpha) ** 2 / 2
    for k in range(n_max + 1):
        if k:
            mant *= alpha / math.sqrt(k)
            mag = abs(mant)
            offset += math.log(mag)
            mant /= mag
        logmag[k] = offset
        phase[k] = mant
    return _finish(logmag, phase, gen, eps)


def squeezed_coherent_coeffs(alpha: complex, r: float, phi_sq: float, n_max: int,
                             eps: Optional[float] = DEFAULT_EPS) -> ModeCoeffs:
    """Amplitudes of S(xi) D(alpha)|0>, xi = r exp(i phi_sq).

    Uses the eigenvalue recurrence of S a S^dagger,
    cosh(r) sqrt(n+1) c[n+1] + exp(i phi_sq) sinh(r) sqrt(n) c[n-1] = alpha c[n],
    seeded with the exact vacuum overlap.
    """
    if r < 0:
        raise ValueError("squeeze factor r must be non-negative")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if r == 0:
        res = coherent_coeffs(alpha, n_max, eps)
        return ModeCoeffs(res.amplitudes, Generator("squeezed", complex(alpha), 0.0, phi_sq),
                          res.captured_weight)
    if not math.isclose(math.remainder(phi_sq - math.pi, 2 * math.pi), 0.0, abs_tol=1e-12):
        warnings.warn("squeezing phase differs from pi: off the lithography protocol",
                      RuntimeWarning, stacklevel=2)
    alpha = complex(alpha)
    ch, sh, th = math.cosh(r), math.sinh(r), math.tanh(r)
    rot = cmath.exp(1j * phi_sq)
    seed = -abs(alpha) ** 2 / 2 + 0.5 * cmath.exp(-1j * phi_sq) * th * alpha ** 2
    log0 = -0.5 * math.log(ch) + seed.real

    logmag = np.empty(n_max + 1)
    phase = np.empty(n_max + 1, dtype=complex)
    # c_true[k] = mant[k] * exp(scale + log0); the two live terms share one scale
    prev, cur, scale = 0j, cmath.exp(1j * seed.imag), 0.0
    for k in range(n_max + 1):
        mag = abs(cur)
        logmag[k] = log0 + scale + (math.log(mag) if mag > 0 else -np.inf)
        phase[k] = cur / mag if mag > 0 else 1.0
        nxt = (alpha * cur - rot * sh * math.sqrt(k) * prev) / (ch * math.sqrt(k + 1))
        prev, cur = cur, nxt
        big = max(abs(prev), abs(cur))
        if big > 1e100 or 0 < big < 1e-100:
            prev, cur = prev / big, cur / big
            scale += math.log(big)
    return _finish(logmag, phase, Generator("squeezed", alpha, float(r), float(phi_sq)), eps)


def mean_photon(mode: ModeCoeffs) -> float:
    p = mode.probabilities
    return float(np.dot(np.arange(p.size), p))


def squeezed_mean_photon(alpha: complex, r: float, phi_sq: float = math.pi) -> float:
    """Closed form <a^dagger a> for S(xi) D(alpha)|0>."""
    shifted = alpha * math.cosh(r) - cmath.exp(1j * phi_sq) * alpha.conjugate() * math.sinh(r)
    return abs(shifted) ** 2 + math.sinh(r) ** 2


def auto_mode(kind: str, eps: float = DEFAULT_EPS, *, alpha: complex = 0j, r: float = 0.0,
              phi_sq: float = math.pi, n: int = 0) -> ModeCoeffs:
    """Build a mode state, widening the window until it holds 1 - eps/10 of the weight."""
    if kind == "fock":
        return fock_coeffs(n)
    mean = squeezed_mean_photon(complex(alpha), r, phi_sq)
    n_max = max(8, int(mean + 8 * math.sqrt(mean + 1) * math.exp(r) + 8))
    while n_max <= MAX_WINDOW:
        try:
            if kind == "coherent":
                return coherent_coeffs(alpha, n_max, eps / 10)
            if kind == "squeezed":
                return squeezed_coherent_coeffs(alpha, r, phi_sq, n_max, eps / 10)
            raise ConfigError(f"unknown mode kind {kind!r}")
        except CutoffTooSmallError:
            n_max *= 2
    raise CutoffTooSmallError(f"no window up to {MAX_WINDOW} reaches tolerance {eps:g}")


# --- two-mode product ---------------------------------------------------------

def _total_photon_cdf(a: ModeCoeffs, b: ModeCoeffs) -> np.ndarray:
    pa = a.probabilities * a.captured_weight
    pb = b.probabilities * b.captured_weight
    return np.cumsum(np.convolve(pa, pb))


def choose_total_cutoff(a: ModeCoeffs, b: ModeCoeffs, eps: float = DEFAULT_EPS) -> int:
    """Smallest N with sum_{m+n<=N} |a_m b_n|^2 >= 1 - eps (true, unrenormalized weights)."""
    if a.captured_weight * b.captured_weight < 1 - eps:
        raise UnreachableToleranceError(
            f"mode windows keep only {a.captured_weight * b.captured_weight:.3e} of the weight")
    cdf = _total_photon_cdf(a, b)
    hits = np.nonzero(cdf >= 1 - eps)[0]
    if hits.size == 0:
        # rounding in the cumulative sum; the whole window is the answer
        return cdf.size - 1
    return int(hits[0])


def product_state(a: ModeCoeffs, b: ModeCoeffs, eps: float = DEFAULT_EPS,
                  n_total_max: Optional[int] = None) -> TwoModeFockState:
    """|a> (x) |b> restricted to m + n <= N_max."""
    if n_total_max is None:
        n_total_max = choose_total_cutoff(a, b, eps)
    size = n_total_max + 1
    c = np.zeros((size, size), dtype=complex)
    ka, kb = min(size, a.amplitudes.size), min(size, b.amplitudes.size)
    c[:ka, :kb] = np.outer(a.amplitudes[:ka], b.amplitudes[:kb])
    m, n = np.indices(c.shape)
    c[m + n > n_total_max] = 0
    weight = float(np.sum(np.abs(c) ** 2))
    desc = {"a": a.generator, "b": b.generator}
    return TwoModeFockState(c, n_total_max, weight, desc)


def vacuum_state() -> TwoModeFockState:
    return TwoModeFockState(np.ones((1, 1)), 0, 1.0, {"kind": "vacuum"})
