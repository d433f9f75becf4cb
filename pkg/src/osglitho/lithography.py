"""Targeting protocol: deflection map, its inverse, and peak metrics.

The peak of W sits near the radius lam * sqrt(a_mean + b_mean) and at the
azimuth set by the ratio of the mean photon numbers. The quadrant follows
the signs of the (imaginary) field amplitudes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.constants import hbar

from .errors import DegenerateTargetError, EmptyRegionError, InfeasibleSqueezeError
from .kernel import MomentumGrid
from .states import DEFAULT_EPS, TwoModeFockState, auto_mode, product_state

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class LithTarget:
    p_bar: float
    phi_bar: float

    def __post_init__(self):
        if not self.p_bar > 0:
            raise DegenerateTargetError("target radius must be positive")
        object.__setattr__(self, "phi_bar", float(self.phi_bar) % TWO_PI)


@dataclass(frozen=True)
class FieldPlan:
    """Field amplitudes alpha = sign_a * i * amp_a (likewise beta), squeezed at phase pi."""

    amp_a: float
    amp_b: float
    sign_a: int
    sign_b: int
    r_a: float = 0.0
    r_b: float = 0.0
    phi_sq: float = math.pi

    @property
    def alpha(self) -> complex:
        return complex(0, self.sign_a * self.amp_a)

    @property
    def beta(self) -> complex:
        return complex(0, self.sign_b * self.amp_b)

    @property
    def mean_a(self) -> float:
        return self.amp_a ** 2 * math.exp(-2 * self.r_a) + math.sinh(self.r_a) ** 2

    @property
    def mean_b(self) -> float:
        return self.amp_b ** 2 * math.exp(-2 * self.r_b) + math.sinh(self.r_b) ** 2

    def field_state(self, eps: float = DEFAULT_EPS,
                    n_total_max: Optional[int] = None) -> TwoModeFockState:
        a = auto_mode("squeezed", eps, alpha=self.alpha, r=self.r_a, phi_sq=self.phi_sq)
        b = auto_mode("squeezed", eps, alpha=self.beta, r=self.r_b, phi_sq=self.phi_sq)
        return product_state(a, b, eps, n_total_max)


@dataclass(frozen=True)
class ScreenGeometry:
    L: float  # cavity-to-screen distance, m
    v: float  # longitudinal velocity, m/s
    M: float  # atomic mass, kg
    k: float  # mode wavenumber, 1/m

    def __post_init__(self):
        if min(self.L, self.v, self.M, self.k) <= 0:
            raise ValueError("screen geometry must be positive")


def _check_sign(s: int) -> int:
    if s not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {s!r}")
    return s


def predict_deflection(a_mean: float, b_mean: float, sign_a: int, sign_b: int,
                       lam: float) -> tuple[float, float]:
    """Expected peak (radius, azimuth) for the given mean photon numbers and signs."""
    _check_sign(sign_a)
    _check_sign(sign_b)
    if a_mean < 0 or b_mean < 0 or a_mean + b_mean <= 0:
        raise DegenerateTargetError("need non-negative means with a positive sum")
    radius = lam * math.sqrt(a_mean + b_mean)
    # atan2 covers a_mean = 0 as the pi/2 limit
    base = math.atan2(math.sqrt(b_mean), math.sqrt(a_mean))
    phi = sign_a * sign_b * base + (math.pi if sign_a == -1 else 0.0)
    return radius, phi % TWO_PI


def plan_fields(target: LithTarget, lam: float, r: float = 0.0,
                r_prime: float = 0.0) -> FieldPlan:
    """Invert the deflection map for imaginary amplitudes squeezed at phase pi."""
    if r < 0 or r_prime < 0:
        raise ValueError("squeeze factors must be non-negative")
    scale = (target.p_bar / lam) ** 2
    c, s = math.cos(target.phi_bar), math.sin(target.phi_bar)
    a_mean, b_mean = scale * c * c, scale * s * s
    sign_a = -1 if c < 0 else 1
    sign_b = -1 if s < 0 else 1
    floor_a, floor_b = math.sinh(r) ** 2, math.sinh(r_prime) ** 2
    if a_mean < floor_a or b_mean < floor_b:
        raise InfeasibleSqueezeError(
            f"squeezed vacuum alone carries ({floor_a:.4g}, {floor_b:.4g}) photons, "
            f"target needs ({a_mean:.4g}, {b_mean:.4g}); reduce r or raise the radius")
    amp_a = math.exp(r) * math.sqrt(a_mean - floor_a)
    amp_b = math.exp(r_prime) * math.sqrt(b_mean - floor_b)
    return FieldPlan(amp_a, amp_b, sign_a, sign_b, r, r_prime)


@dataclass(frozen=True)
class Peak:
    p: float
    phi: float
    value: float
    index: tuple[int, int]


def _vertex(ym: float, y0: float, yp: float) -> float:
    """Offset in cells of the parabola vertex through three equally spaced points."""
    curv = ym - 2 * y0 + yp
    if curv >= 0:
        return 0.0
    return float(np.clip(0.5 * (ym - yp) / curv, -0.5, 0.5))


def locate_peak(grid: MomentumGrid, p_min: Optional[float] = None,
                lam: Optional[float] = None) -> Peak:
    """Maximum of W beyond p_min, refined on its 3x3 neighbourhood.

    p_min defaults to half the interaction parameter (taken from the grid
    metadata when ``lam`` is not given). Interpolation is quadratic in log W
    when the whole neighbourhood is positive, in W otherwise.
    """
    if p_min is None:
        lam = grid.meta.get("lam") if lam is None else lam
        p_min = 0.5 * lam if lam is not None else 0.0
    if p_min < 0:
        raise ValueError("p_min must be non-negative")
    rows = np.nonzero(grid.p > p_min)[0]
    if rows.size == 0:
        raise EmptyRegionError(f"no grid radius beyond {p_min:g}")
    sub = grid.values[rows]
    # first maximum in row-major order: smaller p, then smaller phi
    i_sub, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
    i = int(rows[i_sub])
    n_p, n_phi = grid.values.shape
    value = float(grid.values[i, j])
    p_star, phi_star = float(grid.p[i]), float(grid.phi[j])
    if 0 < i < n_p - 1 and value > 0:
        cols = [(j - 1) % n_phi, j, (j + 1) % n_phi]
        hood = grid.values[i - 1:i + 2][:, cols]
        use = np.log(hood) if np.all(hood > 0) else hood
        dp = _vertex(use[0, 1], use[1, 1], use[2, 1])
        dq = _vertex(use[1, 0], use[1, 1], use[1, 2])
        p_star += dp * float(grid.p[1] - grid.p[0])
        phi_star = (phi_star + dq * grid.dphi) % TWO_PI
    elif value > 0 and n_phi > 2:
        cols = [(j - 1) % n_phi, j, (j + 1) % n_phi]
        row = grid.values[i, cols]
        use = np.log(row) if np.all(row > 0) else row
        phi_star = (phi_star + _vertex(*use) * grid.dphi) % TWO_PI
    return Peak(p_star, phi_star, value, (i, int(j)))


def _half_crossing(x0: float, x1: float, y0: float, y1: float, half: float) -> float:
    return x0 + (half - y0) * (x1 - x0) / (y1 - y0)


def peak_width(grid: MomentumGrid, peak: Peak) -> tuple[float, float]:
    """(radial FWHM, azimuthal FWHM) through the peak cell; NaN where undefined."""
    i, j = peak.index
    half = 0.5 * grid.values[i, j]

    radial = grid.values[:, j]
    lo = hi = np.nan
    for a in range(i, 0, -1):
        if radial[a - 1] < half:
            lo = _half_crossing(grid.p[a - 1], grid.p[a], radial[a - 1], radial[a], half)
            break
    for a in range(i, radial.size - 1):
        if radial[a + 1] < half:
            hi = _half_crossing(grid.p[a], grid.p[a + 1], radial[a], radial[a + 1], half)
            break
    d_p = hi - lo

    ring = grid.values[i]
    n_phi = ring.size
    step = grid.dphi
    left = right = np.nan
    for s in range(1, n_phi // 2 + 1):
        a, b = ring[(j - s + 1) % n_phi], ring[(j - s) % n_phi]
        if b < half:
            left = (s - 1) * step + (a - half) / (a - b) * step
            break
    for s in range(1, n_phi // 2 + 1):
        a, b = ring[(j + s - 1) % n_phi], ring[(j + s) % n_phi]
        if b < half:
            right = (s - 1) * step + (a - half) / (a - b) * step
            break
    return float(d_p), float(left + right)


def screen_map(p: float, geom: ScreenGeometry) -> float:
    """Transverse displacement on the screen, in metres, for scaled momentum p."""
    return p * hbar * geom.k * geom.L / (geom.M * geom.v)
