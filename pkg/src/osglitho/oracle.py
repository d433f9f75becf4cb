"""Brute-force references for the analytic kernel and the state preparation.

Nothing here shares code paths with the kernel beyond the pinhole profile and
the direct Bbar rotation formula. The oracles favour clarity: dense matrix
exponentials, no caching.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.ndimage import map_coordinates

from .bogoliubov import b_matrix_batch
from .errors import GridAliasingError, InvalidIndexError, NotConvergedError, TruncationLeakError
from .kernel import MomentumGrid
from .states import AtomPrep, Generator, ModeCoeffs, SimParams, TwoModeFockState

SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and scheme for integrating the transform numerically.

    ``"laplace"`` integrates rho exactly against the exponential pinhole weight
    (a Laplace transform, equivalent to Gauss-Laguerre on the rotated contour)
    and the azimuth with the periodic trapezoid rule. ``"panel"`` samples both
    directions: composite Gauss-Legendre panels in rho up to ``rho_max``.
    """

    radial_nodes: int = 2048
    angular_nodes: int = 256
    rho_max: float = 60.0
    scheme: str = "laplace"
    tol: float = 1e-8
    max_angular_nodes: int = 1 << 16

    def __post_init__(self):
        if self.radial_nodes < 64 or self.angular_nodes < 64:
            raise ValueError("node counts must be at least 64")
        if self.scheme not in ("laplace", "panel"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


def _rotation_column(label: str, N: int, m: int, n: int, thetas: np.ndarray) -> np.ndarray:
    d = 1 if label == "e" else 0
    if N < d or not (d <= m <= N and d <= n <= N):
        raise InvalidIndexError(f"({label}, N={N}, m={m}, n={n}) outside the summation range")
    return b_matrix_batch(N - d, thetas)[:, m - d, n - d]


def _laplace(label, N, m, n, p, phi, params, nodes):
    th = 2 * np.pi * np.arange(nodes) / nodes
    rot = _rotation_column(label, N, m, n, th)
    # int_0^inf rho exp(-s rho) drho = 1/s^2, s = a - i sqrt(n) lam + i p cos(theta - phi)
    s = params.decay - 1j * math.sqrt(n) * params.lam + 1j * p * np.cos(th - phi)
    return complex(np.mean(rot / s ** 2)) / (SQRT_2PI * params.k_dr)


def _panel(label, N, m, n, p, phi, params, nodes, spec):
    th = 2 * np.pi * np.arange(nodes) / nodes
    rot = _rotation_column(label, N, m, n, th)
    x, w = np.polynomial.legendre.leggauss(16)
    panels = spec.radial_nodes // 16
    edges = np.linspace(0.0, spec.rho_max, panels + 1)
    half = 0.5 * np.diff(edges)
    rho = (edges[:-1, None] + half[:, None] * (x[None, :] + 1)).ravel()
    wr = (half[:, None] * w[None, :]).ravel()
    radial = wr * rho * np.exp(-params.decay * rho + 1j * math.sqrt(n) * params.lam * rho)
    phase = np.exp(-1j * np.outer(rho, p * np.cos(th - phi)))
    total = radial @ phase @ rot
    return complex(total) / nodes / (SQRT_2PI * params.k_dr)


def f_quadrature(label: str, N: int, m: int, n: int, p: float, phi: float, params: SimParams,
                 spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """Numerical value of the pinhole-amplitude transform, converged by node doubling."""
    if spec.scheme == "panel" and spec.rho_max * params.decay < 20:
        raise ValueError("rho_max too small for the exponential tail")
    nodes = spec.angular_nodes
    if spec.scheme == "laplace":
        prev = _laplace(label, N, m, n, p, phi, params, nodes)
    else:
        prev = _panel(label, N, m, n, p, phi, params, nodes, spec)
    while nodes < spec.max_angular_nodes:
        nodes *= 2
        if spec.scheme == "laplace":
            cur = _laplace(label, N, m, n, p, phi, params, nodes)
        else:
            cur = _panel(label, N, m, n, p, phi, params, nodes, spec)
        if abs(cur - prev) < spec.tol * 1e-3:
            return cur
        prev = cur
    raise NotConvergedError(f"angular rule did not settle below {spec.tol:g}")


def s_quadrature(order: int, n: int, p: float, params: SimParams,
                 spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """Radial factor of one azimuthal order, read off the transform of exp(i order theta).

    At phi = 0 that transform is i^order S(order, n, p); the angular integral
    uses the same exact Laplace radial step as the ``"laplace"`` scheme.
    """
    def rule(nodes):
        th = 2 * np.pi * np.arange(nodes) / nodes
        s = params.decay - 1j * math.sqrt(n) * params.lam + 1j * p * np.cos(th)
        return complex(np.mean(np.exp(1j * order * th) / s ** 2)) / (SQRT_2PI * params.k_dr)

    nodes = spec.angular_nodes
    prev = rule(nodes)
    while nodes < spec.max_angular_nodes:
        nodes *= 2
        cur = rule(nodes)
        if abs(cur - prev) < spec.tol * 1e-3:
            return cur / (1j) ** (order % 4)
        prev = cur
    raise NotConvergedError(f"angular rule did not settle below {spec.tol:g}")


def hankel_pinhole(p, params: SimParams):
    """Closed-form transform of the bare pinhole: a / (sqrt(2 pi) k dr (a^2 + p^2)^(3/2))."""
    a = params.decay
    return a / (SQRT_2PI * params.k_dr * (a * a + np.square(p)) ** 1.5)


def rotation_generator(N: int) -> np.ndarray:
    """c^dag d - d^dag c on the basis |n, N-n>, n = 0..N (real antisymmetric)."""
    g = np.zeros((N + 1, N + 1))
    for n in range(N):
        g[n + 1, n] = math.sqrt((n + 1) * (N - n))
        g[n, n + 1] = -g[n + 1, n]
    return g


def beam_splitter_oracle(N: int, theta: float) -> np.ndarray:
    """Rotation matrix [m, n] from the exponentiated mode-mixing generator."""
    if N > 14:
        raise ValueError("dense exponential oracle limited to N <= 14")
    return expm(theta * rotation_generator(N)).T


def squeeze_operator_oracle(alpha: complex, r: float, phi_sq: float, n_max: int,
                            tol: float = 1e-10) -> ModeCoeffs:
    """S(xi) D(alpha)|0> from dense truncated exponentials, cut to n <= n_max."""
    dim = 2 * n_max + 60
    ladder = np.diag(np.sqrt(np.arange(1, dim)), 1)  # annihilation operator
    create = ladder.T
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1
    disp = expm(alpha * create - np.conj(alpha) * ladder)
    xi = r * np.exp(1j * phi_sq)
    sq = expm(0.5 * (np.conj(xi) * ladder @ ladder - xi * create @ create))
    state = sq @ (disp @ vac)
    tail = float(np.sum(np.abs(state[n_max + 1:]) ** 2))
    if tail > tol:
        raise TruncationLeakError(f"tail weight {tail:.2e} beyond n_max = {n_max}")
    kept = state[: n_max + 1]
    weight = float(np.sum(np.abs(kept) ** 2))
    return ModeCoeffs(kept / math.sqrt(weight), Generator("squeezed", complex(alpha), r, phi_sq),
                      min(weight, 1.0))


# --- full evolution + FFT -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class CartesianDistribution:
    px: np.ndarray  # ascending momentum axis (shared by x and y)
    values: np.ndarray  # W[iy, ix]
    norm: float  # sum W dp^2
    unitarity_error: float

    def to_polar(self, p: np.ndarray, phi: np.ndarray) -> MomentumGrid:
        """Cubic-spline resampling onto a polar grid."""
        pp, ff = np.meshgrid(p, phi, indexing="ij")
        x, y = pp * np.cos(ff), pp * np.sin(ff)
        step = self.px[1] - self.px[0]
        coords = np.array([(y - self.px[0]) / step, (x - self.px[0]) / step])
        vals = map_coordinates(self.values, coords, order=3, mode="constant", cval=0.0)
        return MomentumGrid(p, phi, np.maximum(vals, 0.0), {"source": "evolution-fft"})


def _block_operators(N: int):
    """Interaction pieces for the cos and sin quadratures on subspace N.

    Basis: |g; m, N-m> for m = 0..N, then |e; m, N-1-m> for m = 0..N-1.
    """
    dim = 2 * N + 1
    va = np.zeros((dim, dim))
    vb = np.zeros((dim, dim))
    for m in range(N + 1):
        g = m
        if m >= 1:  # sigma_+ a: |g; m, N-m> -> sqrt(m) |e; m-1, N-m>
            e = N + 1 + (m - 1)
            va[e, g] = va[g, e] = math.sqrt(m)
        if m <= N - 1:  # sigma_+ b: |g; m, N-m> -> sqrt(N-m) |e; m, N-m-1>
            e = N + 1 + m
            vb[e, g] = vb[g, e] = math.sqrt(N - m)
    return va, vb


def evolution_fft_oracle(fld: TwoModeFockState, atom: AtomPrep, params: SimParams,
                         n_grid: int = 512, half_width: float = 25.6,
                         chunk: int = 16384) -> CartesianDistribution:
    """Evolve the joint atom-field state pointwise on a Cartesian grid, then FFT.

    Coordinates are rho = k r. At every point the interaction exponential
    exp(i lam rho [sigma_+ c + sigma_- c^dag]) is applied blockwise via a dense
    eigendecomposition; each output component is Fourier transformed and the
    squared moduli summed.
    """
    if fld.n_total_max > 12:
        raise ValueError("evolution oracle limited to n_total_max <= 12")
    if half_width * params.decay < 15:
        raise ValueError("grid does not contain the pinhole tail")
    dx = 2 * half_width / n_grid
    nyquist = math.pi / dx
    if nyquist < math.sqrt(fld.n_total_max) * params.lam + 10 * params.decay:
        raise GridAliasingError(f"momentum extent {nyquist:.3g} too small for the rings")
    x = (np.arange(n_grid) - n_grid // 2) * dx
    xx, yy = np.meshgrid(x, x, indexing="xy")  # values[iy, ix]
    rho = np.hypot(xx, yy).ravel()
    theta = np.arctan2(yy, xx).ravel()
    amp = np.exp(-params.decay * rho) / (SQRT_2PI * params.k_dr)
    # discrete amplitude of (1/2 pi) sum psi exp(-i p.x) dx^2; fftshift to centre p = 0
    scale = dx * dx / (2 * np.pi)
    px = np.fft.fftshift(np.fft.fftfreq(n_grid, d=dx)) * 2 * np.pi

    total = np.zeros((n_grid, n_grid))
    worst = 0.0
    for N in range(fld.n_total_max + 1):
        init = np.zeros(2 * N + 1, dtype=complex)
        init[: N + 1] = atom.c_g * fld.block(N)
        if N >= 1:
            init[N + 1:] = atom.c_e * fld.block(N - 1)
        if not np.any(init):
            continue
        va, vb = _block_operators(N)
        out = np.empty((rho.size, 2 * N + 1), dtype=complex)
        for lo in range(0, rho.size, chunk):
            sl = slice(lo, lo + chunk)
            h = np.cos(theta[sl])[:, None, None] * va + np.sin(theta[sl])[:, None, None] * vb
            evals, evecs = np.linalg.eigh(h)
            proj = np.einsum("pji,j->pi", evecs, init)
            phase = np.exp(1j * params.lam * rho[sl, None] * evals)
            out[sl] = np.einsum("pji,pi->pj", evecs, phase * proj)
        norms = np.sum(np.abs(out) ** 2, axis=1)
        worst = max(worst, float(np.max(np.abs(norms - np.sum(np.abs(init) ** 2)))))
        comps = (out * amp[:, None]).reshape(n_grid, n_grid, -1)
        spec = np.fft.fftshift(np.fft.fft2(comps, axes=(0, 1)), axes=(0, 1)) * scale
        total += np.sum(spec.real ** 2 + spec.imag ** 2, axis=2)
    dp = px[1] - px[0]
    return CartesianDistribution(px, total, float(total.sum() * dp * dp), worst)


def l1_distance(a: MomentumGrid, b: MomentumGrid) -> float:
    """Integral of |W_a - W_b| p dp dphi over a shared polar grid."""
    if a.values.shape != b.values.shape or not np.allclose(a.p, b.p):
        raise ValueError("grids differ")
    diff = np.abs(a.values - b.values).sum(axis=1) * a.dphi
    return float(np.trapezoid(diff * a.p, a.p))
