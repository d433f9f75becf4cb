"""Equivalence suites comparing the fast paths against the brute-force oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bogoliubov import b_matrix
from .errors import BudgetExceededError
from .kernel import GridSpec, f_transform, momentum_distribution
from .oracle import (QuadratureSpec, beam_splitter_oracle, evolution_fft_oracle, f_quadrature,
                     l1_distance, squeeze_operator_oracle)
from .states import AtomPrep, SimParams, coherent_coeffs, product_state, \
    squeezed_coherent_coeffs

QUADRATURE_TOL = 1e-6
BOGOLIUBOV_TOL = 1e-10
SQUEEZE_TOL = 1e-8
EVOLUTION_TOL = 2e-2

# dense-oracle limits; asking for more is a budget error, not a slow run
MAX_QUADRATURE_N = 8
MAX_BOGOLIUBOV_N = 14


@dataclass
class SuiteResult:
    name: str
    max_error: float
    mean_error: float
    tolerance: float
    cases: int
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_error) and self.max_error <= self.tolerance)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.name}: max {self.max_error:.3e} mean {self.mean_error:.3e} "
                f"(tol {self.tolerance:.0e}, {self.cases} cases)")


def index_cases(n_max: int):
    """Every valid (label, N, m, n) with N <= n_max."""
    for N in range(n_max + 1):
        for label, d in (("g", 0), ("e", 1)):
            if N < d:
                continue
            for m in range(d, N + 1):
                for n in range(d, N + 1):
                    yield label, N, m, n


def quadrature_suite(n_max: int = 3, samples: int = 4, lam: float = 4.0, seed: int = 1,
                     branch: str = "continuous") -> SuiteResult:
    """Relative error of the analytic transform against direct quadrature."""
    params = SimParams(lam)
    rng = np.random.default_rng(seed)
    errors = []
    for label, N, m, n in index_cases(n_max):
        for p, phi in zip(rng.uniform(0, 3 * lam, samples), rng.uniform(0, 2 * np.pi, samples)):
            ref = f_quadrature(label, N, m, n, p, phi, params, QuadratureSpec())
            got = f_transform(label, N, m, n, p, phi, params, branch)
            # entries that vanish identically are compared on the absolute scale of S
            scale = max(abs(ref), 1e-8)
            errors.append(abs(got - ref) / scale)
    err = np.array(errors)
    return SuiteResult("transform-vs-quadrature", float(err.max()), float(err.mean()),
                       QUADRATURE_TOL, err.size)


def bogoliubov_suite(n_max: int = 12, seed: int = 1) -> SuiteResult:
    rng = np.random.default_rng(seed)
    errors = []
    for N in range(n_max + 1):
        theta = rng.uniform(0, 2 * np.pi)
        diff = np.abs(b_matrix(N, theta) - beam_splitter_oracle(N, theta))
        errors.append(float(diff.max()))
    err = np.array(errors)
    return SuiteResult("rotation-vs-exponential", float(err.max()), float(err.mean()),
                       BOGOLIUBOV_TOL, err.size)


SQUEEZE_CASES = ((0.5j, 0.3), (2j, 1.0), (1 + 1j, 0.7), (4j, 1.5), (-3j, 1.2))


def squeeze_suite() -> SuiteResult:
    errors = []
    for alpha, r in SQUEEZE_CASES:
        # window long enough for the tanh(r)^n tail of the squeezed vacuum
        n_max = int(-28 / math.log(math.tanh(r))) + 4 * int(abs(alpha) ** 2) + 40
        ref = squeeze_operator_oracle(alpha, r, math.pi, n_max)
        got = squeezed_coherent_coeffs(alpha, r, math.pi, n_max, eps=None)
        errors.append(float(np.max(np.abs(ref.amplitudes - got.amplitudes))))
    err = np.array(errors)
    return SuiteResult("squeezed-vs-operator", float(err.max()), float(err.mean()),
                       SQUEEZE_TOL, err.size)


def evolution_suite(n_grid: int = 256, alpha: complex = 0.5j, beta: complex = 0.5j,
                    lam: float = 2.0, kappa: float = math.pi / 2,
                    eps: float = 1e-6) -> SuiteResult:
    """L1 distance between the kernel and the pointwise-evolution oracle."""
    params = SimParams(lam)
    fld = product_state(coherent_coeffs(alpha, 30, eps / 10), coherent_coeffs(beta, 30, eps / 10),
                        eps)
    atom = AtomPrep.from_phase(kappa)
    cart = evolution_fft_oracle(fld, atom, params, n_grid=n_grid, half_width=25.6)
    p_max = min(float(cart.px[-1]), math.sqrt(fld.n_total_max) * lam + 10 * params.decay)
    grid = momentum_distribution(fld, atom, params, GridSpec(200, 256, p_max))
    ref = cart.to_polar(grid.p, grid.phi)
    dist = l1_distance(grid, ref)
    return SuiteResult("kernel-vs-evolution", dist, dist, EVOLUTION_TOL, 1,
                       {"n_total_max": fld.n_total_max, "oracle_norm": cart.norm})


def run_all(quadrature_n_max: int = 3, quadrature_samples: int = 4,
            bogoliubov_n_max: int = 12, evolution_grid: int = 256, seed: int = 1,
            branch: str = "continuous") -> list[SuiteResult]:
    """Run every suite; budgets are checked before any suite starts."""
    if quadrature_n_max > MAX_QUADRATURE_N:
        raise BudgetExceededError(
            f"quadrature suite limited to N <= {MAX_QUADRATURE_N}, asked {quadrature_n_max}")
    if bogoliubov_n_max > MAX_BOGOLIUBOV_N:
        raise BudgetExceededError(
            f"exponential oracle limited to N <= {MAX_BOGOLIUBOV_N}, asked {bogoliubov_n_max}")
    return [
        quadrature_suite(quadrature_n_max, quadrature_samples, seed=seed, branch=branch),
        bogoliubov_suite(bogoliubov_n_max, seed),
        squeeze_suite(),
        evolution_suite(evolution_grid),
    ]
