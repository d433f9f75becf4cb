import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from osglitho.bogoliubov import BbarTable, b_matrix, b_matrix_batch, bbar, fourier_table, log_bbar
from osglitho.errors import InvalidIndexError
from osglitho.oracle import beam_splitter_oracle, rotation_generator


def _exact_bbar(N, m, n, ell):
    """Rational value via integer factorials; the square root is exact when m = n."""
    f = math.factorial
    num_sq = f(m) * f(n) * f(N - m) * f(N - n)
    den = f(ell) * f(m - ell) * f(n - ell) * f(N - m - n + ell)
    root = math.isqrt(num_sq)
    assert root * root == num_sq
    return Fraction((-1) ** (m - ell) * root, den)


@pytest.mark.parametrize("N", [0, 1, 5, 30, 60])
def test_bbar_corner_is_one(N):
    assert bbar(N, 0, 0, 0) == 1


def test_bbar_small_case():
    assert bbar(2, 1, 1, 0) == -1


def test_bbar_large_matches_exact_rational():
    exact = _exact_bbar(30, 15, 15, 10)
    assert float(exact) == -9018009.0
    assert bbar(30, 15, 15, 10) == pytest.approx(float(exact), rel=1e-10)
    sign, logv = log_bbar(30, 15, 15, 10)
    assert sign * math.exp(logv) == pytest.approx(float(exact), rel=1e-12)


def test_log_form_agrees_everywhere():
    N = 24
    for m in range(N + 1):
        for n in range(N + 1):
            for ell in range(max(0, m + n - N), min(m, n) + 1):
                sign, logv = log_bbar(N, m, n, ell)
                assert sign * math.exp(logv) == pytest.approx(bbar(N, m, n, ell), rel=1e-12)


@pytest.mark.parametrize("args", [(2, 3, 0, 0), (2, 1, 1, 2), (3, 2, 2, 0), (-1, 0, 0, 0)])
def test_bbar_invalid_index(args):
    with pytest.raises(InvalidIndexError):
        bbar(*args)


def test_table_is_read_only():
    t = BbarTable(6)
    assert t.value(2, 1, 1, 0) == -1
    with pytest.raises(ValueError):
        t[2][0, 0, 0] = 3.0


def test_n1_closed_form():
    th = 0.83
    c, s = math.cos(th), math.sin(th)
    assert np.allclose(b_matrix(1, th), [[c, s], [-s, c]], atol=1e-15)
    assert np.allclose(beam_splitter_oracle(1, th), [[c, s], [-s, c]], atol=1e-14)


@pytest.mark.parametrize("N", [0, 1, 7, 30])
def test_identity_at_zero(N):
    assert np.array_equal(b_matrix(N, 0.0), np.eye(N + 1))


def test_n4_matches_oracle():
    assert np.max(np.abs(b_matrix(4, 0.7) - beam_splitter_oracle(4, 0.7))) < 1e-10


def test_orthogonality():
    rng = np.random.default_rng(3)
    for N in range(31):
        for th in rng.uniform(0, 2 * np.pi, 20):
            b = b_matrix(N, th)
            assert np.max(np.abs(b.T @ b - np.eye(N + 1))) < 1e-11


def test_composition():
    rng = np.random.default_rng(4)
    for N in range(21):
        t1, t2 = rng.uniform(-np.pi, np.pi, 2)
        assert np.max(np.abs(b_matrix(N, t1) @ b_matrix(N, t2) - b_matrix(N, t1 + t2))) < 1e-10


@pytest.mark.parametrize("N", [1, 2, 5, 12, 25])
def test_quarter_turn_is_antidiagonal(N):
    b = b_matrix(N, math.pi / 2)
    m, n = np.indices(b.shape)
    assert np.all(b[m + n != N] == 0)
    assert np.allclose(np.abs(b[m + n == N]), 1.0, atol=1e-14)


def test_oracle_agreement_up_to_12():
    rng = np.random.default_rng(5)
    for N in range(13):
        th = rng.uniform(0, 2 * np.pi)
        assert np.max(np.abs(b_matrix(N, th) - beam_splitter_oracle(N, th))) < 1e-10


@pytest.mark.parametrize("N", [0, 3, 10, 30])
def test_fourier_table_reconstructs_matrix(N):
    table = fourier_table(N)
    k = 2 * np.arange(N + 1) - N
    for th in (0.3, 2.1, -1.4):
        recon = (table @ np.exp(1j * k * th))
        assert np.max(np.abs(recon - b_matrix(N, th))) < 1e-12


@pytest.mark.parametrize("N", [40, 60])
def test_large_n_matches_exponential(N):
    th = 2.1
    ref = expm(th * rotation_generator(N)).T
    assert np.max(np.abs(b_matrix(N, th) - ref)) < 1e-11


def test_batch_matches_scalar():
    th = np.array([0.0, 0.4, 2.5, np.pi / 2])
    batch = b_matrix_batch(9, th)
    for i, t in enumerate(th):
        assert np.allclose(batch[i], b_matrix(9, t), atol=1e-12)
