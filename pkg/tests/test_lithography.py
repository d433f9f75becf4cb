import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osglitho.errors import DegenerateTargetError, EmptyRegionError, InfeasibleSqueezeError
from osglitho.kernel import MomentumGrid
from osglitho.lithography import (FieldPlan, LithTarget, ScreenGeometry, locate_peak, peak_width,
                                  plan_fields, predict_deflection, screen_map)

RB_SCREEN = ScreenGeometry(L=0.5, v=500.0, M=1.44e-25, k=2 * math.pi / 6e-3)


def synthetic(values, p=None, phi=None, lam=None):
    n_p, n_phi = values.shape
    p = np.linspace(0, n_p - 1, n_p) if p is None else p
    phi = 2 * np.pi * np.arange(n_phi) / n_phi if phi is None else phi
    return MomentumGrid(p, phi, values, {"lam": lam})


def test_forward_diagonal_target():
    radius, phi = predict_deflection(12.53, 12.53, 1, 1, 4.0)
    assert radius == pytest.approx(20.02, abs=0.005)
    assert phi == pytest.approx(math.pi / 4, abs=1e-15)


def test_forward_oblique_target_and_flip():
    radius, phi = predict_deflection(5.78, 8.20, 1, 1, 4.0)
    assert radius == pytest.approx(14.96, abs=0.005)
    assert phi == pytest.approx(math.atan(math.sqrt(8.20 / 5.78)), abs=1e-15)
    assert phi == pytest.approx(0.873, abs=1e-3)
    assert phi == pytest.approx(5 * math.pi / 18, abs=5e-3)
    _, flipped = predict_deflection(5.78, 8.20, -1, 1, 4.0)
    assert flipped == pytest.approx(13 * math.pi / 18, abs=5e-3)


def test_forward_zero_a_is_quarter_turn():
    radius, phi = predict_deflection(0.0, 4.0, 1, 1, 2.0)
    assert (radius, phi) == (4.0, math.pi / 2)


@pytest.mark.parametrize("args", [(0.0, 0.0, 1, 1), (-1.0, 2.0, 1, 1)])
def test_forward_degenerate(args):
    with pytest.raises(DegenerateTargetError):
        predict_deflection(*args, 4.0)


def test_forward_bad_sign():
    with pytest.raises(ValueError):
        predict_deflection(1.0, 1.0, 0, 1, 4.0)


@pytest.mark.parametrize("r,expected", [(0.0, 3.54), (1.0, 9.06)])
def test_diagonal_plans(r, expected):
    plan = plan_fields(LithTarget(20, math.pi / 4), 4.0, r, r)
    assert plan.amp_a == pytest.approx(expected, abs=0.01)
    assert plan.amp_b == pytest.approx(expected, abs=0.01)
    assert plan.sign_a == plan.sign_b == 1


def test_oblique_plan():
    plan = plan_fields(LithTarget(15, 5 * math.pi / 18), 4.0, 1.0, 1.0)
    assert plan.amp_a == pytest.approx(5.72, abs=0.01)
    assert plan.amp_b == pytest.approx(7.13, abs=0.01)


def test_infeasible_squeeze():
    with pytest.raises(InfeasibleSqueezeError):
        plan_fields(LithTarget(4, 0.1), 4.0, 1.0, 1.0)


def test_degenerate_target():
    with pytest.raises(DegenerateTargetError):
        LithTarget(0.0, 1.0)
    assert LithTarget(1.0, -math.pi / 2).phi_bar == pytest.approx(1.5 * math.pi)


@settings(max_examples=200, deadline=None)
@given(p=st.floats(0.5, 60), phi=st.floats(0, 2 * math.pi, exclude_max=True),
       lam=st.floats(0.5, 10), r=st.floats(0, 1.5), r2=st.floats(0, 1.5))
def test_round_trip(p, phi, lam, r, r2):
    target = LithTarget(p, phi)
    try:
        plan = plan_fields(target, lam, r, r2)
    except InfeasibleSqueezeError:
        return
    radius, back = predict_deflection(plan.mean_a, plan.mean_b, plan.sign_a, plan.sign_b, lam)
    assert radius == pytest.approx(p, abs=1e-10 * max(1, p))
    diff = (back - target.phi_bar + math.pi) % (2 * math.pi) - math.pi
    assert abs(diff) < 1e-10


@settings(max_examples=100, deadline=None)
@given(p=st.floats(0.5, 60), phi=st.floats(0, 2 * math.pi), lam=st.floats(0.5, 10))
def test_unsqueezed_sum_law(p, phi, lam):
    plan = plan_fields(LithTarget(p, phi), lam)
    assert plan.amp_a ** 2 + plan.amp_b ** 2 == pytest.approx((p / lam) ** 2, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0.01, 50), b=st.floats(0.01, 50))
def test_quadrant_law(a, b):
    _, base = predict_deflection(a, b, 1, 1, 1.0)
    _, flip_a = predict_deflection(a, b, -1, 1, 1.0)
    _, flip_both = predict_deflection(a, b, -1, -1, 1.0)
    assert flip_a == pytest.approx((math.pi - base) % (2 * math.pi), abs=1e-12)
    assert flip_both == pytest.approx((base + math.pi) % (2 * math.pi), abs=1e-12)


def test_plan_means_include_squeezed_floor():
    plan = FieldPlan(9.06, 9.06, 1, 1, 1.0, 1.0)
    assert plan.alpha == 9.06j
    assert plan.mean_a == pytest.approx((9.06 / math.e) ** 2 + math.sinh(1) ** 2, rel=1e-14)


def test_single_cell_peak():
    values = np.zeros((20, 16))
    values[7, 5] = 2.0
    grid = synthetic(values)
    peak = locate_peak(grid, 0.0)
    assert (peak.p, peak.phi, peak.value) == (7.0, grid.phi[5], 2.0)
    assert peak.index == (7, 5)


def test_tie_breaks_toward_small_p_then_small_phi():
    values = np.zeros((20, 16))
    values[9, 2] = values[9, 1] = values[12, 0] = 1.0
    peak = locate_peak(synthetic(values), 0.0)
    assert peak.index == (9, 1)


def test_exclusion_radius():
    values = np.zeros((20, 16))
    values[1, 0] = 10.0
    values[10, 3] = 1.0
    assert locate_peak(synthetic(values), 0.0).index == (1, 0)
    assert locate_peak(synthetic(values, lam=4.0)).index == (10, 3)
    with pytest.raises(EmptyRegionError):
        locate_peak(synthetic(values), 30.0)


def test_log_quadratic_refinement_is_exact_for_gaussian():
    p = np.linspace(0, 20, 201)
    phi = 2 * np.pi * np.arange(256) / 256
    pp, ff = np.meshgrid(p, phi, indexing="ij")
    p0, f0 = 11.234, 2.0 + 0.3 * (phi[1] - phi[0])
    values = np.exp(-((pp - p0) ** 2) / 2 - ((ff - f0) ** 2) / 0.02)
    peak = locate_peak(synthetic(values, p, phi), 1.0)
    assert peak.p == pytest.approx(p0, abs=1e-10)
    assert peak.phi == pytest.approx(f0, abs=1e-10)


def test_azimuth_refinement_wraps():
    p = np.linspace(0, 10, 101)
    phi = 2 * np.pi * np.arange(64) / 64
    pp, ff = np.meshgrid(p, phi, indexing="ij")
    dist = (ff - (-0.01) + np.pi) % (2 * np.pi) - np.pi
    values = np.exp(-((pp - 5) ** 2) - dist ** 2 / 0.05)
    peak = locate_peak(synthetic(values, p, phi), 1.0)
    assert peak.phi == pytest.approx(2 * np.pi - 0.01, abs=1e-9)


@pytest.mark.parametrize("sigma", [0.3, 0.8, 1.7])
def test_gaussian_fwhm(sigma):
    p = np.linspace(0, 20, 401)
    phi = 2 * np.pi * np.arange(512) / 512
    pp, ff = np.meshgrid(p, phi, indexing="ij")
    s_phi = 0.2 * sigma
    values = np.exp(-((pp - 10) ** 2) / (2 * sigma ** 2) - ((ff - 3) ** 2) / (2 * s_phi ** 2))
    grid = synthetic(values, p, phi)
    d_p, d_phi = peak_width(grid, locate_peak(grid, 1.0))
    fwhm = 2 * math.sqrt(2 * math.log(2))
    assert abs(d_p - fwhm * sigma) < p[1] - p[0]
    assert abs(d_phi - fwhm * s_phi) < grid.dphi


def test_width_undefined_is_nan():
    # a ring of constant height: radial width exists, azimuthal width does not
    values = np.full((10, 8), 0.5)
    values[5] = 2.0
    grid = synthetic(values)
    d_p, d_phi = peak_width(grid, locate_peak(grid, 0.0))
    assert d_p == pytest.approx(2 * (1 - 1 / 3))
    assert math.isnan(d_phi)


def test_screen_map_scale():
    assert screen_map(0.0, RB_SCREEN) == 0.0
    shift = screen_map(10.0, RB_SCREEN)
    assert shift == pytest.approx(7.67e-9, rel=1e-3)
    assert 1e-10 < shift < 1e-8
    longer = ScreenGeometry(1.0, RB_SCREEN.v, RB_SCREEN.M, RB_SCREEN.k)
    assert screen_map(10.0, longer) == pytest.approx(2 * shift, rel=1e-15)


def test_screen_geometry_positive():
    with pytest.raises(ValueError):
        ScreenGeometry(0.5, 0.0, 1e-25, 1e3)
