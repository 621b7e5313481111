import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schrolab.errors import ChartUndefined
from schrolab.phase_space import (
    Chart,
    PhasePoint,
    chart_valid,
    fiber_weight,
    radial_distance,
    rho_base,
    rho_fib,
    select_chart,
    symbol_p,
    to_chart,
)

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)
positive = st.floats(min_value=1e-3, max_value=1e3)
# Zero or far from the subnormal range, where rescaled inputs keep full precision.
normal = st.one_of(st.just(0.0), st.floats(1e-100, 50), st.floats(-50, -1e-100))


@pytest.mark.parametrize("zeta, tau, expected", [
    ((0.0,), 0.0, 0.0),
    ((1.0,), 0.0, 1.0),
    ((0.0,), 4.0, 2.0),
])
def test_fiber_weight_values(zeta, tau, expected):
    assert fiber_weight(zeta, tau) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("z, t, expected", [
    ((0.0,), 0.0, 1.0),
    ((1.0,), 0.0, 1 / math.sqrt(2)),
])
def test_rho_base_values(z, t, expected):
    assert rho_base(z, t) == pytest.approx(expected, rel=1e-15)


def test_rho_base_decreases_to_zero_in_time():
    vals = [rho_base((0.0,), t) for t in np.geomspace(1, 1e8, 20)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-7


def test_rho_fib_values():
    assert rho_fib((0.0,), 0.0) == 1.0
    assert rho_fib((0.0,), 4.0) == pytest.approx(17 ** -0.25, rel=1e-15)


def test_rho_fib_homogeneity_at_large_scale():
    zeta, tau, c = np.array([0.7, -0.2]), 0.3, 1e3
    assert rho_fib(c * zeta, c**2 * tau) * c == pytest.approx(1 / fiber_weight(zeta, tau), rel=1e-6)


@given(normal, normal, normal, positive)
def test_fiber_weight_parabolic_homogeneity(a, b, tau, c):
    zeta = (a, b)
    assert fiber_weight((c * a, c * b), c * c * tau) == pytest.approx(
        c * fiber_weight(zeta, tau), rel=1e-12, abs=1e-300)


@given(finite, finite, st.floats(min_value=1.01, max_value=10))
def test_weights_decrease_along_rays(z, t, a):
    assert rho_base((a * z,), a * t) <= rho_base((z,), t)
    if abs(z) + abs(t) > 1e-3:
        assert rho_base((a * z,), a * t) < rho_base((z,), t)
    assert rho_fib((a * z,), a * a * t) <= rho_fib((z,), t)


@pytest.mark.parametrize("zeta, tau, expected", [((1.0,), -1.0, 0.0), ((0.0,), 1.0, 1.0), ((2.0,), -1.0, 3.0)])
def test_symbol(zeta, tau, expected):
    assert symbol_p(PhasePoint((0.0,), 0.0, zeta, tau)) == expected


def test_phase_point_rejects_bad_input():
    with pytest.raises(ValueError):
        PhasePoint((0.0,), math.inf, (1.0,), 0.0)
    with pytest.raises(ValueError):
        PhasePoint((0.0, 1.0), 0.0, (1.0,), 0.0)


def test_radial_distance_on_r_plus():
    p = PhasePoint.from_polar((1.0,), 1e-12, (0.5,), -0.25)
    assert radial_distance(p, "+") < 1e-11


def test_radial_distance_tau_offset():
    p = PhasePoint.from_polar((1.0,), 1e-12, (0.5,), 0.0)
    assert radial_distance(p, "+") == pytest.approx(0.25, rel=1e-9)


def test_radial_distance_on_r_minus():
    p = PhasePoint.from_polar((1.0,), 1e-12, (-0.5,), -0.25, sign=-1)
    assert radial_distance(p, "-") < 1e-11
    assert radial_distance(p, "-", Chart.SOUTH_POLAR) < 1e-11


def test_polar_and_equatorial_agree_in_overlap_near_radial_set():
    # t = |z| / 2 lies in both charts; at huge |Z| both distances vanish.
    zeta = 1.0
    t = 1e10
    p = PhasePoint((2 * zeta * t,), t, (zeta,), -zeta**2)
    assert chart_valid(p, Chart.NORTH_POLAR) and chart_valid(p, Chart.EQUATORIAL)
    d_pol = radial_distance(p, "+", Chart.NORTH_POLAR)
    d_eq = radial_distance(p, "+", Chart.EQUATORIAL)
    assert abs(d_pol - d_eq) < 1e-8


def test_equatorial_chart_coordinates():
    p = PhasePoint((4.0, -1.0), 1.0, (2.0, 0.5), -3.0)
    c = to_chart(p, Chart.EQUATORIAL, "+")
    assert c.rho_base == 0.25
    assert c.angular_base == (0.25, -0.25)
    assert c.rho_fib == 0.5
    assert c.angular_fib == (0.25, -3.0 / 4.25)


def test_chart_selection_and_undefined():
    assert select_chart(PhasePoint((1.0,), 10.0, (0.0,), 0.0), "+") is Chart.NORTH_POLAR
    assert select_chart(PhasePoint((10.0,), 1.0, (0.0,), 0.0), "-") is Chart.EQUATORIAL
    with pytest.raises(ChartUndefined):
        radial_distance(PhasePoint((0.0,), 0.0, (1.0,), -1.0), "+")
    with pytest.raises(ChartUndefined):
        radial_distance(PhasePoint((1.0,), 10.0, (0.0,), 0.0), "-", Chart.NORTH_POLAR)


@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3),
       st.floats(min_value=-3, max_value=3), st.floats(min_value=0.5, max_value=100))
@settings(max_examples=200)
def test_radial_sets_disjoint(w, zeta, tau, t):
    for sign in (1, -1):
        p = PhasePoint((w * t,), sign * t, (zeta,), tau)
        d_plus = radial_distance(p, "+") if chart_valid(p, Chart.EQUATORIAL) or sign > 0 else math.inf
        d_minus = radial_distance(p, "-") if chart_valid(p, Chart.EQUATORIAL) or sign < 0 else math.inf
        assert max(d_plus, d_minus) > 0
