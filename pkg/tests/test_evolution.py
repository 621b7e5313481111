import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schrolab.errors import SupportViolation
from schrolab.evolution import (
    apply_P,
    evolve,
    relative_residual,
    solve_advanced,
    solve_retarded,
    step_evolve,
    time_derivative,
)
from schrolab.grid import Grid, PotentialSpec, SpacetimeField
from schrolab.verify import closed_form_gaussian, random_source

ZERO = PotentialSpec.zero()


def test_plane_wave_phase(tiny_grid):
    g = tiny_grid
    k = 5
    zeta0 = g.zeta_axis[k]
    psi = np.exp(1j * zeta0 * g.z_axis)
    out = step_evolve(psi, 0.0, 0.3, ZERO, g)
    np.testing.assert_allclose(out, np.exp(-0.3j * zeta0**2) * psi, atol=1e-13)


def test_step_requires_positive_dt(tiny_grid):
    with pytest.raises(ValueError):
        step_evolve(np.zeros(tiny_grid.N), 0.0, 0.0, ZERO, tiny_grid)


def test_gaussian_closed_form():
    # Oracle: the Gaussian integral, cross-checked against an FFT of e^{-it zeta^2} f.
    g = Grid(L=250.0, N=2048, t0=0.0, t1=10.0, M=100)
    u = evolve(closed_form_gaussian(g.z_axis, 0.0), g, ZERO)
    exact = np.stack([closed_form_gaussian(g.z_axis, t) for t in g.times])
    assert np.abs(u.values - exact).max() < 1e-12
    fft_route = g.inverse(np.exp(-10j * g.zeta_sq) * np.exp(-g.zeta_sq / 2))
    np.testing.assert_allclose(fft_route, exact[-1], atol=1e-12)


@given(st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=-3, max_value=3),
       st.floats(min_value=0.5, max_value=5.0))
@settings(max_examples=25, deadline=None)
def test_step_unitary_for_real_potential(dt, t, amp):
    g = Grid(L=20.0, N=128, M=1)
    pot = PotentialSpec(amplitude=amp, widths=(2.0, 4.0))
    rng = np.random.default_rng(0)
    psi = rng.normal(size=128) + 1j * rng.normal(size=128)
    out = step_evolve(psi, t, dt, pot, g)
    assert abs(np.linalg.norm(out) / np.linalg.norm(psi) - 1) < 1e-12


def test_complex_potential_is_dissipative(tiny_grid):
    g = tiny_grid
    pot = PotentialSpec(amplitude=0.5, complex_part=-0.5, widths=(3.0, 2.0))
    u = evolve(np.exp(-g.z_axis**2), g, pot)
    norms = u.slice_norms()
    assert norms[-1] < norms[0] - 1e-3
    assert np.all(np.diff(norms) <= 1e-14)


def test_strang_order(potential):
    g0 = Grid(L=224.0, N=1024, t0=-8.0, t1=8.0, M=200)
    psi0 = closed_form_gaussian(g0.z_axis, g0.t0)
    finals = []
    for M in (200, 400, 800):
        g = Grid(g0.n, g0.L, g0.N, g0.t0, g0.t1, M)
        finals.append(evolve(psi0, g, potential).values[-1])
    p = math.log2(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2]))
    assert abs(p - 2.0) < 0.1


def test_time_derivative_exact_on_quartic():
    t = np.linspace(0, 1, 21)
    y = t**4 - 2 * t**3 + t
    np.testing.assert_allclose(time_derivative(y, t[1] - t[0]), 4 * t**3 - 6 * t**2 + 1, atol=1e-11)


def test_apply_P_plane_wave_and_product_rule(tiny_grid):
    g = tiny_grid
    zeta0 = g.zeta_axis[3]
    t = g.times[:, None]
    wave = np.exp(1j * zeta0 * g.z_axis[None] - 1j * t * zeta0**2)
    r = apply_P(SpacetimeField(g, wave), ZERO).values
    assert np.abs(r[2:-2]).max() < 1e-9
    r = apply_P(SpacetimeField(g, t * wave), ZERO).values
    np.testing.assert_allclose(r[2:-2], -1j * wave[2:-2], atol=1e-9)


def test_evolved_residual_small(potential):
    g = Grid(L=60.0, N=256, t0=-6.0, t1=6.0, M=600)
    u = evolve(np.exp(-g.z_axis**2 / 2), g, potential)
    r = apply_P(u, potential).values[2:-2]
    assert np.linalg.norm(r) / np.linalg.norm(u.values) < 1e-3


def _ramp(t, a, b):
    """Smooth step from 0 (t <= a) to 1 (t >= b) and its derivative."""
    s = np.clip((t - a) / (b - a), 0, 1)
    f = lambda x: np.where(x > 0, np.exp(-1 / np.maximum(x, 1e-300)), 0.0)
    def df(x):
        xs = np.where(x > 0, x, 1.0)
        return np.where(x > 0, np.exp(-1 / xs - 2 * np.log(xs)), 0.0)
    den = f(s) + f(1 - s)
    d = (df(s) * den - f(s) * (df(s) - df(1 - s))) / den**2 / (b - a)
    return f(s) / den, d


def test_construct_and_invert(potential):
    # P(chi w) = -i chi' w when P w = 0, so R+ of that source is chi w.
    g = Grid(L=60.0, N=256, t0=-6.0, t1=6.0, M=1200)
    w = evolve(np.exp(-(g.z_axis - 3) ** 2 / 2), g, potential)
    chi, dchi = _ramp(g.times, -5.0, -1.0)
    target = SpacetimeField(g, chi[:, None] * w.values)
    v = SpacetimeField(g, -1j * dchi[:, None] * w.values)
    u = solve_retarded(v, potential)
    err = np.linalg.norm(u.values - target.values) / np.linalg.norm(target.values)
    assert err < 1e-3


def test_zero_source_gives_zero(tiny_grid):
    z = SpacetimeField.zeros(tiny_grid)
    assert np.all(solve_retarded(z, ZERO).values == 0)
    assert np.all(solve_advanced(z, ZERO).values == 0)


def test_support_violation(tiny_grid):
    v = SpacetimeField(tiny_grid, np.ones(tiny_grid.shape))
    with pytest.raises(SupportViolation):
        solve_retarded(v, ZERO)


def test_propagator_residual_support_and_linearity(potential):
    g = Grid(L=112.0, N=512, t0=-15.0, t1=15.0, M=1500)
    rng = np.random.default_rng(3)
    v1, v2 = random_source(g, rng), random_source(g, rng)
    u1 = solve_retarded(v1, potential)
    assert relative_residual(u1, v1, potential) < 1e-3
    amp = np.abs(u1.values).max(axis=1)
    first = np.nonzero(np.abs(v1.values).max(axis=1) > 1e-14 * np.abs(v1.values).max())[0][0]
    assert amp[: first - 2].max(initial=0) <= 1e-8 * amp.max()
    a, b = 0.7 - 0.2j, -1.3
    lhs = solve_retarded(v1 * a + v2 * b, potential).values
    rhs = a * u1.values + b * solve_retarded(v2, potential).values
    assert np.abs(lhs - rhs).max() < 1e-12 * np.abs(rhs).max()
    w = solve_advanced(v2, potential)
    assert relative_residual(w, v2, potential) < 1e-3
    last = np.nonzero(np.abs(v2.values).max(axis=1) > 1e-14 * np.abs(v2.values).max())[0][-1]
    assert np.abs(w.values[last + 3:]).max(initial=0) <= 1e-8 * np.abs(w.values).max()


def test_unitarity_of_evolve(potential):
    g = Grid(L=60.0, N=256, t0=-6.0, t1=6.0, M=600)
    u = evolve(np.exp(-g.z_axis**2 / 2), g, potential.scaled(10))
    n = u.slice_norms()
    assert np.abs(n / n[0] - 1).max() < 1e-10
