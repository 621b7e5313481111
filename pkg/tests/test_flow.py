import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schrolab.errors import NoConvergence, NotCharacteristic
from schrolab.flow import (
    EndpointClass,
    Trajectory,
    classify_endpoint,
    hamilton_field,
    random_characteristic_seeds,
    rescale_factor,
    rescaled_field,
    trace_bicharacteristic,
    trace_many,
)
from schrolab.phase_space import PhasePoint, radial_distance, rho_fib

SEED = PhasePoint((0.0,), 0.0, (1.0,), -1.0)


def test_hamilton_field_flat():
    np.testing.assert_array_equal(hamilton_field(SEED), [2.0, 1.0, 0.0, 0.0])
    np.testing.assert_array_equal(hamilton_field(PhasePoint((3.0,), 1.0, (0.0,), 0.0)), [0, 1, 0, 0])


def test_rescaled_field_at_origin():
    expected = 3 ** -0.25 * np.array([2.0, 1.0, 0.0, 0.0])
    np.testing.assert_allclose(rescaled_field(SEED), expected, rtol=1e-15)


def test_rescale_factor_vanishes_at_fibre_infinity():
    vals = [rescale_factor(PhasePoint((0.0,), 0.0, (c,), -c * c)) for c in (1e1, 1e3, 1e5)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-4


def test_rescale_factor_grows_like_z_on_free_trajectory():
    z0, zeta0 = 0.5, 0.8
    ss = np.array([1e3, 1e4, 1e5])
    pts = [PhasePoint((z0 + 2 * zeta0 * s,), s, (zeta0,), -zeta0**2) for s in ss]
    ratio = np.array([rescale_factor(p) for p in pts]) / np.sqrt(1 + (z0 + 2 * zeta0 * ss) ** 2 + ss**2)
    np.testing.assert_allclose(ratio, rho_fib((zeta0,), -zeta0**2), rtol=1e-12)


def test_forward_limit_on_r_plus():
    tr = trace_bicharacteristic(SEED, "forward")
    assert tr.endpoint_class is EndpointClass.PLUS_RADIAL
    final = tr.final
    assert final.z[0] / final.t == pytest.approx(2.0, abs=1e-5)
    assert final.tau == -1.0
    assert tr.final_radial_distance < 1e-4


def test_backward_limit_on_r_minus():
    tr = trace_bicharacteristic(SEED, "backward")
    assert tr.endpoint_class is EndpointClass.MINUS_RADIAL
    final = tr.final
    assert final.z[0] / abs(final.t) == pytest.approx(-2.0, abs=1e-5)


def test_trajectory_follows_free_line():
    # Oracle: the flat flow is z = z0 + 2 zeta0 (t - t0) whatever the parametrisation.
    seed = PhasePoint((1.5, -2.0), 0.3, (0.4, 0.9), -(0.16 + 0.81))
    tr = trace_bicharacteristic(seed, "forward")
    z = tr.states[:, :2]
    t = tr.states[:, 2]
    pred = np.array(seed.z) + 2 * np.outer(t - seed.t, seed.zeta)
    assert np.max(np.abs(z - pred) / (1 + np.abs(pred))) < 1e-8


def test_samples_strictly_increasing_and_invariants():
    tr = trace_bicharacteristic(SEED, "forward")
    assert np.all(np.diff(tr.s) > 0)
    assert tr.max_char_violation <= 1e-9
    assert tr.frequency_drift() == 0.0
    rb = tr.rho_base_curve()
    assert np.all(np.diff(rb) < 0)


def test_distance_monotone_near_sink():
    for seed in random_characteristic_seeds(10, seed=4):
        tr = trace_bicharacteristic(seed, "forward")
        d = tr.dist_plus
        near = np.nonzero(d < 0.1)[0]
        assert near.size
        tail = d[near[0]:]
        assert np.all(np.diff(tail) <= 1e-15)
        trb = trace_bicharacteristic(seed, "backward")
        d = trb.dist_minus
        tail = d[np.nonzero(d < 0.1)[0][0]:]
        assert np.all(np.diff(tail) <= 1e-15)


def test_zeta_hat_alignment_at_limits():
    seed = PhasePoint((-3.0, 1.0), 2.0, (0.3, -0.5), -0.34)
    for direction, sign in (("forward", 1), ("backward", -1)):
        f = trace_bicharacteristic(seed, direction).final
        z, zeta = np.array(f.z), np.array(f.zeta)
        cos = z @ zeta / np.linalg.norm(z) / np.linalg.norm(zeta)
        assert cos == pytest.approx(sign, abs=1e-6)


def test_not_characteristic():
    with pytest.raises(NotCharacteristic):
        trace_bicharacteristic(PhasePoint((0.0,), 0.0, (1.0,), 0.0))


def test_no_convergence_when_steps_run_out():
    with pytest.raises(NoConvergence) as info:
        trace_bicharacteristic(SEED, max_steps=5)
    assert isinstance(info.value.trajectory, Trajectory)


def test_zero_frequency_seed_is_recorded():
    # Corner of the characteristic set: behaviour recorded, not asserted.
    try:
        tr = trace_bicharacteristic(PhasePoint((0.0,), 0.0, (0.0,), 0.0))
        assert tr.endpoint_class in set(EndpointClass)
    except NoConvergence:
        pass


def _final_only(state, n=1):
    return Trajectory(s=np.array([0.0]), states=np.array([state]), n=n, direction="forward")


def test_classify_thresholds():
    # radial distance 1e-7 from R_+ in the polar chart
    t = 1e7
    tr = _final_only([t, t, 0.5, -0.25])
    assert radial_distance(tr.final, "+") == pytest.approx(1e-7, rel=1e-6)
    assert classify_endpoint(tr) is EndpointClass.PLUS_RADIAL
    far = _final_only([0.0, 10.0, 2.0, -4.0])
    assert classify_endpoint(far) is EndpointClass.UNDETERMINED


def test_batch_of_random_seeds_classify():
    seeds = random_characteristic_seeds(100, seed=11)
    out = trace_many(seeds, "forward")
    assert all(t.endpoint_class is EndpointClass.PLUS_RADIAL for t in out)


@pytest.mark.parametrize("factor", [0.1, 10.0])
def test_classification_robust_to_thresholds(factor):
    for seed in random_characteristic_seeds(10, seed=2):
        tr = trace_bicharacteristic(seed, "forward", rho_stop=1e-6 * factor, class_tol=1e-4 * factor)
        assert tr.endpoint_class is EndpointClass.PLUS_RADIAL


@given(st.floats(min_value=-5, max_value=5), st.floats(min_value=-5, max_value=5),
       st.floats(min_value=0.3, max_value=2.0), st.sampled_from([1, -1]))
@settings(max_examples=25, deadline=None)
def test_random_seed_property(z, t, mag, sgn):
    zeta = sgn * mag
    seed = PhasePoint((z,), t, (zeta,), -zeta * zeta)
    fwd = trace_bicharacteristic(seed, "forward")
    bwd = trace_bicharacteristic(seed, "backward")
    assert fwd.endpoint_class is EndpointClass.PLUS_RADIAL
    assert bwd.endpoint_class is EndpointClass.MINUS_RADIAL
    assert fwd.max_char_violation < 1e-8 and math.isfinite(fwd.final_radial_distance)
