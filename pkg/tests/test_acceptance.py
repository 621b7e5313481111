"""Acceptance criteria 1 to 13 on the default grid at their stated tolerances.

Each test prints one PASS/FAIL line.  The checks run once per module; the
determinism criterion reruns them and compares every metric exactly.
"""
import pytest

from schrolab import verify
from schrolab.config import ExperimentConfig

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def cfg():
    return ExperimentConfig()


@pytest.fixture(scope="module")
def results(cfg):
    return {r.id: r for r in verify.run_checks(cfg)}


def verdict(capsys, cid, name, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {cid:2d} {name}: {detail}")
    assert ok, f"criterion {cid} {name}: {detail}"


def test_01_flow_classification(results, capsys):
    m = results[1].metrics
    ok = (m["trajectories"] == 400 and m["misclassified"] == 0
          and m["max_final_radial_distance"] < 1e-4 and m["max_char_violation"] < 1e-8)
    verdict(capsys, 1, "flow classification", ok, m)


def test_02_hamilton_conservation(results, capsys):
    m = results[2].metrics
    verdict(capsys, 2, "Hamilton conservation", m["max_frequency_drift"] < 1e-10, m)


def test_03_free_gaussian_closed_form(results, capsys):
    m = results[3].metrics
    ok = m["sup_error"] < 1e-8 and abs(m["strang_order"] - 2.0) <= 0.1 and len(m["order_steps"]) == 3
    verdict(capsys, 3, "free Gaussian closed form", ok, m)


def test_04_unitarity(results, capsys):
    m = results[4].metrics
    ok = m["amplitude"] == 5.0 and m["max_step_drift"] < 1e-12 and m["window_drift"] < 1e-10
    verdict(capsys, 4, "unitarity", ok, m)


def test_05_retarded_advanced_residual(results, capsys):
    m = results[5].metrics
    ok = (m["max_residual"] < 1e-3 and m["max_leakage"] < 1e-8
          and abs(m["min_slope"] - 2.0) <= 0.2 and abs(m["max_slope"] - 2.0) <= 0.2)
    verdict(capsys, 5, "retarded/advanced residual", ok, m)


def test_06_asymptotic_extraction(results, capsys):
    m = results[6].metrics
    verdict(capsys, 6, "asymptotic extraction", m["sup_error"] < 1e-3 and m["fitted_rate"] > 0, m)


def test_07_poisson_consistency(results, capsys):
    m = results[7].metrics
    ok = m["max_sup_error_minus"] < 1e-3 and m["max_sup_error_plus"] < 1e-3
    verdict(capsys, 7, "Poisson consistency", ok, m)


def test_08_scattering_sanity(results, capsys):
    m = results[8].metrics
    ok = (m["free_relative_error"] < 1e-3 and m["norm_deviation"] < 1e-3
          and abs(m["born_slope"] - 1.0) <= 0.1)
    verdict(capsys, 8, "scattering sanity", ok, {k: m[k] for k in
                                                 ("free_relative_error", "norm_deviation", "born_slope")})


def test_09_pairing_identity(results, capsys):
    m = results[9].metrics
    ok = m["max_discrepancy"] < 1e-2 and m["max_refinement_ratio"] <= 0.5
    verdict(capsys, 9, "pairing identity", ok, m)


def test_10_commutation_identities(results, capsys):
    m = results[10].metrics
    ok = len(m) == 3 and max(m.values()) < 1e-6
    verdict(capsys, 10, "commutation identities", ok, m)


def test_11_threshold_law(results, capsys):
    m = results[11].metrics
    ok = all(abs(m["slopes"][str(l)] - max(0.0, 2 * l + 1)) < 0.1 for l in (-1.0, -0.75, -0.25, 0.0))
    verdict(capsys, 11, "threshold law", ok, m)


def test_12_wk_stability(results, capsys):
    m = results[12].metrics
    finite = all(0 < x < float("inf") for x in m["max_ratio"] + m["min_ratio"])
    ok = finite and m["max_refinement_change"] <= 0.1
    verdict(capsys, 12, "W^k stability of S", ok, m)


def test_13_determinism(cfg, results, capsys):
    again = {r.id: r for r in verify.run_checks(cfg)}
    diff = [i for i in results if results[i].metrics != again[i].metrics]
    verdict(capsys, 13, "determinism", not diff and len(again) == 12, {"differing_criteria": diff})
