"""The acceptance suite: thirteen numerical checks with metrics and pass/fail flags.

Every check is a function ``check_*(cfg) -> CriterionResult``.  All random
inputs are drawn from generators seeded by ``cfg.seed`` so reruns are
bit-identical.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import flow
from .config import ExperimentConfig, builtin_data, random_data
from .evolution import apply_P, relative_residual, solve_advanced, solve_retarded, support_window
from .grid import DataFunction, Grid, PotentialSpec, SpacetimeField
from .regularity import GeneratorId, GenKind, commutation_residual, data_norm_Wk, threshold_scan
from .scattering import (
    exact_data,
    extract_data,
    free_poisson,
    pairing_check,
    perturbed_poisson,
    scattering_matrix,
)

log = logging.getLogger(__name__)

FLOW_SEEDS = 200
RANDOM_SOURCES = 5
RANDOM_DATA = 10
PAIRS = 5
BORN_FACTORS = (0.125, 0.25, 0.5)
THRESHOLD_LS = (-1.0, -0.75, -0.25, 0.0)
UNITARITY_AMPLITUDE = 5.0


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id:2d} {self.name}"


def _rng(cfg: ExperimentConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, salt])


def closed_form_gaussian(z: np.ndarray, t: float) -> np.ndarray:
    """P_0 e^{-zeta^2/2} in one dimension: (2 pi (1 + 2it))^{-1/2} exp(-z^2 / (2 (1 + 2it)))."""
    a = 1.0 + 2j * t
    return np.exp(-z**2 / (2.0 * a)) / np.sqrt(2.0 * math.pi * a)


def _final_slice(initial, grid: Grid, potential: PotentialSpec) -> np.ndarray:
    from .evolution import step_evolve

    psi = initial
    for k in range(grid.M):
        psi = step_evolve(psi, grid.times[k], grid.dt, potential, grid)
    return psi


def random_source(grid: Grid, rng: np.random.Generator) -> SpacetimeField:
    """Smooth source: compact time bump times a modulated spatial Gaussian."""
    tc = rng.uniform(-10.0, 10.0)
    wt = rng.uniform(3.0, 5.0)
    zc = rng.uniform(-5.0, 5.0, size=grid.n)
    sz = rng.uniform(1.0, 3.0)
    k0 = rng.uniform(-2.0, 2.0, size=grid.n)
    phase = complex(rng.normal(), rng.normal())
    r2 = sum((z - c) ** 2 for z, c in zip(grid.z_mesh, zc)) / sz**2
    spatial = phase * np.exp(-r2 / 2.0 + 1j * sum(k * z for k, z in zip(k0, grid.z_mesh)))
    s = (grid.times - tc) / wt
    bump = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    bump[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return SpacetimeField(grid, bump.reshape((-1,) + (1,) * grid.n) * spatial[None])


def _sup_error(est: DataFunction, f: DataFunction) -> float:
    return float(np.abs(est.values - f.on(est.grid).values).max())


# 1, 2 ---------------------------------------------------------------------

def _flow_runs(cfg):
    seeds = flow.random_characteristic_seeds(FLOW_SEEDS, cfg.grid.n, seed=cfg.seed)
    fwd = flow.trace_many(seeds, "forward")
    bwd = flow.trace_many(seeds, "backward")
    return fwd, bwd


def check_flow(cfg, runs=None) -> CriterionResult:
    tol = cfg.tolerances
    fwd, bwd = runs or _flow_runs(cfg)
    wrong = sum(t.endpoint_class is not flow.EndpointClass.PLUS_RADIAL for t in fwd)
    wrong += sum(t.endpoint_class is not flow.EndpointClass.MINUS_RADIAL for t in bwd)
    dist = max(t.final_radial_distance for t in fwd + bwd)
    char = max(t.max_char_violation for t in fwd + bwd)
    ok = wrong == 0 and dist < tol["flow_class"] and char < tol["flow_char"]
    return CriterionResult(1, "flow classification", ok, {
        "trajectories": len(fwd) + len(bwd), "misclassified": wrong,
        "max_final_radial_distance": dist, "max_char_violation": char})


def check_conservation(cfg, runs=None) -> CriterionResult:
    fwd, bwd = runs or _flow_runs(cfg)
    drift = max(t.frequency_drift() for t in fwd + bwd)
    return CriterionResult(2, "Hamilton conservation", drift < cfg.tolerances["flow_conservation"],
                           {"max_frequency_drift": drift})


# 3, 4 ---------------------------------------------------------------------

def check_closed_form(cfg) -> CriterionResult:
    from .evolution import evolve

    g = Grid(1, cfg.grid.L, cfg.grid.N, cfg.grid.t0, cfg.grid.t1, cfg.grid.M)
    u = evolve(closed_form_gaussian(g.z_axis, g.t0), g, PotentialSpec.zero())
    exact = np.stack([closed_form_gaussian(g.z_axis, t) for t in g.times])
    err = float(np.abs(u.values - exact).max())
    base = max(g.M // 4, 50)
    grids = [Grid(1, g.L, g.N, g.t0, g.t1, base * 2**j) for j in range(3)]
    psi0 = closed_form_gaussian(g.z_axis, g.t0)
    finals = [_final_slice(psi0, gr, cfg.potential) for gr in grids]
    d1 = np.linalg.norm(finals[0] - finals[1])
    d2 = np.linalg.norm(finals[1] - finals[2])
    slope = float(math.log2(d1 / d2))
    ok = err < cfg.tolerances["closed_form"] and abs(slope - 2.0) <= cfg.tolerances["order_slope"]
    return CriterionResult(3, "free Gaussian closed form", ok, {
        "sup_error": err, "strang_order": slope, "order_steps": [gr.M for gr in grids]})


def check_unitarity(cfg) -> CriterionResult:
    from .evolution import step_evolve

    g = cfg.grid
    pot = PotentialSpec(amplitude=UNITARITY_AMPLITUDE, center=cfg.potential.center,
                        widths=cfg.potential.widths)
    f = builtin_data("gaussian", g.frequency_grid())
    psi = free_poisson(f, Grid(g.n, g.L, g.N, g.t0, g.t0 + 1.0, 1)).values[0]
    norm0 = prev = float(np.linalg.norm(psi))
    step_drift = 0.0
    for k in range(g.M):
        psi = step_evolve(psi, g.times[k], g.dt, pot, g)
        cur = float(np.linalg.norm(psi))
        step_drift = max(step_drift, abs(cur / prev - 1.0))
        prev = cur
    window = abs(prev / norm0 - 1.0)
    tol = cfg.tolerances
    ok = step_drift < tol["step_drift"] and window < tol["window_drift"]
    return CriterionResult(4, "unitarity", ok, {
        "max_step_drift": step_drift, "window_drift": window, "amplitude": UNITARITY_AMPLITUDE})


# 5 ------------------------------------------------------------------------

def _leakage(u: SpacetimeField, win, forward: bool) -> float:
    amp = np.abs(u.values).reshape(u.values.shape[0], -1).max(axis=1)
    peak = amp.max()
    if forward:
        outside = amp[: max(win[0] - 2, 0)]
    else:
        outside = amp[win[1] + 3:]
    return float(outside.max() / peak) if outside.size else 0.0


def check_propagators(cfg) -> CriterionResult:
    g, pot, tol = cfg.grid, cfg.potential, cfg.tolerances
    rng = _rng(cfg, 5)
    coarse = Grid(g.n, g.L, g.N, g.t0, g.t1, g.M // 2)
    res, leak, slopes = [], [], []
    for _ in range(RANDOM_SOURCES):
        state = rng.bit_generator.state
        v = random_source(g, rng)
        rng2 = np.random.default_rng()
        rng2.bit_generator.state = state
        vc = random_source(coarse, rng2)
        for solver, fwd in ((solve_retarded, True), (solve_advanced, False)):
            u = solver(v, pot)
            r = relative_residual(u, v, pot)
            rc = relative_residual(solver(vc, pot), vc, pot)
            res.append(r)
            slopes.append(math.log2(rc / r))
            leak.append(_leakage(u, support_window(v), fwd))
    ok = (max(res) < tol["residual"] and max(leak) < tol["leakage"]
          and all(abs(s - 2.0) <= tol["residual_slope"] for s in slopes))
    return CriterionResult(5, "retarded/advanced residual", ok, {
        "max_residual": max(res), "max_leakage": max(leak),
        "min_slope": min(slopes), "max_slope": max(slopes)})


# 6, 7 ---------------------------------------------------------------------

def check_extraction(cfg) -> CriterionResult:
    g = cfg.grid
    f = builtin_data("gaussian", g.frequency_grid())
    rep = extract_data(free_poisson(f, g), "+")
    err = _sup_error(rep.limit, f)
    ok = err < cfg.tolerances["extraction"] and rep.fitted_rate > 0
    return CriterionResult(6, "asymptotic extraction", ok, {
        "sup_error": err, "fitted_rate": rep.fitted_rate})


def _random_data_set(cfg, salt, count):
    rng = _rng(cfg, salt)
    full = cfg.grid.frequency_grid()
    return [random_data(full, int(s)) for s in rng.integers(0, 2**31, size=count)]


def check_poisson(cfg) -> CriterionResult:
    g, pot = cfg.grid, cfg.potential
    errs_m, errs_p = [], []
    for f in _random_data_set(cfg, 7, RANDOM_DATA):
        errs_m.append(_sup_error(extract_data(perturbed_poisson(f, "-", pot, g), "-").limit, f))
        errs_p.append(_sup_error(extract_data(perturbed_poisson(f, "+", pot, g), "+").limit, f))
    worst = max(errs_m + errs_p)
    return CriterionResult(7, "Poisson consistency", worst < cfg.tolerances["poisson"], {
        "max_sup_error_minus": max(errs_m), "max_sup_error_plus": max(errs_p)})


# 8 ------------------------------------------------------------------------

def check_scattering(cfg) -> CriterionResult:
    g, pot, tol = cfg.grid, cfg.potential, cfg.tolerances
    f = builtin_data("gaussian", g.frequency_grid())
    s0 = scattering_matrix(f, PotentialSpec.zero(), g)
    fl = f.on(s0.grid)
    free_err = (s0 - fl).l2_norm() / fl.l2_norm()
    sv = scattering_matrix(f, pot, g)
    norm_dev = abs(sv.l2_norm() / fl.l2_norm() - 1.0)
    # Born regime: ||S_eps f - S_0 f|| against eps; subtracting S_0 f removes
    # the common extraction error.
    eps = np.array([pot.amplitude * c for c in BORN_FACTORS])
    diffs = np.array([(scattering_matrix(f, pot.scaled(c), g) - s0).l2_norm()
                      for c in BORN_FACTORS])
    born = float(np.polyfit(np.log(eps), np.log(diffs), 1)[0])
    ok = (free_err < tol["scattering"] and norm_dev < tol["scattering"]
          and abs(born - 1.0) <= tol["born_slope"])
    return CriterionResult(8, "scattering sanity", ok, {
        "free_relative_error": free_err, "norm_deviation": norm_dev, "born_slope": born,
        "born_amplitudes": eps.tolist(), "born_differences": diffs.tolist()})


# 9 ------------------------------------------------------------------------

def _pairing_discrepancies(cfg, grid, salt):
    """Discrepancy |lhs - rhs| / |rhs| for u1 = P_- a, u2 = R^- v on ``grid``.

    Edge data are exact projections at the first and last slice (V vanishes
    there); P u1 = 0 and P u2 = v are known.
    """
    rng = _rng(cfg, salt)
    full = grid.frequency_grid()
    pot = cfg.potential
    out, asym = [], []
    for _ in range(PAIRS):
        a = random_data(full, int(rng.integers(0, 2**31)))
        v = random_source(grid, rng)
        u1 = perturbed_poisson(a, "-", pot, grid)
        u2 = solve_advanced(v, pot)
        zero = SpacetimeField.zeros(grid)
        data = ((exact_data(u1, grid.M), exact_data(u1, 0)),
                (exact_data(u2, grid.M), exact_data(u2, 0)))
        lhs, rhs = pairing_check(u1, u2, data, Pu1=zero, Pu2=v)
        out.append(abs(lhs - rhs) / abs(rhs))
        ext = ((extract_data(u1, "+").limit, extract_data(u1, "-").limit),
               (extract_data(u2, "+").limit, extract_data(u2, "-").limit))
        lhs2, rhs2 = pairing_check(u1, u2, ext, Pu1=zero, Pu2=v)
        asym.append(abs(lhs2 - rhs2) / abs(rhs2))
    return out, asym


def check_pairing(cfg) -> CriterionResult:
    tol = cfg.tolerances
    g = cfg.grid
    coarse = Grid(g.n, g.L, g.N, g.t0, g.t1, g.M // 2)
    d_c, _ = _pairing_discrepancies(cfg, coarse, 9)
    d_f, asym = _pairing_discrepancies(cfg, g, 9)
    ratios = [f / c for f, c in zip(d_f, d_c)]
    ok = max(d_f) < tol["pairing"] and max(ratios) <= tol["pairing_refine_ratio"]
    return CriterionResult(9, "pairing identity", ok, {
        "max_discrepancy": max(d_f), "max_discrepancy_coarse": max(d_c),
        "max_refinement_ratio": max(ratios), "max_discrepancy_extracted_data": max(asym)})


# 10 -----------------------------------------------------------------------

def commutation_grids(cfg):
    """The default grid for the one-dimensional relations and a small 2-d grid for rotations."""
    g = cfg.grid
    g1 = Grid(1, g.L, g.N, g.t0, g.t1, max(g.M // 10, 50))
    g2 = Grid(2, 40.0, 256, -3.0, 3.0, 60)
    return g1, g2


def check_commutation(cfg) -> CriterionResult:
    g1, g2 = commutation_grids(cfg)
    f1 = builtin_data("hermite(1)", g1.frequency_grid()) + builtin_data("gaussian", g1.frequency_grid()) * 1j
    x, y = g2.frequency_grid().mesh
    f2 = DataFunction(g2.frequency_grid(), np.exp(-(x**2 + 2.0 * y**2) / 2.0) * (1 + 0.5j * x + 0.3 * y))
    res = {
        "Galilean2(0)": commutation_residual(GeneratorId(GenKind.GALILEAN2, (0,)), f1, g1),
        "Translation(0)": commutation_residual(GeneratorId(GenKind.TRANSLATION, (0,)), f1, g1),
        "Rotation(0,1)": commutation_residual(GeneratorId(GenKind.ROTATION, (0, 1)), f2, g2),
    }
    ok = max(res.values()) < cfg.tolerances["commutation"]
    return CriterionResult(10, "commutation identities", ok, res)


# 11 -----------------------------------------------------------------------

THRESHOLD_GRID = Grid(1, 1600.0, 4096, 0.0, 200.0, 400)
THRESHOLD_WIDTH = 0.5


def threshold_field() -> SpacetimeField:
    g = THRESHOLD_GRID
    fg = g.frequency_grid()
    f = DataFunction(fg, np.exp(-fg.axis**2 / (2.0 * THRESHOLD_WIDTH**2)))
    return free_poisson(f, g)


def check_threshold(cfg) -> CriterionResult:
    u = threshold_field()
    T = np.geomspace(100.0, 200.0, 9)
    slopes = {str(l): threshold_scan(u, l, T).slope for l in THRESHOLD_LS}
    dev = max(abs(slopes[str(l)] - max(0.0, 2 * l + 1)) for l in THRESHOLD_LS)
    return CriterionResult(11, "threshold law", dev < cfg.tolerances["threshold"], {
        "slopes": slopes, "max_deviation": dev})


# 12 -----------------------------------------------------------------------

def _wk_ratios(cfg, grid, data):
    out = []
    for f in data:
        sf = scattering_matrix(f.on(grid.frequency_grid()), cfg.potential, grid)
        fl = f.on(sf.grid)
        out.append([data_norm_Wk(sf, k) / data_norm_Wk(fl, k) for k in (0, 1, 2)])
    return np.array(out)


def check_wk_stability(cfg) -> CriterionResult:
    data = _random_data_set(cfg, 12, RANDOM_DATA)
    base = _wk_ratios(cfg, cfg.grid, data)
    fine = _wk_ratios(cfg, cfg.grid.refined(2), data)
    change = float(np.max(np.abs(fine / base - 1.0)))
    finite = bool(np.all(np.isfinite(base)) and np.all(np.isfinite(fine)))
    ok = finite and change <= cfg.tolerances["wk_stability"]
    return CriterionResult(12, "W^k stability of S", ok, {
        "max_ratio": [float(x) for x in base.max(axis=0)],
        "min_ratio": [float(x) for x in base.min(axis=0)],
        "max_refinement_change": change})


# 13 -----------------------------------------------------------------------

def check_determinism(cfg, first: list[CriterionResult]) -> CriterionResult:
    second = run_checks(cfg)
    same = all(a.metrics == b.metrics and a.passed == b.passed for a, b in zip(first, second))
    diff = [a.id for a, b in zip(first, second) if a.metrics != b.metrics]
    return CriterionResult(13, "determinism", same, {"differing_criteria": diff})


def run_checks(cfg: ExperimentConfig) -> list[CriterionResult]:
    """Criteria 1 to 12."""
    results = []
    runs = None

    def timed(fn, *args):
        t = time.perf_counter()
        r = fn(*args)
        r.seconds = time.perf_counter() - t
        log.info("%s (%.1f s)", r.line(), r.seconds)
        return r

    def flow_both(c):
        nonlocal runs
        runs = _flow_runs(c)
        return check_flow(c, runs)

    results.append(timed(flow_both, cfg))
    results.append(timed(check_conservation, cfg, runs))
    for fn in (check_closed_form, check_unitarity, check_propagators, check_extraction,
               check_poisson, check_scattering, check_pairing, check_commutation,
               check_threshold, check_wk_stability):
        results.append(timed(fn, cfg))
    return results


def run_all(cfg: ExperimentConfig, determinism: bool = True) -> list[CriterionResult]:
    results = run_checks(cfg)
    if determinism:
        t = time.perf_counter()
        r = check_determinism(cfg, results)
        r.seconds = time.perf_counter() - t
        results.append(r)
    return results


def summary_table(results: list[CriterionResult]) -> str:
    lines = [f"{'id':>3}  {'criterion':<28} {'result':<6} {'time/s':>7}"]
    for r in results:
        lines.append(f"{r.id:>3}  {r.name:<28} {'PASS' if r.passed else 'FAIL':<6} {r.seconds:>7.1f}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)
