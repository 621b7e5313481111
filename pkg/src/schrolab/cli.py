"""Command-line experiment runner.

    schrolab [EXPERIMENT] [--config PATH] [--experiment NAME] [--out DIR]
             [--seed N] [--refine K]

Values from the config file override the defaults and flags override both.
The exit code is 0 when every criterion of the selected experiment passes,
1 when some fail and 2 for an invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import flow, verify
from .config import EXPERIMENTS, ExperimentConfig, cone_check, load_config, resolve_data, validate
from .errors import ConfigInvalid, SchrolabError
from .evolution import relative_residual, solve_retarded, support_window
from .io import write_field
from .regularity import (
    GeneratorId,
    commutation_residual,
    data_norm_Wk,
    module_norm,
    parabolic_norm,
    threshold_scan,
)
from .scattering import extract_data, free_poisson, perturbed_poisson

log = logging.getLogger("schrolab")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialise {type(x).__name__}")


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _report(cfg, out: Path, criteria: list[dict], extra: dict | None = None,
            timing: dict | None = None) -> bool:
    passed = all(c["passed"] for c in criteria)
    report = {"inputs": cfg.to_dict(), "experiment": cfg.experiment, "criteria": criteria,
              "passed": passed}
    if extra:
        report["metrics"] = extra
    if timing:
        report["timing_seconds"] = timing
    write_json(out / "report.json", report)
    return passed


def run_flow(cfg: ExperimentConfig, out: Path) -> bool:
    n = cfg.grid.n
    seeds = flow.random_characteristic_seeds(cfg.flow.seeds, n, seed=cfg.seed)
    want = (flow.EndpointClass.PLUS_RADIAL if cfg.flow.direction == "forward"
            else flow.EndpointClass.MINUS_RADIAL)
    summaries = []
    header = (["seed_id", "s"] + [f"z{i}" for i in range(n)] + ["t"]
              + [f"zeta{i}" for i in range(n)] + ["tau", "rho_base", "dist_plus", "dist_minus"])
    with open(out / "trajectories.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, seed in enumerate(seeds):
            tr = flow.trace_bicharacteristic(seed, cfg.flow.direction, rho_stop=cfg.flow.rho_stop,
                                             class_tol=cfg.flow.class_tol)
            rb = tr.rho_base_curve()
            for k in range(len(tr.s)):
                w.writerow([i, repr(float(tr.s[k]))] + [repr(float(x)) for x in tr.states[k]]
                           + [repr(float(rb[k])), repr(float(tr.dist_plus[k])),
                              repr(float(tr.dist_minus[k]))])
            summaries.append({
                "seed_id": i, "seed": tr.samples[0][1].as_array().tolist(),
                "endpoint_class": tr.endpoint_class.value,
                "final_radial_distance": tr.final_radial_distance,
                "max_char_violation": tr.max_char_violation,
                "frequency_drift": tr.frequency_drift(), "samples": len(tr.s),
                "rho_base_monotone": bool(np.all(np.diff(rb) < 0)),
                # d<Z>^2/ds has the sign of t + 2 z.zeta, so rho_base rises until closest approach.
                "rho_base_monotone_after_closest_approach": bool(np.all(np.diff(rb[np.argmax(rb):]) < 0)),
            })
    write_json(out / "flow_summary.json", summaries)
    crit = [{"name": "endpoint class", "passed": all(s["endpoint_class"] == want.value for s in summaries)},
            {"name": "rho_base monotone after closest approach",
             "passed": all(s["rho_base_monotone_after_closest_approach"] for s in summaries)}]
    return _report(cfg, out, crit, {"trajectories": summaries})


def run_solve(cfg: ExperimentConfig, out: Path) -> bool:
    rng = np.random.default_rng([cfg.seed, 5])
    v = verify.random_source(cfg.grid, rng)
    u = solve_retarded(v, cfg.potential)
    res = relative_residual(u, v, cfg.potential)
    leak = verify._leakage(u, support_window(v), True)
    write_field(out / "source.c64", v)
    write_field(out / "solution.c64", u)
    tol = cfg.tolerances
    crit = [{"name": "residual", "value": res, "passed": res < tol["residual"]},
            {"name": "support leakage", "value": leak, "passed": leak < tol["leakage"]}]
    return _report(cfg, out, crit)


def run_scatter(cfg: ExperimentConfig, out: Path) -> bool:
    f = resolve_data(cfg)
    cone_check(cfg.grid, f)
    u = perturbed_poisson(f, "-", cfg.potential, cfg.grid)
    plus = extract_data(u, "+")
    minus = extract_data(u, "-")
    fl = f.on(plus.limit.grid)
    ratio = plus.limit.l2_norm() / fl.l2_norm()
    res = _poisson_residual(u, cfg)
    write_field(out / "f_plus.c64", plus.limit)
    tol = cfg.tolerances
    recovered = float(np.abs(minus.limit.values - f.on(minus.limit.grid).values).max())
    crit = [{"name": "Poisson residual", "value": res, "passed": res < tol["residual"]},
            {"name": "incoming data recovered", "value": recovered,
             "passed": recovered < tol["poisson"]}]
    if cfg.potential.is_real:
        crit.append({"name": "norm ratio", "value": ratio,
                     "passed": abs(ratio - 1.0) < tol["scattering"]})
    extra = {"norm_ratio": ratio, "fitted_rate_plus": plus.fitted_rate,
             "fitted_rate_minus": minus.fitted_rate, "residual_curve_plus": plus.residual_curve}
    return _report(cfg, out, crit, extra)


def _poisson_residual(u, cfg) -> float:
    """||P u|| / ||u|| on interior slices."""
    from .evolution import ONE_SIDED_SLICES, apply_P

    pu = apply_P(u, cfg.potential).values[ONE_SIDED_SLICES:-ONE_SIDED_SLICES]
    return float(np.linalg.norm(pu) / np.linalg.norm(u.values[ONE_SIDED_SLICES:-ONE_SIDED_SLICES]))


def run_norms(cfg: ExperimentConfig, out: Path) -> bool:
    f = resolve_data(cfg)
    cone_check(cfg.grid, f)
    g = cfg.grid
    u = free_poisson(f, g)
    o = cfg.orders
    sub = g.frequency_subgrid(g.L / (2.0 * max(abs(g.t0), abs(g.t1))))
    metrics = {
        "taper": {"kind": "tukey", "alpha": 0.2},
        "parabolic_norm": parabolic_norm(u, o.s, o.l),
        "module_norm": module_norm(u, o, "+"),
        "data_norm_Wk": {str(k): data_norm_Wk(f.on(sub), int(k)) for k in cfg.norms.wk},
    }
    t_hi = g.t1
    if t_hi <= 2.0:
        raise ConfigInvalid("threshold scan needs t1 > 2")
    T = np.geomspace(t_hi / 2.0, t_hi, 9)
    slopes = {}
    with open(out / "threshold_curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["l", "T", "I"])
        for l in cfg.norms.threshold_l:
            scan = threshold_scan(u, float(l), T)
            slopes[str(l)] = scan.slope
            for t, i in zip(scan.T, scan.I):
                w.writerow([l, repr(float(t)), repr(float(i))])
    metrics["threshold_slopes"] = slopes
    comm = {name: commutation_residual(GeneratorId.parse(name), f, g) for name in cfg.norms.generators}
    metrics["commutation_residuals"] = comm
    write_json(out / "norms.json", metrics)
    tol = cfg.tolerances["commutation"]
    crit = [{"name": f"commutation {k}", "value": v, "passed": v < tol} for k, v in comm.items()]
    return _report(cfg, out, crit, metrics)


def run_verify(cfg: ExperimentConfig, out: Path) -> bool:
    results = verify.run_all(cfg)
    print(verify.summary_table(results))
    crit = [{"id": r.id, "name": r.name, "passed": r.passed, "metrics": r.metrics} for r in results]
    timing = {str(r.id): r.seconds for r in results}
    (out / "summary.txt").write_text(verify.summary_table(results) + "\n")
    return _report(cfg, out, crit, timing=timing)


RUNNERS = {"flow": run_flow, "solve": run_solve, "scatter": run_scatter, "norms": run_norms,
           "verify-all": run_verify}


def run(cfg: ExperimentConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        ok = RUNNERS[cfg.experiment](cfg, out)
    except ConfigInvalid:
        raise
    except SchrolabError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        _report(cfg, out, [{"name": "run", "passed": False, "error": f"{type(exc).__name__}: {exc}"}])
        return 1
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schrolab", description=__doc__.splitlines()[0])
    p.add_argument("experiment_pos", nargs="?", choices=EXPERIMENTS, metavar="EXPERIMENT",
                   help="one of: " + ", ".join(EXPERIMENTS))
    p.add_argument("--config", type=Path, help="YAML experiment configuration")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--refine", type=int, default=0, help="double the time steps K times")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def configure(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config is not None else ExperimentConfig()
    exp = args.experiment or args.experiment_pos
    if exp:
        cfg = replace(cfg, experiment=exp)
    if args.out is not None:
        cfg = replace(cfg, output_dir=str(args.out))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.refine:
        cfg = cfg.refined(args.refine)
    validate(cfg)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = configure(args)
        return run(cfg)
    except ConfigInvalid as exc:
        print(f"schrolab: invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
