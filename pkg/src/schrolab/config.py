"""Experiment configuration: YAML files with a versioned, closed schema."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from scipy.special import eval_hermite

from .errors import ConfigInvalid
from .grid import DataFunction, FrequencyGrid, Grid, PotentialKind, PotentialSpec
from .regularity import NormOrder

SCHEMA_VERSION = 1
EXPERIMENTS = ("flow", "solve", "scatter", "norms", "verify-all")
# Relative amplitude below which data and fields count as absent (cone check).
NEGLIGIBLE = 1e-8

DEFAULT_TOLERANCES = {
    "flow_class": 1e-4,
    "flow_char": 1e-8,
    "flow_conservation": 1e-10,
    "closed_form": 1e-8,
    "order_slope": 0.1,
    "step_drift": 1e-12,
    "window_drift": 1e-10,
    "residual": 1e-3,
    "leakage": 1e-8,
    "residual_slope": 0.2,
    "extraction": 1e-3,
    "poisson": 1e-3,
    "scattering": 1e-3,
    "born_slope": 0.1,
    "pairing": 1e-2,
    "pairing_refine_ratio": 0.5,
    "commutation": 1e-6,
    "threshold": 0.1,
    "wk_stability": 0.1,
}

_TOP_KEYS = {"schema_version", "experiment", "seed", "output_dir", "grid", "potential", "data",
             "orders", "tolerances", "flow", "norms"}
_GRID_KEYS = {"n", "L", "N", "t0", "t1", "M"}
_POT_KEYS = {"kind", "amplitude", "center", "widths", "complex_part"}
_ORDER_KEYS = {"s", "l", "kappa", "k"}
_FLOW_KEYS = {"seeds", "direction", "rho_stop", "class_tol"}
_NORMS_KEYS = {"generators", "threshold_l", "wk"}


@dataclass
class FlowOptions:
    seeds: int = 1
    direction: str = "forward"
    rho_stop: float = 1e-6
    class_tol: float = 1e-4


@dataclass
class NormsOptions:
    generators: list = field(default_factory=lambda: ["Galilean2(0)", "Translation(0)"])
    threshold_l: list = field(default_factory=lambda: [-1.0, -0.75, -0.25, 0.0])
    wk: list = field(default_factory=lambda: [0, 1, 2])


@dataclass
class ExperimentConfig:
    experiment: str = "verify-all"
    grid: Grid = field(default_factory=Grid)
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    data: str = "gaussian"
    orders: NormOrder = field(default_factory=lambda: NormOrder(0.0, 0.0, 0, 1))
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: str = "out"
    seed: int = 0
    flow: FlowOptions = field(default_factory=FlowOptions)
    norms: NormsOptions = field(default_factory=NormsOptions)

    def to_dict(self) -> dict:
        zc, tc = self.potential.center
        sz, st = self.potential.widths
        g = self.grid
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "grid": {"n": g.n, "L": g.L, "N": g.N, "t0": g.t0, "t1": g.t1, "M": g.M},
            "potential": {
                "kind": self.potential.kind.value,
                "amplitude": self.potential.amplitude,
                "center": {"z": list(zc), "t": tc},
                "widths": {"z": sz, "t": st},
                "complex_part": self.potential.complex_part,
            },
            "data": self.data,
            "orders": {"s": self.orders.s, "l": self.orders.l,
                       "kappa": self.orders.kappa, "k": self.orders.k},
            "tolerances": dict(self.tolerances),
            "flow": vars(self.flow).copy(),
            "norms": {k: list(v) for k, v in vars(self.norms).items()},
        }

    def refined(self, times: int) -> "ExperimentConfig":
        """Copy with the number of time steps doubled ``times`` times."""
        if times < 0:
            raise ConfigInvalid("--refine must be non-negative")
        grid = self.grid
        for _ in range(times):
            grid = grid.refined(2)
        return replace(self, grid=grid)


def _check_keys(section: str, given: dict, allowed: set):
    if not isinstance(given, dict):
        raise ConfigInvalid(f"'{section}' must be a mapping")
    unknown = set(given) - allowed
    if unknown:
        raise ConfigInvalid(f"unknown key(s) in '{section}': {', '.join(sorted(unknown))}")


def _build(cls, section, raw, allowed, **conv):
    _check_keys(section, raw, allowed)
    try:
        return cls(**{k: conv.get(k, lambda x: x)(v) for k, v in raw.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"invalid '{section}': {exc}") from None


def _potential(raw: dict) -> PotentialSpec:
    _check_keys("potential", raw, _POT_KEYS)
    kw: dict[str, Any] = {}
    try:
        if "kind" in raw:
            kw["kind"] = PotentialKind(raw["kind"])
        for key in ("amplitude", "complex_part"):
            if key in raw:
                kw[key] = float(raw[key])
        if "center" in raw:
            c = raw["center"]
            _check_keys("potential.center", c, {"z", "t"})
            kw["center"] = (tuple(c.get("z", [0.0])), float(c.get("t", 0.0)))
        if "widths" in raw:
            w = raw["widths"]
            _check_keys("potential.widths", w, {"z", "t"})
            kw["widths"] = (float(w.get("z", 3.0)), float(w.get("t", 3.0)))
        return PotentialSpec(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"invalid 'potential': {exc}") from None


def parse_config(raw) -> ExperimentConfig:
    """Validate a parsed YAML document and build an :class:`ExperimentConfig`."""
    if not raw:
        raise ConfigInvalid("configuration is empty")
    if not isinstance(raw, dict):
        raise ConfigInvalid("configuration must be a mapping at the top level")
    _check_keys("top level", raw, _TOP_KEYS)
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigInvalid(f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    if "experiment" not in raw:
        raise ConfigInvalid("missing required key 'experiment'")
    exp = raw["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigInvalid(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")
    cfg = ExperimentConfig(experiment=exp)
    if "grid" in raw:
        cfg.grid = _build(Grid, "grid", raw["grid"], _GRID_KEYS,
                          n=int, N=int, M=int, L=float, t0=float, t1=float)
    if "potential" in raw:
        cfg.potential = _potential(raw["potential"])
    if "data" in raw:
        cfg.data = str(raw["data"])
    if "orders" in raw:
        cfg.orders = _build(NormOrder, "orders", raw["orders"], _ORDER_KEYS,
                            kappa=int, k=int, s=float, l=float)
    if "tolerances" in raw:
        _check_keys("tolerances", raw["tolerances"], set(DEFAULT_TOLERANCES))
        cfg.tolerances.update({k: float(v) for k, v in raw["tolerances"].items()})
    if "flow" in raw:
        cfg.flow = _build(FlowOptions, "flow", raw["flow"], _FLOW_KEYS)
    if "norms" in raw:
        cfg.norms = _build(NormsOptions, "norms", raw["norms"], _NORMS_KEYS)
    for key in ("seed", "output_dir"):
        if key in raw:
            setattr(cfg, key, int(raw[key]) if key == "seed" else str(raw[key]))
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"{path} is not valid YAML: {exc}") from None
    return parse_config(raw)


_BUILTIN = re.compile(r"^(gaussian|hermite\((\d+)\)|random\((\d+)\))$")


def random_data(grid: FrequencyGrid, seed: int, bumps: int = 3) -> DataFunction:
    """Seeded sum of complex Gaussians, normalised to sup 1.

    Centres lie in [-1, 1]^n and widths in [0.9, 1.3].  The c0 + c1/t
    extraction error scales like width^-4, which sets the lower width bound.
    """
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.shape, dtype=complex)
    for _ in range(bumps):
        mu = rng.uniform(-1.0, 1.0, size=grid.n)
        sigma = rng.uniform(0.9, 1.3)
        coef = complex(rng.normal(), rng.normal())
        r2 = sum((m - c) ** 2 for m, c in zip(grid.mesh, mu))
        vals += coef * np.exp(-r2 / (2.0 * sigma**2))
    return DataFunction(grid, vals / np.abs(vals).max())


def builtin_data(spec: str, grid: FrequencyGrid, seed: int = 0) -> DataFunction:
    """'gaussian', 'hermite(m)' or 'random(s)' sampled on ``grid``."""
    m = _BUILTIN.match(spec.strip())
    if m is None:
        raise ConfigInvalid(f"unknown builtin data {spec!r}")
    r2 = sum(x**2 for x in grid.mesh)
    if m.group(1) == "gaussian":
        return DataFunction(grid, np.exp(-r2 / 2.0))
    if m.group(2) is not None:
        order = int(m.group(2))
        vals = eval_hermite(order, grid.mesh[0]) * np.exp(-r2 / 2.0)
        return DataFunction(grid, vals / np.abs(vals).max())
    return random_data(grid, int(m.group(3)))


def resolve_data(cfg: ExperimentConfig) -> DataFunction:
    """The configured data function on the full frequency grid of ``cfg.grid``."""
    from .io import read_field

    full = cfg.grid.frequency_grid()
    if _BUILTIN.match(cfg.data.strip()):
        return builtin_data(cfg.data, full, cfg.seed)
    try:
        f = read_field(cfg.data)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigInvalid(f"data {cfg.data!r} is neither a builtin nor a readable field: {exc}") from None
    if not isinstance(f, DataFunction):
        raise ConfigInvalid(f"{cfg.data} does not hold a data function")
    return f.on(full)


def cone_check(grid: Grid, f: DataFunction) -> tuple[float, float]:
    """Effective frequency and spatial extent of P_0 f; raises if the cone leaves the box.

    Requires z_support + 2 zeta_support max|t| <= L so that wrap-around stays
    below ``NEGLIGIBLE``.
    """
    g = f.on(grid.frequency_grid())
    amp = np.abs(g.values)
    peak = amp.max()
    if peak == 0:
        return 0.0, 0.0
    big = amp > NEGLIGIBLE * peak
    zeta_r = np.sqrt(sum(m**2 for m in g.grid.mesh))
    zeta_sup = float(zeta_r[big].max())
    from .scattering import free_poisson

    u0 = free_poisson(g, Grid(grid.n, grid.L, grid.N, 0.0, 1.0, 1)).values[0]
    z_r = np.sqrt(sum(z**2 for z in grid.z_mesh))
    a = np.abs(u0)
    z_sup = float(z_r[a > NEGLIGIBLE * a.max()].max())
    tmax = max(abs(grid.t0), abs(grid.t1))
    if z_sup + 2.0 * zeta_sup * tmax > grid.L:
        raise ConfigInvalid(
            f"dispersive cone leaves the box: z_support {z_sup:.3g} + 2*{zeta_sup:.3g}*{tmax:g} "
            f"> L = {grid.L:g}"
        )
    return zeta_sup, z_sup


def validate(cfg: ExperimentConfig):
    """Checks that need more than one section: potential inside the window and the cone bound."""
    g = cfg.grid
    if not cfg.potential.is_zero:
        lo, hi = cfg.potential.time_support(1e-16)
        if lo <= g.t0 + 2 * g.dt or hi >= g.t1 - 2 * g.dt:
            raise ConfigInvalid("the potential must vanish near both ends of the time window")
        if len(cfg.potential.center[0]) not in (1, g.n):
            raise ConfigInvalid("potential centre dimension does not match the grid")
    if cfg.flow.direction not in ("forward", "backward"):
        raise ConfigInvalid("flow.direction must be 'forward' or 'backward'")
    if cfg.flow.seeds < 1:
        raise ConfigInvalid("flow.seeds must be >= 1")
    if cfg.experiment in ("scatter", "norms"):
        cone_check(g, resolve_data(cfg))
    if not math.isfinite(cfg.orders.s) or not math.isfinite(cfg.orders.l):
        raise ConfigInvalid("orders must be finite")
