"""Rescaled Hamilton flow of p = tau + |zeta|^2 and classification of its limits.

The rescaled field rho_fib * rho_base^{-1} * H_p reaches spacetime infinity
only as the parameter s -> infinity, so trajectories are integrated until
rho_base falls below ``rho_stop`` and then classified by their distance to
the radial sets R_+ (sink) and R_- (source).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import RK45

from .errors import ChartUndefined, NoConvergence, NotCharacteristic
from .phase_space import (
    FLAT,
    MetricSpec,
    PhasePoint,
    chart_valid,
    radial_distance,
    rho_base,
    rho_fib,
    select_chart,
    symbol_p,
    try_radial_distance,
)

log = logging.getLogger(__name__)

RHO_STOP = 1e-6
CLASS_TOL = 1e-4
CHAR_TOL = 1e-10
MAX_STEPS = 20000


class EndpointClass(str, Enum):
    PLUS_RADIAL = "PlusRadial"
    MINUS_RADIAL = "MinusRadial"
    UNDETERMINED = "Undetermined"


def hamilton_field(point: PhasePoint, metric: MetricSpec = FLAT) -> np.ndarray:
    """H_p = d/dt + 2 zeta . d/dz as the vector (dz, dt, dzeta, dtau)."""
    n = point.n
    out = np.zeros(2 * n + 2)
    out[:n] = 2.0 * np.asarray(point.zeta)
    out[n] = 1.0
    return out


def rescale_factor(point: PhasePoint) -> float:
    return rho_fib(point.zeta, point.tau) / rho_base(point.z, point.t)


def rescaled_field(point: PhasePoint, metric: MetricSpec = FLAT) -> np.ndarray:
    """rho_fib * rho_base^{-1} * H_p."""
    return rescale_factor(point) * hamilton_field(point, metric)


def _field_array(y: np.ndarray, n: int) -> np.ndarray:
    # Array version of rescaled_field for the integrator's inner loop.
    z, t, zeta, tau = y[:n], y[n], y[n + 1:2 * n + 1], y[2 * n + 1]
    z2 = float(zeta @ zeta)
    scale = (1.0 + z2 * z2 + tau * tau) ** -0.25 * math.sqrt(1.0 + float(z @ z) + t * t)
    out = np.zeros_like(y)
    out[:n] = 2.0 * scale * zeta
    out[n] = scale
    return out


def dopri45(fun, y0, h0, rtol, atol, max_steps, stop):
    """Adaptive Dormand-Prince 5(4) integration from s = 0 (scipy's RK45 stepper).

    ``stop(y)`` ends the integration after an accepted step.  Returns the
    accepted (s, y) samples and a flag telling whether ``stop`` fired.
    """
    solver = RK45(lambda _s, y: fun(y), 0.0, np.asarray(y0, dtype=float), math.inf,
                  first_step=h0, rtol=rtol, atol=atol)
    ss, ys = [0.0], [solver.y.copy()]
    for _ in range(max_steps):
        msg = solver.step()
        if solver.status == "failed":
            log.warning("RK45 step failed: %s", msg)
            break
        ss.append(solver.t)
        ys.append(solver.y.copy())
        if stop(solver.y):
            return np.array(ss), np.array(ys), True
    return np.array(ss), np.array(ys), False


@dataclass
class Trajectory:
    """Sampled bicharacteristic.

    ``states`` has one row (z, t, zeta, tau) per parameter value in ``s``.
    ``dist_plus``/``dist_minus`` are the radial distances at every sample
    (inf where no chart applies).
    """

    s: np.ndarray
    states: np.ndarray
    n: int
    direction: str
    endpoint_class: EndpointClass = EndpointClass.UNDETERMINED
    max_char_violation: float = 0.0
    final_radial_distance: float = math.inf
    dist_plus: np.ndarray = field(default_factory=lambda: np.empty(0))
    dist_minus: np.ndarray = field(default_factory=lambda: np.empty(0))
    reached_infinity: bool = False

    @property
    def samples(self) -> list[tuple[float, PhasePoint]]:
        return [(float(s), PhasePoint.from_array(y, self.n)) for s, y in zip(self.s, self.states)]

    @property
    def final(self) -> PhasePoint:
        return PhasePoint.from_array(self.states[-1], self.n)

    def rho_base_curve(self) -> np.ndarray:
        return np.array([rho_base(y[:self.n], y[self.n]) for y in self.states])

    def frequency_drift(self) -> float:
        """max |(zeta, tau)(s) - (zeta, tau)(0)| over the samples."""
        fib = self.states[:, self.n + 1:]
        return float(np.max(np.abs(fib - fib[0])))


def path_distances(points: list[PhasePoint], sign) -> np.ndarray:
    """Radial distances along a path, in the endpoint's chart wherever it is valid.

    Polar and equatorial distances differ by bounded factors, so switching
    charts mid-path would make the curve jump; the endpoint chart is kept for
    as long as it applies.
    """
    try:
        chart = select_chart(points[-1], sign)
    except ChartUndefined:
        chart = None
    out = np.empty(len(points))
    for i, p in enumerate(points):
        if chart is not None and chart_valid(p, chart):
            out[i] = radial_distance(p, sign, chart)
        else:
            out[i] = try_radial_distance(p, sign)
    return out


def _direction_sign(direction) -> int:
    if direction in ("forward", "+", 1):
        return 1
    if direction in ("backward", "-", -1):
        return -1
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def classify_endpoint(traj: Trajectory, class_tol: float = CLASS_TOL) -> EndpointClass:
    """Threshold the radial distances of the final sample."""
    final = traj.final
    dp = try_radial_distance(final, "+")
    dm = try_radial_distance(final, "-")
    if dp < class_tol and dp <= dm:
        return EndpointClass.PLUS_RADIAL
    if dm < class_tol:
        return EndpointClass.MINUS_RADIAL
    return EndpointClass.UNDETERMINED


def trace_bicharacteristic(seed: PhasePoint, direction="forward", rho_stop: float = RHO_STOP,
                           max_steps: int = MAX_STEPS, rtol: float = 1e-10, atol: float = 1e-12,
                           char_tol: float = CHAR_TOL, class_tol: float = CLASS_TOL,
                           metric: MetricSpec = FLAT) -> Trajectory:
    """Integrate the rescaled field from ``seed`` until rho_base < ``rho_stop``.

    Raises
    ------
    NotCharacteristic
        If |p(seed)| > char_tol.
    NoConvergence
        If ``max_steps`` run out and the endpoint is still undetermined.
    """
    sgn = _direction_sign(direction)
    if abs(symbol_p(seed, metric)) > char_tol:
        raise NotCharacteristic(f"|p(seed)| = {abs(symbol_p(seed, metric)):.3e} > {char_tol:g}")
    n = seed.n
    y0 = seed.as_array()

    def fun(y):
        return sgn * _field_array(y, n)

    def stop(y):
        return 1.0 / math.sqrt(1.0 + float(y[:n] @ y[:n]) + y[n] ** 2) < rho_stop

    ss, ys, reached = dopri45(fun, y0, 1e-2, rtol, atol, max_steps, stop)
    pts = [PhasePoint.from_array(y, n) for y in ys]
    traj = Trajectory(
        s=ss,
        states=ys,
        n=n,
        direction="forward" if sgn > 0 else "backward",
        max_char_violation=max(abs(symbol_p(p)) for p in pts),
        dist_plus=path_distances(pts, "+"),
        dist_minus=path_distances(pts, "-"),
        reached_infinity=reached,
    )
    traj.endpoint_class = classify_endpoint(traj, class_tol)
    if traj.endpoint_class is EndpointClass.PLUS_RADIAL:
        traj.final_radial_distance = float(traj.dist_plus[-1])
    elif traj.endpoint_class is EndpointClass.MINUS_RADIAL:
        traj.final_radial_distance = float(traj.dist_minus[-1])
    else:
        traj.final_radial_distance = float(min(traj.dist_plus[-1], traj.dist_minus[-1]))
        if not reached:
            raise NoConvergence(
                f"max_steps={max_steps} exhausted before rho_base < {rho_stop:g}", trajectory=traj
            )
    return traj


def random_characteristic_seeds(count: int, n: int = 1, seed: int = 0,
                                zeta_range=(0.3, 2.0), z_scale: float = 5.0,
                                t_scale: float = 5.0) -> list[PhasePoint]:
    """Seeds with |zeta| uniform in ``zeta_range`` and tau = -|zeta|^2."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = rng.normal(size=n)
        d /= np.linalg.norm(d)
        zeta = d * rng.uniform(*zeta_range)
        z = rng.uniform(-z_scale, z_scale, size=n)
        t = rng.uniform(-t_scale, t_scale)
        out.append(PhasePoint(tuple(z), t, tuple(zeta), -float(zeta @ zeta)))
    return out


def trace_many(seeds, direction="forward", executor=None, **opts) -> list[Trajectory]:
    """Trace each seed independently; ``executor`` (e.g. a process pool) is optional."""
    if executor is None:
        return [trace_bicharacteristic(s, direction, **opts) for s in seeds]
    futures = [executor.submit(trace_bicharacteristic, s, direction, **opts) for s in seeds]
    return [f.result() for f in futures]
