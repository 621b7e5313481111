"""Weights, compactification charts and radial-set geometry for p = tau + |zeta|^2.

Phase space points are (z, t, zeta, tau).  Spacetime infinity is described by
three charts:

* north/south polar (|t| >= |z|/3): w = z/|t|, rho_b = 1/|t|;
* equatorial (|t| <= 2|z|/3): with j the dominant index of z,
  rho_b = 1/|z_j|, s = t/|z_j|, v_i = z_i/z_j, and fibre coordinates
  rho_f = +-1/(sgn(z_j) zeta_j), omega_i = zeta_i/zeta_j, sigma = tau/|zeta|^2.

Distances to the radial sets are Euclidean in chart coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ChartUndefined

# Polar charts need |t| >= POLAR_MIN |z|, the equatorial chart |t| <= EQUATORIAL_MAX |z|.
POLAR_MIN = 1.0 / 3.0
EQUATORIAL_MAX = 2.0 / 3.0
# Preferred chart switch inside the overlap.
HANDOFF = 0.5


@dataclass(frozen=True)
class PhasePoint:
    z: tuple
    t: float
    zeta: tuple
    tau: float

    def __post_init__(self):
        z = tuple(float(x) for x in np.atleast_1d(self.z))
        zeta = tuple(float(x) for x in np.atleast_1d(self.zeta))
        if len(z) < 1 or len(z) != len(zeta):
            raise ValueError("z and zeta must have the same length n >= 1")
        vals = z + zeta + (float(self.t), float(self.tau))
        if not all(math.isfinite(x) for x in vals):
            raise ValueError("phase-space coordinates must be finite")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def n(self) -> int:
        return len(self.z)

    def as_array(self) -> np.ndarray:
        return np.array(self.z + (self.t,) + self.zeta + (self.tau,))

    @classmethod
    def from_array(cls, y, n: int) -> "PhasePoint":
        y = np.asarray(y, dtype=float)
        return cls(tuple(y[:n]), y[n], tuple(y[n + 1:2 * n + 1]), y[2 * n + 1])

    @classmethod
    def from_polar(cls, w, rho_b: float, zeta, tau: float, sign: int = 1) -> "PhasePoint":
        """Interior point with polar chart coordinates (w, rho_b) over the given hemisphere."""
        if not rho_b > 0:
            raise ValueError("rho_b must be positive for an interior point")
        t = sign / rho_b
        return cls(tuple(np.asarray(w, dtype=float) * abs(t)), t, zeta, tau)


class Chart(str, Enum):
    NORTH_POLAR = "north_polar"
    SOUTH_POLAR = "south_polar"
    EQUATORIAL = "equatorial"


@dataclass(frozen=True)
class BoundaryChartPoint:
    chart: Chart
    rho_base: float
    rho_fib: float
    angular_base: tuple
    angular_fib: tuple


@dataclass(frozen=True)
class MetricSpec:
    """Spatial metric; only the flat metric delta^{ij} is supported."""

    kind: str = "flat"
    dimension: int = 1

    def __post_init__(self):
        if self.kind != "flat":
            raise NotImplementedError("only the flat metric is supported")


FLAT = MetricSpec()


def fiber_weight(zeta, tau: float) -> float:
    """R = (|zeta|^4 + tau^2)^(1/4), homogeneous of degree 1 under (c zeta, c^2 tau)."""
    z2 = float(np.sum(np.square(zeta)))
    # hypot avoids under/overflow of |zeta|^4.
    return math.sqrt(math.hypot(z2, tau))


def rho_base(z, t: float) -> float:
    """(1 + |z|^2 + t^2)^(-1/2)."""
    return 1.0 / math.sqrt(1.0 + float(np.sum(np.square(z))) + t * t)


def rho_fib(zeta, tau: float) -> float:
    """(1 + R^4)^(-1/4)."""
    z2 = float(np.sum(np.square(zeta)))
    return (1.0 + z2 * z2 + tau * tau) ** -0.25


def symbol_p(point: PhasePoint, metric: MetricSpec = FLAT) -> float:
    """Principal symbol tau + |zeta|^2."""
    return point.tau + float(np.sum(np.square(point.zeta)))


def _signed(sign) -> int:
    if sign in ("+", 1, +1):
        return 1
    if sign in ("-", -1):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def chart_valid(point: PhasePoint, chart: Chart) -> bool:
    znorm = math.sqrt(float(np.sum(np.square(point.z))))
    t = point.t
    if chart is Chart.NORTH_POLAR:
        return t > 0 and t >= POLAR_MIN * znorm
    if chart is Chart.SOUTH_POLAR:
        return t < 0 and -t >= POLAR_MIN * znorm
    return znorm > 0 and abs(t) <= EQUATORIAL_MAX * znorm


def select_chart(point: PhasePoint, sign) -> Chart:
    """Chart used for distances to R_sign.

    R_+ lies over the closed northern hemisphere, R_- over the southern one, so
    only the matching polar chart or the equatorial chart can be used.
    """
    s = _signed(sign)
    polar = Chart.NORTH_POLAR if s > 0 else Chart.SOUTH_POLAR
    znorm = math.sqrt(float(np.sum(np.square(point.z))))
    p_ok = chart_valid(point, polar)
    e_ok = chart_valid(point, Chart.EQUATORIAL)
    if p_ok and e_ok:
        return polar if abs(point.t) >= HANDOFF * znorm else Chart.EQUATORIAL
    if p_ok:
        return polar
    if e_ok:
        return Chart.EQUATORIAL
    raise ChartUndefined(f"no chart near R_{'+' if s > 0 else '-'} contains {point}")


def to_chart(point: PhasePoint, chart: Chart, sign=+1) -> BoundaryChartPoint:
    """Chart coordinates of an interior point (the sign fixes the fibre orientation)."""
    if not chart_valid(point, chart):
        raise ChartUndefined(f"{point} is outside the {chart.value} chart")
    s = _signed(sign)
    z = np.asarray(point.z)
    zeta = np.asarray(point.zeta)
    if chart is not Chart.EQUATORIAL:
        at = abs(point.t)
        return BoundaryChartPoint(
            chart, 1.0 / at, rho_fib(zeta, point.tau), tuple(z / at), tuple(zeta) + (point.tau,)
        )
    j = int(np.argmax(np.abs(z)))
    zj = z[j]
    r = abs(zj)
    v = tuple(np.delete(z, j) / zj)
    sgn = 1.0 if zj > 0 else -1.0
    zeta_j = zeta[j] * sgn
    rho_f = s / zeta_j if abs(zeta_j) > 1e-300 else math.inf
    z2 = float(zeta @ zeta)
    sigma = point.tau / z2 if z2 > 0 else math.inf
    omega = tuple(np.delete(zeta, j) / zeta[j]) if zeta[j] != 0 else (math.inf,) * (len(z) - 1)
    return BoundaryChartPoint(chart, 1.0 / r, rho_f, (point.t / r,) + v, omega + (sigma,))


def radial_distance(point: PhasePoint, sign, chart: Chart | None = None) -> float:
    """Euclidean chart distance from ``point`` to the radial set R_sign.

    Polar chart:      rho_b^2 + |zeta - +-w/2|^2 + (tau + |zeta|^2)^2
    Equatorial chart: rho_b^2 + (s -+ rho_f/2)^2 + |zeta_hat -+ z_hat|^2 + (tau/|zeta|^2 + 1)^2

    R_+ has zeta = w/2 (zeta_hat = z_hat); R_- has w = -2 zeta.  Both lie in
    tau + |zeta|^2 = 0.
    """
    s = _signed(sign)
    if chart is None:
        chart = select_chart(point, s)
    elif not chart_valid(point, chart) or (
        chart is Chart.NORTH_POLAR and s < 0) or (chart is Chart.SOUTH_POLAR and s > 0):
        raise ChartUndefined(f"{chart.value} chart cannot describe R_{'+' if s > 0 else '-'}")
    zeta = np.asarray(point.zeta)
    z = np.asarray(point.z)
    char = point.tau + float(zeta @ zeta)
    if chart is not Chart.EQUATORIAL:
        at = abs(point.t)
        w = z / at
        return math.hypot(1.0 / at, *(zeta - s * w / 2.0), char)
    c = to_chart(point, Chart.EQUATORIAL, s)
    if not math.isfinite(c.rho_fib) or not math.isfinite(c.angular_fib[-1]):
        return math.inf
    znorm = math.sqrt(float(z @ z))
    zetanorm = math.sqrt(float(zeta @ zeta))
    dirs = zeta / zetanorm - s * z / znorm
    return math.hypot(c.rho_base, c.angular_base[0] - s * c.rho_fib / 2.0, *dirs,
                      c.angular_fib[-1] + 1.0)


def try_radial_distance(point: PhasePoint, sign) -> float:
    """radial_distance, or +inf when no valid chart exists."""
    try:
        return radial_distance(point, sign)
    except ChartUndefined:
        return math.inf
