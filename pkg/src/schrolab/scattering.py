"""Poisson operators, asymptotic data, the scattering matrix and pairing identities.

Sign conventions: ``sign="-"`` refers to t -> -infinity (incoming data),
``sign="+"`` to t -> +infinity (outgoing data).  Data are normalised so that
a solution with data f behaves like
``(4 pi i t)^{-n/2} exp(i|z|^2/4t) f(z/2t)`` and the free Poisson operator is
``u(., t) = F^{-1}[exp(-it|zeta|^2) f]``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import WindowTooSmall
from .evolution import solve_advanced, solve_retarded
from .grid import DataFunction, FrequencyGrid, Grid, PotentialSpec, SpacetimeField
from .interp import trig_interpolate_uniform

log = logging.getLogger(__name__)

# Number of tail times used by extract_data when no t_list is given.
DEFAULT_TAIL_SAMPLES = 21


def _check_sign(sign: str) -> int:
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return 1 if sign == "+" else -1


def _full_data(f: DataFunction, grid: Grid) -> np.ndarray:
    """f on every FFT mode of ``grid``, in FFT order."""
    full = f.on(grid.frequency_grid()).values
    return np.fft.ifftshift(full)


def free_poisson(f: DataFunction, grid: Grid) -> SpacetimeField:
    """P_0 f: the free solution whose incoming and outgoing data are both f."""
    g = _full_data(f, grid)
    shape = (-1,) + (1,) * grid.n
    phase = np.exp(-1j * grid.times.reshape(shape) * grid.zeta_sq)
    return SpacetimeField(grid, grid.inverse(phase * g))


def exact_data(u: SpacetimeField, k: int) -> DataFunction:
    """exp(it|zeta|^2) F u(t_k): the data of u if it is free after (or before) t_k."""
    grid = u.grid
    t = grid.times[k]
    g = np.exp(1j * t * grid.zeta_sq) * grid.forward(u.values[k])
    return DataFunction(grid.frequency_grid(), np.fft.fftshift(g))


@dataclass
class ExtractionReport:
    """Result of :func:`extract_data`.

    ``fitted_rate`` is minus the log-log slope of the tail deviation
    ``||f_t - limit||`` against |t|; a positive value means convergence.
    """

    limit: DataFunction
    times_used: list
    fitted_rate: float
    residual_curve: list = field(default_factory=list)
    correction: DataFunction | None = None


def default_tail_times(grid: Grid, sign: str, samples: int = DEFAULT_TAIL_SAMPLES) -> np.ndarray:
    """``samples`` grid times spread over the last third of the window on the given side."""
    s = _check_sign(sign)
    edge = grid.t1 if s > 0 else -grid.t0
    if edge <= 0:
        raise WindowTooSmall(f"the time window has no t {'>' if s > 0 else '<'} 0 side")
    idx = [grid.time_index(t) for t in grid.times if s * t >= 2.0 * edge / 3.0]
    pick = np.unique(np.round(np.linspace(0, len(idx) - 1, min(samples, len(idx)))).astype(int))
    return grid.times[np.asarray(idx)[pick]]


def profile(u: SpacetimeField, t: float, zgrid: FrequencyGrid) -> np.ndarray:
    """(4 pi i t)^{n/2} exp(-it|zeta|^2) u(2 t zeta, t) on ``zgrid``."""
    grid = u.grid
    if 2.0 * abs(t) * zgrid.zeta_max > grid.L * (1 + 1e-12):
        raise WindowTooSmall(
            f"2|t| zeta_max = {2 * abs(t) * zgrid.zeta_max:.4g} exceeds L = {grid.L}"
        )
    k = grid.time_index(t)
    slice_ = u.values[k]
    vals = trig_interpolate_uniform(
        slice_, -grid.L, grid.dz, 2.0 * t * zgrid.axis[0], 2.0 * t * zgrid.dzeta, zgrid.N
    )
    zeta_sq = sum(m**2 for m in zgrid.mesh)
    pref = np.sqrt(4.0 * math.pi * 1j * t + 0j) ** grid.n
    return pref * np.exp(-1j * t * zeta_sq) * vals


def extract_data(u: SpacetimeField, sign: str, t_list=None,
                 zeta_grid: FrequencyGrid | None = None) -> ExtractionReport:
    """Asymptotic data of u as t -> +-infinity.

    The profile f_t(zeta) is sampled at each time in ``t_list`` (default: the
    last third of the window on that side) and fitted pointwise by
    ``c0 + c1 / t``; ``c0`` is returned as the limit.
    """
    s = _check_sign(sign)
    grid = u.grid
    if t_list is None:
        t_list = default_tail_times(grid, sign)
    t_list = np.asarray(sorted(t_list, key=abs), dtype=float)
    if np.any(s * t_list <= 0):
        raise ValueError("all extraction times must lie on the requested side of t = 0")
    if zeta_grid is None:
        zeta_grid = grid.frequency_subgrid(grid.L / (2.0 * np.abs(t_list).max()))
    profiles = np.stack([profile(u, t, zeta_grid) for t in t_list])
    design = np.stack([np.ones_like(t_list), 1.0 / t_list], axis=1)
    flat = profiles.reshape(len(t_list), -1)
    coef, *_ = np.linalg.lstsq(design, flat, rcond=None)
    limit = coef[0].reshape(zeta_grid.shape)
    corr = coef[1].reshape(zeta_grid.shape)
    dv = zeta_grid.cell_volume
    dev = np.sqrt(np.sum(np.abs(flat - coef[0]) ** 2, axis=1) * dv)
    curve = [(float(t), float(d)) for t, d in zip(t_list, dev)]
    rate = float("nan")
    ok = dev > 0
    if ok.sum() >= 2:
        slope = np.polyfit(np.log(np.abs(t_list[ok])), np.log(dev[ok]), 1)[0]
        rate = float(-slope)
    return ExtractionReport(
        limit=DataFunction(zeta_grid, limit),
        times_used=[float(t) for t in t_list],
        fitted_rate=rate,
        residual_curve=curve,
        correction=DataFunction(zeta_grid, corr),
    )


def potential_source(u: SpacetimeField, potential: PotentialSpec) -> SpacetimeField:
    """(P - P_0) u = V u, pointwise."""
    grid = u.grid
    out = np.zeros(grid.shape, dtype=complex)
    if potential.is_zero:
        return SpacetimeField(grid, out)
    lo, hi = potential.time_support()
    for k, t in enumerate(grid.times):
        if lo <= t <= hi:
            out[k] = potential.evaluate(grid.z_mesh, t) * u.values[k]
    return SpacetimeField(grid, out)


def perturbed_poisson(f: DataFunction, sign: str, potential: PotentialSpec,
                      grid: Grid) -> SpacetimeField:
    """Poisson operator of P with prescribed incoming (``-``) or outgoing (``+``) data.

    P_- f = P_0 f - R^+ (V P_0 f),   P_+ f = P_0 f - R^- (V P_0 f).
    """
    s = _check_sign(sign)
    u0 = free_poisson(f, grid)
    if potential.is_zero:
        return u0
    src = potential_source(u0, potential)
    corr = solve_retarded(src, potential) if s < 0 else solve_advanced(src, potential)
    return u0 - corr


def scattering_matrix(f_minus: DataFunction, potential: PotentialSpec, grid: Grid,
                      t_list=None) -> DataFunction:
    """S f_- : the outgoing data of the solution with incoming data f_-."""
    u = perturbed_poisson(f_minus, "-", potential, grid)
    return extract_data(u, "+", t_list).limit


def _trapezoid_weights(m: int) -> np.ndarray:
    w = np.ones(m)
    w[0] = w[-1] = 0.5
    return w


def spacetime_inner(a: SpacetimeField, b: SpacetimeField) -> complex:
    """int a conj(b) dz dt, trapezoid rule in t."""
    grid = a.grid
    axes = tuple(range(1, grid.n + 1))
    per_slice = np.sum(a.values * np.conj(b.values), axis=axes) * grid.cell_volume
    return complex(np.sum(_trapezoid_weights(grid.M + 1) * per_slice) * grid.dt)


def data_inner(f: DataFunction, g: DataFunction) -> complex:
    if not f.grid.compatible(g.grid):
        raise ValueError("data functions live on incompatible grids")
    g = g.on(f.grid)
    return complex(np.sum(f.values * np.conj(g.values)) * f.grid.cell_volume)


def pairing_check(u1: SpacetimeField, u2: SpacetimeField, data, Pu1=None, Pu2=None,
                  potential: PotentialSpec | None = None) -> tuple[complex, complex]:
    """Both sides of the boundary-pairing identity.

    ``data`` is ``((f1_plus, f1_minus), (f2_plus, f2_minus))``.  ``Pu1``/``Pu2``
    default to ``apply_P`` of the fields (needs ``potential``).  Returns

        lhs = int (u1 conj(P u2) - P u1 conj(u2)) dz dt
        rhs = i (2 pi)^-n int (f1+ conj f2+ - f1- conj f2-) dzeta.

    The factor is +i for P = -i d/dt + Delta + V (integrating d/dt |u|^2
    over the window).
    """
    from .evolution import apply_P

    if Pu1 is None or Pu2 is None:
        if potential is None:
            raise ValueError("potential is required when P u is not supplied")
        Pu1 = apply_P(u1, potential) if Pu1 is None else Pu1
        Pu2 = apply_P(u2, potential) if Pu2 is None else Pu2
    n = u1.grid.n
    lhs = spacetime_inner(u1, Pu2) - spacetime_inner(Pu1, u2)
    (f1p, f1m), (f2p, f2m) = data
    rhs = 1j * (2.0 * math.pi) ** (-n) * (data_inner(f1p, f2p) - data_inner(f1m, f2m))
    return lhs, rhs


def poisson_adjoint_minus(v: SpacetimeField, potential: PotentialSpec) -> DataFunction:
    """P_-^* v = i (2 pi)^-n L_-(R^- v)."""
    n = v.grid.n
    f2m = extract_data(solve_advanced(v, potential), "-").limit
    return f2m * (1j * (2.0 * math.pi) ** (-n))


def pp_star_check(v: SpacetimeField, potential: PotentialSpec):
    """Return (P_- P_-^* v, i (2 pi)^-n (R^- - R^+) v) for comparison.

    Both should agree; they are the multiplier (2 pi)^{1-n} delta(tau + |zeta|^2)
    in the free case.
    """
    grid = v.grid
    n = grid.n
    data = poisson_adjoint_minus(v, potential)
    left = perturbed_poisson(data, "-", potential, grid)
    right = (solve_advanced(v, potential) - solve_retarded(v, potential)) * (
        1j * (2.0 * math.pi) ** (-n)
    )
    return left, right
