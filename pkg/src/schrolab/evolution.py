"""Split-step evolution for P = D_t + Delta + V and its retarded/advanced inverses.

``Delta`` is the positive Laplacian (symbol |zeta|^2) and ``D_t = -i d/dt``, so
solutions of ``P u = 0`` obey ``i du/dt = (Delta + V) u``.
"""
from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np

from .errors import SupportViolation
from .grid import Grid, PotentialSpec, SpacetimeField

log = logging.getLogger(__name__)

# Relative level below which a source slice counts as zero.
SUPPORT_TOL = 1e-14


@lru_cache(maxsize=32)
def _kinetic_phase(grid: Grid, dt: float) -> np.ndarray:
    return np.exp(-1j * dt * grid.zeta_sq)


def _kinetic(psi: np.ndarray, grid: Grid, dt: float) -> np.ndarray:
    axes = tuple(range(-grid.n, 0))
    return np.fft.ifftn(_kinetic_phase(grid, dt) * np.fft.fftn(psi, axes=axes), axes=axes)


def _step(psi, t, dt, potential, grid):
    # Signed dt allowed here; the advanced solver marches backwards.
    if potential.is_zero:
        return _kinetic(psi, grid, dt)
    half = np.exp(-0.5j * dt * potential.evaluate(grid.z_mesh, t + 0.5 * dt))
    return half * _kinetic(half * psi, grid, dt)


def step_evolve(psi: np.ndarray, t: float, dt: float, potential: PotentialSpec,
                grid: Grid) -> np.ndarray:
    """Advance one slice from ``t`` to ``t + dt`` with the Strang splitting.

    Half potential step with V(., t + dt/2), exact kinetic step
    ``exp(-i dt |zeta|^2)`` in Fourier space, second half potential step.
    Each factor is unitary when V is real.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return _step(np.asarray(psi, dtype=complex), t, dt, potential, grid)


def evolve(initial: np.ndarray, grid: Grid, potential: PotentialSpec) -> SpacetimeField:
    """Solve P u = 0 with u(t0) = ``initial``, storing every slice."""
    vals = np.empty(grid.shape, dtype=complex)
    vals[0] = initial
    for k in range(grid.M):
        vals[k + 1] = _step(vals[k], grid.times[k], grid.dt, potential, grid)
    return SpacetimeField(grid, vals)


def time_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """d/dt along axis 0: 4th-order centred stencil, 4th-order one-sided at both ends."""
    if values.shape[0] < 5:
        raise ValueError("at least 5 time slices are needed for the 4th-order stencil")
    out = np.empty_like(values)
    u = values
    out[2:-2] = (-u[4:] + 8.0 * u[3:-1] - 8.0 * u[1:-3] + u[:-4]) / (12.0 * dt)
    out[0] = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / (12.0 * dt)
    out[1] = (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]) / (12.0 * dt)
    out[-1] = (25.0 * u[-1] - 48.0 * u[-2] + 36.0 * u[-3] - 16.0 * u[-4] + 3.0 * u[-5]) / (12.0 * dt)
    out[-2] = (3.0 * u[-1] + 10.0 * u[-2] - 18.0 * u[-3] + 6.0 * u[-4] - u[-5]) / (12.0 * dt)
    return out


# Slices at each end of the window where apply_P uses one-sided differences.
ONE_SIDED_SLICES = 2


def laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Positive Laplacian as the spectral multiplier |zeta|^2 on the trailing axes."""
    axes = tuple(range(-grid.n, 0))
    return np.fft.ifftn(grid.zeta_sq * np.fft.fftn(values, axes=axes), axes=axes)


def apply_P(u: SpacetimeField, potential: PotentialSpec) -> SpacetimeField:
    """(D_t + Delta + V) u on the full grid.

    The first and last ``ONE_SIDED_SLICES`` slices use one-sided stencils.
    """
    grid = u.grid
    out = -1j * time_derivative(u.values, grid.dt)
    out += laplacian(u.values, grid)
    if not potential.is_zero:
        for k, t in enumerate(grid.times):
            out[k] += potential.evaluate(grid.z_mesh, t) * u.values[k]
    return SpacetimeField(grid, out)


def relative_residual(u: SpacetimeField, v: SpacetimeField, potential: PotentialSpec,
                      interior: bool = True) -> float:
    """||P u - v|| / ||v|| over the time window (one-sided end slices dropped if ``interior``)."""
    r = (apply_P(u, potential) - v).values
    vv = v.values
    if interior:
        r = r[ONE_SIDED_SLICES:-ONE_SIDED_SLICES]
        vv = vv[ONE_SIDED_SLICES:-ONE_SIDED_SLICES]
    return float(np.linalg.norm(r) / np.linalg.norm(vv))


def support_window(v: SpacetimeField, tol: float = SUPPORT_TOL) -> tuple[int, int] | None:
    """First and last slice index where v exceeds ``tol`` times its maximum."""
    amp = np.abs(v.values).reshape(v.values.shape[0], -1).max(axis=1)
    peak = amp.max()
    if peak == 0.0:
        return None
    idx = np.nonzero(amp > tol * peak)[0]
    return int(idx[0]), int(idx[-1])


def _check_support(v: SpacetimeField):
    win = support_window(v)
    if win is None:
        return None
    lo, hi = win
    if lo < 2 or hi > v.grid.M - 2:
        raise SupportViolation(
            f"source is non-negligible on slices {lo}..{hi}, touching the window edge "
            f"(0..{v.grid.M})"
        )
    return win


def _midpoint(vals: np.ndarray, k: int) -> np.ndarray:
    """v at t_k + dt/2 by 4-point cubic interpolation (v is zero outside the window)."""
    m = vals.shape[0] - 1

    def at(j):
        return vals[j] if 0 <= j <= m else 0.0

    return (-at(k - 1) + 9.0 * at(k) + 9.0 * at(k + 1) - at(k + 2)) / 16.0


def solve_retarded(v: SpacetimeField, potential: PotentialSpec) -> SpacetimeField:
    """Forward solution u_+ = R^+ v, supported after the source switches on.

    Midpoint Duhamel marching
    ``u_{k+1} = S(dt) u_k + i dt S(dt/2) v(t_{k+1/2})``
    with S the Strang step, so that u_+(t) = i int_{-inf}^t U(t, s) v(s) ds.
    """
    grid = v.grid
    vals = np.zeros(grid.shape, dtype=complex)
    win = _check_support(v)
    if win is None:
        return SpacetimeField(grid, vals)
    start = win[0] - 2
    dt = grid.dt
    for k in range(start, grid.M):
        t = grid.times[k]
        src = _step(_midpoint(v.values, k), t + 0.5 * dt, 0.5 * dt, potential, grid)
        vals[k + 1] = _step(vals[k], t, dt, potential, grid) + 1j * dt * src
    return SpacetimeField(grid, vals)


def solve_advanced(v: SpacetimeField, potential: PotentialSpec) -> SpacetimeField:
    """Backward solution u_- = R^- v = -i int_t^inf U(t, s) v(s) ds (mirror of the retarded solver)."""
    grid = v.grid
    vals = np.zeros(grid.shape, dtype=complex)
    win = _check_support(v)
    if win is None:
        return SpacetimeField(grid, vals)
    stop = win[1] + 2
    dt = grid.dt
    for k in range(stop - 1, -1, -1):
        t_next = grid.times[k + 1]
        src = _step(_midpoint(v.values, k), t_next - 0.5 * dt, -0.5 * dt, potential, grid)
        vals[k] = _step(vals[k + 1], t_next, -dt, potential, grid) - 1j * dt * src
    return SpacetimeField(grid, vals)
