"""Grids, fields and potentials shared by every numerical module.

Fourier conventions
-------------------
Spatial transforms follow the continuum conventions

    (F u)(zeta) = int exp(-i z.zeta) u(z) dz,
    u(z)        = (2 pi)^-n int exp(i z.zeta) (F u)(zeta) dzeta,

discretised on the periodic box [-L, L)^n.  With z_j = -L + j dz the
discrete forward transform is ``dz^n * (-1)^k * fft(u)`` (k the signed
mode index) so that Plancherel reads
``sum |u|^2 dz^n = (2 pi)^-n sum |F u|^2 dzeta^n`` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Periodic spatial box [-L, L)^n times a uniform time grid.

    ``N`` points per spatial axis, ``M`` time steps between ``t0`` and ``t1``
    (so ``M + 1`` stored slices).
    """

    n: int = 1
    L: float = 448.0
    N: int = 2048
    t0: float = -30.0
    t1: float = 30.0
    M: int = 3000

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {self.n}")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not self.t1 > self.t0:
            raise ValueError("time window must satisfy t1 > t0")

    @property
    def dz(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.M

    @property
    def dzeta(self) -> float:
        return math.pi / self.L

    @property
    def zeta_nyquist(self) -> float:
        return math.pi / self.dz

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M + 1,) + self.spatial_shape

    @property
    def cell_volume(self) -> float:
        return self.dz ** self.n

    @cached_property
    def z_axis(self) -> np.ndarray:
        return -self.L + self.dz * np.arange(self.N)

    @cached_property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.M + 1)

    @cached_property
    def zeta_axis(self) -> np.ndarray:
        """Angular frequencies in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dz)

    @cached_property
    def z_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.z_axis] * self.n), indexing="ij"))

    @cached_property
    def zeta_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.zeta_axis] * self.n), indexing="ij"))

    @cached_property
    def zeta_sq(self) -> np.ndarray:
        return sum(k**2 for k in self.zeta_mesh)

    @cached_property
    def _fft_sign(self) -> np.ndarray:
        k = np.fft.fftfreq(self.N, d=1.0 / self.N).astype(int)
        s = np.where(k % 2 == 0, 1.0, -1.0)
        out = np.ones(self.spatial_shape)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = self.N
            out = out * s.reshape(shape)
        return out

    def forward(self, u: np.ndarray) -> np.ndarray:
        """Continuum-normalised spatial Fourier transform over the trailing n axes."""
        axes = tuple(range(-self.n, 0))
        return self.cell_volume * self._fft_sign * np.fft.fftn(u, axes=axes)

    def inverse(self, g: np.ndarray) -> np.ndarray:
        axes = tuple(range(-self.n, 0))
        return np.fft.ifftn(self._fft_sign * g, axes=axes) / self.cell_volume

    def frequency_grid(self) -> "FrequencyGrid":
        """The data grid dual to the spatial box (all FFT modes, sorted)."""
        return FrequencyGrid(self.n, self.zeta_nyquist, self.N)

    def frequency_subgrid(self, zeta_max: float) -> "FrequencyGrid":
        """Largest centred sub-window of the FFT modes with half-width <= zeta_max."""
        m = min(int(math.floor(zeta_max / self.dzeta + 1e-9)), self.N // 2)
        if m < 1:
            raise ValueError(f"zeta_max={zeta_max} is below one frequency step")
        return FrequencyGrid(self.n, m * self.dzeta, 2 * m)

    def refined(self, factor: int = 2, space: bool = False) -> "Grid":
        """Grid with ``factor`` times as many time steps (and points, if ``space``)."""
        return Grid(
            n=self.n,
            L=self.L,
            N=self.N * factor if space else self.N,
            t0=self.t0,
            t1=self.t1,
            M=self.M * factor,
        )

    def time_index(self, t: float) -> int:
        k = (t - self.t0) / self.dt
        idx = int(round(k))
        if abs(k - idx) > 1e-6 or not 0 <= idx <= self.M:
            raise ValueError(f"t={t} is not a grid time")
        return idx


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid of N^n points over [-zeta_max, zeta_max)^n."""

    n: int
    zeta_max: float
    N: int

    @property
    def dzeta(self) -> float:
        return 2.0 * self.zeta_max / self.N

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.zeta_max + self.dzeta * np.arange(self.N)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.n), indexing="ij"))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.dzeta ** self.n

    def compatible(self, other: "FrequencyGrid") -> bool:
        """True when both grids sample the same lattice (same step, aligned nodes)."""
        if self.n != other.n or not math.isclose(self.dzeta, other.dzeta, rel_tol=1e-12):
            return False
        shift = (self.zeta_max - other.zeta_max) / self.dzeta
        return abs(shift - round(shift)) < 1e-6


@dataclass
class DataFunction:
    """Complex samples f(zeta) on a :class:`FrequencyGrid` (sorted order)."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def from_callable(cls, func, grid: FrequencyGrid) -> "DataFunction":
        return cls(grid, func(*grid.mesh))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))

    def on(self, grid: FrequencyGrid) -> "DataFunction":
        """Restrict or zero-extend onto a compatible grid."""
        if not self.grid.compatible(grid):
            raise ValueError("frequency grids are not lattice-compatible")
        offset = int(round((self.grid.zeta_max - grid.zeta_max) / grid.dzeta))
        out = np.zeros(grid.shape, dtype=complex)
        src = []
        dst = []
        for _ in range(grid.n):
            lo = max(0, -offset)
            hi = min(grid.N, self.grid.N - offset)
            dst.append(slice(lo, hi))
            src.append(slice(lo + offset, hi + offset))
        out[tuple(dst)] = self.values[tuple(src)]
        return DataFunction(grid, out)

    def __add__(self, other):
        return DataFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        return DataFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return DataFunction(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass
class SpacetimeField:
    """Complex grid function u(z, t); ``values[k]`` is the slice at ``grid.times[k]``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "SpacetimeField":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def slice_norms(self) -> np.ndarray:
        """Discrete L^2(dz) norm of every time slice."""
        axes = tuple(range(1, self.grid.n + 1))
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=axes) * self.grid.cell_volume)

    def l2_norm(self) -> float:
        """Discrete L^2(dz dt) norm (rectangle rule)."""
        return float(
            np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume * self.grid.dt)
        )

    def __add__(self, other):
        return SpacetimeField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return SpacetimeField(self.grid, self.values - other.values)

    def __mul__(self, c):
        return SpacetimeField(self.grid, self.values * c)

    __rmul__ = __mul__


class PotentialKind(str, Enum):
    COMPACT_BUMP = "compact_bump"
    GAUSSIAN_BUMP = "gaussian_bump"
    ZERO = "zero"


@dataclass(frozen=True)
class PotentialSpec:
    """Spacetime potential V(z, t) = (amplitude + i complex_part) * shape(r).

    ``r^2 = |z - z_c|^2 / sigma_z^2 + (t - t_c)^2 / sigma_t^2``.  The compact
    bump is ``exp(1 - 1/(1 - r^2))`` on r < 1 and zero outside; the Gaussian is
    ``exp(-r^2)``, which is not compactly supported.
    """

    kind: PotentialKind = PotentialKind.COMPACT_BUMP
    amplitude: float = 0.5
    center: tuple = ((0.0,), 0.0)
    widths: tuple = (3.0, 3.0)
    complex_part: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        zc, tc = self.center
        zc = tuple(float(c) for c in np.atleast_1d(zc))
        object.__setattr__(self, "center", (zc, float(tc)))
        sz, st = self.widths
        if not (sz > 0 and st > 0):
            raise ValueError("potential widths must be positive")
        object.__setattr__(self, "widths", (float(sz), float(st)))

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls(kind=PotentialKind.ZERO, amplitude=0.0)

    @property
    def is_zero(self) -> bool:
        return self.kind is PotentialKind.ZERO or (
            self.amplitude == 0.0 and self.complex_part == 0.0
        )

    @property
    def is_real(self) -> bool:
        return self.complex_part == 0.0

    def time_support(self, cutoff: float = 0.0) -> tuple[float, float]:
        """Interval of t outside which V vanishes (Gaussian: below ``cutoff`` relative)."""
        _, tc = self.center
        _, st = self.widths
        if self.is_zero:
            return (math.inf, -math.inf)
        if self.kind is PotentialKind.COMPACT_BUMP:
            return (tc - st, tc + st)
        cutoff = cutoff or 1e-16
        half = st * math.sqrt(-math.log(cutoff))
        return (tc - half, tc + half)

    def _r2(self, z_mesh: Sequence[np.ndarray], t: float) -> np.ndarray:
        zc, tc = self.center
        sz, st = self.widths
        if len(zc) == 1 and len(z_mesh) > 1:
            zc = zc * len(z_mesh)
        if len(zc) != len(z_mesh):
            raise ValueError("potential center dimension does not match the grid")
        r2 = sum((z - c) ** 2 for z, c in zip(z_mesh, zc)) / sz**2
        return r2 + (t - tc) ** 2 / st**2

    def evaluate(self, z_mesh: Sequence[np.ndarray], t: float) -> np.ndarray:
        """V(., t) on the given spatial mesh."""
        shape = np.shape(z_mesh[0])
        if self.is_zero:
            return np.zeros(shape, dtype=complex)
        r2 = self._r2(z_mesh, t)
        if self.kind is PotentialKind.COMPACT_BUMP:
            prof = np.zeros(shape)
            inside = r2 < 1.0
            prof[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        else:
            prof = np.exp(-r2)
        return (self.amplitude + 1j * self.complex_part) * prof

    def field(self, grid: Grid) -> SpacetimeField:
        """V sampled on every slice of the grid."""
        vals = np.empty(grid.shape, dtype=complex)
        for k, t in enumerate(grid.times):
            vals[k] = self.evaluate(grid.z_mesh, t)
        return SpacetimeField(grid, vals)

    def scaled(self, factor: float) -> "PotentialSpec":
        return PotentialSpec(
            kind=self.kind,
            amplitude=self.amplitude * factor,
            center=self.center,
            widths=self.widths,
            complex_part=self.complex_part * factor,
        )
