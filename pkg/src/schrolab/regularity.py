"""Weighted parabolic norms, module generators, W^k data norms and related diagnostics.

Spacetime generators act on :class:`SpacetimeField` slices with spectral
derivatives ``D = -i d/dz``; data generators act on :class:`DataFunction`
values with spectral ``D_xi`` on the periodic frequency grid.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal.windows import tukey

from .errors import DimensionMismatch, NoCounterpart
from .grid import DataFunction, Grid, SpacetimeField
from .scattering import free_poisson

log = logging.getLogger(__name__)

# Tukey taper with 10% cosine flanks at each end of the time window.
TAPER_ALPHA = 0.2
# Spatial blocks per axis used by microlocal_split.
SPLIT_BLOCKS = 8
MAX_WORD_ORDER = 3


class GenKind(str, Enum):
    IDENTITY = "Identity"
    ROTATION = "Rotation"
    GALILEAN_HALF = "GalileanHalf"
    GALILEAN2 = "Galilean2"
    TRANSLATION = "Translation"
    ELLIPTIC = "Elliptic"
    DATA_ROTATION = "DataRotation"
    DATA_DERIV = "DataDeriv"
    DATA_MULT = "DataMult"


_DATA_KINDS = {GenKind.DATA_ROTATION, GenKind.DATA_DERIV, GenKind.DATA_MULT}


@dataclass(frozen=True)
class GeneratorId:
    """A generator with its index (i) or index pair (i, j)."""

    kind: GenKind
    indices: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", GenKind(self.kind))
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        want = 2 if self.kind in (GenKind.ROTATION, GenKind.DATA_ROTATION) else (
            0 if self.kind in (GenKind.IDENTITY, GenKind.ELLIPTIC) else 1)
        if len(self.indices) != want:
            raise ValueError(f"{self.kind.value} takes {want} indices, got {self.indices}")
        if want == 2 and self.indices[0] == self.indices[1]:
            raise ValueError("rotation indices must differ")

    @property
    def is_data(self) -> bool:
        return self.kind in _DATA_KINDS

    def __str__(self) -> str:
        if not self.indices:
            return self.kind.value
        return f"{self.kind.value}({','.join(map(str, self.indices))})"

    @classmethod
    def parse(cls, text: str) -> "GeneratorId":
        """Inverse of ``str``: 'Galilean2(0)', 'Rotation(0,1)', 'Identity'."""
        text = text.strip()
        if "(" not in text:
            return cls(GenKind(text))
        name, rest = text.split("(", 1)
        idx = tuple(int(x) for x in rest.rstrip(")").split(",") if x.strip())
        return cls(GenKind(name.strip()), idx)


IDENTITY = GeneratorId(GenKind.IDENTITY)

# Spacetime generators and their data counterparts under P_0.
_COUNTERPART = {
    GenKind.IDENTITY: GenKind.IDENTITY,
    GenKind.ROTATION: GenKind.DATA_ROTATION,
    GenKind.GALILEAN2: GenKind.DATA_DERIV,
    GenKind.TRANSLATION: GenKind.DATA_MULT,
}


def counterpart(g: GeneratorId) -> GeneratorId:
    """Data generator h with g P_0 f = P_0 (h f)."""
    if g.kind not in _COUNTERPART:
        raise NoCounterpart(f"{g} has no data counterpart")
    return GeneratorId(_COUNTERPART[g.kind], g.indices)


@dataclass(frozen=True)
class NormOrder:
    s: float = 0.0
    l: float = 0.0
    kappa: int = 0
    k: int = 0

    def __post_init__(self):
        if self.kappa < 0 or self.k < 0:
            raise ValueError("kappa and k must be non-negative")
        if self.kappa + self.k > MAX_WORD_ORDER:
            raise ValueError(f"kappa + k must be <= {MAX_WORD_ORDER}")


def _check_indices(g: GeneratorId, n: int):
    if g.kind in (GenKind.ROTATION, GenKind.DATA_ROTATION) and n < 2:
        raise DimensionMismatch(f"{g} needs n >= 2, got n = {n}")
    if any(i >= n or i < 0 for i in g.indices):
        raise DimensionMismatch(f"{g} has an index out of range for n = {n}")


def _spectral_deriv(values: np.ndarray, axis: int, step: float) -> np.ndarray:
    """-i d/dx along ``axis`` of periodic samples with spacing ``step``."""
    k = 2.0 * np.pi * np.fft.fftfreq(values.shape[axis], d=step)
    shape = [1] * values.ndim
    shape[axis] = k.size
    return np.fft.ifft(k.reshape(shape) * np.fft.fft(values, axis=axis), axis=axis)


def time_taper(grid: Grid) -> np.ndarray:
    return tukey(grid.M + 1, alpha=TAPER_ALPHA)


def parabolic_multiplier(zeta_sq: np.ndarray, tau: np.ndarray, s: float) -> np.ndarray:
    """(1 + |zeta|^4 + tau^2)^(s/4)."""
    return (1.0 + zeta_sq**2 + tau**2) ** (s / 4.0)


def _apply_multiplier(values: np.ndarray, grid: Grid, s: float) -> np.ndarray:
    if s == 0:
        return values
    tau = 2.0 * np.pi * np.fft.fftfreq(grid.M + 1, d=grid.dt)
    tau = tau.reshape((-1,) + (1,) * grid.n)
    mult = parabolic_multiplier(grid.zeta_sq[None], tau, s)
    return np.fft.ifftn(mult * np.fft.fftn(values))


def _tapered(u: SpacetimeField) -> np.ndarray:
    shape = (-1,) + (1,) * u.grid.n
    return u.values * time_taper(u.grid).reshape(shape)


def _apply_spacetime(g: GeneratorId, u: SpacetimeField) -> SpacetimeField:
    grid = u.grid
    vals = u.values
    t = grid.times.reshape((-1,) + (1,) * grid.n)
    if g.kind is GenKind.IDENTITY:
        return SpacetimeField(grid, vals.copy())
    if g.kind is GenKind.ELLIPTIC:
        return SpacetimeField(grid, _apply_multiplier(_tapered(u), grid, 1.0))
    if g.kind is GenKind.ROTATION:
        i, j = g.indices
        zi, zj = grid.z_mesh[i][None], grid.z_mesh[j][None]
        out = zi * _spectral_deriv(vals, j + 1, grid.dz) - zj * _spectral_deriv(vals, i + 1, grid.dz)
        return SpacetimeField(grid, out)
    (i,) = g.indices
    d = _spectral_deriv(vals, i + 1, grid.dz)
    zi = grid.z_mesh[i][None]
    if g.kind is GenKind.TRANSLATION:
        return SpacetimeField(grid, d)
    if g.kind is GenKind.GALILEAN_HALF:
        return SpacetimeField(grid, t * d - 0.5 * zi * vals)
    return SpacetimeField(grid, 2.0 * t * d - zi * vals)


def _apply_data(g: GeneratorId, f: DataFunction) -> DataFunction:
    fg = f.grid
    vals = f.values
    if g.kind is GenKind.IDENTITY:
        return DataFunction(fg, vals.copy())
    if g.kind is GenKind.DATA_ROTATION:
        i, j = g.indices
        out = fg.mesh[i] * _spectral_deriv(vals, j, fg.dzeta) - fg.mesh[j] * _spectral_deriv(
            vals, i, fg.dzeta)
        return DataFunction(fg, out)
    (i,) = g.indices
    if g.kind is GenKind.DATA_DERIV:
        return DataFunction(fg, _spectral_deriv(vals, i, fg.dzeta))
    return DataFunction(fg, fg.mesh[i] * vals)


def apply_generator(g: GeneratorId, x):
    """Apply ``g`` to a spacetime field or a data function of the matching family."""
    if isinstance(x, SpacetimeField):
        if g.is_data:
            raise DimensionMismatch(f"{g} acts on data functions, not spacetime fields")
        _check_indices(g, x.grid.n)
        return _apply_spacetime(g, x)
    if isinstance(x, DataFunction):
        if not (g.is_data or g.kind is GenKind.IDENTITY):
            raise DimensionMismatch(f"{g} acts on spacetime fields, not data functions")
        _check_indices(g, x.grid.n)
        return _apply_data(g, x)
    raise TypeError(f"cannot apply a generator to {type(x).__name__}")


def data_alphabet(n: int) -> list[GeneratorId]:
    gens = [IDENTITY]
    gens += [GeneratorId(GenKind.DATA_ROTATION, (i, j)) for i, j in itertools.combinations(range(n), 2)]
    gens += [GeneratorId(GenKind.DATA_DERIV, (i,)) for i in range(n)]
    gens += [GeneratorId(GenKind.DATA_MULT, (i,)) for i in range(n)]
    return gens


def module_alphabet(n: int) -> list[GeneratorId]:
    """Generators of N: identity, rotations, t D_z - z/2 and the elliptic multiplier E_1."""
    gens = [IDENTITY]
    gens += [GeneratorId(GenKind.ROTATION, (i, j)) for i, j in itertools.combinations(range(n), 2)]
    gens += [GeneratorId(GenKind.GALILEAN_HALF, (i,)) for i in range(n)]
    gens.append(GeneratorId(GenKind.ELLIPTIC))
    return gens


def _words(x, alphabet, depth):
    """Yield A_1 ... A_j x for every word of length j <= depth (depth first, O(depth) memory)."""
    yield x
    if depth == 0:
        return
    for g in alphabet:
        yield from _words(apply_generator(g, x), alphabet, depth - 1)


def data_norm_Wk(f: DataFunction, k: int) -> float:
    """W^k norm: all words of length <= k over {Id, DataRotation, DataDeriv, DataMult}."""
    if k < 0:
        raise ValueError("negative-order W^-k norms are out of scope")
    if k > MAX_WORD_ORDER:
        raise ValueError(f"k must be <= {MAX_WORD_ORDER}")
    total = sum(w.l2_norm() ** 2 for w in _words(f, data_alphabet(f.grid.n), k))
    return math.sqrt(total)


def spacetime_weight(grid: Grid, l: float) -> np.ndarray:
    """<Z>^l = (1 + |z|^2 + t^2)^(l/2) on the full grid."""
    t = grid.times.reshape((-1,) + (1,) * grid.n)
    r2 = sum(z**2 for z in grid.z_mesh)[None] + t**2
    return (1.0 + r2) ** (l / 2.0)


def parabolic_norm(u: SpacetimeField, s: float, l: float, taper: bool = True) -> float:
    """|| <Z>^l F^-1[(1 + |zeta|^4 + tau^2)^(s/4) F (taper u)] ||_{L^2(dz dt)}.

    The time taper is a Tukey window with ``TAPER_ALPHA``; pass ``taper=False``
    to skip it.
    """
    grid = u.grid
    vals = _tapered(u) if taper else u.values
    vals = _apply_multiplier(vals, grid, s)
    if l != 0:
        vals = vals * spacetime_weight(grid, l)
    return float(np.sqrt(np.sum(np.abs(vals) ** 2) * grid.cell_volume * grid.dt))


def module_norm(u: SpacetimeField, order: NormOrder, sign: str = "+") -> float:
    """sqrt(sum over words A^alpha B^beta of parabolic_norm(A^alpha B^beta u, s, l)^2).

    Both alphabets are the N generators; the sign-specific extension is not
    implemented, so kappa > 0 falls back to N with a warning.
    """
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    alphabet = module_alphabet(u.grid.n)
    if order.kappa > 0:
        log.warning("kappa > 0: sign-specific generators unavailable, using the N alphabet")
    total = 0.0
    for inner in _words(u, alphabet, order.k):
        for word in _words(inner, alphabet, order.kappa):
            total += parabolic_norm(word, order.s, order.l) ** 2
    return math.sqrt(total)


@dataclass
class ThresholdScan:
    """``slope`` of log I(T) against log T; NaN with ``degenerate`` set when I vanishes."""

    slope: float
    T: np.ndarray
    I: np.ndarray
    degenerate: bool = False


def weighted_mass_curve(u: SpacetimeField, l: float) -> np.ndarray:
    """q(t) = int <(z, t)>^(2l) |u|^2 dz on every slice."""
    grid = u.grid
    axes = tuple(range(1, grid.n + 1))
    w = spacetime_weight(grid, 2.0 * l)
    return np.sum(w * np.abs(u.values) ** 2, axis=axes) * grid.cell_volume


def threshold_scan(u: SpacetimeField, l: float, T_list, t_start: float = 1.0) -> ThresholdScan:
    """Fit log I(T) = a + slope log T with I(T) = int_{t_start}^T int <Z>^(2l) |u|^2 dz dt."""
    grid = u.grid
    T = np.asarray(T_list, dtype=float)
    if np.any(T <= t_start) or t_start < grid.t0 or np.any(T > grid.t1):
        raise ValueError("T_list must lie in (t_start, t1] inside the window")
    q = weighted_mass_curve(u, l)
    times = grid.times
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (q[1:] + q[:-1]) * np.diff(times))])
    integral = np.interp(T, times, cum) - np.interp(t_start, times, cum)
    if not np.all(integral > 0):
        return ThresholdScan(float("nan"), T, integral, degenerate=True)
    slope = float(np.polyfit(np.log(T), np.log(integral), 1)[0])
    return ThresholdScan(slope, T, integral)


def _block_windows(grid: Grid, blocks: int) -> tuple[np.ndarray, np.ndarray]:
    """Periodic raised-cosine partition of unity along one axis, and block centres."""
    L = grid.L
    H = 2.0 * L / blocks
    centers = -L + H * (np.arange(blocks) + 0.5)
    z = grid.z_axis
    d = np.mod(z[None, :] - centers[:, None] + L, 2.0 * L) - L
    w = np.where(np.abs(d) < H, np.cos(0.5 * np.pi * d / H) ** 2, 0.0)
    return w, centers


def _chi(x: np.ndarray) -> np.ndarray:
    """Smooth step with chi(x) + chi(-x) = 1, chi(1) = 1, chi(-1) = 0."""
    return 0.5 * (1.0 + np.sin(0.5 * np.pi * np.clip(x, -1.0, 1.0)))


def microlocal_split(u: SpacetimeField, blocks: int = SPLIT_BLOCKS):
    """Split u = u_plus + u_minus with u_plus microlocalised near z_hat . zeta_hat = +1.

    Each slice is cut by a raised-cosine partition of unity into ``blocks``
    overlapping spatial blocks per axis; on a block centred at c the symbol
    chi(c_hat . zeta / <zeta>) is applied by FFT.
    """
    grid = u.grid
    n = grid.n
    w1, c1 = _block_windows(grid, blocks)
    eps = grid.dzeta
    zeta_norm = np.sqrt(grid.zeta_sq + eps**2)
    axes = tuple(range(1, n + 1))
    plus = np.zeros(grid.shape, dtype=complex)
    minus = np.zeros(grid.shape, dtype=complex)
    for idx in itertools.product(range(blocks), repeat=n):
        window = np.ones(grid.spatial_shape)
        for axis, b in enumerate(idx):
            shape = [1] * n
            shape[axis] = grid.N
            window = window * w1[b].reshape(shape)
        centre = np.array([c1[b] for b in idx])
        chat = centre / np.linalg.norm(centre)
        proj = sum(c * m for c, m in zip(chat, grid.zeta_mesh)) / zeta_norm
        sym = _chi(proj)
        spec = np.fft.fftn(window[None] * u.values, axes=axes)
        plus += np.fft.ifftn(sym[None] * spec, axes=axes)
        minus += np.fft.ifftn((1.0 - sym)[None] * spec, axes=axes)
    return SpacetimeField(grid, plus), SpacetimeField(grid, minus)


def commutation_residual(g: GeneratorId, f: DataFunction, grid: Grid) -> float:
    """||g P_0 f - P_0 (h f)|| / ||g P_0 f|| with h the data counterpart of g."""
    h = counterpart(g)
    _check_indices(g, grid.n)
    full = f.on(grid.frequency_grid())
    lhs = apply_generator(g, free_poisson(full, grid))
    rhs = free_poisson(apply_generator(h, full), grid)
    return float(np.linalg.norm(lhs.values - rhs.values) / np.linalg.norm(lhs.values))
