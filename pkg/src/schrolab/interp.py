"""Band-limited (trigonometric) interpolation of periodic grid data.

A slice sampled at z_j = z0 + j dz, j < N, is the restriction of the unique
trigonometric polynomial with modes -N/2 .. N/2-1.  ``trig_interpolate``
evaluates that polynomial at arbitrary points by direct summation;
``trig_interpolate_uniform`` evaluates it on an arithmetic progression of
points with a chirp-z transform.
"""
from __future__ import annotations

import numpy as np
from scipy.signal import czt


def _sorted_coefficients(values: np.ndarray, axis: int) -> np.ndarray:
    n = values.shape[axis]
    return np.fft.fftshift(np.fft.fft(values, axis=axis), axes=axis) / n


def trig_interpolate(values: np.ndarray, z0: float, dz: float, x: np.ndarray,
                     chunk: int = 512) -> np.ndarray:
    """Evaluate the 1-d trigonometric interpolant of ``values`` at points ``x``."""
    values = np.asarray(values, dtype=complex)
    n = values.shape[0]
    coef = _sorted_coefficients(values, 0)
    dk = 2.0 * np.pi / (n * dz)
    k = dk * (np.arange(n) - n // 2)
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for lo in range(0, flat.size, chunk):
        xs = flat[lo:lo + chunk]
        out[lo:lo + chunk] = np.exp(1j * np.outer(xs - z0, k)) @ coef
    return out.reshape(x.shape)


def _czt_axis(values: np.ndarray, axis: int, z0: float, dz: float,
              x0: float, h: float, m: int) -> np.ndarray:
    n = values.shape[axis]
    coef = _sorted_coefficients(values, axis)
    dk = 2.0 * np.pi / (n * dz)
    kmin = -(n // 2) * dk
    a = np.exp(-1j * dk * (x0 - z0))
    w = np.exp(1j * dk * h)
    out = czt(coef, m=m, w=w, a=a, axis=axis)
    xp = x0 + h * np.arange(m)
    shape = [1] * values.ndim
    shape[axis] = m
    return out * np.exp(1j * kmin * (xp - z0)).reshape(shape)


def trig_interpolate_uniform(values: np.ndarray, z0: float, dz: float,
                             x0: float, h: float, m: int,
                             axes: tuple[int, ...] | None = None) -> np.ndarray:
    """Interpolant at x0 + h*p, p < m, along each of ``axes`` (tensor-product grid)."""
    values = np.asarray(values, dtype=complex)
    if axes is None:
        axes = tuple(range(values.ndim))
    out = values
    for axis in axes:
        out = _czt_axis(out, axis, z0, dz, x0, h, m)
    return out
