"""FFT helpers shared by the grid-based modules."""
from __future__ import annotations

import os

import numpy as np
import scipy.fft as sfft


def fft_workers() -> int:
    """Thread cap for FFTs, read from ``TWISTBEAM_THREADS`` (default 1)."""
    raw = os.environ.get("TWISTBEAM_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"TWISTBEAM_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)


def fft2(a):
    return sfft.fft2(a, workers=fft_workers())


def ifft2(a):
    return sfft.ifft2(a, workers=fft_workers())


def angular_frequencies(grid):
    """(qx, qy) meshes in rad/m, laid out like ``fft2`` output (ij indexing)."""
    qx = 2 * np.pi * sfft.fftfreq(grid.nx, d=grid.dx)
    qy = 2 * np.pi * sfft.fftfreq(grid.ny, d=grid.dy)
    return np.meshgrid(qx, qy, indexing="ij")


def laplacian(values, grid):
    qx, qy = angular_frequencies(grid)
    return ifft2(-(qx**2 + qy**2) * fft2(values))


def gradient(values, grid):
    qx, qy = angular_frequencies(grid)
    spec = fft2(values)
    return ifft2(1j * qx * spec), ifft2(1j * qy * spec)


def high_frequency_fraction(values, grid, cutoff: float = 0.8) -> float:
    """Fraction of spectral power with |q_x| or |q_y| above ``cutoff`` x Nyquist."""
    qx, qy = angular_frequencies(grid)
    spec = np.abs(fft2(values)) ** 2
    total = spec.sum()
    if total == 0:
        return 0.0
    nyq_x = np.pi / grid.dx
    nyq_y = np.pi / grid.dy
    outer = (np.abs(qx) > cutoff * nyq_x) | (np.abs(qy) > cutoff * nyq_y)
    return float(spec[outer].sum() / total)
