"""Pure numpy implementation of the phase-estimation kernels.

Mirrors ``_fejer.pyx`` operation for operation; used when the compiled
extension is unavailable.
"""
import math

import numpy as np

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_REFINE_ITERS = 80


def fejer(phases, T):
    """|h_0(theta)|^2 = |(1/T) sum_k exp(i k theta)|^2 for each phase."""
    th = np.asarray(phases, dtype=np.float64)
    half = 0.5 * th
    s = np.sin(half)
    out = np.ones_like(th)
    nz = np.abs(s) > 1e-300
    # ratio first: s * s underflows for tiny phases
    r = np.sin(T * half[nz]) / (T * s[nz])
    out[nz] = r * r
    return np.minimum(out, 1.0)


def fejer_power(phases, T, c):
    return fejer(phases, T) ** c


def _fejer_scalar(theta, T):
    s = math.sin(0.5 * theta)
    if abs(s) <= 1e-300:
        return 1.0
    r = math.sin(T * 0.5 * theta) / (T * s)
    return min(r * r, 1.0)


def leak_bound(T, theta, npts):
    """max of |h_0|^2 over [theta, pi]: grid scan, then golden-section refinement."""
    grid = np.linspace(theta, math.pi, npts)
    vals = fejer(grid, T)
    k = int(np.argmax(vals))
    best = float(vals[k])
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, npts - 1)]
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1 = _fejer_scalar(x1, T)
    f2 = _fejer_scalar(x2, T)
    for _ in range(_REFINE_ITERS):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = _fejer_scalar(x2, T)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = _fejer_scalar(x1, T)
    return max(best, f1, f2)


def one_copy_amplitudes(theta, T):
    """h_y(theta) = (1/T) sum_k exp(i k (theta - 2 pi y / T)), y = 0..T-1."""
    phi = theta - 2.0 * math.pi * np.arange(T) / T
    half = 0.5 * phi
    s = np.sin(half)
    out = np.ones(T, dtype=np.complex128)
    nz = np.abs(s) > 1e-12
    # geometric sum: exp(i (T-1) phi / 2) sin(T phi / 2) / (T sin(phi / 2))
    out[nz] = np.exp(1j * (T - 1) * half[nz]) * np.sin(T * half[nz]) / (T * s[nz])
    # phi within rounding of a multiple of 2 pi: the sum is T terms of exp(i k phi)
    zs = ~nz
    if np.any(zs):
        k = np.arange(T)
        out[zs] = np.exp(1j * np.outer(phi[zs], k)).mean(axis=1)
    return out
