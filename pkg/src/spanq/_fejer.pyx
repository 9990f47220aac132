# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled phase-estimation kernels.

Same algorithms as ``_fejer_py``; results agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, fabs, M_PI, sqrt

cnp.import_array()

cdef double _GOLDEN = (sqrt(5.0) - 1.0) / 2.0
cdef int _REFINE_ITERS = 80


cdef inline double _fejer(double theta, long T) nogil:
    cdef double s = sin(0.5 * theta)
    cdef double r, v
    if fabs(s) <= 1e-300:
        return 1.0
    # ratio first: s * s underflows for tiny phases
    r = sin(T * 0.5 * theta) / (<double>T * s)
    v = r * r
    return v if v < 1.0 else 1.0


def fejer(phases, long T):
    cdef double[::1] th = np.ascontiguousarray(phases, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = th.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _fejer(th[i], T)
    return out.reshape(np.shape(phases))


def fejer_power(phases, long T, long c):
    cdef double[::1] th = np.ascontiguousarray(phases, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = th.shape[0], i
    cdef long k
    cdef double f, acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            f = _fejer(th[i], T)
            acc = 1.0
            for k in range(c):
                acc *= f
            o[i] = acc
    return out.reshape(np.shape(phases))


def leak_bound(long T, double theta, Py_ssize_t npts):
    cdef Py_ssize_t k, kbest = 0
    cdef double step = (M_PI - theta) / (npts - 1) if npts > 1 else 0.0
    cdef double x, v, best = -1.0
    cdef double a, b, x1, x2, f1, f2
    cdef int it
    with nogil:
        for k in range(npts):
            # matches numpy.linspace: exact endpoint at the last sample
            x = theta + k * step if k < npts - 1 else M_PI
            v = _fejer(x, T)
            if v > best:
                best = v
                kbest = k
        a = theta + (kbest - 1) * step if kbest > 0 else theta
        b = theta + (kbest + 1) * step if kbest + 1 < npts - 1 else M_PI
        x1 = b - _GOLDEN * (b - a)
        x2 = a + _GOLDEN * (b - a)
        f1 = _fejer(x1, T)
        f2 = _fejer(x2, T)
        for it in range(_REFINE_ITERS):
            if f1 < f2:
                a = x1
                x1 = x2
                f1 = f2
                x2 = a + _GOLDEN * (b - a)
                f2 = _fejer(x2, T)
            else:
                b = x2
                x2 = x1
                f2 = f1
                x1 = b - _GOLDEN * (b - a)
                f1 = _fejer(x1, T)
    if f1 > best:
        best = f1
    if f2 > best:
        best = f2
    return best


def one_copy_amplitudes(double theta, long T):
    out = np.empty(T, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef long y, k
    cdef double phi, half, s, mag, re, im
    with nogil:
        for y in range(T):
            phi = theta - 2.0 * M_PI * y / T
            half = 0.5 * phi
            s = sin(half)
            if fabs(s) > 1e-12:
                mag = sin(T * half) / (T * s)
                o[y] = mag * cos((T - 1) * half) + 1j * mag * sin((T - 1) * half)
            else:
                re = 0.0
                im = 0.0
                for k in range(T):
                    re += cos(k * phi)
                    im += sin(k * phi)
                o[y] = re / T + 1j * im / T
    return out
