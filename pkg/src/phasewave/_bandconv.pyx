# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled band-convolution kernel (hot inner loop of band extraction).

Semantics match phasewave._bandconv_py.band_convolve.  The modulation
factor exp(i w (x_i - x_s)) is split into per-target and per-sample
phases, and sinc's sine is expanded over precomputed per-sample values,
so the inner accumulation runs with no libm calls at all.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin

BACKEND = "cython"


def band_convolve(
    double[::1] xs,
    double complex[::1] fvals,
    double[::1] targets,
    long[::1] lo,
    long[::1] hi,
    double[::1] lengths,
    double omega,
    double dk,
):
    cdef Py_ssize_t n = targets.shape[0]
    cdef Py_ssize_t m = xs.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] out_v = out
    # per-sample precomputation: cb/sb for the sinc expansion and the
    # down-modulated sample values exp(-i w x_s) f(x_s)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cb_a = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sb_a = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pr_a = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pi_a = np.empty(m)
    cdef double[::1] cb = cb_a, sb = sb_a, pr = pr_a, pi = pi_a
    cdef Py_ssize_t i, j
    cdef double b, cw, sw, fre, fim
    cdef double half = 0.5 * dk
    for j in range(m):
        b = half * xs[j]
        cb[j] = cos(b)
        sb[j] = sin(b)
        cw = cos(omega * xs[j])
        sw = sin(omega * xs[j])
        fre = fvals[j].real
        fim = fvals[j].imag
        pr[j] = cw * fre + sw * fim       # exp(-i w x_s) * f
        pi[j] = cw * fim - sw * fre
    cdef double a, sa, ca, y, snc, acc_re, acc_im, scale, phr, phi_
    cdef double scale0 = dk / (2.0 * 3.141592653589793)
    for i in range(n):
        a = half * targets[i]
        sa = sin(a)
        ca = cos(a)
        acc_re = 0.0
        acc_im = 0.0
        for j in range(lo[i], hi[i]):
            y = a - half * xs[j]
            if fabs(y) > 1e-9:
                snc = (sa * cb[j] - ca * sb[j]) / y
            else:
                snc = 1.0
            acc_re += snc * pr[j]
            acc_im += snc * pi[j]
        scale = scale0 * lengths[i] / (hi[i] - lo[i])
        phr = cos(omega * targets[i]) * scale
        phi_ = sin(omega * targets[i]) * scale
        out_v[i] = (acc_re * phr - acc_im * phi_) \
            + 1j * (acc_re * phi_ + acc_im * phr)
    return out
