# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coherence-length scans.

Arithmetic mirrors ``_kernels_py`` operation for operation so both backends
produce bit-identical fields: bilinear sample as x-lerp then y-lerp,
sequential running sums, integer powers by repeated multiplication.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange, parallel
from libc.math cimport fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"


cdef inline double _sample(const double[:, ::1] img, Py_ssize_t y0, Py_ssize_t x0,
                           double fx, double fy) noexcept nogil:
    cdef double a = img[y0, x0]
    cdef double b = img[y0, x0 + 1]
    cdef double c = img[y0 + 1, x0]
    cdef double e = img[y0 + 1, x0 + 1]
    cdef double top = a + fx * (b - a)
    cdef double bot = c + fx * (e - c)
    return top + fy * (bot - top)


def scan_order0(const double[:, ::1] padded, Py_ssize_t margin,
                Py_ssize_t rows, Py_ssize_t cols,
                const cnp.int64_t[:, ::1] ix, const cnp.int64_t[:, ::1] iy,
                const double[:, ::1] fx, const double[:, ::1] fy,
                double m0, double t, int threads=1):
    """First radius whose running directional mean is within ``t`` of ``m0``."""
    cdef Py_ssize_t ndir = ix.shape[0]
    cdef Py_ssize_t rmax = ix.shape[1]
    lengths_arr = np.empty((rows, cols, ndir), dtype=np.uint16)
    censored_arr = np.zeros((rows, cols, ndir), dtype=np.uint8)
    cdef cnp.uint16_t[:, :, ::1] lengths = lengths_arr
    cdef cnp.uint8_t[:, :, ::1] censored = censored_arr
    cdef Py_ssize_t r, c, d, j, x, y
    cdef double s, mean
    cdef int found
    if threads < 1:
        threads = 1
    with nogil:
        for r in prange(rows, num_threads=threads, schedule="static"):
            y = r + margin
            for c in range(cols):
                x = c + margin
                for d in range(ndir):
                    s = 0.0
                    found = 0
                    for j in range(rmax):
                        s = s + _sample(padded, y + iy[d, j], x + ix[d, j], fx[d, j], fy[d, j])
                        mean = s / <double>(j + 1)
                        if fabs(mean - m0) <= t:
                            lengths[r, c, d] = <cnp.uint16_t>(j + 1)
                            found = 1
                            break
                    if found == 0:
                        lengths[r, c, d] = <cnp.uint16_t>rmax
                        censored[r, c, d] = 1
    return lengths_arr, censored_arr.view(np.bool_)


def scan_orderk(const double[:, ::1] padded, Py_ssize_t margin,
                Py_ssize_t rows, Py_ssize_t cols,
                const cnp.int64_t[:, ::1] ix, const cnp.int64_t[:, ::1] iy,
                const double[:, ::1] fx, const double[:, ::1] fy,
                int k, double mk, double band, int threads=1):
    """First radius whose order-k directional moment is within ``band`` of ``mk``.

    The moment at radius n is centred on the running mean at the same n.
    """
    cdef Py_ssize_t ndir = ix.shape[0]
    cdef Py_ssize_t rmax = ix.shape[1]
    lengths_arr = np.empty((rows, cols, ndir), dtype=np.uint16)
    censored_arr = np.zeros((rows, cols, ndir), dtype=np.uint8)
    cdef cnp.uint16_t[:, :, ::1] lengths = lengths_arr
    cdef cnp.uint8_t[:, :, ::1] censored = censored_arr
    cdef Py_ssize_t r, c, d, j, q, n, x, y
    cdef double s, mean, acc, dev, p, mkn
    cdef int found
    cdef double *buf
    if threads < 1:
        threads = 1
    if k < 2:
        raise ValueError("moment order must be >= 2")
    with nogil, parallel(num_threads=threads):
        buf = <double *> malloc(rmax * sizeof(double))
        for r in prange(rows, schedule="static"):
            y = r + margin
            for c in range(cols):
                x = c + margin
                for d in range(ndir):
                    s = 0.0
                    found = 0
                    for n in range(rmax):
                        buf[n] = _sample(padded, y + iy[d, n], x + ix[d, n], fx[d, n], fy[d, n])
                        s = s + buf[n]
                        mean = s / <double>(n + 1)
                        acc = 0.0
                        for j in range(n + 1):
                            dev = buf[j] - mean
                            p = dev
                            for q in range(k - 1):
                                p = p * dev
                            acc = acc + p
                        mkn = acc / <double>(n + 1)
                        if fabs(mkn - mk) <= band:
                            lengths[r, c, d] = <cnp.uint16_t>(n + 1)
                            found = 1
                            break
                    if found == 0:
                        lengths[r, c, d] = <cnp.uint16_t>rmax
                        censored[r, c, d] = 1
        free(buf)
    return lengths_arr, censored_arr.view(np.bool_)
