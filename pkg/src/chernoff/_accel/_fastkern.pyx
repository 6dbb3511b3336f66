# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the fallback kernels.

Row sums run in ascending node index (sequential), which fixes the floating
point reduction order and makes results bit-reproducible run to run.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp

cnp.import_array()


def kernel_matrix(src, dst, weights, double inv_two_h):
    """Row-stochastic Gaussian kernel matrix between two point clouds."""
    cdef double[:, ::1] s = np.ascontiguousarray(src, dtype=np.float64)
    cdef double[:, ::1] d = np.ascontiguousarray(dst, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t ns = s.shape[0], nd = d.shape[0], m = s.shape[1]
    out_arr = np.empty((ns, nd), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    d2_arr = np.empty(nd, dtype=np.float64)
    cdef double[::1] d2 = d2_arr
    cdef Py_ssize_t i, j, c
    cdef double acc, diff, lo, total, v
    for i in range(ns):
        lo = INFINITY
        for j in range(nd):
            acc = 0.0
            for c in range(m):
                diff = d[j, c] - s[i, c]
                acc += diff * diff
            d2[j] = acc
            if acc < lo:
                lo = acc
        total = 0.0
        for j in range(nd):
            v = w[j] * exp(-(d2[j] - lo) * inv_two_h)
            out[i, j] = v
            total += v
        for j in range(nd):
            out[i, j] /= total
    return out_arr


def _chain_advance(double[:, ::1] cdf, long long[::1] states, double[::1] uniforms):
    cdef Py_ssize_t n_paths = states.shape[0], nd = cdf.shape[1]
    out_arr = np.empty(n_paths, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t p, lo, hi, mid
    cdef long long row
    cdef double u
    for p in range(n_paths):
        row = states[p]
        u = uniforms[p]
        lo = 0
        hi = nd
        while lo < hi:
            mid = (lo + hi) >> 1
            if cdf[row, mid] <= u:
                lo = mid + 1
            else:
                hi = mid
        out[p] = lo
    return out_arr


def make_sampler(cdf):
    """Categorical sampler over the rows of a CDF matrix."""
    cdef cnp.ndarray cdf_arr = np.ascontiguousarray(cdf, dtype=np.float64)

    def advance(states, uniforms):
        return _chain_advance(
            cdf_arr,
            np.ascontiguousarray(states, dtype=np.int64),
            np.ascontiguousarray(uniforms, dtype=np.float64),
        )

    return advance
