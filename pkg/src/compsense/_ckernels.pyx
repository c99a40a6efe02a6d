# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def splitmix64_fill(state, Py_ssize_t count):
    if count < 0:
        raise ValueError("count must be non-negative")
    cdef uint64_t s = <uint64_t>(int(state) & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(count, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(count):
            s += GAMMA
            o[i] = _mix(s)
    return out, int(s)


# (mag, index) ordering: a is "worse" than b when it has smaller magnitude,
# or equal magnitude and a larger index.
cdef inline bint _worse(double ma, int64_t ia, double mb, int64_t ib) nogil:
    if ma < mb:
        return True
    if ma > mb:
        return False
    return ia > ib


cdef void _sift_down(double* hm, int64_t* hi, Py_ssize_t size, Py_ssize_t pos) nogil:
    cdef Py_ssize_t child
    cdef double tm
    cdef int64_t ti
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and _worse(hm[child + 1], hi[child + 1], hm[child], hi[child]):
            child += 1
        if _worse(hm[child], hi[child], hm[pos], hi[pos]):
            tm = hm[pos]; hm[pos] = hm[child]; hm[child] = tm
            ti = hi[pos]; hi[pos] = hi[child]; hi[child] = ti
            pos = child
        else:
            break


cdef void _select(const double* m, Py_ssize_t n, Py_ssize_t k, double* hm, int64_t* hi) nogil:
    # min-heap (by "worse") of the best k seen so far; root is the weakest keeper
    cdef Py_ssize_t i, j
    for i in range(k):
        hm[i] = m[i]
        hi[i] = i
    j = k // 2
    while j > 0:
        j -= 1
        _sift_down(hm, hi, k, j)
    for i in range(k, n):
        if _worse(hm[0], hi[0], m[i], i):
            hm[0] = m[i]
            hi[0] = i
            _sift_down(hm, hi, k, 0)


def top_k_indices(mag2, Py_ssize_t k):
    cdef const double[::1] m = np.ascontiguousarray(mag2, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0]
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if k >= n:
        return np.arange(n, dtype=np.int64)
    hm_arr = np.empty(k, dtype=np.float64)
    hi_arr = np.empty(k, dtype=np.int64)
    cdef double[::1] hm = hm_arr
    cdef int64_t[::1] hi = hi_arr
    with nogil:
        _select(&m[0], n, k, &hm[0], &hi[0])
    hi_arr.sort()
    return hi_arr


cdef void _head(double[::1] v, Py_ssize_t k, double* sq, double* hm, int64_t* hi, char* keep) nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    if k >= n:
        return
    if k <= 0:
        for i in range(n):
            v[i] = 0.0
        return
    for i in range(n):
        sq[i] = v[i] * v[i]
        keep[i] = 0
    _select(sq, n, k, hm, hi)
    for i in range(k):
        keep[hi[i]] = 1
    for i in range(n):
        if not keep[i]:
            v[i] = 0.0


def iht_loop_real(F, y, xh, e, Py_ssize_t k, Py_ssize_t t, Py_ssize_t iterations):
    cdef const double[:, ::1] A = np.ascontiguousarray(F, dtype=np.float64)
    cdef const double[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    xh_arr = np.array(xh, dtype=np.float64)
    e_arr = np.array(e, dtype=np.float64)
    cdef double[::1] x = xh_arr
    cdef double[::1] ee = e_arr
    cdef Py_ssize_t n = yy.shape[0]
    r_arr = np.empty(n, dtype=np.float64)
    sq_arr = np.empty(n, dtype=np.float64)
    hm_arr = np.empty(max(k, t, 1), dtype=np.float64)
    hi_arr = np.empty(max(k, t, 1), dtype=np.int64)
    keep_arr = np.empty(n, dtype=np.int8)
    cdef double[::1] r = r_arr
    cdef double[::1] sq = sq_arr
    cdef double[::1] hm = hm_arr
    cdef int64_t[::1] hi = hi_arr
    cdef char[::1] keep = keep_arr
    cdef Py_ssize_t it, i, j
    # F is row-major, so BLAS sees F^T: trans 'T' applies F, 'N' applies F^T
    cdef int nn = <int>n
    cdef int one = 1
    cdef double d_one = 1.0
    cdef double d_neg = -1.0
    cdef char tr = b'T'
    cdef char nt = b'N'
    with nogil:
        for it in range(iterations):
            for i in range(n):
                r[i] = yy[i] - ee[i]
            dgemv(&tr, &nn, &nn, &d_neg, <double*>&A[0, 0], &nn, &x[0], &one, &d_one, &r[0], &one)
            dgemv(&nt, &nn, &nn, &d_one, <double*>&A[0, 0], &nn, &r[0], &one, &d_one, &x[0], &one)
            for j in range(n):
                ee[j] = ee[j] + r[j]
            _head(x, k, &sq[0], &hm[0], &hi[0], &keep[0])
            _head(ee, t, &sq[0], &hm[0], &hi[0], &keep[0])
    return xh_arr, e_arr
