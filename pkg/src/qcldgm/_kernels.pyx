# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: sparse cyclic convolution, encoder accumulation
and the flooding sum-product decoder."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

cdef double LLR_CLIP = 38.0
cdef double TANH_MAX = 0.9999999999999999


cdef int _cmp_long(const void* a, const void* b) noexcept nogil:
    cdef long x = (<long*>a)[0]
    cdef long y = (<long*>b)[0]
    return (x > y) - (x < y)


def sparse_mul(tuple a, tuple b, long n):
    cdef Py_ssize_t wa = len(a), wb = len(b), total = wa * wb
    cdef Py_ssize_t i, j, k = 0, run
    cdef long e
    if total == 0:
        return ()
    cdef long* av = <long*>malloc(wa * sizeof(long))
    cdef long* bv = <long*>malloc(wb * sizeof(long))
    cdef long* sums = <long*>malloc(total * sizeof(long))
    if av == NULL or bv == NULL or sums == NULL:
        free(av); free(bv); free(sums)
        raise MemoryError()
    try:
        for i in range(wa):
            av[i] = a[i]
        for j in range(wb):
            bv[j] = b[j]
        for i in range(wa):
            for j in range(wb):
                e = av[i] + bv[j]
                if e >= n:
                    e -= n
                sums[k] = e
                k += 1
        qsort(sums, total, sizeof(long), _cmp_long)
        out = []
        i = 0
        while i < total:
            run = 1
            while i + run < total and sums[i + run] == sums[i]:
                run += 1
            if run & 1:
                out.append(sums[i])
            i += run
        return tuple(out)
    finally:
        free(av); free(bv); free(sums)


def cyclic_accumulate(cnp.uint8_t[::1] out, const cnp.uint8_t[::1] bits, tuple support, long n):
    # out[(j + e) mod n] ^= bits[j], split into two straight runs per shift
    cdef Py_ssize_t j
    cdef long e
    cdef cnp.uint8_t* o = &out[0]
    cdef const cnp.uint8_t* b = &bits[0]
    for e in support:
        with nogil:
            for j in range(n - e):
                o[e + j] ^= b[j]
            for j in range(e):
                o[j] ^= b[n - e + j]


cdef inline double _clip(double v) noexcept nogil:
    if v > LLR_CLIP:
        return LLR_CLIP
    if v < -LLR_CLIP:
        return -LLR_CLIP
    return v


cdef bint _syndrome_zero(const long* var, Py_ssize_t m, Py_ssize_t dc,
                         const cnp.uint8_t* bits) noexcept nogil:
    cdef Py_ssize_t c, t
    cdef int par
    for c in range(m):
        par = 0
        for t in range(dc):
            par ^= bits[var[c * dc + t]]
        if par:
            return False
    return True


cdef void _tanh_pass(const long* var, const double* post, const double* r,
                     double* t, Py_ssize_t E) noexcept nogil:
    # t = tanh((post[v] - r) / 2) for every edge; split so the exp loop vectorizes
    cdef Py_ssize_t e
    for e in range(E):
        t[e] = post[var[e]] - r[e]
    for e in range(E):
        t[e] = exp(t[e])
    for e in range(E):
        t[e] = (t[e] - 1.0) / (t[e] + 1.0)


cdef void _extrinsic_products(double* t, double* x, Py_ssize_t m, Py_ssize_t dc) noexcept nogil:
    # x[k] = prod_{j != k} t[j] within each check, by prefix and suffix products
    cdef Py_ssize_t c, k, base
    cdef double run
    for c in range(m):
        base = c * dc
        run = 1.0
        for k in range(dc):
            x[base + k] = run
            run *= t[base + k]
        run = 1.0
        for k in range(dc - 1, -1, -1):
            x[base + k] *= run
            run *= t[base + k]


cdef void _atanh_pass(const double* x, double* r, Py_ssize_t E) noexcept nogil:
    # r = 2 atanh(x), saturating at the LLR clip
    cdef Py_ssize_t e
    cdef double v
    for e in range(E):
        v = x[e]
        v = TANH_MAX if v > TANH_MAX else v
        v = -TANH_MAX if v < -TANH_MAX else v
        r[e] = (1.0 + v) / (1.0 - v)
    for e in range(E):
        r[e] = log(r[e])
    for e in range(E):
        v = r[e]
        v = LLR_CLIP if v > LLR_CLIP else v
        r[e] = -LLR_CLIP if v < -LLR_CLIP else v


cdef void _minsum_pass(const long* var, const double* post, double* r,
                       double* tv, Py_ssize_t m, Py_ssize_t dc) noexcept nogil:
    cdef Py_ssize_t c, k, base, argmin
    cdef double q, mag, min1, min2, sgn, ext
    for c in range(m):
        base = c * dc
        min1 = 1e300
        min2 = 1e300
        sgn = 1.0
        argmin = 0
        for k in range(dc):
            q = post[var[base + k]] - r[base + k]
            tv[k] = q
            if q < 0:
                sgn = -sgn
            mag = fabs(q)
            if mag < min1:
                min2 = min1
                min1 = mag
                argmin = k
            elif mag < min2:
                min2 = mag
        for k in range(dc):
            mag = min2 if k == argmin else min1
            ext = sgn * mag
            if tv[k] < 0:
                ext = -ext
            r[base + k] = ext


def spa_decode(cnp.ndarray var_idx_arr, long dc, llr_in, long max_iter, bint min_sum=False):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] var_np = np.ascontiguousarray(var_idx_arr, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ch_np = np.clip(
        np.ascontiguousarray(llr_in, dtype=np.float64), -LLR_CLIP, LLR_CLIP)
    cdef Py_ssize_t N = ch_np.shape[0]
    cdef Py_ssize_t E = var_np.shape[0]
    cdef Py_ssize_t m = E // dc
    cdef cnp.ndarray[cnp.float64_t, ndim=1] post_np = ch_np.copy()
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] bits_np = np.empty(N, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_np = np.zeros(E, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t_np = np.empty(E, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_np = np.empty(E, dtype=np.float64)

    cdef const long* var = <const long*>var_np.data
    cdef double* ch = <double*>ch_np.data
    cdef double* post = <double*>post_np.data
    cdef cnp.uint8_t* bits = <cnp.uint8_t*>bits_np.data
    cdef double* r = <double*>r_np.data
    cdef double* t = <double*>t_np.data
    cdef double* x = <double*>x_np.data

    cdef Py_ssize_t i, e
    cdef long it
    cdef bint done

    with nogil:
        for i in range(N):
            bits[i] = 1 if post[i] <= 0.0 else 0
        done = _syndrome_zero(var, m, dc, bits)
    if done:
        return bits_np, 0, True, post_np

    for it in range(1, max_iter + 1):
        with nogil:
            if min_sum:
                _minsum_pass(var, post, r, t, m, dc)
            else:
                _tanh_pass(var, post, r, t, E)
                _extrinsic_products(t, x, m, dc)
                _atanh_pass(x, r, E)
            for i in range(N):
                post[i] = ch[i]
            for e in range(E):
                post[var[e]] += r[e]
            for i in range(N):
                post[i] = _clip(post[i])
                bits[i] = 1 if post[i] <= 0.0 else 0
            done = _syndrome_zero(var, m, dc, bits)
        if done:
            return bits_np, it, True, post_np
    return bits_np, max_iter, False, post_np
