"""Pure-Python/numpy implementations of the hot kernels.

Same signatures as the compiled ``_kernels`` module; used when the
extension is not built or ``QCLDGM_PURE=1`` is set.
"""

from __future__ import annotations

import numpy as np

LLR_CLIP = 38.0
_TANH_MAX = np.nextafter(1.0, 0.0)


def sparse_mul(a, b, n):
    odd = set()
    for e in a:
        for f in b:
            odd ^= {(e + f) % n}
    return tuple(sorted(odd))


def cyclic_accumulate(out, bits, support, n):
    """out ^= bits(x) * support(x) in R_n; ``out`` and ``bits`` are uint8
    arrays of length n."""
    for e in support:
        out ^= np.roll(bits, e)


def spa_decode(var_idx, dc, llr, max_iter, min_sum=False):
    """Flooding LLR sum-product decoder on a check-regular graph.

    var_idx holds, check by check, the ``dc`` variable indices of every
    check. Returns (bits, iterations, converged, posterior).
    """
    llr = np.clip(np.asarray(llr, dtype=np.float64), -LLR_CLIP, LLR_CLIP)
    N = llr.shape[0]
    edges = var_idx.shape[0]
    m = edges // dc
    var2d = var_idx.reshape(m, dc)

    posterior = llr.copy()
    bits = (posterior <= 0).astype(np.uint8)
    if not (bits[var2d].sum(axis=1) & 1).any():
        return bits, 0, True, posterior

    r = np.zeros(edges, dtype=np.float64)
    for it in range(1, max_iter + 1):
        q = (posterior[var_idx] - r).reshape(m, dc)
        if min_sum:
            r = _minsum_check(q).ravel()
        else:
            r = _tanh_check(q).ravel()
        posterior = llr + np.bincount(var_idx, weights=r, minlength=N)
        np.clip(posterior, -LLR_CLIP, LLR_CLIP, out=posterior)
        bits = (posterior <= 0).astype(np.uint8)
        if not (bits[var2d].sum(axis=1) & 1).any():
            return bits, it, True, posterior
    return bits, max_iter, False, posterior


def _tanh_check(q):
    t = np.tanh(0.5 * q)
    m, dc = t.shape
    # product over all other edges via prefix/suffix products; exact when
    # some incoming message is 0
    pre = np.ones((m, dc + 1))
    suf = np.ones((m, dc + 1))
    np.cumprod(t, axis=1, out=pre[:, 1:])
    np.cumprod(t[:, ::-1], axis=1, out=suf[:, 1:])
    suf = suf[:, ::-1]
    ext = pre[:, :dc] * suf[:, 1:]
    np.clip(ext, -_TANH_MAX, _TANH_MAX, out=ext)
    out = 2.0 * np.arctanh(ext)
    np.clip(out, -LLR_CLIP, LLR_CLIP, out=out)
    return out


def _minsum_check(q):
    mag = np.abs(q)
    sgn = np.where(q < 0, -1.0, 1.0)
    total_sign = np.prod(sgn, axis=1, keepdims=True)
    order = np.argsort(mag, axis=1)
    rows = np.arange(q.shape[0])
    min1 = mag[rows, order[:, 0]][:, None]
    min2 = mag[rows, order[:, 1]][:, None]
    is_min = np.zeros_like(mag, dtype=bool)
    is_min[rows, order[:, 0]] = True
    out_mag = np.where(is_min, min2, min1)
    return total_sign * sgn * out_mag
