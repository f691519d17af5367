"""Vectorized double-double arithmetic on numpy arrays.

A value is represented as an unevaluated sum hi + lo of two float64 arrays
with |lo| <= ulp(hi)/2, giving roughly 32 significant decimal digits.  This
is enough headroom for linear programs whose constraints span the dynamic
range of Gaussian-weighted polynomials, where plain doubles lose the far
sign structure entirely.  The primitives follow Dekker and Knuth: TwoSum,
Split and TwoProd are exact transformations, and the compound operations
keep the error at O(eps^2).

All functions broadcast like the underlying numpy operations and return
(hi, lo) pairs.
"""

from __future__ import annotations

import numpy as np
import mpmath as mp

__all__ = [
    "dd_from_float", "dd_from_mp", "dd_to_mp",
    "dd_add", "dd_sub", "dd_neg", "dd_mul", "dd_div",
    "dd_scale", "dd_sum",
]

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    """Requires |a| >= |b| elementwise (guaranteed after a TwoSum)."""
    s = a + b
    err = b - (s - a)
    return s, err


def _two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def dd_from_float(a):
    a = np.asarray(a, dtype=float)
    return a.copy(), np.zeros_like(a)


def dd_from_mp(values, shape=None):
    """Convert an iterable of mpmath numbers to a (hi, lo) pair."""
    hi = np.empty(len(values))
    lo = np.empty(len(values))
    for i, v in enumerate(values):
        h = float(v)
        hi[i] = h
        lo[i] = float(v - h) if mp.isfinite(h) else 0.0
    if shape is not None:
        hi = hi.reshape(shape)
        lo = lo.reshape(shape)
    return hi, lo


def dd_to_mp(hi, lo):
    return mp.mpf(float(hi)) + mp.mpf(float(lo))


def dd_add(ahi, alo, bhi, blo):
    s, e = _two_sum(ahi, bhi)
    e = e + (alo + blo)
    return _quick_two_sum(s, e)


def dd_neg(ahi, alo):
    return -ahi, -alo


def dd_sub(ahi, alo, bhi, blo):
    return dd_add(ahi, alo, -bhi, -blo)


def dd_mul(ahi, alo, bhi, blo):
    p, e = _two_prod(ahi, bhi)
    e = e + (ahi * blo + alo * bhi)
    return _quick_two_sum(p, e)


def dd_scale(ahi, alo, s):
    """Multiply by an exact float64 scalar or array."""
    p, e = _two_prod(ahi, s)
    e = e + alo * s
    return _quick_two_sum(p, e)


def dd_div(ahi, alo, bhi, blo):
    """Quotient with one Newton correction: relative error O(eps^2)."""
    q1 = ahi / bhi
    phi, plo = dd_mul(q1, np.zeros_like(q1), bhi, blo)
    rhi, rlo = dd_add(ahi, alo, -phi, -plo)
    q2 = (rhi + rlo) / bhi
    return _quick_two_sum(q1, q2)


def dd_sum(ahi, alo, axis=None):
    """Sum along an axis by cascading TwoSums (order-independent enough
    for tableau-scale accumulations)."""
    shi = np.take(ahi, 0, axis=axis) if axis is not None else None
    if axis is None:
        hi_flat = ahi.ravel()
        lo_flat = alo.ravel()
        shi = np.array(0.0)
        slo = np.array(0.0)
        for i in range(hi_flat.size):
            shi, slo = dd_add(shi, slo, hi_flat[i], lo_flat[i])
        return shi, slo
    n = ahi.shape[axis]
    shi = np.take(ahi, 0, axis=axis).copy()
    slo = np.take(alo, 0, axis=axis).copy()
    for i in range(1, n):
        shi, slo = dd_add(shi, slo, np.take(ahi, i, axis=axis),
                          np.take(alo, i, axis=axis))
    return shi, slo
