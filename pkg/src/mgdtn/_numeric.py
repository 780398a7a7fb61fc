"""Shared numeric helpers for the solver modules.

The brute-force oracle (``mgdtn.oracle``) intentionally does NOT import from
here: it keeps its own summation paths so it remains an independent check.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["binom_pmf", "bisect_decreasing", "bisect_sign"]


def binom_pmf(n: int, p: float) -> np.ndarray:
    """Binomial(n, p) pmf over k = 0..n, stable for extreme p via log space."""
    if n == 0:
        return np.ones(1)
    if p <= 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if p >= 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    k = np.arange(n + 1)
    log_comb = (
        math.lgamma(n + 1)
        - np.array([math.lgamma(i + 1) + math.lgamma(n - i + 1) for i in k])
    )
    log_pmf = log_comb + k * math.log(p) + (n - k) * math.log1p(-p)
    return np.exp(log_pmf)


def bisect_decreasing(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of a strictly decreasing ``fn`` on [lo, hi], to absolute x-tolerance.

    Requires fn(lo) >= 0 >= fn(hi); monotonicity makes the bracket invariant,
    so no safeguarding is needed.
    """
    f_lo = fn(lo)
    f_hi = fn(hi)
    if f_lo < 0 or f_hi > 0:
        raise ValueError(
            f"bisection bracket does not straddle a root: f({lo})={f_lo}, f({hi})={f_hi}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if fn(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_sign(fn, lo: float, hi: float, f_lo: float, f_hi: float, tol: float = 1e-12) -> float:
    """Root of a continuous ``fn`` inside a bracket with opposite end signs.

    Direction-agnostic companion to :func:`bisect_decreasing` for functions
    that are only monotone locally (endpoint values are passed in since the
    caller usually has them already).
    """
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError("bracket endpoints must have opposite signs")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
