"""Integer-order Bessel functions of the first kind and their positive zeros.

Small arguments use the ascending series; everything else goes through
Miller's backward recurrence normalised by ``J_0 + 2 * sum(J_2k) = 1``.
"""
from __future__ import annotations

import math

import numpy as np

SERIES_CUTOFF = 1.0
_RESCALE = 1e200


class BesselZeroError(RuntimeError):
    """A bracket or bisection for the zero ``j_{m,k}`` did not converge."""

    def __init__(self, m: int, k: int, reason: str):
        super().__init__(f"zero j_({m},{k}) failed: {reason}")
        self.m = m
        self.k = k


def _series(order: int, x: np.ndarray, terms: int = 30) -> np.ndarray:
    half = 0.5 * x
    term = half**order / math.factorial(order)
    total = term.copy()
    q = -half * half
    for j in range(1, terms):
        term = term * q / (j * (j + order))
        total = total + term
    return total


def _miller(max_order: int, x: np.ndarray) -> np.ndarray:
    """J_0..J_max_order at strictly positive ``x`` by backward recurrence."""
    top = max(max_order, int(np.max(x)))
    start = top + 20 + int(math.sqrt(40.0 * max(top, 1)))
    start += start % 2
    out = np.zeros((max_order + 1,) + x.shape)
    nxt = np.zeros_like(x)
    cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        prev = (2.0 * k / x) * cur - nxt
        nxt, cur = cur, prev
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * cur
        if k - 1 <= max_order:
            out[k - 1] = cur
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            cur *= scale
            nxt *= scale
            norm *= scale
            out *= scale
    norm += cur
    return out / norm


def jn_all(max_order: int, x) -> np.ndarray:
    """Return ``J_m(x)`` for ``m = 0..max_order`` stacked along axis 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("jn_all expects non-negative arguments")
    flat = x.reshape(-1)
    out = np.zeros((max_order + 1, flat.size))
    small = flat < SERIES_CUTOFF
    if np.any(small):
        xs = flat[small]
        for m in range(max_order + 1):
            out[m, small] = _series(m, xs)
    if np.any(~small):
        out[:, ~small] = _miller(max_order, flat[~small])
    return out.reshape((max_order + 1,) + x.shape)


def jn(order: int, x) -> np.ndarray:
    """``J_order(x)`` for a non-negative integer order."""
    if order < 0:
        return (-1) ** order * jn(-order, x)
    return jn_all(order, x)[order]


def jn_derivative(order: int, x) -> np.ndarray:
    """``J'_order(x)`` via ``(J_{m-1} - J_{m+1}) / 2``."""
    vals = jn_all(abs(order) + 1, x)
    if order == 0:
        return -vals[1]
    return 0.5 * (vals[order - 1] - vals[order + 1])


def bessel_zeros(order: int, count: int, tol: float = 1e-13, step: float = 0.1,
                 max_iter: int = 200) -> np.ndarray:
    """First ``count`` positive zeros of ``J_order`` by sign-change bisection.

    The scan starts just above zero (all positive zeros of ``J_m`` exceed ``m``)
    and walks forward in increments of ``step`` until ``count`` sign changes are
    bracketed. Each bracket is then bisected until its width is below ``tol``.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if count < 1:
        return np.zeros(0)
    limit = order + (count + 2) * math.pi + 10.0
    grid = np.arange(max(float(order), step), limit + step, step)
    vals = jn(order, grid)
    change = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    if change.size < count:
        raise BesselZeroError(order, change.size + 1, "no sign change before scan limit")
    change = change[:count]
    lo_list = grid[change]
    hi_list = grid[change + 1]
    lo = np.array(lo_list)
    hi = np.array(hi_list)
    flo = jn(order, lo)
    for _ in range(max_iter):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        fm = jn(order, mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    else:
        bad = int(np.argmax(hi - lo)) + 1
        raise BesselZeroError(order, bad, "bisection did not reach tolerance")
    return 0.5 * (lo + hi)
