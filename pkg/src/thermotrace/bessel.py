"""First-kind Bessel functions and their zeros, dependency-free.

Evaluation uses the cosine integral representation

    J_m(x) = (1/pi) int_0^pi cos(m t - x sin t) dt

with a midpoint rule; the integrand extends to an even, smooth, 2-pi
periodic function, so the rule converges spectrally once the node count
clears the integrand bandwidth ``m + x``.  Zeros are bracketed by a grid
scan (same-order zeros are never closer than ~3, and every zero of J_m and
J_m' lies above x = m) and then bisected.
"""

from __future__ import annotations

import numpy as np

from .errors import BesselZeroError

_SCAN_STEP = 0.25
_BISECT_TOL = 1e-12


def _node_count(order: int, x_max: float) -> int:
    return max(64, int(1.5 * (order + x_max)) + 48)


def bessel_j(order: int, x) -> np.ndarray:
    """J_m evaluated on a scalar or array argument."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nodes = _node_count(order, float(np.max(np.abs(x))) if x.size else 0.0)
    theta = (np.arange(nodes) + 0.5) * (np.pi / nodes)
    sin_t = np.sin(theta)
    vals = np.cos(order * theta[None, :] - x[:, None] * sin_t[None, :]).mean(axis=1)
    return vals


def bessel_j_derivative(order: int, x) -> np.ndarray:
    """J_m' via the recurrence ``2 J_m' = J_{m-1} - J_{m+1}`` (J_0' = -J_1)."""
    if order == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(order - 1, x) - bessel_j(order + 1, x))


def _bisect_batch(f, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    flo = f(lo)
    fhi = f(hi)
    bad = flo * fhi > 0
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise BesselZeroError(-1, idx, "bracket endpoints have equal sign")
    lo = lo.copy()
    hi = hi.copy()
    while np.max(hi - lo) > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        left = flo * fmid <= 0
        hi = np.where(left, mid, hi)
        fhi = np.where(left, fmid, fhi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fmid)
    return 0.5 * (lo + hi)


def _zeros_of(f, order: int, upper: float, start: float) -> np.ndarray:
    if upper <= start:
        return np.zeros(0)
    grid = np.arange(start, upper + _SCAN_STEP, _SCAN_STEP)
    grid[-1] = min(grid[-1], upper)
    vals = f(grid)
    sign_change = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    exact = np.nonzero(vals == 0.0)[0]
    lo = grid[sign_change]
    hi = grid[sign_change + 1]
    zeros = _bisect_batch(f, lo, hi) if lo.size else np.zeros(0)
    if exact.size:
        zeros = np.sort(np.concatenate([zeros, grid[exact]]))
    return zeros[zeros <= upper]


def bessel_zeros_upto(order: int, upper: float) -> np.ndarray:
    """All positive zeros of J_m at or below ``upper``, ascending.

    Every zero of J_m lies strictly above ``m``, so the scan starts there.
    """
    start = 0.05 if order == 0 else float(order)
    return _zeros_of(lambda x: bessel_j(order, x), order, upper, start)


def bessel_derivative_zeros_upto(order: int, upper: float) -> np.ndarray:
    """All positive zeros of J_m' at or below ``upper``, ascending.

    For m >= 1 the first critical point exceeds ``sqrt(m (m+2)) > m``; for
    m = 0 the zeros coincide with those of J_1.
    """
    if order == 0:
        return bessel_zeros_upto(1, upper)
    return _zeros_of(lambda x: bessel_j_derivative(order, x), order, upper,
                     float(order))
