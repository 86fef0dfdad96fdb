"""Bessel utilities: ascending series for J_k and I_k, and positive zeros
of J_k by bracketing + bisection.

Series evaluation is validated for |x| <= 50 (float64 cancellation limits
J_k accuracy well before that; the zeros used downstream sit below x = 30).
"""

from __future__ import annotations

import math

from .errors import RangeExceededError

_SERIES_RANGE = 50.0


def bessel_I(k: int, x: complex) -> complex:
    """Modified Bessel function of the first kind, integer order.

    Ascending series sum_m (x/2)^(|k|+2m) / (m! (|k|+m)!); I_{-k} = I_k.
    """
    if abs(x) > _SERIES_RANGE:
        raise RangeExceededError("series validated for |x| <= %g" % _SERIES_RANGE)
    return _ascending_series(abs(int(k)), x, alternating=False)


def bessel_J(k: int, x: complex) -> complex:
    """Bessel function of the first kind, integer order, by ascending series."""
    if abs(x) > _SERIES_RANGE:
        raise RangeExceededError("series validated for |x| <= %g" % _SERIES_RANGE)
    k = int(k)
    if k < 0:
        v = _ascending_series(-k, x, alternating=True)
        return -v if k % 2 else v
    return _ascending_series(k, x, alternating=True)


def _ascending_series(k: int, x: complex, alternating: bool) -> complex:
    half = x / 2.0
    # leading term (x/2)^k / k!
    term = 1.0 + 0.0j
    for j in range(1, k + 1):
        term *= half / j
    total = term
    m = 0
    hh = half * half
    if alternating:
        hh = -hh
    while True:
        m += 1
        term *= hh / (m * (k + m))
        total += term
        if abs(term) <= 1e-18 * max(abs(total), 1e-30) and m > 4:
            return total
        if m > 400:
            return total


def bessel_j_zero(k: int, j: int, *, xtol: float = 1e-13) -> float:
    """j-th positive zero of J_k (j >= 1), by sign scan and bisection."""
    if j < 1:
        raise ValueError("zero index j must be >= 1")
    k = abs(int(k))
    # zeros of J_k are separated by more than pi/2 well past the first one;
    # a pi/8 scan step cannot skip a sign change
    step = math.pi / 8.0
    x = max(1e-8, 0.5 * k)
    found = 0
    fx = bessel_J(k, x).real
    while True:
        x2 = x + step
        if x2 > _SERIES_RANGE:
            raise RangeExceededError(
                "zero %d of J_%d lies beyond the validated range" % (j, k)
            )
        f2 = bessel_J(k, x2).real
        if fx == 0.0:
            found += 1
            if found == j:
                return x
        elif fx * f2 < 0.0:
            found += 1
            if found == j:
                return _bisect_real(lambda t: bessel_J(k, t).real, x, x2, xtol)
        x, fx = x2, f2


def _bisect_real(f, a: float, b: float, xtol: float) -> float:
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        if b - a <= xtol:
            return m
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0.0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)
