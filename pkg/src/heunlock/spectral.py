"""Closed-form functional equations on the Heun parameter space and the
1-D root machinery that traces their zero sets.

Every equation value is returned together with an explicit positive scale
(the sum of the magnitudes of its summands), so root finding and all
acceptance thresholds are scale-free: the product entries feeding these
formulas are only defined up to a common slowly-converging factor, which
cancels in value/scale and in every zero locus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .bessel import bessel_I, bessel_J, bessel_j_zero  # noqa: F401  (re-export)
from .errors import (
    EvenLError,
    ForbiddenLError,
    IntegerNError,
    LostTrackError,
    NoBracketError,
    OddLError,
    ResonantLineError,
    ResonantParametersError,
    ZeroMuError,
)
from .heun import (
    DEFAULT_LENGTH,
    RESONANCE_TOL,
    HeunParams,
    backward_factors,
    forward_factors,
    nearest_integer,
)
from .matprod import Mat2, converging_product, product_column

_TINY = 1e-300


@dataclass(frozen=True)
class EquationValue:
    """Equation left-hand side with its normalization magnitude."""

    value: complex
    scale: float
    truncation_error: float

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError("scale must be positive and finite")

    @property
    def normalized(self) -> float:
        return abs(self.value) / self.scale

    @property
    def signed(self) -> float:
        """Real part over scale; the natural root-finding observable for
        real parameter slices (where the value is real)."""
        return self.value.real / self.scale


def _product(mk, start: int, tol: float):
    return converging_product(mk, start, tol, stop="projective")


def xi(l: complex, lam: complex, mu: complex, tol: float = 1e-12) -> EquationValue:
    """Entire-solution equation value: vanishes exactly when the equation
    with n = l + 1 admits a solution holomorphic on the whole plane."""
    if mu == 0:
        raise ZeroMuError("mu must be nonzero")
    li = nearest_integer(l)
    if li is not None and li < 0:
        raise ForbiddenLError("l = %s is a negative integer" % (l,))

    def mk(k: int) -> Mat2:
        d = k * (k + l)
        return Mat2(1.0 + lam / d, mu * mu / d, 1.0, 0.0)

    # anchor exactly like the entire-solution constructor so the two
    # routes share one product normalization bit for bit
    cols, prod = product_column(mk, 1, DEFAULT_LENGTH)
    r11, r21 = cols[0]
    t1 = lam * r11
    t2 = mu * mu * r21
    # normalize by the coefficient magnitudes at the product's natural
    # entry scale: the plain |t1|+|t2| degenerates when lam = 0 and the
    # cancellation happens inside r21 itself (the adjacency case)
    scale = max((abs(lam) + abs(mu) ** 2) * max(abs(r11), abs(r21)), _TINY)
    trunc = (abs(lam) + abs(mu) ** 2) * prod.tail_bound
    return EquationValue(t1 + t2, scale, trunc)


def zeta(l: complex, omega: float, mu: complex, tol: float = 1e-12) -> EquationValue:
    """xi evaluated on the physical slice lam = 1/(4 omega^2) - mu^2."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    lam = 1.0 / (4.0 * omega * omega) - mu * mu
    return xi(l, lam, mu, tol)


def tridiag_det(l: int, lam: complex, mu: complex) -> complex:
    """Determinant of the l x l tridiagonal pencil whose kernel detects
    polynomial solutions of the companion equation.

    Diagonal (1-j)(l-j+1) + lam, super-diagonal mu*j, sub-diagonal
    mu*(l-j+1); evaluated by the standard three-term determinant recurrence.
    """
    if l < 1:
        raise ValueError("l must be a positive integer")
    d_prev2: complex = 1.0
    d_prev: complex = lam  # j = 1 principal minor: (1-1)(l-1+1) + lam
    if l == 1:
        return d_prev
    for j in range(2, l + 1):
        diag = (1 - j) * (l - j + 1) + lam
        off = mu * (j - 1) * mu * (l - j + 1)
        d = diag * d_prev - off * d_prev2
        d_prev2, d_prev = d_prev, d
    return d_prev


def _pasting_core(p: HeunParams, tol: float) -> EquationValue:
    rprod = _product(forward_factors(p), 1, tol)
    tprod = _product(backward_factors(p), 0, tol)
    t1 = (p.b + 1) * (p.b + p.n - 2) * rprod.value.m11 * tprod.value.m11
    t2 = p.mu * p.mu * rprod.value.m21 * tprod.value.m21
    scale = max(abs(t1) + abs(t2), _TINY)
    trunc = (abs(t1) + abs(t2) + _TINY) * (rprod.tail_bound + tprod.tail_bound)
    return EquationValue(t1 + t2, scale, trunc)


def pasting_value(p: HeunParams, tol: float = 1e-12) -> EquationValue:
    """Non-resonant pasting equation: vanishes exactly when the forward and
    backward halves glue into a monodromy eigenfunction with multiplier
    e^(2 pi i b)."""
    if p.is_resonant:
        raise ResonantParametersError("pasting needs b, b+n non-integer")
    return _pasting_core(p, tol)


def resonant_pasting_value(
    n: complex, lam: complex, mu: complex, tol: float = 1e-12
) -> EquationValue:
    """Pasting equation of the resonant family (b = 0, non-integer n):
    vanishes when a solution holomorphic on the punctured plane exists
    with a nontrivial principal part."""
    if mu == 0:
        raise ZeroMuError("mu must be nonzero")
    if nearest_integer(n) is not None:
        raise IntegerNError("n = %s is an integer" % (n,))
    p0 = HeunParams(n, lam, mu, 0.0)
    tprod = _product(backward_factors(p0), 2, tol)
    t1 = (2 - n + lam) * (4 - n) * tprod.value.m11
    t2 = -mu * mu * (n - 2) * tprod.value.m21
    scale = max(abs(t1) + abs(t2), _TINY)
    trunc = (abs(t1) + abs(t2) + _TINY) * tprod.tail_bound
    return EquationValue(t1 + t2, scale, trunc)


def _dist_to_even(x: float) -> float:
    d = math.fmod(x, 2.0)
    d = abs(d)
    return min(d, 2.0 - d)


def level_curve_value(
    r: float, l: float, omega: float, mu: complex, tol: float = 1e-12,
    *, resonant_band: float = 1e-3,
) -> EquationValue:
    """Level-set equation of the rotation number classes +-r (mod 2).

    Evaluated on the physical slice lam = 1/(4 omega^2) - mu^2 with the
    multiplier exponent b = (r - l)/2; refuses a band of half-width
    ``resonant_band`` in l around the resonant lines l = +-r (mod 2)
    where the equation is not asserted.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    if mu == 0:
        raise ZeroMuError("mu must be nonzero")
    if (_dist_to_even(l - r) < resonant_band
            or _dist_to_even(l + r) < resonant_band):
        raise ResonantLineError(
            "l = %g lies within %g of a resonant line for r = %g"
            % (l, resonant_band, r)
        )
    lam = 1.0 / (4.0 * omega * omega) - mu * mu
    p = HeunParams(l + 1.0, lam, mu, (r - l) / 2.0)
    return _pasting_core(p, tol)


def _normalize_sign(sign) -> int:
    if sign in (1, +1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError("sign must be +1/-1 or 'plus'/'minus'")


def boundary_e0(
    l: float, omega: float, mu: complex, sign, tol: float = 1e-12
) -> EquationValue:
    """Boundary equation for the unipotent-up-to-sign monodromy class with
    exponent -l/2 (valid off even integer l); even in mu."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    if mu == 0:
        raise ZeroMuError("mu must be nonzero")
    if _dist_to_even(l) <= RESONANCE_TOL:
        raise EvenLError("l = %g is an even integer" % l)
    sgn = _normalize_sign(sign)
    lam = 1.0 / (4.0 * omega * omega) - mu * mu
    quarter = l * l / 4.0

    def mk(k: int) -> Mat2:
        d = k * k - quarter
        return Mat2(1.0 + lam / d, mu * mu / d, 1.0, 0.0)

    prod = _product(mk, 0, tol)
    r11, r21 = prod.value.m11, prod.value.m21
    t1 = r21
    t2 = sgn * omega * l * (r21 - r11)
    scale = max(abs(t1) + abs(t2), _TINY)
    trunc = (abs(t1) + abs(t2) + _TINY) * prod.tail_bound
    return EquationValue(t1 + t2, scale, trunc)


def boundary_e1(
    l: float, omega: float, mu: complex, sign, tol: float = 1e-12
) -> EquationValue:
    """Boundary equation for the class with exponent -(l+1)/2 (valid off
    odd integer l)."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    if mu == 0:
        raise ZeroMuError("mu must be nonzero")
    if _dist_to_even(l - 1.0) <= RESONANCE_TOL:
        raise OddLError("l = %g is an odd integer" % l)
    sgn = _normalize_sign(sign)
    lam = 1.0 / (4.0 * omega * omega) - mu * mu
    quarter = l * l / 4.0

    def mk(k: int) -> Mat2:
        d = (k - 0.5) ** 2 - quarter
        return Mat2(1.0 + lam / d, mu * mu / d, 1.0, 0.0)

    prod = _product(mk, 1, tol)
    r11, r21 = prod.value.m11, prod.value.m21
    t1 = r11
    t2 = sgn * 2.0 * omega * mu * (r11 - r21)
    scale = max(abs(t1) + abs(t2), _TINY)
    trunc = (abs(t1) + abs(t2) + _TINY) * prod.tail_bound
    return EquationValue(t1 + t2, scale, trunc)


# ---------------------------------------------------------------------------
# root finding and curve tracing


def find_root_1d(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = 1e-10,
    *,
    complex_mode: bool = False,
    max_iter: int = 200,
) -> float:
    """Root of a scalar equation on a bracket.

    Real mode needs a sign change and bisects (with secant acceleration);
    complex mode minimizes |f|^2 and requires the minimum to fall below
    1e-3 to count as a root.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise ValueError("bracket must be increasing")
    if complex_mode:
        return _minimize_abs2(f, a, b, tol)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise NoBracketError("no sign change on [%g, %g]" % (a, b))
    for _ in range(max_iter):
        if b - a <= tol:
            break
        # secant proposal, clamped inside and safeguarded by bisection
        m = 0.5 * (a + b)
        if fb != fa:
            sec = b - fb * (b - a) / (fb - fa)
            if a + 0.1 * (b - a) < sec < b - 0.1 * (b - a):
                m = sec
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _minimize_abs2(f, a: float, b: float, tol: float) -> float:
    """Golden-section descent on |f|^2 followed by a parabolic polish."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = abs(f(x1)) ** 2, abs(f(x2)) ** 2
    for _ in range(400):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = abs(f(x1)) ** 2
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = abs(f(x2)) ** 2
    x = 0.5 * (a + b)
    if abs(f(x)) > 1e-3:
        raise NoBracketError("no normalized minimum below 1e-3 in bracket")
    return x


@dataclass(frozen=True)
class CurvePoint:
    a: float
    b: float
    residual: float


@dataclass
class Curve:
    """Traced zero set of one equation branch, ordered along A."""

    equation: str
    sign: int
    r: Optional[float] = None
    points: list = field(default_factory=list)

    def to_csv(self) -> str:
        sign_txt = "plus" if self.sign >= 0 else "minus"
        lines = ["# hplk-csv v1", "A,B,equation,sign,residual"]
        for pt in self.points:
            lines.append(
                "%.17g,%.17g,%s,%s,%.3e"
                % (pt.a, pt.b, self.equation, sign_txt, pt.residual)
            )
        return "\n".join(lines) + "\n"


def equation_in_b(equation: str, omega: float, sign=1, r: Optional[float] = None
                  ) -> Callable[[float, float], float]:
    """Signed normalized equation value as a function of (B, A)."""
    eq = equation.lower()
    if eq == "e0":
        def g(b: float, a: float) -> float:
            return boundary_e0(b / omega, omega, a / (2 * omega), sign).signed
    elif eq == "e1":
        def g(b: float, a: float) -> float:
            return boundary_e1(b / omega, omega, a / (2 * omega), sign).signed
    elif eq == "pasterho":
        if r is None:
            raise ValueError("pasterho needs the level r")

        def g(b: float, a: float) -> float:
            return level_curve_value(r, b / omega, omega, a / (2 * omega)).signed
    else:
        raise ValueError("unknown equation tag %r" % equation)
    return g


def trace_curve(
    equation: str,
    sign,
    omega: float,
    a_lo: float,
    a_hi: float,
    step: float,
    tol: float = 1e-8,
    *,
    r: Optional[float] = None,
    b_seed: Optional[float] = None,
    b_scan: Optional[tuple[float, float]] = None,
    scan_points: int = 181,
) -> Curve:
    """Continue a root of the selected equation in B while A steps from
    a_lo to a_hi.

    Each step re-brackets around the previous root, widening the window a
    few times before giving up; the first point is located from ``b_seed``
    or by a sign scan over ``b_scan``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    sgn = _normalize_sign(sign)
    g = equation_in_b(equation, omega, sgn, r)
    curve = Curve(equation.lower(), sgn, r)
    a = a_lo
    prev_b: Optional[float] = None
    prev_delta = 0.0
    while a <= a_hi + 1e-12:
        if prev_b is None:
            b_root = _first_root(g, a, omega, b_seed, b_scan, scan_points, tol)
        else:
            b_root = _continue_root(g, a, prev_b, prev_delta, omega, tol)
            prev_delta = b_root - prev_b
        residual = abs(g(b_root, a))
        if residual > max(tol, 1e-9) * 10:
            raise LostTrackError(
                "residual %.3e at A=%g could not be reduced" % (residual, a)
            )
        curve.points.append(CurvePoint(a, b_root, residual))
        prev_b = b_root
        a += step
    return curve


def _first_root(g, a, omega, b_seed, b_scan, scan_points, tol) -> float:
    if b_seed is not None:
        w = 0.25 * omega
        for _ in range(6):
            try:
                return find_root_1d(lambda b: g(b, a), (b_seed - w, b_seed + w), tol)
            except NoBracketError:
                w *= 2.0
        raise NoBracketError("no root near seed B=%g at A=%g" % (b_seed, a))
    lo, hi = b_scan if b_scan is not None else (1e-6, 6.0 * omega)
    xs = [lo + (hi - lo) * i / (scan_points - 1) for i in range(scan_points)]
    vals = []
    for x in xs:
        try:
            vals.append(g(x, a))
        except (EvenLError, OddLError, ResonantLineError):
            vals.append(math.nan)
    for i in range(len(xs) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if math.isnan(v0) or math.isnan(v1):
            continue
        if v0 == 0.0 or v0 * v1 < 0.0:
            return find_root_1d(lambda b: g(b, a), (xs[i], xs[i + 1]), tol)
    raise NoBracketError("no sign change over the B scan at A=%g" % a)


def _continue_root(g, a, prev_b, prev_delta, omega, tol) -> float:
    center = prev_b + prev_delta  # linear prediction along the branch
    w = max(4.0 * abs(prev_delta), 0.02 * omega)
    for _ in range(7):
        try:
            return find_root_1d(lambda b: g(b, a), (center - w, center + w), tol)
        except (NoBracketError, EvenLError, OddLError, ResonantLineError):
            w *= 2.0
    raise LostTrackError("lost the root near B=%g at A=%g" % (prev_b, a))
