"""Series solutions of the double confluent Heun recurrence.

The second-order equation

    z^2 E'' + (n z + mu (1 - z^2)) E' + (lam - mu n z) E = 0

restricted to multiplier solutions E = z^b f(z), f holomorphic on the
punctured plane, is equivalent to the three-term recurrence

    ((k+b)(k+b+n-1) + lam) a_k - mu (k+b+n-1) a_{k-1} + mu (k+b+1) a_{k+1} = 0

on the Laurent coefficients of f.  This module builds the unique one-sided
solutions decaying as k -> +inf (forward) and k -> -inf (backward) from
convergent infinite matrix products, handles the resonant offsets when b or
b+n is an integer, and assembles global eigenfunctions when the forward and
backward halves paste.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import bessel
from .errors import (
    ForbiddenNError,
    InconsistentOmegaError,
    ResonanceDenominatorError,
    ResonantParametersError,
    ZeroMuError,
)
from .matprod import Mat2, RecurrenceCoeffs, product_column, rising_range

RESONANCE_TOL = 1e-9
DEFAULT_LENGTH = 64


def nearest_integer(z: complex, tol: float = RESONANCE_TOL) -> Optional[int]:
    """The integer within tol of z, or None."""
    z = complex(z)
    r = round(z.real)
    if abs(z - r) <= tol:
        return int(r)
    return None


@dataclass(frozen=True)
class HeunParams:
    """Parameter tuple (n, lam, mu, b) of the equation; l = n - 1."""

    n: complex
    lam: complex
    mu: complex
    b: complex = 0.0

    def __post_init__(self):
        if self.mu == 0:
            raise ZeroMuError("the family requires mu != 0")

    @property
    def l(self) -> complex:
        return self.n - 1

    @property
    def b_integer(self) -> Optional[int]:
        return nearest_integer(self.b)

    @property
    def bn_integer(self) -> Optional[int]:
        return nearest_integer(self.b + self.n)

    @property
    def is_resonant(self) -> bool:
        return self.b_integer is not None or self.bn_integer is not None

    def conjugate(self) -> "HeunParams":
        return HeunParams(
            complex(self.n).conjugate(), complex(self.lam).conjugate(),
            complex(self.mu).conjugate(), complex(self.b).conjugate(),
        )


def recurrence(p: HeunParams) -> RecurrenceCoeffs:
    """Coefficient triple (f_k, g_k, h_k) of the three-term recurrence."""

    def coeffs(k: int):
        f = -p.mu * (k + p.b + p.n - 1)
        g = (k + p.b) * (k + p.b + p.n - 1) + p.lam
        h = p.mu * (k + p.b + 1)
        return f, g, h

    return coeffs


def forward_factors(p: HeunParams) -> Callable[[int], Mat2]:
    """Product factors of the rescaled forward recurrence (limit projector)."""

    def mk(k: int) -> Mat2:
        d = (k + p.b) * (k + p.b + p.n - 1)
        return Mat2(1.0 + p.lam / d, p.mu * p.mu / d, 1.0, 0.0)

    return mk


def backward_factors(p: HeunParams) -> Callable[[int], Mat2]:
    """Product factors of the rescaled backward recurrence."""

    def sm(m: int) -> Mat2:
        e1 = p.b - m + 1
        e2 = p.b - m + p.n - 2
        e3 = p.b - m + p.n - 3
        return Mat2(
            1.0 + (p.lam - p.n + 2) / (e1 * e2),
            p.mu * p.mu * (p.b - m + p.n - 1) / (e1 * e2 * e3),
            1.0,
            0.0,
        )

    return sm


@dataclass(frozen=True)
class SeriesSolution:
    """One- or two-sided Laurent coefficient window a_{k_min} .. a_{k_max}.

    The represented function is z**b * sum_k a_k z**k.  ``closed_ends``
    states, per (low, high) end, whether coefficients beyond the window are
    structurally zero (an entire tail) or merely truncated.
    """

    direction: str               # "forward" | "backward" | "two_sided"
    k_min: int
    coeffs: tuple
    normalization: str
    truncation_error: float
    b: complex = 0.0
    closed_ends: tuple = (False, False)
    inexact: frozenset = field(default_factory=frozenset)
    params: Optional[HeunParams] = None

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.coeffs) - 1

    @property
    def offset(self) -> int:
        """Construction anchor: first index for forward/two-sided windows,
        last index for backward windows."""
        return self.k_max if self.direction == "backward" else self.k_min

    def coeff(self, k: int) -> complex:
        """a_k, with structural zeros beyond closed ends.

        Raises KeyError beyond an open (truncated) end.
        """
        if k < self.k_min:
            if self.closed_ends[0]:
                return 0.0
            raise KeyError("index %d beyond the truncated low end" % k)
        if k > self.k_max:
            if self.closed_ends[1]:
                return 0.0
            raise KeyError("index %d beyond the truncated high end" % k)
        return self.coeffs[k - self.k_min]

    def covers(self, k: int) -> bool:
        """True when a_k is known exactly (stored or structurally zero)."""
        if self.k_min <= k <= self.k_max:
            return True
        return self.closed_ends[0] if k < self.k_min else self.closed_ends[1]

    def interior_indices(self) -> range:
        """Indices whose full recurrence stencil is covered by the window."""
        lo = self.k_min - 1 if self.closed_ends[0] else self.k_min + 1
        hi = self.k_max + 1 if self.closed_ends[1] else self.k_max - 1
        return range(lo, hi + 1)

    def scaled(self, factor: complex) -> "SeriesSolution":
        return SeriesSolution(
            self.direction, self.k_min,
            tuple(factor * c for c in self.coeffs),
            self.normalization + "*scaled", self.truncation_error,
            self.b, self.closed_ends, self.inexact, self.params,
        )

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs), default=0.0)


@dataclass(frozen=True)
class DVector:
    """Right-hand side vector (d0, d1): z^-b L(z^b f) = d0 + d1 z."""

    d0: complex
    d1: complex


def _forward_offset(p: HeunParams) -> int:
    """Largest integer resonance offset for the forward construction."""
    cands = []
    bi = p.b_integer
    if bi is not None:
        cands.append(-1 - bi)
    bni = p.bn_integer
    if bni is not None:
        cands.append(1 - bni)
    if not cands:
        raise ResonantParametersError("no integer offset: parameters non-resonant")
    return max(cands)


def _backward_offset(p: HeunParams) -> int:
    """Smallest integer resonance offset for the backward construction."""
    cands = []
    bi = p.b_integer
    if bi is not None:
        cands.append(-1 - bi)
    bni = p.bn_integer
    if bni is not None:
        cands.append(1 - bni)
    if not cands:
        raise ResonantParametersError("no integer offset: parameters non-resonant")
    return min(cands)


def _check_denominator(value: complex, what: str):
    if value == 0:
        raise ResonanceDenominatorError("%s vanished" % what)


def forward_solution(
    p: HeunParams, tol: float = 1e-12, length: int = DEFAULT_LENGTH, *, cancel=None
) -> SeriesSolution:
    """Coefficients a_{k0}, ..., a_{k0+length} of the unique solution whose
    series converges for k -> +inf, normalized by the product entries.

    Non-resonant parameters give k0 = 0 (the k0 relation itself is not
    imposed at the window's low edge); resonant parameters give the largest
    admissible integer offset.
    """
    if length < 2:
        raise ValueError("length must be >= 2")
    mk = forward_factors(p)
    if not p.is_resonant:
        cols, deep = product_column(mk, 0, length, cancel=cancel)
        # cols[i] = (c_{i-1}, c_i) taken at product index i
        out = []
        for k in range(0, length + 1):
            den = rising_range(p.b, 0, k + 1)
            _check_denominator(den, "(b)_{k+1} at k=%d" % k)
            out.append(p.mu**k * cols[k][1] / den)
        return SeriesSolution(
            "forward", 0, tuple(out), "product-entry", deep.tail_bound,
            p.b, (True, False), params=p,
        )

    k0 = _forward_offset(p)
    cols, deep = product_column(mk, k0 + 2, length, cancel=cancel)
    # cols[i][0] = c_{k0+1+i}
    cvals = {k0 + 1 + i: cols[i][0] for i in range(length + 1)}
    avals: dict[int, complex] = {}
    for k in range(k0 + 1, k0 + length + 1):
        den = rising_range(p.b, k0 + 2, k + 1)
        _check_denominator(den, "shifted rising product at k=%d" % k)
        avals[k] = p.mu ** (k - k0 - 1) * cvals[k] / den
    den0 = p.mu * (k0 + p.b + p.n)
    _check_denominator(den0, "resonant head denominator")
    avals[k0] = (
        ((k0 + p.b + 1) * (k0 + p.b + p.n) + p.lam) * avals[k0 + 1]
        + p.mu * (k0 + p.b + 2) * avals[k0 + 2]
    ) / den0
    out = tuple(avals[k] for k in range(k0, k0 + length + 1))
    return SeriesSolution(
        "forward", k0, out, "product-entry", deep.tail_bound,
        p.b, (True, False), params=p,
    )


def backward_solution(
    p: HeunParams, tol: float = 1e-12, length: int = DEFAULT_LENGTH, *, cancel=None
) -> SeriesSolution:
    """Coefficients a_{k0-length}, ..., a_{k0} of the unique solution whose
    series converges for k -> -inf."""
    if length < 2:
        raise ValueError("length must be >= 2")
    sm = backward_factors(p)
    if not p.is_resonant:
        cols, deep = product_column(sm, 0, length, cancel=cancel)
        out = []
        for k in range(-length, 1):
            m = -k
            den = rising_range(2 - p.n - p.b, 0, m + 1)
            _check_denominator(den, "(2-n-b)_{m+1} at m=%d" % m)
            out.append(p.mu**m * cols[m][1] / den)
        return SeriesSolution(
            "backward", -length, tuple(out), "product-entry", deep.tail_bound,
            p.b, (False, True), params=p,
        )

    k0 = _backward_offset(p)
    m0 = -k0
    cols, deep = product_column(sm, m0 + 1, length, cancel=cancel)
    # cols[i][0] = hat c_{m0+i}
    out_rev = []
    for m in range(m0, m0 + length + 1):
        den = rising_range(2 - p.n - p.b, m0, m + 1)
        _check_denominator(den, "shifted rising product at m=%d" % m)
        out_rev.append(p.mu**m * cols[m - m0][0] / den)
    out = tuple(reversed(out_rev))  # ascending k = k0-length .. k0
    return SeriesSolution(
        "backward", k0 - length, out, "product-entry", deep.tail_bound,
        p.b, (False, True), params=p,
    )


def entire_solution(
    n: complex, lam: complex, mu: complex, tol: float = 1e-12,
    length: int = DEFAULT_LENGTH, *, cancel=None,
) -> tuple[SeriesSolution, complex]:
    """The unique (up to scale) entire E with L E constant; returns
    (series, xi) where xi is the constant, xi = lam a_0 + mu a_1."""
    if mu == 0:
        raise ZeroMuError("mu must be nonzero")
    ni = nearest_integer(n)
    if ni is not None and ni <= 0:
        raise ForbiddenNError("n = %s is a non-positive integer" % (n,))
    l = n - 1

    def mk(k: int) -> Mat2:
        d = k * (k + l)
        return Mat2(1.0 + lam / d, mu * mu / d, 1.0, 0.0)

    cols, deep = product_column(mk, 1, length, cancel=cancel)
    avals = [cols[0][0]]  # a_0
    for k in range(1, length + 1):
        avals.append(mu**k * cols[k - 1][1] / math.factorial(k))
    xi = lam * avals[0] + mu * avals[1]
    series = SeriesSolution(
        "forward", 0, tuple(avals), "product-entry", deep.tail_bound,
        0.0, (True, False),
        params=HeunParams(n, lam, mu, 0.0),
    )
    return series, xi


def _d_from_runs(p: HeunParams, fwd: SeriesSolution, bwd: SeriesSolution
                 ) -> tuple[DVector, DVector]:
    """d-vectors expressed in the coefficients of the given runs.

    Each one-sided solution carries a truncation-dependent overall scale,
    so all cross-run identities must be built from one consistent pair.
    """
    a1, a2 = fwd.coeff(1), fwd.coeff(2)
    a0, am1 = bwd.coeff(0), bwd.coeff(-1)
    d_plus = DVector(
        p.mu * (p.b + 1) * a1,
        ((p.b + 1) * (p.b + p.n) + p.lam) * a1 + p.mu * (p.b + 2) * a2,
    )
    d_minus = DVector(
        (p.b * (p.b + p.n - 1) + p.lam) * a0 - p.mu * (p.b + p.n - 1) * am1,
        -p.mu * (p.b + p.n) * a0,
    )
    return d_plus, d_minus


def d_vectors(
    p: HeunParams, tol: float = 1e-12, *, length: int = 4, cancel=None
) -> tuple[DVector, DVector]:
    """Non-homogeneous right-hand sides produced by the one-sided solutions.

    d_plus comes from the forward half (coefficients a_1, a_2), d_minus
    from the backward half (a_0, a_{-1}); the eigenfunction pastes exactly
    when the two vectors are proportional.
    """
    if p.is_resonant:
        raise ResonantParametersError("d-vectors need b, b+n non-integer")
    fwd = forward_solution(p, tol, max(4, length), cancel=cancel)
    bwd = backward_solution(p, tol, max(4, length), cancel=cancel)
    return _d_from_runs(p, fwd, bwd)


def apply_heun_operator(s: SeriesSolution, p: HeunParams) -> SeriesSolution:
    """Coefficient window of z^-b L(z^b series).

    The output coefficient at z^k is the recurrence combination
    f_k a_{k-1} + g_k a_k + h_k a_{k+1}; indices whose stencil touches a
    truncated window end are flagged in ``inexact``.
    """
    co = recurrence(p)
    k_lo, k_hi = s.k_min - 1, s.k_max + 1
    vals = []
    flagged = set()
    for k in range(k_lo, k_hi + 1):
        total = 0.0 + 0.0j
        f, g, h = co(k)
        exact = True
        for w, j in ((f, k - 1), (g, k), (h, k + 1)):
            if s.covers(j):
                total += w * s.coeff(j)
            else:
                exact = False
        vals.append(total)
        if not exact:
            flagged.add(k)
    return SeriesSolution(
        s.direction, k_lo, tuple(vals), "operator-image",
        s.truncation_error, s.b, s.closed_ends, frozenset(flagged), p,
    )


def recurrence_residuals(s: SeriesSolution, p: HeunParams) -> dict[int, float]:
    """Relative residual of the recurrence at every interior index."""
    co = recurrence(p)
    out: dict[int, float] = {}
    for k in s.interior_indices():
        f, g, h = co(k)
        t1 = f * s.coeff(k - 1)
        t2 = g * s.coeff(k)
        t3 = h * s.coeff(k + 1)
        num = abs(t1 + t2 + t3)
        den = abs(t1) + abs(t2) + abs(t3)
        out[k] = 0.0 if den == 0 else num / den
    return out


def sharp_involution(
    s: SeriesSolution, l: complex, mu: complex, omega: complex
) -> SeriesSolution:
    """Coefficient-level solution-space involution
    E(z) -> 2 omega z^(-l-1) (E'(1/z) - mu E(1/z)).

    Maps the window of z^b sum a_k z^k to the window of
    z^(-b-l-1) sum a'_j z^j with a'_j = 2 omega ((1-j+b) a_{1-j} - mu a_{-j}).
    Requires lam + mu^2 = 1/(4 omega^2) for the source equation.
    """
    if omega == 0:
        raise InconsistentOmegaError("omega must be nonzero")
    if s.params is not None:
        gap = s.params.lam + mu * mu - 1.0 / (4.0 * omega * omega)
        scale = abs(s.params.lam) + abs(mu * mu) + abs(1.0 / (4.0 * omega * omega))
        if abs(gap) > 1e-12 * max(scale, 1.0):
            raise InconsistentOmegaError(
                "lam + mu^2 differs from 1/(4 omega^2) by %.3e" % abs(gap)
            )
    b = s.b
    n = l + 1
    j_lo, j_hi = 1 - s.k_max, -s.k_min
    vals = []
    flagged = set()
    for j in range(j_lo, j_hi + 1):
        exact = s.covers(1 - j) and s.covers(-j)
        a_hi = s.coeff(1 - j) if s.covers(1 - j) else 0.0
        a_lo = s.coeff(-j) if s.covers(-j) else 0.0
        vals.append(2 * omega * ((1 - j + b) * a_hi - mu * a_lo))
        if not exact:
            flagged.add(j)
    closed = (s.closed_ends[1], s.closed_ends[0])
    return SeriesSolution(
        "two_sided", j_lo, tuple(vals), "sharp-image", s.truncation_error,
        -b - n, closed, frozenset(flagged), s.params,
    )


def diamond_transform(s: SeriesSolution, mu: complex) -> SeriesSolution:
    """Coefficient-level transform E(z) -> e^(mu (z + 1/z)) E(-1/z).

    Convolves the reflected input with the two-sided generating sequence
    I_k(2 mu); maps solutions of the companion equation (l -> -l) onto
    solutions of the base equation.
    """
    terms = [(-1) ** (k % 2) * c for k, c in
             zip(range(s.k_min, s.k_max + 1), s.coeffs)]
    # truncation index of the exponential factor's Laurent coefficients
    pad = 0
    x = 2.0 * mu
    if x != 0:
        big = abs(bessel.bessel_I(0, x))
        pad = 8
        while pad < 320 and abs(bessel.bessel_I(pad, x)) > 1e-22 * max(big, 1.0):
            pad += 8
    j_lo, j_hi = -s.k_max - pad, -s.k_min + pad
    vals = []
    for m in range(j_lo, j_hi + 1):
        total = 0.0 + 0.0j
        for k, t in zip(range(s.k_min, s.k_max + 1), terms):
            idx = m + k
            if abs(idx) <= pad or x == 0:
                total += bessel.bessel_I(idx, x) * t
        vals.append(total)
    fully_closed = s.closed_ends[0] and s.closed_ends[1]
    if mu == 0:
        closed = (s.closed_ends[1], s.closed_ends[0])
    else:
        closed = (False, False)
    flagged = frozenset() if fully_closed else frozenset(
        range(j_lo, j_hi + 1))
    return SeriesSolution(
        "two_sided", j_lo, tuple(vals), "diamond-image",
        s.truncation_error, 0.0, closed, flagged, None,
    )


def pasting_determinant(p: HeunParams, tol: float = 1e-12, *, cancel=None
                        ) -> tuple[complex, float]:
    """(d0+ d1- - d0- d1+, scale) from the one-sided solutions."""
    dp, dm = d_vectors(p, tol, cancel=cancel)
    det = dp.d0 * dm.d1 - dm.d0 * dp.d1
    scale = abs(dp.d0 * dm.d1) + abs(dm.d0 * dp.d1)
    return det, max(scale, 1e-300)


def assemble_eigenfunction(
    p: HeunParams, tol: float = 1e-8, length: int = DEFAULT_LENGTH, *, cancel=None
) -> Optional[SeriesSolution]:
    """Two-sided eigenfunction window when the pasting determinant is below
    tol (scale-normalized); None otherwise.

    The halves are rescaled so the non-homogeneous right-hand sides cancel;
    the result satisfies the recurrence at every interior index including
    the seam k in {0, 1}.
    """
    if p.is_resonant:
        raise ResonantParametersError("assembly needs b, b+n non-integer")
    fwd = forward_solution(p, length=length, cancel=cancel)
    bwd = backward_solution(p, length=length, cancel=cancel)
    dp, dm = _d_from_runs(p, fwd, bwd)
    det = dp.d0 * dm.d1 - dm.d0 * dp.d1
    scale = max(abs(dp.d0 * dm.d1) + abs(dm.d0 * dp.d1), 1e-300)
    if abs(det) / scale > tol:
        return None
    if abs(dm.d0) >= abs(dm.d1):
        s_minus = -dp.d0 / dm.d0
    else:
        s_minus = -dp.d1 / dm.d1
    lo, hi = -length, length
    vals = []
    for k in range(lo, 0 + 1):
        vals.append(s_minus * bwd.coeff(k))
    for k in range(1, hi + 1):
        vals.append(fwd.coeff(k))
    trunc = max(fwd.truncation_error, bwd.truncation_error)
    return SeriesSolution(
        "two_sided", lo, tuple(vals), "paste-matched", trunc,
        p.b, (False, False), params=p,
    )


def assemble_c_star_solution(
    n: complex, lam: complex, mu: complex, tol: float = 1e-12,
    length: int = DEFAULT_LENGTH, *, cancel=None,
) -> SeriesSolution:
    """Two-sided solution holomorphic on the punctured plane (b = 0) for
    non-integer n, valid at roots of the resonant pasting equation.

    Glues the backward half onto the entire solution scaled so the seam
    relation at k = 0 holds exactly; the k = -1 relation holds exactly
    when the resonant pasting value vanishes.
    """
    if mu == 0:
        raise ZeroMuError("mu must be nonzero")
    if nearest_integer(n) is not None:
        raise ResonantParametersError("needs non-integer n")
    l = n - 1
    p0 = HeunParams(n, lam, mu, 0.0)
    bwd = backward_solution(p0, tol, length, cancel=cancel)
    ent, xi = entire_solution(n, lam, mu, tol, length, cancel=cancel)
    if xi == 0:
        raise ResonanceDenominatorError("entire-solution constant vanished")
    s = mu * l * bwd.coeff(-1) / xi
    vals = [bwd.coeff(k) for k in range(-length, 0)]
    vals += [s * ent.coeff(k) for k in range(0, length + 1)]
    return SeriesSolution(
        "two_sided", -length, tuple(vals), "resonant-paste",
        max(bwd.truncation_error, ent.truncation_error),
        0.0, (False, False), params=p0,
    )
