"""Convergent infinite products of 2x2 complex matrices and the projective
backward solver for three-term recurrences.

The engine multiplies factor families M_k = P + S_k, where P is the rank-one
projector [[1,0],[1,0]] and the perturbations satisfy sum ||S_k|| < infinity
(for every family in this package ||S_k|| decays like k^-2).  Partial products
carry a certified bound on the distance to the infinite product:

    dist(M_start ... M_N, limit) <= 3 * C_start * sum_{j>=N} ||S_j||,
    C_start = exp(sum_{j>=start} ||S_j||) * ||M_start||,

with the un-computed part of the sum majorized by c/N, c fitted from the last
computed window of ||S_j|| * j^2.  Because the certificate decays only like
1/N, absolute entries of a partial product converge slowly; every *ratio* of
entries (and hence every scale-free quantity downstream) converges to machine
precision within a few dozen factors past the indices of interest.  The
``stop`` parameter selects which of the two regimes drives truncation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import (
    NonSummableError,
    OperationCancelled,
    SeedTooLowError,
    ToleranceUnreachableError,
)

#: map index -> (f_k, g_k, h_k) of a three-term recurrence
#: f_k a_{k-1} + g_k a_k + h_k a_{k+1} = 0
RecurrenceCoeffs = Callable[[int], tuple[complex, complex, complex]]

_HARD_CAP_DEFAULT = 10**6
_PROBE = 48          # factors examined by the summability probe
_FIT_WINDOW = 32     # trailing ||S_j|| j^2 values used to fit the tail constant


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True)
class Mat2:
    """Immutable 2x2 complex matrix with finite entries."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def __post_init__(self):
        for v in (self.m11, self.m12, self.m21, self.m22):
            if not _finite(complex(v)):
                raise ValueError("Mat2 entries must be finite")

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def norm(self) -> float:
        """Max-row-sum (infinity) operator norm."""
        return max(abs(self.m11) + abs(self.m12), abs(self.m21) + abs(self.m22))

    def sub(self, other: "Mat2") -> "Mat2":
        return Mat2(self.m11 - other.m11, self.m12 - other.m12,
                    self.m21 - other.m21, self.m22 - other.m22)

    def apply(self, v: tuple[complex, complex]) -> tuple[complex, complex]:
        return (self.m11 * v[0] + self.m12 * v[1],
                self.m21 * v[0] + self.m22 * v[1])

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def projector(cls) -> "Mat2":
        """The limit of every factor family: rank one, kernel (0, 1)."""
        return cls(1.0, 0.0, 1.0, 0.0)


PROJECTOR = Mat2.projector()


@dataclass(frozen=True)
class TruncatedProduct:
    """Partial product M_first ... M_trunc with a certified tail bound."""

    value: Mat2
    first_index: int
    truncation_index: int
    tail_bound: float

    def __post_init__(self):
        if self.truncation_index < self.first_index:
            raise ValueError("truncation_index must be >= first_index")
        if not (math.isfinite(self.tail_bound) and self.tail_bound >= 0.0):
            raise ValueError("tail_bound must be finite and non-negative")

    @property
    def factors(self) -> int:
        return self.truncation_index - self.first_index + 1


def pochhammer(b: complex, s: int, l: int) -> complex:
    """Shifted rising product (b+s)(b+s+1)...(b+l).

    Requires 0 <= s <= l; a zero value is legal and signals a resonance to
    the caller.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if l < s:
        raise ValueError("empty range: need l >= s")
    out: complex = 1.0
    for j in range(s, l + 1):
        out *= b + j
    return out


def rising_range(b: complex, s: int, stop: int) -> complex:
    """Product of (b+j) for j in [s, stop); equals 1 when stop == s."""
    if stop < s:
        raise ValueError("need stop >= s")
    out: complex = 1.0
    for j in range(s, stop):
        out *= b + j
    return out


def _perturbation_norm(m: Mat2) -> float:
    """||M - P|| in the max-row-sum norm."""
    return max(abs(m.m11 - 1.0) + abs(m.m12), abs(m.m21 - 1.0) + abs(m.m22))


def _tail_constant(snorms: Sequence[float], indices: Sequence[int]) -> float:
    """Fit c so that ||S_j|| <= c / j^2 on the trailing window."""
    c = 0.0
    for j, s in zip(indices[-_FIT_WINDOW:], snorms[-_FIT_WINDOW:]):
        if j > 0:
            c = max(c, s * j * j)
    return c


def _summability_probe(snorms: Sequence[float]) -> bool:
    """True when the trailing ||S_j|| window is consistent with decay."""
    if len(snorms) < _PROBE:
        return True
    win = snorms[-_PROBE:]
    head = max(win[:16])
    tail = max(win[-16:])
    return tail < head or tail <= 1e-300


def converging_product(
    matrices: Callable[[int], Mat2],
    start: int,
    tol: float,
    *,
    hard_cap: int = _HARD_CAP_DEFAULT,
    stop: str = "certified",
    min_factors: int = 64,
    cancel=None,
) -> TruncatedProduct:
    """Accumulate the infinite product M_start M_{start+1} ... .

    stop="certified": truncate once the certified tail bound is <= tol;
    raise ToleranceUnreachableError if the bound cannot reach tol within
    ``hard_cap`` factors.  stop="projective": truncate once the
    projectivized first column has stabilized to machine precision (all
    ratios of entries are then converged even though the certified bound,
    which decays only like 1/N, may still exceed tol); the honest
    certificate is reported in tail_bound either way.
    """
    if stop not in ("certified", "projective"):
        raise ValueError("stop must be 'certified' or 'projective'")
    if tol < 0:
        raise ValueError("tol must be >= 0")

    m0 = matrices(start)
    value = m0
    norm_m0 = m0.norm()
    snorms: list[float] = [_perturbation_norm(m0)]
    indices: list[int] = [start]
    ssum = snorms[0]

    # projective-stabilization state
    col = _normalized_column(value)
    stable_steps = 0

    k = start
    while True:
        # certificate at the current truncation k, in log space: a single
        # near-resonant factor can make exp(sum ||S_j||) overflow while the
        # bound itself stays (uselessly large but) well defined
        c_fit = _tail_constant(snorms, indices)
        beyond = c_fit / max(abs(k), 1)
        tail_bound = _certificate(ssum, beyond, norm_m0, snorms[-1])

        n_factors = k - start + 1
        if n_factors >= min_factors:
            if not _summability_probe(snorms):
                raise NonSummableError(
                    "perturbation norms fail the decay probe near index %d" % k
                )
            if stop == "certified" and tail_bound <= tol:
                return TruncatedProduct(value, start, k, tail_bound)
            if stop == "projective" and stable_steps >= 8:
                return TruncatedProduct(value, start, k, tail_bound)

        if stop == "certified" and n_factors >= 1024 and c_fit > 0 and tol > 0:
            # the certificate decays like 1/N: predict the factor count it
            # needs and fail fast when that exceeds the cap
            log_needed = (math.log(3.0) + ssum + beyond
                          + math.log(max(norm_m0, 1e-300))
                          + math.log(c_fit) - math.log(tol))
            if log_needed > math.log(4.0 * hard_cap):
                raise ToleranceUnreachableError(
                    "certified tail needs ~e^%.1f factors for tol %.1e "
                    "(cap %d)" % (log_needed, tol, hard_cap)
                )

        if n_factors >= hard_cap:
            if stop == "projective":
                return TruncatedProduct(value, start, k, tail_bound)
            raise ToleranceUnreachableError(
                "certified tail %.3e > tol %.3e at the %d-factor cap"
                % (tail_bound, tol, hard_cap)
            )
        if cancel is not None and cancel.is_set():
            raise OperationCancelled("converging_product cancelled")

        k += 1
        mk = matrices(k)
        value = value @ mk
        snorms.append(_perturbation_norm(mk))
        indices.append(k)
        ssum += snorms[-1]

        new_col = _normalized_column(value)
        if new_col is not None and col is not None:
            delta = max(abs(new_col[0] - col[0]), abs(new_col[1] - col[1]))
            stable_steps = stable_steps + 1 if delta < 1e-15 else 0
        col = new_col


def _certificate(ssum: float, beyond: float, norm_m0: float,
                 last_snorm: float) -> float:
    """3 * exp(sum ||S_j||) * ||M_start|| * (||S_N|| + tail), saturated."""
    remainder = last_snorm + beyond
    if remainder == 0.0 or norm_m0 == 0.0:
        return 0.0
    log_tb = (math.log(3.0) + ssum + beyond + math.log(norm_m0)
              + math.log(remainder))
    return math.exp(log_tb) if log_tb < 690.0 else 1e300


def _normalized_column(m: Mat2):
    """First column scaled to unit max-modulus; None if it vanishes."""
    a, b = m.m11, m.m21
    s = max(abs(a), abs(b))
    if s == 0.0 or not math.isfinite(s):
        return None
    return (a / s, b / s)


def product_column(
    matrices: Callable[[int], Mat2],
    start: int,
    count: int,
    *,
    tol: float = 1e-15,
    hard_cap: int = _HARD_CAP_DEFAULT,
    cancel=None,
) -> tuple[list[tuple[complex, complex]], TruncatedProduct]:
    """First columns of the products at start, start+1, ..., start+count.

    Computes one deep product anchored at start+count (projective stopping)
    and recovers the shallower columns by exact downward multiplication
    v_k = M_k v_{k+1}; all returned columns are therefore mutually
    consistent partial-product entries.  Returns (columns, deep_product)
    with columns[i] = first column of the product starting at start+i.
    """
    anchor = start + count
    deep = converging_product(
        matrices, anchor, tol, hard_cap=hard_cap, stop="projective",
        cancel=cancel,
    )
    cols = [(deep.value.m11, deep.value.m21)]
    for k in range(anchor - 1, start - 1, -1):
        cols.append(matrices(k).apply(cols[-1]))
    cols.reverse()
    return cols, deep


def projective_backward_solve(
    coeffs: RecurrenceCoeffs, k_hi: int, k_lo: int
) -> list[complex]:
    """Ratios x_k = a_{k+1}/a_k of the bounded recurrence solution.

    Runs the projectivized recursion downward from the attracting seed
    x_{k_hi} = 0, which converges (in k_hi) to the unique solution whose
    one-sided series has positive convergence radius.  Returns
    [x_{k_lo}, ..., x_{k_hi - 1}]; entries may be complex infinity when the
    ratio passes through the point at infinity.
    """
    if k_lo >= k_hi:
        raise ValueError("need k_lo < k_hi")
    f, g, h = coeffs(k_hi)
    if abs(g) <= 2.0 * (abs(f) + abs(h)):
        raise SeedTooLowError(
            "no contraction at k_hi=%d: |g|=%.3e <= 2(|f|+|h|)=%.3e"
            % (k_hi, abs(g), 2.0 * (abs(f) + abs(h)))
        )
    x: complex = 0.0
    out: list[complex] = []
    for k in range(k_hi, k_lo, -1):
        f, g, h = coeffs(k)
        if f == 0:
            raise ValueError("f_k vanishes at k=%d inside the solve range" % k)
        if cmath.isinf(x):
            den = h * x
        else:
            den = g + h * x
        if den == 0:
            x = complex(math.inf, 0.0)
        elif cmath.isinf(den):
            x = 0.0
        else:
            x = -f / den
        out.append(x)
    out.reverse()
    return out
