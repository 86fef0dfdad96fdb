"""Dynamical oracle: direct integration of the forced Josephson flow on the
torus and of the associated linear system around the unit circle.

These computations are independent of the matrix-product machinery and are
used to cross-validate it: rotation numbers and Poincare maps probe the
phase-lock portrait, and the transported fundamental matrix gives the
monodromy whose eigenvalues the spectral equations predict.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoBracketError, NotConvergedError, StepUnderflowError
from .matprod import Mat2

TWO_PI = 2.0 * math.pi
_UNC_FLOOR = 2e-9


@dataclass(frozen=True)
class PhysParams:
    """Real parameters (omega, B, A) of the forced junction equation
    phi' = -sin(phi)/omega + l + 2 mu cos(tau)."""

    omega: float
    B: float
    A: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    @property
    def l(self) -> float:
        return self.B / self.omega

    @property
    def mu(self) -> float:
        return self.A / (2.0 * self.omega)

    @property
    def lam(self) -> float:
        return 1.0 / (4.0 * self.omega**2) - self.mu**2


@dataclass(frozen=True)
class RotationEstimate:
    rho: float
    uncertainty: float
    periods_used: int

    def __post_init__(self):
        if not (self.uncertainty > 0 and math.isfinite(self.rho)):
            raise ValueError("need positive uncertainty and finite rho")


@dataclass(frozen=True)
class MonodromyMatrix:
    """Fundamental matrix transported once around the unit circle, with the
    deviation of its determinant from the exact value e^(-2 pi i (l+1))."""

    m: Mat2
    det_error: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.m.m11, self.m.m12], [self.m.m21, self.m.m22]])

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.as_array())

    def distance_to_identity(self) -> float:
        return max(
            abs(self.m.m11 - 1.0) + abs(self.m.m12),
            abs(self.m.m21) + abs(self.m.m22 - 1.0),
        )


def _rhs_phi(omega: float, l, mu):
    def f(t, y):
        return -np.sin(y) / omega + l + 2.0 * mu * np.cos(t)

    return f


def _solve(fun, t_span, y0, tol, t_eval=None):
    rtol = min(max(tol, 1e-12), 1e-3)
    sol = solve_ivp(
        fun, t_span, y0, method="RK45", rtol=rtol, atol=rtol * 1e-2,
        t_eval=t_eval, dense_output=False,
    )
    if not sol.success:
        raise StepUnderflowError(sol.message)
    return sol


def flow_phi(p: PhysParams, phi0: float, tau_span: float, tol: float = 1e-9
             ) -> float:
    """Lifted phase phi(tau_span) of the trajectory through phi(0) = phi0."""
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-12, 1e-6]")
    if tau_span == 0:
        return phi0
    sol = _solve(_rhs_phi(p.omega, p.l, p.mu), (0.0, tau_span),
                 np.array([phi0]), tol)
    return float(sol.y[0, -1])


def _period_samples_adaptive(p: PhysParams, phi0: float, n_periods: int,
                             tol: float) -> np.ndarray:
    """phi at tau = 0, 2 pi, ..., 2 pi n_periods along one trajectory."""
    t_eval = TWO_PI * np.arange(n_periods + 1)
    sol = _solve(_rhs_phi(p.omega, p.l, p.mu), (0.0, t_eval[-1]),
                 np.array([phi0]), tol, t_eval=t_eval)
    return sol.y[0]


def _windowed_estimate(samples: np.ndarray) -> tuple[float, float, int]:
    """Rotation estimate from period samples via window-averaged increments.

    Averaging (phi_{m+K} - phi_m)/(2 pi K) over a full window of starting
    periods m < K cancels the bounded quasi-periodic part of the lift, so
    the practical error decays like 1/K^2 rather than the a-priori 1/K
    circle-map bound (each averaged term still obeys that hard bound).
    """
    total = len(samples) - 1
    k = total // 2
    diffs = (samples[k:2 * k] - samples[:k]) / (TWO_PI * k)
    rho = float(diffs.mean())
    k2 = k // 2
    diffs2 = (samples[k2:2 * k2] - samples[:k2]) / (TWO_PI * k2)
    unc = max(abs(rho - float(diffs2.mean())), _UNC_FLOOR)
    return rho, unc, total


def rotation_number(p: PhysParams, tol: float = 1e-6, *,
                    phi0: float = 0.0, periods_cap: int = 1 << 15,
                    int_tol: float = 1e-10) -> RotationEstimate:
    """Rotation number in turns per forcing period.

    Phase-lock plateaus sit exactly at the integers in this normalization.
    The estimate uses window-averaged lift increments with a doubling
    period schedule; ``uncertainty`` is the change between the last two
    schedule levels (floored at the integrator bias scale).
    """
    if tol < 1e-8:
        raise ValueError("tol must be >= 1e-8")
    n = 256
    samples = _period_samples_adaptive(p, phi0, n, int_tol)
    rho, unc, used = _windowed_estimate(samples)
    while unc >= tol / 2 and n < periods_cap:
        n *= 2
        samples = _period_samples_adaptive(p, phi0, n, int_tol)
        rho, unc, used = _windowed_estimate(samples)
    if unc >= tol:
        raise NotConvergedError(
            "uncertainty %.2e > tol %.2e at %d periods" % (unc, tol, n)
        )
    return RotationEstimate(rho, unc, used)


def poincare_samples(p: PhysParams, nsamples: int = 16, tol: float = 1e-9
                     ) -> list[tuple[float, float]]:
    """(phi0, phi(2 pi)) for equispaced initial phases."""
    if nsamples < 3:
        raise ValueError("need at least 3 samples")
    phi0 = np.linspace(0.0, TWO_PI, nsamples, endpoint=False)
    sol = _solve(_rhs_phi(p.omega, p.l, p.mu), (0.0, TWO_PI), phi0, tol)
    return list(zip(phi0.tolist(), sol.y[:, -1].tolist()))


# ---------------------------------------------------------------------------
# linear transport around the unit circle


def monodromy_numeric(p: PhysParams, tol: float = 1e-10) -> MonodromyMatrix:
    """Fundamental matrix of the associated linear system transported once
    counterclockwise around the unit circle from z = 1."""
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    l, w = p.l, p.omega

    def rhs(t, y):
        # two columns of (v, u): v' = u/(2w), u' = -i(l+2 mu cos t)u + v/(2w)
        v1, u1, v2, u2 = y
        c = -1j * (l + 2.0 * p.mu * np.cos(t))
        return [u1 / (2 * w), c * u1 + v1 / (2 * w),
                u2 / (2 * w), c * u2 + v2 / (2 * w)]

    y0 = np.array([1, 0, 0, 1], dtype=complex)
    sol = _solve(rhs, (0.0, TWO_PI), y0, tol)
    v1, u1, v2, u2 = sol.y[:, -1]
    m = Mat2(v1, v2, u1, u2)
    det = m.m11 * m.m22 - m.m12 * m.m21
    det_error = abs(det - np.exp(-2j * math.pi * (l + 1.0)))
    return MonodromyMatrix(m, float(det_error))


def monodromy_eigen_prediction(rho: float, l: float, uncertainty: float
                               ) -> list[tuple[complex, complex]]:
    """Eigenvalue pair(s) predicted from the rotation number.

    Away from phase-lock boundaries the branch is unambiguous; within
    10x uncertainty of an integer rho both candidate branches are returned.
    """
    pairs = [(np.exp(1j * math.pi * (rho - l)), np.exp(-1j * math.pi * (rho + l)))]
    if abs(rho - round(rho)) < 10.0 * uncertainty:
        pairs.append(
            (np.exp(1j * math.pi * (-rho - l)), np.exp(-1j * math.pi * (-rho + l)))
        )
    return pairs


def heun_circle_transport(n: complex, lam: complex, mu: complex,
                          e0: complex, e0p: complex, tol: float = 1e-10
                          ) -> tuple[complex, complex]:
    """Analytic continuation of (E, E') of the Heun equation once
    counterclockwise around z = 0 along the unit circle from z = 1."""

    def rhs(t, y):
        e, ep = y
        z = np.exp(1j * t)
        epp = -((n * z + mu * (1.0 - z * z)) * ep + (lam - mu * n * z) * e) / (z * z)
        return [1j * z * ep, 1j * z * epp]

    sol = _solve(rhs, (0.0, TWO_PI), np.array([e0, e0p], dtype=complex), tol)
    return complex(sol.y[0, -1]), complex(sol.y[1, -1])


# ---------------------------------------------------------------------------
# vectorized fixed-step engine (portrait scans and grid refinements)


def lift_samples_grid(omega: float, B: np.ndarray, A: np.ndarray,
                      n_periods: int, steps_per_period: int = 256,
                      phi0: float = 0.0) -> np.ndarray:
    """Period-mark samples of the lifted phase for a whole parameter batch.

    Classic fixed-step RK4 applied simultaneously to every (B, A) cell;
    returns an array of shape (n_periods + 1, len(B)).
    """
    B = np.asarray(B, dtype=float)
    A = np.asarray(A, dtype=float)
    l = B / omega
    mu2 = A / omega  # 2*mu
    h = TWO_PI / steps_per_period
    phi = np.full(B.shape, float(phi0))
    out = np.empty((n_periods + 1,) + B.shape)
    out[0] = phi
    inv_w = 1.0 / omega
    tau = 0.0
    cos = np.cos
    for per in range(n_periods):
        for s in range(steps_per_period):
            c0 = cos(tau)
            ch = cos(tau + 0.5 * h)
            c1 = cos(tau + h)
            k1 = -np.sin(phi) * inv_w + l + mu2 * c0
            k2 = -np.sin(phi + 0.5 * h * k1) * inv_w + l + mu2 * ch
            k3 = -np.sin(phi + 0.5 * h * k2) * inv_w + l + mu2 * ch
            k4 = -np.sin(phi + h * k3) * inv_w + l + mu2 * c1
            phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            tau += h
        tau = TWO_PI * (per + 1)  # keep the forcing phase exact
        out[per + 1] = phi
    return out


def rotation_numbers_grid(omega: float, B: np.ndarray, A: np.ndarray,
                          n_periods: int = 256, steps_per_period: int = 256,
                          phi0: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Window-averaged rotation numbers and uncertainties for a batch."""
    samples = lift_samples_grid(omega, B, A, n_periods, steps_per_period, phi0)
    k = n_periods // 2
    rho = (samples[k:2 * k] - samples[:k]).mean(axis=0) / (TWO_PI * k)
    k2 = k // 2
    rho2 = (samples[k2:2 * k2] - samples[:k2]).mean(axis=0) / (TWO_PI * k2)
    unc = np.maximum(np.abs(rho - rho2), _UNC_FLOOR)
    return rho, unc


# ---------------------------------------------------------------------------
# portrait scan


@dataclass
class Portrait:
    """Rotation-number grid over a (B, A) rectangle (B-major storage)."""

    b_lo: float
    b_hi: float
    nb: int
    a_lo: float
    a_hi: float
    na: int
    rho: np.ndarray = field(repr=False)
    uncertainty: np.ndarray = field(repr=False)
    locked: np.ndarray = field(repr=False)
    not_converged: np.ndarray = field(repr=False)
    boundary_cells: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not (self.b_lo < self.b_hi and self.a_lo < self.a_hi):
            raise ValueError("grid ranges must be increasing")
        if self.nb < 2 or self.na < 2:
            raise ValueError("need at least 2 points per axis")
        if not np.all(np.isfinite(self.rho)):
            raise ValueError("every cell needs a finite rho")

    def b_values(self) -> np.ndarray:
        return np.linspace(self.b_lo, self.b_hi, self.nb)

    def a_values(self) -> np.ndarray:
        return np.linspace(self.a_lo, self.a_hi, self.na)

    def to_csv(self) -> str:
        lines = ["# hplk-csv v1", "B,A,rho,uncertainty,locked"]
        bs, a_s = self.b_values(), self.a_values()
        for i in range(self.nb):
            for j in range(self.na):
                lines.append("%.17g,%.17g,%.17g,%.3e,%d" % (
                    bs[i], a_s[j], self.rho[i, j],
                    self.uncertainty[i, j], int(self.locked[i, j]),
                ))
        return "\n".join(lines) + "\n"

    def to_binary(self) -> bytes:
        """Magic 'HPLK1', header (<II4d: nb, na, b_lo, b_hi, a_lo, a_hi),
        then nb*na little-endian float64 rho values, B-major."""
        head = b"HPLK1" + struct.pack(
            "<II4d", self.nb, self.na, self.b_lo, self.b_hi, self.a_lo, self.a_hi
        )
        body = self.rho.astype("<f8").tobytes(order="C")
        return head + body

    @property
    def fraction_not_converged(self) -> float:
        return float(self.not_converged.mean())


def portrait_from_binary(data: bytes) -> tuple[np.ndarray, dict]:
    """Parse the compact binary grid; returns (rho, grid spec dict)."""
    if data[:5] != b"HPLK1":
        raise ValueError("bad magic")
    nb, na, b_lo, b_hi, a_lo, a_hi = struct.unpack("<II4d", data[5:5 + 40])
    rho = np.frombuffer(data[45:], dtype="<f8").reshape(nb, na).copy()
    spec = dict(nb=nb, na=na, b_lo=b_lo, b_hi=b_hi, a_lo=a_lo, a_hi=a_hi)
    return rho, spec


def phase_lock_scan(omega: float, b_lo: float, b_hi: float, nb: int,
                    a_lo: float, a_hi: float, na: int,
                    tol: float = 5e-3, *, n_periods: int = 128,
                    steps_per_period: int = 192,
                    threads: Optional[int] = None) -> Portrait:
    """Rotation-number portrait over an inclusive (B, A) grid.

    Cells are flagged locked when rho is within 3x its uncertainty of an
    integer; boundary cells are locked cells with an unlocked 4-neighbor
    (and vice versa).  Per-cell non-convergence is recorded in place.
    """
    if nb * na > 10**6:
        raise ValueError("grid larger than 1e6 cells")
    bs = np.linspace(b_lo, b_hi, nb)
    a_s = np.linspace(a_lo, a_hi, na)
    BB, AA = np.meshgrid(bs, a_s, indexing="ij")
    flat_b, flat_a = BB.ravel(), AA.ravel()

    nthreads = threads or 1
    rho = np.empty(flat_b.shape)
    unc = np.empty(flat_b.shape)
    if nthreads <= 1 or flat_b.size < 2 * nthreads:
        rho[:], unc[:] = rotation_numbers_grid(
            omega, flat_b, flat_a, n_periods, steps_per_period)
    else:
        chunks = np.array_split(np.arange(flat_b.size), nthreads)

        def work(idx):
            r, u = rotation_numbers_grid(
                omega, flat_b[idx], flat_a[idx], n_periods, steps_per_period)
            rho[idx], unc[idx] = r, u

        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(work, chunks))

    rho = rho.reshape(nb, na)
    unc = unc.reshape(nb, na)
    locked = np.abs(rho - np.round(rho)) < 3.0 * unc
    not_converged = unc > tol
    boundary = []
    for i in range(nb):
        for j in range(na):
            if not locked[i, j]:
                continue
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < nb and 0 <= jj < na and not locked[ii, jj]:
                    boundary.append((i, j))
                    break
    return Portrait(b_lo, b_hi, nb, a_lo, a_hi, na, rho, unc, locked,
                    not_converged, boundary)


# ---------------------------------------------------------------------------
# boundary location by bisection on the Poincare displacement


def poincare_displacement_range(p: PhysParams, nsamples: int = 64,
                                tol: float = 1e-10) -> tuple[float, float]:
    """(min, max) over initial phases of phi(2 pi) - phi0.

    The circle of initial phases is sampled uniformly and each extremum is
    sharpened by a parabolic fit through its neighbors, which recovers the
    smooth sup/inf far more accurately than the raw sample grid.
    """
    phi0 = np.linspace(0.0, TWO_PI, nsamples, endpoint=False)
    sol = _solve(_rhs_phi(p.omega, p.l, p.mu), (0.0, TWO_PI), phi0, tol)
    disp = sol.y[:, -1] - phi0
    return (_parabolic_extremum(disp, np.argmin(disp), is_max=False),
            _parabolic_extremum(disp, np.argmax(disp), is_max=True))


def _parabolic_extremum(vals: np.ndarray, i: int, is_max: bool) -> float:
    n = len(vals)
    f1, f2, f3 = vals[(i - 1) % n], vals[i], vals[(i + 1) % n]
    a = 0.5 * (f1 - 2.0 * f2 + f3)
    b = 0.5 * (f3 - f1)
    if (is_max and a < 0) or (not is_max and a > 0):
        return float(f2 - b * b / (4.0 * a))
    return float(f2)


def _lock_indicator(omega: float, b: float, a: float, r: int, side: str,
                    nsamples: int, tol: float) -> float:
    """Nonnegative inside the r-locked set, negative outside on the given
    side; monotone through the edge."""
    lo, hi = poincare_displacement_range(PhysParams(omega, b, a), nsamples, tol)
    target = TWO_PI * r
    if side == "left":
        return hi - target
    return target - lo


def boundary_bisect(p: PhysParams, r: int, side: str, tol: float = 1e-6,
                    *, nsamples: int = 64, int_tol: float = 1e-10,
                    max_width: float = 4.0) -> float:
    """Edge abscissa of the rotation-number-r phase-lock area at A = p.A.

    Bisects on the one-period displacement criterion: the area is exactly
    the set where the lifted Poincare displacement attains 2 pi r.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    a = p.A
    omega = p.omega

    def s(b):
        return _lock_indicator(omega, b, a, r, side, nsamples, int_tol)

    b_in = p.B
    if s(b_in) < 0:
        b_in = r * omega
        if s(b_in) < 0:
            raise NoBracketError(
                "seed B is not inside the rho=%d area at A=%g" % (r, a))
    direction = -1.0 if side == "left" else 1.0
    step = 0.05 * omega
    b_out = b_in
    while True:
        b_out = b_out + direction * step
        step *= 2.0
        if abs(b_out - b_in) > max_width * omega:
            raise NoBracketError("no unlocked point within %g" % (max_width * omega))
        if s(b_out) < 0:
            break
    lo, hi = (b_out, b_in) if side == "left" else (b_in, b_out)
    # indicator is >= 0 at the inside end, < 0 at the outside end
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        v = s(mid)
        inside = v >= 0
        if side == "left":
            if inside:
                hi = mid
            else:
                lo = mid
        else:
            if inside:
                lo = mid
            else:
                hi = mid
    return 0.5 * (lo + hi)
