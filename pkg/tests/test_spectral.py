"""Functional equations, Bessel utilities and root machinery."""

import cmath
import math

import numpy as np
import pytest

from heunlock import spectral
from heunlock.bessel import bessel_I, bessel_J, bessel_j_zero
from heunlock.errors import (
    EvenLError,
    ForbiddenLError,
    IntegerNError,
    NoBracketError,
    OddLError,
    RangeExceededError,
    ResonantLineError,
)
from heunlock.heun import HeunParams, entire_solution, pasting_determinant
from heunlock.spectral import (
    EquationValue,
    boundary_e0,
    boundary_e1,
    equation_in_b,
    find_root_1d,
    level_curve_value,
    pasting_value,
    resonant_pasting_value,
    trace_curve,
    tridiag_det,
    xi,
    zeta,
)


class TestXi:
    def test_matches_entire_solution(self):
        v = xi(0.7, 0.2, 0.3)
        _, xi_ent = entire_solution(1.7, 0.2, 0.3)
        assert abs(v.value - xi_ent) <= 1e-12 * v.scale

    def test_bessel_adjacency(self):
        x11 = bessel_j_zero(1, 1)
        v = xi(1.0, 0.0, 0.5j * x11)
        assert v.normalized < 1e-8

    def test_conjugation_symmetry(self):
        v = xi(0.9, 0.2 + 0.3j, 0.4 - 0.1j)
        vc = xi(0.9, 0.2 - 0.3j, 0.4 + 0.1j)
        assert vc.value == complex(v.value).conjugate()

    def test_forbidden_l(self):
        with pytest.raises(ForbiddenLError):
            xi(-2.0, 0.1, 0.2)


class TestZeta:
    def test_definition_identity(self):
        v = zeta(0.0, 2.0, 0.5)
        w = xi(0.0, 1.0 / 16.0 - 0.25, 0.5)
        assert v.value == w.value and v.scale == w.scale

    def test_first_root_bracketed(self):
        mus = np.linspace(0.05, 3.0, 120)
        vals = [zeta(0.0, 2.0, m).signed for m in mus]
        assert any(vals[i] * vals[i + 1] < 0 for i in range(len(vals) - 1))

    def test_small_mu_finite(self):
        v = zeta(0.0, 2.0, 1e-6)
        assert math.isfinite(v.normalized)
        assert math.isfinite(abs(v.value))


class TestTridiagDet:
    def test_l1_is_lambda(self):
        assert tridiag_det(1, 0.37 + 0.1j, 5.0) == 0.37 + 0.1j

    def test_l2_closed_form(self):
        lam, mu = 0.6, 0.7
        assert tridiag_det(2, lam, mu) == pytest.approx(
            lam * (lam - 1) - mu**2)

    def test_l4_against_dense_determinant(self):
        lam, mu = 0.3, 0.7
        ours = tridiag_det(4, lam, mu)
        dense = _dense_det(4, lam, mu)
        assert abs(ours - dense) < 1e-12 * max(1.0, abs(dense))

    def test_random_draws_up_to_l8(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            l = int(rng.integers(1, 9))
            lam = complex(rng.normal(), rng.normal())
            mu = complex(rng.normal(), rng.normal())
            ours = tridiag_det(l, lam, mu)
            dense = _dense_det(l, lam, mu)
            assert abs(ours - dense) <= 1e-11 * max(1.0, abs(dense))


def _dense_det(l, lam, mu):
    h = np.zeros((l, l), dtype=complex)
    for j in range(1, l + 1):
        h[j - 1, j - 1] = (1 - j) * (l - j + 1) + lam
        if j < l:
            h[j - 1, j] = mu * j
    for j in range(2, l + 1):
        h[j - 1, j - 2] = mu * (l - j + 1)
    return complex(np.linalg.det(h))


class TestPasting:
    def test_roots_match_d_vector_determinant(self):
        n, mu, b = 1.4, 0.3, 0.25

        def by_paste(lam):
            return pasting_value(HeunParams(n, lam, mu, b)).signed

        def by_dvec(lam):
            det, scale = pasting_determinant(HeunParams(n, lam, mu, b))
            return det.real / scale

        root_p = find_root_1d(by_paste, (-2.4, -1.9), 1e-12)
        root_d = find_root_1d(by_dvec, (-2.4, -1.9), 1e-12)
        assert abs(root_p - root_d) < 1e-7

    def test_conjugation_symmetry_real(self):
        v = pasting_value(HeunParams(1.4, -0.7, 0.3, 0.25))
        assert complex(v.value).imag == 0.0

    def test_resonant_rejected(self):
        from heunlock.errors import ResonantParametersError
        with pytest.raises(ResonantParametersError):
            pasting_value(HeunParams(1.4, 0.1, 0.2, 1.0))


class TestResonantPasting:
    def test_integer_n_rejected(self):
        with pytest.raises(IntegerNError):
            resonant_pasting_value(2.0, 0.1, 0.2)

    def test_conjugation_symmetry_real(self):
        v = resonant_pasting_value(1.5, -0.3, 0.4)
        assert complex(v.value).imag == 0.0

    def test_small_b_pasting_roots_approach_resonant_roots(self):
        n, mu = 1.5, 0.4

        def reson(lam):
            return resonant_pasting_value(n, lam, mu).signed

        def shifted(lam):
            return pasting_value(HeunParams(n, lam, mu, 1e-4)).signed

        root_r = find_root_1d(reson, (-1.2, -0.2), 1e-12)
        root_s = find_root_1d(shifted, (root_r - 0.05, root_r + 0.05), 1e-12)
        assert abs(root_r - root_s) < 1e-3


class TestLevelCurve:
    def test_resonant_band_refused(self):
        with pytest.raises(ResonantLineError):
            level_curve_value(0.5, 0.5 + 1e-5, 2.0, 0.25)
        with pytest.raises(ResonantLineError):
            level_curve_value(0.5, 1.5, 2.0, 0.25)

    def test_r_plus_two_same_roots(self):
        omega, a = 2.0, 1.0
        g1 = equation_in_b("pasterho", omega, 1, r=0.5)
        g2 = equation_in_b("pasterho", omega, 1, r=2.5)
        root1 = _scan_root(lambda b: g1(b, a), 0.3, 3.5)
        root2 = find_root_1d(lambda b: g2(b, a), (root1 - 0.05, root1 + 0.05),
                             1e-10)
        assert abs(root1 - root2) < 1e-6

    def test_r_reflection_symmetry(self):
        omega, a, r = 2.0, 1.0, 0.5
        g = equation_in_b("pasterho", omega, 1, r=r)
        root = _scan_root(lambda b: g(b, a), 0.3, 3.5)

        def g_neg(b):
            return level_curve_value(-r, b / omega, omega,
                                     a / (2 * omega)).signed

        root_neg = find_root_1d(g_neg, (-root - 0.05, -root + 0.05), 1e-10)
        assert abs(root_neg + root) < 1e-6


def _scan_root(f, lo, hi, n=141, tol=1e-10):
    xs = np.linspace(lo, hi, n)
    vals = []
    for x in xs:
        try:
            vals.append(f(x))
        except (ResonantLineError, EvenLError, OddLError):
            vals.append(math.nan)
    for i in range(n - 1):
        if not (math.isnan(vals[i]) or math.isnan(vals[i + 1])):
            if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0:
                return find_root_1d(f, (float(xs[i]), float(xs[i + 1])), tol)
    raise AssertionError("no root in scan range")


class TestBoundaryEquations:
    def test_e0_even_in_mu(self):
        v1 = boundary_e0(0.7, 1.0, 0.35, "plus")
        v2 = boundary_e0(0.7, 1.0, -0.35, "plus")
        assert v1.value == v2.value

    def test_e1_mu_sign_parity(self):
        v1 = boundary_e1(0.4, 1.0, 0.35, "plus")
        v2 = boundary_e1(0.4, 1.0, -0.35, "minus")
        assert v1.value == v2.value

    def test_e0_even_l_rejected(self):
        with pytest.raises(EvenLError):
            boundary_e0(2.0, 1.0, 0.3, "plus")

    def test_e1_odd_l_rejected(self):
        with pytest.raises(OddLError):
            boundary_e1(1.0, 1.0, 0.3, "plus")

    def test_e1_l_zero_admissible(self):
        v = boundary_e1(0.0, 2.0, 0.3, "plus")
        assert math.isfinite(v.normalized)

    def test_interior_point_far_from_zero(self):
        # (B, A) = (1, 1): well inside the rho=1 area at omega=1
        from heunlock.flow import poincare_displacement_range, PhysParams
        lo, hi = poincare_displacement_range(PhysParams(1.0, 1.0, 1.0))
        assert lo < 2 * math.pi < hi  # contains a fixed point: locked
        for sign in ("plus", "minus"):
            assert boundary_e0(1.0, 1.0, 0.5, sign).normalized > 1e-2
            assert boundary_e1(1.2, 1.0, 0.5, sign).normalized > 1e-2


class TestBessel:
    def test_i1_at_zero(self):
        assert bessel_I(1, 0.0) == 0.0

    def test_generating_function(self):
        x, z = 1.0, 0.5 + 0.2j
        total = sum(bessel_I(k, x) * z**k for k in range(-30, 31))
        expect = cmath.exp((x / 2.0) * (z + 1.0 / z))
        assert abs(total - expect) < 1e-10

    def test_j_zero_two_resolutions(self):
        a = bessel_j_zero(1, 1, xtol=1e-11)
        b = bessel_j_zero(1, 1, xtol=1e-14)
        assert abs(a - b) < 1e-10
        assert bessel_J(1, a).real == pytest.approx(0.0, abs=1e-10)

    def test_zero_ordering(self):
        z1 = bessel_j_zero(0, 1)
        z2 = bessel_j_zero(0, 2)
        assert 0 < z1 < z2

    def test_range_exceeded(self):
        with pytest.raises(RangeExceededError):
            bessel_I(0, 60.0)


class TestRootFinding:
    def test_sqrt_two(self):
        root = find_root_1d(lambda x: x * x - 2.0, (1.0, 2.0), 1e-12)
        assert abs(root - math.sqrt(2.0)) < 1e-10

    def test_no_bracket(self):
        with pytest.raises(NoBracketError):
            find_root_1d(lambda x: x * x + 1.0, (0.0, 1.0))

    def test_complex_mode_minimum(self):
        root = find_root_1d(lambda x: abs(x - 0.7) + 1e-9, (0.0, 1.0),
                            1e-10, complex_mode=True)
        assert abs(root - 0.7) < 1e-6


class TestEquationValue:
    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            EquationValue(1.0, 0.0, 0.0)


class TestTraceCurve:
    def test_boundary_trace_and_step_halving(self):
        curve = trace_curve("e0", "plus", 1.0, 2.6, 3.4, 0.2, 1e-9,
                            b_scan=(0.2, 2.2))
        assert len(curve.points) == 5
        for pt in curve.points:
            assert pt.residual < 1e-8
        halved = trace_curve("e0", "plus", 1.0, 2.6, 3.4, 0.1, 1e-9,
                             b_scan=(0.2, 2.2))
        coarse = {round(p.a, 9): p.b for p in curve.points}
        for p in halved.points:
            key = round(p.a, 9)
            if key in coarse:
                assert abs(coarse[key] - p.b) < 1e-7

    def test_csv_round_trip_header(self):
        curve = trace_curve("e0", "plus", 1.0, 3.0, 3.2, 0.2, 1e-9,
                            b_scan=(0.2, 2.2))
        text = curve.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "# hplk-csv v1"
        assert lines[1] == "A,B,equation,sign,residual"
        assert len(lines) == 2 + len(curve.points)


class TestZetaMonodromyCrossCheck:
    def test_first_adjacency_has_near_identity_monodromy(self):
        from heunlock.flow import PhysParams, monodromy_numeric
        omega, l = 2.0, 1

        def f(m):
            return zeta(float(l), omega, m).signed

        root = _scan_root(f, 0.2, 2.4)
        p = PhysParams(omega, l * omega, 2 * omega * root)
        mon = monodromy_numeric(p, 1e-11)
        assert mon.distance_to_identity() < 1e-3
        assert mon.det_error < 1e-8
