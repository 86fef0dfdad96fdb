"""Core product engine and projective solver."""

import cmath
import math

import numpy as np
import pytest

from heunlock.errors import (
    NonSummableError,
    SeedTooLowError,
    ToleranceUnreachableError,
)
from heunlock.matprod import (
    Mat2,
    converging_product,
    pochhammer,
    product_column,
    projective_backward_solve,
    rising_range,
)

LAM, MU, B, N = 0.1, 0.2, 0.3, 1.4


def heun_factors(lam=LAM, mu=MU, b=B, n=N):
    def mk(k):
        d = (k + b) * (k + b + n - 1)
        return Mat2(1 + lam / d, mu * mu / d, 1.0, 0.0)
    return mk


def e0_factors(l=0.5, lam=0.2, mu=0.1):
    def mk(k):
        d = k * k - l * l / 4
        return Mat2(1 + lam / d, mu * mu / d, 1.0, 0.0)
    return mk


def heun_recurrence(lam=LAM, mu=MU, b=B, n=N):
    def coeffs(k):
        return (-mu * (k + b + n - 1),
                (k + b) * (k + b + n - 1) + lam,
                mu * (k + b + 1))
    return coeffs


class TestMat2:
    def test_matmul_matches_numpy(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            ma = Mat2(*a.ravel())
            mb = Mat2(*b.ravel())
            mc = ma @ mb
            expect = a @ b
            got = np.array([[mc.m11, mc.m12], [mc.m21, mc.m22]])
            assert np.allclose(got, expect, rtol=0, atol=1e-14)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Mat2(1.0, math.inf, 0.0, 0.0)
        with pytest.raises(ValueError):
            Mat2(1.0, complex(0, math.nan), 0.0, 0.0)

    def test_norm_is_max_row_sum(self):
        m = Mat2(3, -4, 1j, 0.5)
        assert m.norm() == pytest.approx(7.0)


class TestPochhammer:
    def test_direct_expansion(self):
        assert pochhammer(2.0, 0, 2) == pytest.approx(24.0)  # 2*3*4

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            pochhammer(1.5 + 1j, 3, 2)

    def test_zero_factor_is_legal(self):
        assert pochhammer(-1.0, 0, 2) == 0.0

    def test_rising_range_empty_is_one(self):
        assert rising_range(0.7, 3, 3) == 1.0
        assert rising_range(2.0, 0, 3) == pytest.approx(24.0)


class TestConvergingProduct:
    def test_pure_projector(self):
        proj = Mat2.projector()
        res = converging_product(lambda k: proj, 5, 1e-12)
        assert res.tail_bound == 0.0
        assert (res.value.m11, res.value.m12, res.value.m21, res.value.m22) \
            == (1.0, 0.0, 1.0, 0.0)
        assert res.first_index == 5

    def test_certified_tolerance_unreachable_at_spec_example(self):
        # entries of these products converge only like 1/N, so a certified
        # absolute tail of 1e-12 cannot fit under the factor cap
        with pytest.raises(ToleranceUnreachableError):
            converging_product(heun_factors(), 1, 1e-12, hard_cap=10**6)

    def test_certified_doubling_within_tail_bound(self):
        res = converging_product(heun_factors(), 1, 1e-4)
        deeper = converging_product(
            heun_factors(), 1, 0.0, stop="projective",
            min_factors=2 * res.factors)
        assert deeper.factors >= 2 * res.factors
        gap = res.value.sub(deeper.value).norm()
        assert gap < res.tail_bound
        assert res.tail_bound <= 1e-4

    def test_ratio_converged_at_doubled_truncation(self):
        r1 = converging_product(heun_factors(), 1, 0.0, stop="projective")
        r2 = converging_product(heun_factors(), 1, 0.0, stop="projective",
                                min_factors=2 * r1.factors)
        assert abs(r1.value.m21 / r1.value.m11
                   - r2.value.m21 / r2.value.m11) < 1e-12

    def test_right_column_within_tail_bound(self):
        res = converging_product(e0_factors(), 0, 0.0, stop="projective")
        assert abs(res.value.m12) <= res.tail_bound
        assert abs(res.value.m22) <= res.tail_bound

    def test_telescoping_adjacent_products(self):
        mk = heun_factors()
        p1 = converging_product(mk, 1, 1e-4)
        p2 = converging_product(mk, 2, 1e-4)
        assert abs(p1.value.m21 - p2.value.m11) <= \
            p1.tail_bound + p2.tail_bound

    def test_ratio_limit_tends_to_one(self):
        mk = heun_factors()
        gaps = []
        for start in (50, 100):
            prod = converging_product(mk, start, 0.0, stop="projective")
            gaps.append(abs(prod.value.m21 / prod.value.m11 - 1.0))
        assert gaps[1] < gaps[0]
        resid = converging_product(mk, 100, 1e-3)
        assert gaps[1] < 10 * resid.tail_bound

    def test_nonsummable_constant_perturbation(self):
        bad = Mat2(1.4, 0.2, 1.0, 0.0)
        with pytest.raises(NonSummableError):
            converging_product(lambda k: bad, 1, 1e-10)

    def test_product_column_consistency(self):
        mk = heun_factors()
        cols, deep = product_column(mk, 1, 6)
        # columns must satisfy v_k = M_k v_{k+1} exactly
        for i in range(6):
            v = mk(1 + i).apply(cols[i + 1])
            assert abs(v[0] - cols[i][0]) < 1e-14 * max(1, abs(v[0]))
            assert abs(v[1] - cols[i][1]) < 1e-14 * max(1, abs(v[1]))


class TestProjectiveBackwardSolve:
    def test_deeper_seed_agrees(self):
        co = heun_recurrence()
        x200 = projective_backward_solve(co, 200, 1)
        x400 = projective_backward_solve(co, 400, 1)
        assert abs(x200[0] - x400[0]) < 1e-10

    def test_seed_too_low_when_g_vanishes(self):
        def co(k):
            return (1.0, 0.0, 1.0)
        with pytest.raises(SeedTooLowError):
            projective_backward_solve(co, 100, 1)

    def test_infinity_is_handled(self):
        # force one step through the point at infinity: g + h*x = 0
        def co(k):
            if k == 50:
                return (1.0, 0.0, 1.0)  # den = 0 at x=0 never hit; k_hi big g
            return (-1.0, k * k * 1.0, 1.0)
        xs = projective_backward_solve(co, 90, 40)
        assert all(cmath.isfinite(x) or cmath.isinf(x) for x in xs)
