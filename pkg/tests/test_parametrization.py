import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.errors import DomainError, NoRealBoundary
from app.models import CurvatureParams
from app.parametrization import (
    chart_from_physical,
    closed_q0,
    closure_q0,
    find_m0,
    find_nu_max,
    jacobi_modulus,
    lambda_of,
    lambda_of_m,
    ls_roots,
    mu2_of,
    n_of,
    nu2_of,
    nu_of_m,
    physical_from_ls,
    q0_bounds,
    roots_from_physical,
    two_param_modulus,
)


def _chart_points(count=200, seed=3):
    rng = np.random.default_rng(seed)
    m = rng.uniform(-4.0, 0.95, count)
    q0 = np.array([rng.uniform(max(mi, 0.05), 1.0) for mi in m])
    return list(zip(m.tolist(), q0.tolist(), strict=True))


class TestRootsFromPhysical:
    def test_torsionless_roots(self):
        lam = 0.3
        ctx = roots_from_physical(CurvatureParams(lam=lam, nu=0.0), 1.0)
        expected = (1.0 - 2.0 * lam / 3.0, -2.0 * lam / 3.0, -1.0 + 4.0 * lam / 3.0)
        assert_allclose(ctx.roots, expected)

    @pytest.mark.parametrize("lam, nu, q0", [(1.0, 0.0, 1.0), (0.82, 0.6, 0.8)])
    def test_double_root_at_lambda_delta(self, lam, nu, q0):
        ctx = roots_from_physical(CurvatureParams(lam=lam, nu=nu), q0)
        assert ctx.e1 == ctx.e2
        assert ctx.delta == 0.0
        assert ctx.p == 1.0
        assert math.isinf(ctx.omega1)
        assert math.isfinite(ctx.omega3_abs)

    def test_discriminant(self):
        ctx = roots_from_physical(CurvatureParams(lam=0.0, nu=1.0), 1.0)
        assert ctx.delta == pytest.approx(80.0, rel=1e-12)
        assert ctx.g2**3 - 27.0 * ctx.g3**2 == pytest.approx(80.0, rel=1e-10)

    def test_branch_assignment(self):
        classical = CurvatureParams(lam=0.4, nu=0.1)
        extended = CurvatureParams(lam=1.2, nu=0.3)
        assert classical.classical and not extended.classical
        e_a_classical = (1.0 - 2.0 * classical.lam / 3.0) * 0.8
        e_a_extended = (1.0 - 2.0 * extended.lam / 3.0) * 0.8
        assert roots_from_physical(classical, 0.8).e1 == pytest.approx(e_a_classical)
        assert roots_from_physical(extended, 0.8).e2 == pytest.approx(e_a_extended)

    def test_non_positive_scale(self):
        with pytest.raises(DomainError):
            roots_from_physical(CurvatureParams(lam=0.4, nu=0.1), 0.0)


class TestLangerSingerRoots:
    def test_examples(self):
        assert_allclose(ls_roots(0.5).roots, (0.5, 0.0, -0.5), atol=1e-15)
        ctx = ls_roots(0.0)
        assert_allclose(ctx.roots, (1.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0), atol=1e-15)
        assert ctx.p == 1.0
        ctx = ls_roots(-1.0)
        assert_allclose(ctx.roots, (1.0, 0.0, -1.0), atol=1e-15)
        assert ctx.p == pytest.approx(0.5)

    def test_ordering_and_modulus(self):
        for m in np.linspace(-6.0, 3.0, 200):
            ctx = ls_roots(float(m))
            assert ctx.e3 <= ctx.e2 <= ctx.e1
            assert 0.0 <= ctx.p <= 1.0
            assert ctx.p == pytest.approx(jacobi_modulus(float(m)), abs=1e-14)

    def test_chart_round_trip(self):
        for m, q0 in _chart_points():
            params = CurvatureParams(lam=lambda_of(m, q0), nu=math.sqrt(nu2_of(m, q0)))
            physical = roots_from_physical(params, q0)
            assert_allclose(physical.roots, ls_roots(m).roots, atol=1e-10)

    def test_inverse_chart(self):
        for m, q0 in _chart_points(count=40, seed=5):
            if abs(m) < 1e-3:
                continue
            m_back, q0_back = chart_from_physical(physical_from_ls(m, q0))
            assert m_back == pytest.approx(m, abs=1e-10)
            assert q0_back == pytest.approx(q0, abs=1e-10)

    def test_two_param_modulus(self):
        params = physical_from_ls(0.5, 0.75)
        assert two_param_modulus(params) == pytest.approx(jacobi_modulus(0.5), abs=1e-12)
        assert two_param_modulus(CurvatureParams(lam=0.3, nu=1e3)) == pytest.approx(0.5, abs=1e-3)


class TestChartFunctions:
    def test_nu2_vanishes_on_boundaries(self):
        assert nu2_of(0.3, 1.0) == 0.0
        assert nu2_of(0.3, 0.3) == 0.0
        assert nu2_of(-2.0, 1.0) == 0.0

    def test_nu2_example(self):
        assert nu2_of(0.5, 0.75) == pytest.approx(1.0 / 9.0, rel=1e-14)
        assert lambda_of(0.5, 0.75) == pytest.approx(0.5, rel=1e-14)

    def test_chart_violations(self):
        with pytest.raises(DomainError):
            lambda_of(0.6, 0.5)
        with pytest.raises(DomainError):
            nu2_of(0.2, 1.2)
        with pytest.raises(DomainError):
            nu2_of(0.2, 0.0)

    def test_physical_params(self):
        params = physical_from_ls(0.5, 0.75, k0=2.0)
        assert params.nu == pytest.approx(1.0 / 3.0)
        assert params.k0 == 2.0
        assert params.lambda_delta == pytest.approx(1.0 - 1.0 / 18.0)


class TestBounds:
    def test_torsionless(self):
        assert q0_bounds(0.3, 0.0) == pytest.approx((0.3, 1.0))
        assert q0_bounds(-2.0, 0.0) == pytest.approx((-2.0, 1.0))

    def test_examples(self):
        assert q0_bounds(0.0, 1.0) == pytest.approx((0.0, 0.5))
        assert q0_bounds(1.0, 0.0) == pytest.approx((1.0, 1.0))

    @pytest.mark.parametrize("m, nu", [(0.3, 0.2), (0.1, 0.5), (0.6, 0.1)])
    def test_endpoints_attain_nu(self, m, nu):
        low, high = q0_bounds(m, nu)
        assert nu2_of(m, low) == pytest.approx(nu * nu, abs=1e-10)
        assert nu2_of(m, high) == pytest.approx(nu * nu, abs=1e-10)

    def test_no_real_boundary(self):
        with pytest.raises(NoRealBoundary):
            q0_bounds(0.5, 1.0)


class TestClosureChart:
    def test_chart_endpoints(self):
        m0_minus, m0_plus = find_m0()
        assert m0_minus == pytest.approx(0.82611, abs=1e-4)
        assert m0_plus == pytest.approx(-4.75092, abs=2e-5)
        assert n_of(m0_plus) == pytest.approx(m0_minus, abs=1e-12)

    def test_endpoints_follow_the_requested_tolerance(self):
        coarse = find_m0(1e-3)
        assert coarse[0] == pytest.approx(find_m0()[0], abs=2e-3)
        assert find_m0(1e-3) is coarse
        assert find_m0() is not coarse

    def test_closure_q0_values(self):
        m0_minus, m0_plus = find_m0()
        assert closure_q0(0.0) == pytest.approx(1.0, abs=1e-15)
        assert closure_q0(m0_minus) == pytest.approx(m0_minus, abs=1e-10)
        assert closure_q0(m0_plus) == pytest.approx(0.0, abs=1e-10)

    def test_closure_q0_domain(self):
        with pytest.raises(DomainError):
            closure_q0(1.0)

    def test_closed_chart_domain(self):
        m0_minus, m0_plus = find_m0()
        with pytest.raises(DomainError):
            closed_q0(0.9)
        with pytest.raises(DomainError):
            closed_q0(m0_plus)
        assert closed_q0(m0_minus) == pytest.approx(m0_minus, abs=1e-10)

    def test_involution(self):
        assert n_of(-1.0) == 0.5
        assert n_of(0.0) == 0.0
        assert n_of(0.751) == pytest.approx(-0.751 / 0.249, rel=1e-14)
        for m in np.linspace(-6.0, 0.99, 100):
            assert n_of(n_of(float(m))) == pytest.approx(float(m), abs=1e-13)
        with pytest.raises(DomainError):
            n_of(1.0)

    def test_one_parameter_chart(self):
        m0_minus, _ = find_m0()
        assert nu_of_m(0.0) == 0.0
        assert lambda_of_m(0.0) == pytest.approx(1.0, abs=1e-15)
        assert nu_of_m(m0_minus) == pytest.approx(0.0, abs=1e-5)
        assert lambda_of_m(m0_minus) == pytest.approx(1.0 - 0.5 / m0_minus, abs=1e-9)

    def test_torsion_maximum(self):
        m_star, nu_star = find_nu_max()
        assert m_star == pytest.approx(0.6455, abs=1e-3)
        assert nu_star == pytest.approx(0.1632, abs=1e-3)
        assert nu_of_m(0.6455) == pytest.approx(0.1632, abs=1e-3)

    def test_mu2(self):
        assert mu2_of(0.0, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-10)
        for m in np.linspace(-4.5, 0.8, 30):
            assert 0.0 <= mu2_of(float(m), closed_q0(float(m))) <= 1.0
