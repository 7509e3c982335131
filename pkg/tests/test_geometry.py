import math

import numpy as np
import pytest
from scipy.special import ellipeinc, ellipj, ellipk

from app import geometry
from app.config import settings
from app.curvature import kappa2_jacobi, make_solution, xi_of
from app.elliptic_kernel import ellint_K, wp_eval, wp_prime
from app.errors import BranchError, ClosureViolated, DomainError, Unbounded
from app.geometry import (
    darboux,
    darboux_angle,
    delta_theta,
    frame_coeffs,
    invariant_report,
    mu_of,
    normalized_radius,
    omega_param,
    radius_scale,
    reconstruct_curve,
    rho_of,
    theta_of,
    vertical_drift,
    z_of,
)
from app.models import CurvatureParams
from app.parametrization import closure_q0, find_m0, ls_roots, n_of, roots_from_physical


@pytest.fixture(scope="module")
def m0_minus():
    return find_m0()[0]


class TestFrameCoefficients:
    @pytest.mark.parametrize("m", [0.5, -1.0])
    def test_unit_vector(self, m):
        sol = make_solution(m)
        for s in np.linspace(0.0, sol.period_S, 17):
            coeffs = frame_coeffs(float(s), sol)
            norm2 = coeffs.alpha**2 + coeffs.beta**2 + coeffs.gamma**2
            assert norm2 == pytest.approx(1.0, abs=1e-10)

    def test_start_of_period(self):
        sol = make_solution(0.5)
        coeffs = frame_coeffs(0.0, sol)
        assert coeffs.beta == 0.0
        assert coeffs.gamma == pytest.approx(mu_of(sol))
        assert coeffs.R == pytest.approx(radius_scale(sol))


class TestCylindricalCoordinates:
    @pytest.mark.parametrize("m", [0.5, -1.0])
    def test_radius_extremes(self, m):
        sol = make_solution(m)
        scale2 = radius_scale(sol) ** 2
        mu2 = mu_of(sol) ** 2
        assert rho_of(0.0, sol) == pytest.approx(scale2 * math.sqrt(1.0 - mu2), abs=1e-12)
        midpoint = rho_of(0.5 * sol.period_S, sol)
        assert midpoint == pytest.approx(scale2 * math.sqrt(1.0 - mu2 - m / sol.q0), abs=1e-9)

    def test_radius_vanishes_for_the_planar_curve(self, m0_minus):
        sol = make_solution(m0_minus)
        assert rho_of(0.5 * sol.period_S, sol) == pytest.approx(0.0, abs=1e-6)

    def test_height_is_periodic_on_the_closure_curve(self):
        sol = make_solution(0.5)
        scale = radius_scale(sol)
        assert z_of(0.0, sol) == 0.0
        assert abs(z_of(0.5 * sol.period_S, sol)) < 1e-10 * scale
        assert abs(z_of(sol.period_S, sol)) < 1e-10 * scale

    def test_height_against_jacobi_zeta(self):
        m = 0.5
        sol = make_solution(m)
        s = 0.3 * sol.period_S
        u = float(xi_of(s, sol))
        amplitude = ellipj(u, m)[3]
        zeta = ellipeinc(amplitude, m) - (ellipeinc(math.pi / 2.0, m) / ellipk(m)) * u
        expected = sol.k0 * radius_scale(sol) ** 2 / math.sqrt(sol.q0) * zeta
        assert z_of(s, sol) == pytest.approx(expected, abs=1e-10)

    def test_open_curve_drifts(self):
        sol = make_solution(0.5, 0.7)
        with pytest.raises(ClosureViolated):
            z_of(1.0, sol)
        drift = vertical_drift(0.5, 0.7)
        assert abs(drift) > 1e-3
        assert z_of(sol.period_S, sol, allow_drift=True) == pytest.approx(drift, rel=1e-10)

    def test_no_drift_on_the_closure_curve(self):
        assert vertical_drift(0.5, closure_q0(0.5)) == pytest.approx(0.0, abs=1e-9)


class TestAzimuth:
    def test_omega_parameter(self):
        param = omega_param(0.5)
        ctx = ls_roots(0.5)
        assert 0.0 <= param.Omega <= ctx.omega1
        assert param.identity_residual < 1e-8
        q0 = closure_q0(0.5)
        lam = 1.5 - 1.5 / (2.0 * q0)
        mu2 = mu_of(make_solution(0.5)) ** 2
        assert np.real(wp_eval(param.v, ctx)) == pytest.approx(
            q0 * (mu2 - 2.0 * lam / 3.0), abs=1e-10
        )

    def test_omega_parameter_limits(self, m0_minus):
        assert omega_param(0.0).Omega == pytest.approx(math.atanh(1.0 / math.sqrt(3.0)), abs=1e-8)
        assert omega_param(m0_minus).Omega == pytest.approx(ls_roots(m0_minus).omega1, abs=1e-6)

    def test_delta_theta_limits(self, m0_minus):
        assert delta_theta(0.0) == pytest.approx(0.0, abs=1e-8)
        assert delta_theta(m0_minus) == pytest.approx(-math.pi, abs=1e-6)

    @pytest.mark.parametrize("m", [-3.0, -1.0, -0.2])
    def test_modulus_symmetry(self, m):
        assert delta_theta(n_of(m)) == pytest.approx(delta_theta(m), abs=1e-8)
        assert normalized_radius(n_of(m)) == pytest.approx(normalized_radius(m), abs=1e-8)

    @pytest.mark.parametrize("m", [0.5, -1.0])
    def test_theta_over_one_period(self, m):
        sol = make_solution(m)
        period = 2.0 * sol.ctx.omega3_abs
        assert theta_of(0.0, sol) == pytest.approx(0.0, abs=1e-12)
        assert theta_of(period, sol) == pytest.approx(delta_theta(m), abs=1e-7)
        assert theta_of(2.5 * period, sol) == pytest.approx(
            2.0 * delta_theta(m) + theta_of(0.5 * period, sol), abs=1e-7
        )

    def test_theta_rate(self):
        sol = make_solution(0.5)
        mu = mu_of(sol)
        h = 1e-5
        for xi in np.linspace(0.1, 2.0 * sol.ctx.omega3_abs - 0.1, 9):
            rate = (theta_of(xi + h, sol) - theta_of(xi - h, sol)) / (2.0 * h)
            rate *= sol.k0 / (2.0 * math.sqrt(sol.q0))
            s = 2.0 * math.sqrt(sol.q0) * xi / sol.k0
            k2 = kappa2_jacobi(s, sol)
            expected = 0.5 * sol.k0 * mu * (k2 - sol.lam * sol.k0**2) / (k2 - mu**2 * sol.k0**2)
            assert rate == pytest.approx(expected, abs=1e-6)

    def test_unresolvable_phase_raises(self, monkeypatch):
        sol = make_solution(0.5)
        monkeypatch.setattr(settings, "theta_refine_depth", 1)
        monkeypatch.setattr(
            geometry, "_sigma_ratio", lambda xi, sol, omega: np.exp(1.6j * math.pi * xi)
        )
        with pytest.raises(BranchError):
            geometry._refined_phase(np.array([0.0, 1.0]), sol, None)


class TestDarboux:
    def test_start_and_rotation(self):
        sol = make_solution(0.5)
        assert darboux(0.0, sol).Theta == 0.0
        for s in np.linspace(0.05, sol.period_S, 12):
            result = darboux(float(s), sol)
            k2 = kappa2_jacobi(float(s), sol)
            assert result.kappa_g**2 + result.kappa_n**2 == pytest.approx(k2, rel=1e-12)
            assert result.kappa_g == pytest.approx(result.kappa_g_closed_form, abs=1e-7)

    @pytest.mark.parametrize("m", [0.5, -1.0])
    def test_two_parameter_derivative_identity(self, m):
        sol = make_solution(m, k0=1.5)
        params = CurvatureParams(lam=sol.lam, nu=sol.nu, k0=sol.k0)
        ctx = roots_from_physical(params, 1.0)
        omega_a = complex(ctx.omega1) if params.classical else ctx.omega2
        for s in np.linspace(0.05, sol.period_S - 0.05, 9):
            lhs = complex(wp_prime(0.5j * sol.k0 * s + omega_a, ctx))
            rhs = 2j * sol.nu * math.tan(darboux_angle(float(s), sol))
            assert abs(lhs - rhs) < 1e-8 * (1.0 + abs(rhs))

    @pytest.mark.parametrize("m", [0.5, -1.0])
    def test_relative_torsion(self, m):
        sol = make_solution(m)
        k0, lam, nu = sol.k0, sol.lam, sol.nu
        for s in np.linspace(0.1, sol.period_S, 7):
            u = kappa2_jacobi(float(s), sol)
            linear = k0**4 * (1.0 - 2.0 * lam + nu**2)
            # ((kappa^2)')^2 = P(u) and (kappa^2)'' = P'(u) / 2
            first2 = -(u**3) + 2.0 * lam * k0**2 * u**2 + linear * u - nu**2 * k0**6
            second = 0.5 * (-3.0 * u**2 + 4.0 * lam * k0**2 * u + linear)
            rate = -(k0**3) * nu * second / ((k0**3 * nu) ** 2 + first2)
            expected = nu * k0**3 / (2.0 * u) + rate
            assert darboux(float(s), sol).tau_r == pytest.approx(expected, abs=1e-5)

    def test_planar_curve_has_no_darboux_angle(self, m0_minus):
        with pytest.raises(DomainError):
            darboux(0.1, make_solution(m0_minus))


class TestNormalizedRadius:
    def test_values(self, m0_minus):
        assert normalized_radius(m0_minus) == pytest.approx(2.0 * math.sqrt(m0_minus), abs=1e-6)
        assert normalized_radius(-1.0) == pytest.approx(normalized_radius(0.5), abs=1e-9)

    def test_unbounded_at_zero(self):
        with pytest.raises(Unbounded):
            normalized_radius(0.0)


class TestReconstruction:
    def test_samples_and_anchor(self):
        sol = make_solution(0.5)
        samples = reconstruct_curve(sol, samples_per_period=32, periods=2)
        assert len(samples) == 65
        first = samples[0]
        assert first.s == 0.0
        assert first.theta == pytest.approx(0.0, abs=1e-12)
        assert first.z == pytest.approx(0.0, abs=1e-14)
        assert first.position[1] == pytest.approx(0.0, abs=1e-12)
        assert first.position[0] == pytest.approx(rho_of(0.0, sol), abs=1e-12)
        assert samples[-1].s == pytest.approx(2.0 * sol.period_S)

    def test_planar_curve(self, m0_minus):
        samples = reconstruct_curve(make_solution(m0_minus), samples_per_period=64)
        for sample in samples:
            assert sample.position[1] == 0.0
            assert math.remainder(sample.theta, math.pi) == pytest.approx(0.0, abs=1e-12)

    def test_rejections(self):
        sol = make_solution(0.5)
        with pytest.raises(DomainError):
            reconstruct_curve(sol, samples_per_period=8)
        with pytest.raises(DomainError):
            reconstruct_curve(sol, periods=0)
        with pytest.raises(DomainError):
            reconstruct_curve(make_solution(0.0))

    @pytest.mark.parametrize("m", [0.5, -1.0])
    def test_invariants(self, m):
        report = invariant_report(make_solution(m), points=40)
        assert report.passed(), report.model_dump()

    def test_period_matches_complete_integral(self):
        sol = make_solution(-1.0)
        assert sol.ctx.omega3_abs == pytest.approx(ellint_K(-1.0).real, rel=1e-12)
