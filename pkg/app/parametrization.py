"""
Parameter charts: physical (lambda, nu, q0) and Langer-Singer (m, q0).
"""

import logging
import math
from functools import lru_cache

from scipy.optimize import brentq, minimize_scalar

from app.config import settings
from app.elliptic_kernel import elliptic_context, ellint_E, ellint_K
from app.errors import DomainError, NoRealBoundary
from app.models import CurvatureParams, EllipticContext

logger = logging.getLogger(__name__)

# slack on the chart inequalities m <= q0 <= 1 for values produced by root solves
_CHART_SLACK = 1e-12


def roots_from_physical(params: CurvatureParams, q0: float) -> EllipticContext:
    """Ordered cubic roots for (lambda, nu) at scale q0.

    e_a = (1 - 2 lambda/3) q0 is the largest root on the classical side
    (lambda <= lambda_delta) and the middle root otherwise.
    """
    if q0 <= 0.0:
        raise DomainError(f"q0 must be positive, got {q0}")
    e_a = (1.0 - 2.0 * params.lam / 3.0) * q0
    if abs(params.lam - params.lambda_delta) < settings.degenerate_tolerance:
        # e_a is the double root at lambda = lambda_delta
        return elliptic_context(e_a, e_a, -2.0 * e_a)
    half_spread = 0.5 * q0 * params.delta
    e_b = -0.5 * e_a + half_spread
    e_c = -0.5 * e_a - half_spread
    if e_a >= e_b:
        return elliptic_context(e_a, e_b, e_c)
    return elliptic_context(e_b, e_a, e_c)


def ls_roots(m: float) -> EllipticContext:
    """Langer-Singer roots, ordered for every real m."""
    if not math.isfinite(m):
        raise DomainError(f"modulus must be finite, got {m}")
    if m < 0.0:
        roots = ((1.0 - 2.0 * m) / 3.0, (1.0 + m) / 3.0, (m - 2.0) / 3.0)
    elif m <= 1.0:
        roots = ((1.0 + m) / 3.0, (1.0 - 2.0 * m) / 3.0, (m - 2.0) / 3.0)
    else:
        roots = ((1.0 + m) / 3.0, (m - 2.0) / 3.0, (1.0 - 2.0 * m) / 3.0)
    return elliptic_context(*roots)


def jacobi_modulus(m: float) -> float:
    """p(m) = (e2 - e3)/(e1 - e3) of the Langer-Singer roots, always in [0, 1]."""
    if m < 0.0:
        return 1.0 / (1.0 - m)
    if m <= 1.0:
        return 1.0 - m
    return 1.0 - 1.0 / m


def _check_chart(m: float, q0: float) -> None:
    if q0 <= 0.0:
        raise DomainError(f"q0 must be positive, got {q0}")
    if q0 > 1.0 + _CHART_SLACK:
        raise DomainError(f"q0 must satisfy q0 <= 1, got {q0}")
    if m > q0 + _CHART_SLACK:
        raise DomainError(f"chart requires m <= q0, got m = {m}, q0 = {q0}")


def lambda_of(m: float, q0: float) -> float:
    _check_chart(m, q0)
    return 1.5 - (1.0 + m) / (2.0 * q0)


def nu2_of(m: float, q0: float) -> float:
    """nu^2 = (1 - q0)(q0 - m)/q0^2, clipped at zero on the chart boundary."""
    _check_chart(m, q0)
    return max(0.0, (1.0 - q0) * (q0 - m) / (q0 * q0))


def physical_from_ls(m: float, q0: float, k0: float | None = None) -> CurvatureParams:
    """(lambda, nu, k0) for a Langer-Singer point, with nu >= 0."""
    return CurvatureParams(
        lam=lambda_of(m, q0),
        nu=math.sqrt(nu2_of(m, q0)),
        k0=settings.k0 if k0 is None else k0,
    )


def q0_bounds(m: float, nu: float) -> tuple[float, float]:
    """Endpoints q0^- <= q0^+ of the q0 interval on which nu2_of(m, q0) >= nu^2."""
    disc = (1.0 - m) ** 2 - 4.0 * nu * nu * m
    if disc < 0.0:
        raise NoRealBoundary(f"no real q0 boundary for m = {m}, nu = {nu} (discriminant {disc})")
    root = math.sqrt(disc)
    denom = 2.0 * (1.0 + nu * nu)
    return ((1.0 + m) - root) / denom, ((1.0 + m) + root) / denom


def closure_q0(m: float) -> float:
    """Q0(m) = 2E(m)/K(m) - (1 - m), the q0 that closes the vertical coordinate."""
    if not math.isfinite(m) or m >= 1.0:
        raise DomainError(f"Q0(m) requires m < 1, got {m}")
    return 2.0 * ellint_E(m) / ellint_K(m).real - (1.0 - m)


def n_of(m: float) -> float:
    """Modulus involution n(m) = -m/(1 - m)."""
    if m == 1.0:
        raise DomainError("n(m) is undefined at m = 1")
    return -m / (1.0 - m)


def find_m0(tolerance: float | None = None) -> tuple[float, float]:
    """Endpoints (m0-, m0+) of the closed-knot chart; m0- solves 2E(m) = K(m).

    tolerance is the Brent xtol, settings.root_tolerance by default.
    """
    return _chart_endpoints(settings.root_tolerance if tolerance is None else tolerance)


@lru_cache(maxsize=8)
def _chart_endpoints(xtol: float) -> tuple[float, float]:
    m0_minus = brentq(
        lambda m: 2.0 * ellint_E(m) - ellint_K(m).real,
        0.5,
        0.99,
        xtol=xtol,
        rtol=4.0 * 2.220446049250313e-16,
    )
    m0_plus = n_of(m0_minus)
    logger.debug(f"Chart endpoints m0- = {m0_minus:.15f}, m0+ = {m0_plus:.15f}")
    return float(m0_minus), float(m0_plus)


def check_closed_chart(m: float) -> None:
    """Raise DomainError unless m0+ < m <= m0-."""
    m0_minus, m0_plus = find_m0()
    if not (m0_plus < m <= m0_minus + _CHART_SLACK):
        raise DomainError(f"m = {m} is outside the closed-knot chart ({m0_plus}, {m0_minus}]")


def closed_q0(m: float) -> float:
    """Q0(m) on the closed-knot chart, pinned to m at the classical endpoint."""
    check_closed_chart(m)
    q0 = closure_q0(m)
    if q0 < m:
        # 2E = K at m0-, so Q0(m0-) = m0- up to round-off
        q0 = m
    return min(q0, 1.0)


def nu_of_m(m: float) -> float:
    """nu(m) on the closed-knot chart."""
    q0 = closed_q0(m)
    return math.sqrt(max(0.0, (1.0 / q0 - 1.0) * (1.0 - m / q0)))


def lambda_of_m(m: float) -> float:
    """lambda(m) on the closed-knot chart."""
    return 1.5 - (m + 1.0) / (2.0 * closed_q0(m))


@lru_cache(maxsize=1)
def find_nu_max() -> tuple[float, float]:
    """(m*, nu(m*)): the maximum of nu on the classical branch."""
    m0_minus, _ = find_m0()
    result = minimize_scalar(
        lambda m: -nu_of_m(m),
        bounds=(1e-6, m0_minus),
        method="bounded",
        options={"xatol": 1e-10},
    )
    m_star = float(result.x)
    return m_star, nu_of_m(m_star)


def mu2_of(m: float, q0: float) -> float:
    """mu^2 = nu^2 / ((1 - lambda)^2 + nu^2), with the closure-curve limit 1/3 at (0, 1)."""
    _check_chart(m, q0)
    spread = 4.0 * (1.0 - q0) * max(q0 - m, 0.0)
    shift = (1.0 + m - q0) ** 2
    if spread + shift == 0.0:
        return 1.0 / 3.0
    return spread / (shift + spread)


def chart_from_physical(params: CurvatureParams) -> tuple[float, float]:
    """Inverse chart (lambda, nu) -> (m, q0), read off the roots at q0 = 1."""
    ctx = roots_from_physical(params, 1.0)
    spread = ctx.e1 - ctx.e3
    if params.classical:
        return (ctx.e1 - ctx.e2) / spread, 1.0 / spread
    p_prime = (ctx.e1 - ctx.e2) / spread
    m = -p_prime / (1.0 - p_prime)
    return m, (1.0 - m) / spread


def two_param_modulus(params: CurvatureParams) -> float:
    """Jacobi modulus of the q0-free roots (q0 = 1)."""
    return roots_from_physical(params, 1.0).p
