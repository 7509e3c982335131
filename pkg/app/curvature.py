"""
Squared-curvature solutions, torsion and residual checks of the curvature equations.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike

from app.config import settings
from app.elliptic_kernel import ellint_K, jacobi_sn_cn_dn, wp_eval
from app.errors import DegenerateRoots, DomainError
from app.models import (
    CurvatureForm,
    CurvatureParams,
    CurvatureSolution,
    LangerSingerParams,
    OdeResiduals,
)
from app.parametrization import (
    closed_q0,
    lambda_of,
    ls_roots,
    n_of,
    nu2_of,
    roots_from_physical,
)

logger = logging.getLogger(__name__)


def make_solution(
    m: float,
    q0: float | None = None,
    k0: float | None = None,
    form: CurvatureForm = CurvatureForm.JACOBI_UNIFIED,
) -> CurvatureSolution:
    """Build a CurvatureSolution on the Langer-Singer chart.

    Args:
        m: Langer-Singer modulus.
        q0: Scale parameter; defaults to the closure value Q0(m).
        k0: Initial curvature; defaults to settings.k0.
        form: Evaluation path that kappa2, torsion and ode_residuals follow.

    Raises:
        DomainError: outside m <= q0 <= 1, or m = 0 with q0 != 1.
    """
    k0 = settings.k0 if k0 is None else k0
    if k0 <= 0.0:
        raise DomainError(f"k0 must be positive, got {k0}")
    if q0 is None:
        q0 = closed_q0(m)
    lam = lambda_of(m, q0)
    nu = math.sqrt(nu2_of(m, q0))
    if m == 0.0 and abs(q0 - 1.0) > settings.q0_closure_tolerance:
        raise DomainError(f"m = 0 is only defined as the constant-curvature limit q0 = 1, got {q0}")
    ctx = ls_roots(m)
    period = 4.0 * math.sqrt(q0) * ctx.omega3_abs / k0
    return CurvatureSolution(
        params=LangerSingerParams(m=m, q0=min(q0, 1.0)),
        k0=k0,
        ctx=ctx,
        period_S=period,
        form=form,
        lam=lam,
        nu=nu,
    )


def xi_of(s: ArrayLike, sol: CurvatureSolution):
    """Scaled arclength xi = k0 s / (2 sqrt(q0))."""
    return sol.k0 * np.asarray(s, dtype=float) / (2.0 * math.sqrt(sol.q0))


def _scalar_or_array(value: np.ndarray, like: ArrayLike):
    return value.item() if np.ndim(like) == 0 else value


def kappa2_jacobi(s: ArrayLike, sol: CurvatureSolution):
    """kappa^2 = k0^2 (1 - (m/q0) sn^2(xi|m)), valid for every m <= q0."""
    sn, _, _ = jacobi_sn_cn_dn(xi_of(s, sol), sol.m)
    value = sol.k0**2 * (1.0 - (sol.m / sol.q0) * np.asarray(sn) ** 2)
    return _scalar_or_array(value, s)


def kappa_prime(s: ArrayLike, sol: CurvatureSolution):
    """Analytic derivative (kappa^2)' with respect to arclength."""
    sn, cn, dn = jacobi_sn_cn_dn(xi_of(s, sol), sol.m)
    dxi = sol.k0 / (2.0 * math.sqrt(sol.q0))
    value = -(sol.k0**2) * (sol.m / sol.q0) * 2.0 * np.asarray(sn * cn * dn) * dxi
    return _scalar_or_array(value, s)


def kappa2_weierstrass_ls(s: ArrayLike, sol: CurvatureSolution):
    """kappa^2 = (k0^2/q0)[q0 + wp(i xi + omega_a) - e_a] on the Langer-Singer lattice.

    omega_a = omega1 with e_a = e1 for m > 0, and omega2 with e_a = e2 for m < 0.
    """
    ctx = sol.ctx if sol.ctx is not None else ls_roots(sol.m)
    if ctx.degenerate:
        # e1 = e2 at m = 0: the real period is infinite and wp(i xi + omega1) = e1
        return _scalar_or_array(np.full(np.shape(s), sol.k0**2), s)
    if sol.m > 0.0:
        omega_a, e_a = complex(ctx.omega1), ctx.e1
    else:
        omega_a, e_a = ctx.omega2, ctx.e2
    phi = 1j * np.asarray(xi_of(s, sol)) + omega_a
    wp = np.real(wp_eval(phi, ctx))
    value = (sol.k0**2 / sol.q0) * (sol.q0 + wp - e_a)
    return _scalar_or_array(np.asarray(value), s)


def kappa2_two_param(s: ArrayLike, params: CurvatureParams):
    """kappa^2 = k0^2 [1 + wp(i k0 s/2 + omega_a) - e_a] on the q0-free lattice.

    Raises:
        DegenerateRoots: lambda = lambda_delta, where two roots merge.
    """
    if abs(params.lam - params.lambda_delta) < settings.degenerate_tolerance:
        raise DegenerateRoots(
            f"lambda = lambda_delta = {params.lambda_delta}: two-parameter roots merge"
        )
    ctx = roots_from_physical(params, 1.0)
    if params.classical:
        omega_a, e_a = complex(ctx.omega1), ctx.e1
    else:
        omega_a, e_a = ctx.omega2, ctx.e2
    xi_bar = 0.5 * params.k0 * np.asarray(s, dtype=float)
    wp = np.real(wp_eval(1j * xi_bar + omega_a, ctx))
    value = params.k0**2 * (1.0 + wp - e_a)
    return _scalar_or_array(np.asarray(value), s)


def kappa2_hat(s: ArrayLike, sol: CurvatureSolution):
    """Extended-branch form kappa^2/k0_hat^2 = 1 - (n/q_hat) sn^2(xi_hat - K(n)|n).

    Returns the normalized value; multiply by k0^2 (1 + |m|/q0) for kappa^2.
    """
    if sol.m >= 0.0:
        raise DomainError(f"the hat form applies to m < 0, got m = {sol.m}")
    n = n_of(sol.m)
    q_hat = sol.q0 + n * (1.0 - sol.q0)
    xi_hat = np.asarray(xi_of(s, sol)) * math.sqrt(1.0 - sol.m)
    sn, _, _ = jacobi_sn_cn_dn(xi_hat - ellint_K(n).real, n)
    value = 1.0 - (n / q_hat) * np.asarray(sn) ** 2
    return _scalar_or_array(value, s)


def kappa2(s: ArrayLike, sol: CurvatureSolution):
    """kappa^2 along the evaluation path recorded on the solution."""
    if sol.form is CurvatureForm.WEIERSTRASS_LS:
        return kappa2_weierstrass_ls(s, sol)
    if sol.form is CurvatureForm.WEIERSTRASS_TWO_PARAM:
        return kappa2_two_param(s, CurvatureParams(lam=sol.lam, nu=sol.nu, k0=sol.k0))
    return kappa2_jacobi(s, sol)


def kappa_hat_scale(sol: CurvatureSolution) -> float:
    """k0_hat^2 = k0^2 (1 + |m|/q0), the maximum of kappa^2 on the extended branch."""
    return sol.k0**2 * (1.0 + abs(sol.m) / sol.q0)


def torsion(s: ArrayLike, sol: CurvatureSolution):
    """tau = nu k0^3 / (2 kappa^2), so kappa^2 tau = k0^2 tau0 exactly."""
    return sol.nu * sol.k0**3 / (2.0 * np.asarray(kappa2(s, sol)))


def lagrange_multiplier(s: ArrayLike, sol: CurvatureSolution):
    return -1.5 * np.asarray(kappa2(s, sol)) + 0.5 * sol.lam * sol.k0**2


def _second_difference(fn, s: np.ndarray, h: float) -> np.ndarray:
    """Five-point central second derivative."""
    return (
        -fn(s + 2.0 * h) + 16.0 * fn(s + h) - 30.0 * fn(s) + 16.0 * fn(s - h) - fn(s - 2.0 * h)
    ) / (12.0 * h * h)


def ode_residuals(sol: CurvatureSolution, grid: ArrayLike | None = None) -> OdeResiduals:
    """Residuals of the second-order curvature equation and the squared-curvature equation.

    kappa'' comes from central differences of sqrt(kappa^2); (kappa^2)' is analytic.
    The second-order residual is relative to the largest right-hand-side term.
    """
    k0, lam, nu = sol.k0, sol.lam, sol.nu
    if grid is None:
        grid = np.linspace(0.0, sol.period_S, settings.samples_per_period, endpoint=False)
    s = np.asarray(grid, dtype=float)
    h = sol.period_S / settings.fd_divisions

    def kappa(x):
        return np.sqrt(np.asarray(kappa2(x, sol)))

    kap = kappa(s)
    kpp = _second_difference(kappa, s, h)
    cubic = -0.5 * kap**3
    torsion_term = 0.25 * nu**2 * k0**6 / kap**3
    linear = 0.5 * lam * k0**2 * kap
    scale = np.maximum(np.abs(cubic) + np.abs(torsion_term) + np.abs(linear), k0**3 * 1e-300)
    res_pp = float(np.max(np.abs(kpp - (cubic + torsion_term + linear)) / scale))

    k2 = kap**2
    dk2 = np.asarray(kappa_prime(s, sol))
    rhs = (
        -(k2**3)
        + 2.0 * lam * k0**2 * k2**2
        - nu**2 * k0**6
        + k0**4 * k2 * ((1.0 - 2.0 * lam) + nu**2)
    )
    res_p2 = float(np.max(np.abs(dk2**2 - rhs)) / k0**6)

    kpp0 = float(_second_difference(kappa, np.zeros(1), h)[0])
    delta = lam - sol.lambda_delta
    expected = 0 if abs(delta) < 1e-12 else int(math.copysign(1, delta))
    logger.debug(f"ODE residuals m={sol.m}: kappa''={res_pp:.3e}, (kappa^2)'^2={res_p2:.3e}")
    return OdeResiduals(
        kappa_pp=res_pp,
        kappa_prime2=res_p2,
        kappa_pp_at_zero=kpp0,
        expected_sign=expected,
    )
