"""
Curvature functional, averaged torsion and total torsion on the Langer-Singer chart.
"""

import logging
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from app.config import settings
from app.curvature import kappa2_jacobi, make_solution, torsion
from app.elliptic_kernel import ellint_E, ellint_K, weier_zeta, wp_inverse, wp_prime
from app.models import EllipticContext, FunctionalSet, Strip
from app.parametrization import closed_q0, lambda_of, ls_roots, n_of, nu2_of

logger = logging.getLogger(__name__)


def kappa_hat2(m: float, q0: float) -> float:
    """Normalization by the maximum curvature: 1 for m >= 0, 1 - m/q0 for m < 0."""
    return 1.0 if m >= 0.0 else 1.0 - m / q0


def _resolve_q0(m: float, q0: float | None) -> float:
    if q0 is None:
        return closed_q0(m)
    lambda_of(m, q0)
    return q0


def curvature_functional(m: float, q0: float | None = None, k0: float | None = None) -> float:
    """F = 2 [E(m) - (1 - q0) K(m)] / sqrt(q0 kappa_hat^2); independent of k0."""
    q0 = _resolve_q0(m, q0)
    scale = 2.0 / math.sqrt(q0 * kappa_hat2(m, q0))
    return scale * (ellint_E(m) - (1.0 - q0) * ellint_K(m).real)


def _e_a(ctx: EllipticContext, m: float) -> float:
    return ctx.e1 if m >= 0.0 else ctx.e2


def psi_of(m: float, q0: float | None = None) -> complex:
    """psi on the omega3 line with wp(psi) = e_a - q0 and wp'(psi) = +2 q0^(3/2) nu."""
    q0 = _resolve_q0(m, q0)
    ctx = ls_roots(m)
    psi = wp_inverse(_e_a(ctx, m) - q0, ctx, Strip.OMEGA3)
    nu = math.sqrt(nu2_of(m, q0))
    if nu < settings.strip_tolerance:
        # nu = 0 on the chart edges: wp'(psi) vanishes and psi sits on a half-period
        return psi
    if psi.real > 0.0 and np.real(wp_prime(psi, ctx)) < -(q0**1.5) * nu:
        # the mirror point omega3 - Omega carries the opposite derivative
        psi = complex(-psi.real, psi.imag)
    return psi


def _torsion_bracket(m: float, q0: float) -> tuple[complex, complex, EllipticContext]:
    ctx = ls_roots(m)
    psi = psi_of(m, q0)
    bracket = ctx.omega3 * complex(weier_zeta(psi, ctx)) - psi * ctx.eta3
    return bracket, psi, ctx


def total_torsion(m: float, q0: float | None = None) -> float:
    """T = [omega3 zeta(psi) - psi eta3] / (pi i), in full turns per period."""
    q0 = _resolve_q0(m, q0)
    bracket, _, _ = _torsion_bracket(m, q0)
    return (bracket / (math.pi * 1j)).real


def averaged_torsion(m: float, q0: float | None = None, k0: float | None = None) -> float:
    """<tau> = [omega3 zeta(psi) - psi eta3] / (2 sqrt(q0 kappa_hat^2) omega3)."""
    q0 = _resolve_q0(m, q0)
    bracket, _, ctx = _torsion_bracket(m, q0)
    return (bracket / (2.0 * math.sqrt(q0 * kappa_hat2(m, q0)) * ctx.omega3)).real


def functional_set(m: float, q0: float | None = None, k0: float | None = None) -> FunctionalSet:
    """All three functionals at one point, sharing the lattice evaluation."""
    q0 = _resolve_q0(m, q0)
    k_hat2 = kappa_hat2(m, q0)
    bracket, psi, ctx = _torsion_bracket(m, q0)
    total = bracket / (math.pi * 1j)
    avg = bracket / (2.0 * math.sqrt(q0 * k_hat2) * ctx.omega3)
    residue = max(abs(total.imag), abs(avg.imag))
    if residue > 1e-9:
        logger.warning(f"Torsion functionals at m={m} carry an imaginary residue {residue:.3e}")
    return FunctionalSet(
        F_hat=curvature_functional(m, q0),
        tau_avg=avg.real,
        T_total=total.real,
        psi=psi,
        kappa_hat2=k_hat2,
        imag_residue=residue,
    )


def quadrature_functionals(
    m: float, q0: float | None = None, k0: float | None = None
) -> tuple[float, float, float]:
    """(F, <tau>, T) by Gauss-Legendre quadrature of kappa^2 and tau over one period.

    The node count per quarter period doubles until successive results agree to 1e-12.
    """
    q0 = _resolve_q0(m, q0)
    sol = make_solution(m, q0, k0)
    k_hat = math.sqrt(kappa_hat2(m, q0))
    period = sol.period_S

    def integrate(nodes: int) -> tuple[float, float]:
        x, w = leggauss(nodes)
        quarter = 0.25 * period
        curv = tors = 0.0
        for j in range(4):
            s = quarter * (j + 0.5 * (x + 1.0))
            curv += 0.5 * quarter * float(np.dot(w, np.asarray(kappa2_jacobi(s, sol))))
            tors += 0.5 * quarter * float(np.dot(w, np.asarray(torsion(s, sol))))
        return curv, tors

    nodes = settings.quadrature_nodes
    curv, tors = integrate(nodes)
    for _ in range(4):
        nodes *= 2
        next_curv, next_tors = integrate(nodes)
        converged = abs(next_curv - curv) < 1e-12 * max(1.0, abs(curv)) and abs(
            next_tors - tors
        ) < 1e-12 * max(1.0, abs(tors))
        curv, tors = next_curv, next_tors
        if converged:
            break

    f_quad = curv / (2.0 * sol.k0 * k_hat)
    tau_quad = tors / (sol.k0 * period * k_hat)
    t_quad = tors / (2.0 * math.pi)
    return f_quad, tau_quad, t_quad


def symmetry_check(m: float) -> float:
    """max |f(n(m)) - f(m)| over F, <tau> and T with q0 = Q0."""
    here = functional_set(m)
    there = functional_set(n_of(m))
    return max(
        abs(here.F_hat - there.F_hat),
        abs(here.tau_avg - there.tau_avg),
        abs(here.T_total - there.T_total),
    )
