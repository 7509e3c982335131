"""
Cylindrical reconstruction of elastica knots: radius, height, azimuth, frames and Darboux data.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike

from app.config import settings
from app.curvature import kappa2_jacobi, kappa_prime, make_solution, torsion, xi_of
from app.elliptic_kernel import (
    ellint_E,
    ellint_K,
    jacobi_sn_cn_dn,
    jacobi_zeta,
    weier_sigma,
    weier_zeta,
    wp_inverse,
    wp_prime,
)
from app.errors import BranchError, ClosureViolated, DomainError, FrameDegenerate, Unbounded
from app.functionals import kappa_hat2
from app.models import (
    CurvatureSolution,
    CurveSample,
    DarbouxQuantities,
    FrameCoeffs,
    InvariantReport,
    OmegaParam,
    Strip,
)
from app.parametrization import closed_q0, closure_q0, ls_roots, mu2_of

logger = logging.getLogger(__name__)

_X_HAT = np.array([1.0, 0.0, 0.0])
_Y_HAT = np.array([0.0, 1.0, 0.0])
_Z_HAT = np.array([0.0, 0.0, 1.0])


def _w_norm2(sol: CurvatureSolution) -> float:
    """(1 - lambda)^2 + nu^2; R^-4 = k0^4 times this over 4."""
    return (1.0 - sol.lam) ** 2 + sol.nu**2


def radius_scale(sol: CurvatureSolution) -> float:
    """Length scale R with R^4 |W|^2 = 1."""
    w2 = _w_norm2(sol)
    if w2 == 0.0:
        raise DomainError("R is infinite at lambda = 1, nu = 0 (m = 0)")
    return math.sqrt(2.0 / (sol.k0**2 * math.sqrt(w2)))


def mu_of(sol: CurvatureSolution) -> float:
    return math.sqrt(mu2_of(sol.m, sol.q0))


def _is_planar(sol: CurvatureSolution) -> bool:
    return sol.nu == 0.0 and sol.m != 0.0


def _frame_arrays(s: ArrayLike, sol: CurvatureSolution):
    scale = radius_scale(sol)
    mu = mu_of(sol)
    k2 = np.asarray(kappa2_jacobi(s, sol), dtype=float)
    kappa = np.sqrt(k2)
    dk2 = np.asarray(kappa_prime(s, sol), dtype=float)
    alpha = 0.5 * scale**2 * (k2 - sol.lam * sol.k0**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(kappa > 0.0, scale**2 * dk2 / (2.0 * kappa), 0.0)
        gamma = np.where(kappa > 0.0, mu * sol.k0 / kappa, 0.0)
    return alpha, beta, gamma, scale, mu


def frame_coeffs(s: float, sol: CurvatureSolution) -> FrameCoeffs:
    """Components (alpha, beta, gamma) of z-hat on the Frenet triad at arclength s."""
    alpha, beta, gamma, scale, mu = _frame_arrays(s, sol)
    if 1.0 - float(gamma) ** 2 < 1e-12:
        raise FrameDegenerate(f"gamma = {float(gamma)} at s = {s}: cylindrical frame degenerates")
    return FrameCoeffs(alpha=float(alpha), beta=float(beta), gamma=float(gamma), R=scale, mu=mu)


def rho_of(s: ArrayLike, sol: CurvatureSolution):
    """rho = R^2 sqrt(kappa^2 - mu^2 k0^2)."""
    scale = radius_scale(sol)
    mu2 = mu2_of(sol.m, sol.q0)
    k2 = np.asarray(kappa2_jacobi(s, sol), dtype=float)
    value = scale**2 * np.sqrt(np.maximum(k2 - mu2 * sol.k0**2, 0.0))
    return value.item() if np.ndim(s) == 0 else value


def vertical_drift(m: float, q0: float, k0: float | None = None) -> float:
    """Height gained per curvature period; zero exactly when q0 = Q0(m)."""
    sol = make_solution(m, q0, k0)
    scale = radius_scale(sol)
    slope = 2.0 * ellint_E(m) / ellint_K(m).real - (1.0 - m) - q0
    return sol.k0**2 * scale**2 * sol.period_S / (4.0 * q0) * slope


def z_of(s: ArrayLike, sol: CurvatureSolution, allow_drift: bool = False):
    """Height z(s) with z(0) = 0.

    Raises:
        ClosureViolated: q0 differs from Q0(m) and allow_drift is False.
    """
    mismatch = abs(sol.q0 - closure_q0(sol.m)) if sol.m < 1.0 else math.inf
    if mismatch > settings.q0_closure_tolerance and not allow_drift:
        raise ClosureViolated(
            f"z(s) is periodic only for q0 = Q0(m); |q0 - Q0({sol.m})| = {mismatch:.3e}"
        )
    scale = radius_scale(sol)
    xi = np.asarray(xi_of(s, sol), dtype=float)
    m, q0 = sol.m, sol.q0
    slope = 2.0 * ellint_E(m) / ellint_K(m).real - (1.0 + q0 - m)
    zeta = np.asarray(jacobi_zeta(xi, m))
    value = sol.k0 * scale**2 / math.sqrt(q0) * (zeta + 0.5 * xi * slope)
    return value.item() if np.ndim(s) == 0 else value


def omega_param(m: float, q0: float | None = None) -> OmegaParam:
    """Omega in [0, omega1] with wp(Omega + omega3) = q0 (mu^2 - 2 lambda/3).

    The signed point v = +/-Omega + omega3 is the one whose wp' equals
    -2 mu q0^(3/2) (mu^2 - lambda); a sign flip is logged.
    """
    q0 = closed_q0(m) if q0 is None else q0
    lam = 1.5 - (1.0 + m) / (2.0 * q0)
    mu2 = mu2_of(m, q0)
    mu = math.sqrt(mu2)
    ctx = ls_roots(m)
    v = wp_inverse(q0 * (mu2 - 2.0 * lam / 3.0), ctx, Strip.OMEGA3)
    expected = -2.0 * mu * q0**1.5 * (mu2 - lam)
    orientation = 1
    if v.real > 0.0 and not ctx.degenerate or m == 0.0:
        observed = float(np.real(wp_prime(v, ctx)))
        if observed * expected < 0.0:
            logger.warning(
                f"wp'(Omega + omega3) = {observed:.6g} has the wrong sign at m = {m}; "
                f"using the mirror point"
            )
            orientation = -1
            v = complex(-v.real, v.imag)
            observed = -observed
        residual = abs(observed - expected)
    else:
        residual = abs(expected)
    return OmegaParam(Omega=abs(v.real), v=v, orientation=orientation, identity_residual=residual)


def delta_theta(m: float, q0: float | None = None) -> float:
    """Azimuthal advance per period: 2 mu sqrt(q0) |omega3| + 2i[omega3 zeta(v) - v eta3]."""
    q0 = closed_q0(m) if q0 is None else q0
    ctx = ls_roots(m)
    omega = omega_param(m, q0)
    mu = math.sqrt(mu2_of(m, q0))
    bracket = ctx.omega3 * complex(weier_zeta(omega.v, ctx)) - omega.v * ctx.eta3
    value = 2.0 * mu * math.sqrt(q0) * ctx.omega3_abs + 2j * bracket
    if abs(value.imag) > 1e-9:
        logger.warning(f"Delta theta at m = {m} has imaginary residue {value.imag:.3e}")
    return value.real


def _omega_b(sol: CurvatureSolution) -> complex:
    ctx = sol.ctx if sol.ctx is not None else ls_roots(sol.m)
    if ctx.degenerate:
        raise DomainError("the azimuth needs a finite real half-period (m != 0)")
    return ctx.omega2 if sol.m > 0.0 else complex(ctx.omega1)


def _sigma_ratio(xi: np.ndarray, sol: CurvatureSolution, omega: OmegaParam) -> np.ndarray:
    ctx = sol.ctx if sol.ctx is not None else ls_roots(sol.m)
    w_b = _omega_b(sol)
    big = omega.v.real
    num = weier_sigma(1j * xi - big - w_b, ctx) * weier_sigma(big - w_b, ctx)
    den = weier_sigma(-big - w_b, ctx) * weier_sigma(1j * xi + big - w_b, ctx)
    return np.asarray(num / den)


def _refined_phase(xi: np.ndarray, sol: CurvatureSolution, omega: OmegaParam):
    """Unwrapped arg of the sigma ratio on a sorted grid, bisecting fast-turning cells."""
    grid = np.unique(xi)
    ratio = _sigma_ratio(grid, sol, omega)
    depth = 0
    while True:
        jumps = np.abs(np.angle(ratio[1:] / ratio[:-1]))
        fast = np.nonzero(jumps > 0.25 * math.pi)[0]
        if fast.size == 0:
            break
        if depth == settings.theta_refine_depth:
            worst = float(jumps.max())
            if worst > 0.5 * math.pi:
                raise BranchError(
                    f"sigma-ratio phase still turns {worst:.3f} rad per cell after "
                    f"{depth} bisections at m = {sol.m}"
                )
            logger.warning(f"Phase refinement hit depth {depth} at m = {sol.m}")
            break
        mids = 0.5 * (grid[fast] + grid[fast + 1])
        grid = np.concatenate([grid, mids])
        order = np.argsort(grid, kind="stable")
        grid = grid[order]
        ratio = np.concatenate([ratio, _sigma_ratio(mids, sol, omega)])[order]
        depth += 1
    log_modulus = float(np.max(np.abs(np.log(np.abs(ratio)))))
    if log_modulus > 1e-6:
        logger.warning(f"sigma ratio departs from the unit circle by {log_modulus:.3e}")
    return grid, np.unwrap(np.angle(ratio))


def theta_of(xi: ArrayLike, sol: CurvatureSolution, omega: OmegaParam | None = None):
    """Azimuth theta(xi) with theta(0) = 0, continuous in xi.

    One period is resolved from the sigma-function closed form with phase
    unwrapping; other periods follow from theta(xi + 2|omega3|) = theta(xi) + dtheta.

    Raises:
        BranchError: the phase cannot be followed continuously within
            settings.theta_refine_depth bisections.
    """
    if omega is None:
        omega = omega_param(sol.m, sol.q0)
    ctx = sol.ctx if sol.ctx is not None else ls_roots(sol.m)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    period = 2.0 * ctx.omega3_abs
    turns = np.floor(xi_arr / period)
    local = xi_arr - turns * period

    mu = mu_of(sol)
    slope = mu * math.sqrt(sol.q0) - complex(weier_zeta(omega.v, ctx)) + ctx.eta3
    if abs(slope.imag) > 1e-9:
        logger.warning(f"theta slope at m = {sol.m} has imaginary part {slope.imag:.3e}")

    base = np.linspace(0.0, period, max(4 * settings.samples_per_period, 256) + 1)
    grid, phase = _refined_phase(np.concatenate([base, local.ravel()]), sol, omega)
    local_phase = phase[np.searchsorted(grid, local.ravel())].reshape(local.shape)
    per_period = slope.real * period - 0.5 * phase[-1]

    value = slope.real * local - 0.5 * local_phase + turns * per_period
    return value.item() if np.ndim(xi) == 0 else value


def _planar_theta(xi: np.ndarray, m: float) -> np.ndarray:
    """Piecewise-constant azimuth of the planar figure-eight: -pi at each zero of cn."""
    quarter = ellint_K(m).real
    return -math.pi * np.floor((xi + quarter) / (2.0 * quarter))


def frame_vectors(s: ArrayLike, sol: CurvatureSolution, theta: ArrayLike):
    """Frenet triad (t, n, b) in Cartesian components, shape (..., 3) each."""
    alpha, beta, gamma, _, _ = _frame_arrays(s, sol)
    theta = np.asarray(theta, dtype=float)
    rho_hat = np.multiply.outer(np.cos(theta), _X_HAT) + np.multiply.outer(np.sin(theta), _Y_HAT)
    theta_hat = np.multiply.outer(-np.sin(theta), _X_HAT) + np.multiply.outer(
        np.cos(theta), _Y_HAT
    )
    if _is_planar(sol):
        k_sign = np.sign(np.asarray(jacobi_sn_cn_dn(xi_of(s, sol), sol.m)[1]))
        # signed curvature keeps the frame smooth through the inflection points
        beta_s = beta * np.where(k_sign == 0.0, 1.0, k_sign)
        rho0 = np.broadcast_to(_X_HAT, rho_hat.shape)
        t_hat = alpha[..., None] * _Z_HAT + beta_s[..., None] * rho0
        n_hat = beta_s[..., None] * _Z_HAT - alpha[..., None] * rho0
        b_hat = np.broadcast_to(-_Y_HAT, rho_hat.shape).copy()
        return t_hat, n_hat, b_hat
    root = np.sqrt(1.0 - gamma**2)
    if np.any(root**2 < 1e-12):
        raise FrameDegenerate(f"gamma reaches 1 at m = {sol.m}")
    a, b, g = alpha[..., None], beta[..., None], gamma[..., None]
    r = root[..., None]
    t_hat = a * _Z_HAT + (b * rho_hat + a * g * theta_hat) / r
    n_hat = b * _Z_HAT + (-a * rho_hat + b * g * theta_hat) / r
    b_hat = g * _Z_HAT - r * theta_hat
    return t_hat, n_hat, b_hat


def darboux_angle(s: ArrayLike, sol: CurvatureSolution):
    """Theta_D = arctan(-(kappa^2)' / (k0^3 nu)); +/-pi/2 in the planar limit."""
    value = np.arctan2(-np.asarray(kappa_prime(s, sol)), sol.k0**3 * sol.nu)
    return value.item() if np.ndim(s) == 0 else value


def geodesic_curvature(s: ArrayLike, sol: CurvatureSolution):
    """Closed form k0^3 nu [k0^4((1-lambda)^2 + nu^2) - (kappa^2 - lambda k0^2)^2]^(-1/2)."""
    k0, lam = sol.k0, sol.lam
    k2 = np.asarray(kappa2_jacobi(s, sol), dtype=float)
    value = k0**3 * sol.nu / np.sqrt(k0**4 * _w_norm2(sol) - (k2 - lam * k0**2) ** 2)
    return value.item() if np.ndim(s) == 0 else value


def darboux(s: float, sol: CurvatureSolution) -> DarbouxQuantities:
    """Darboux angle with geodesic curvature, normal curvature and relative torsion."""
    if sol.nu == 0.0:
        raise DomainError("the Darboux angle needs nu != 0")
    angle = float(darboux_angle(s, sol))
    kappa = math.sqrt(float(kappa2_jacobi(s, sol)))
    h = sol.period_S / settings.fd_divisions
    angle_rate = (float(darboux_angle(s + h, sol)) - float(darboux_angle(s - h, sol))) / (2.0 * h)
    return DarbouxQuantities(
        Theta=angle,
        kappa_g=kappa * math.cos(angle),
        kappa_n=-kappa * math.sin(angle),
        tau_r=float(torsion(s, sol)) + angle_rate,
        kappa_g_closed_form=float(geodesic_curvature(s, sol)),
    )


def normalized_radius(m: float) -> float:
    """R_hat(m) = k0 kappa_hat R(m, Q0(m)), independent of k0.

    Raises:
        Unbounded: at m = 0, where R is infinite.
    """
    q0 = closed_q0(m)
    lam = 1.5 - (1.0 + m) / (2.0 * q0)
    nu2 = max(0.0, (1.0 - q0) * (q0 - m) / (q0 * q0))
    w2 = (1.0 - lam) ** 2 + nu2
    if m == 0.0 or w2 == 0.0:
        raise Unbounded("the normalized radius is infinite at m = 0")
    return math.sqrt(kappa_hat2(m, q0)) * math.sqrt(2.0) / w2**0.25


def _cylindrical(s: np.ndarray, sol: CurvatureSolution, allow_drift: bool):
    """(theta, rho, positions) at arclengths s."""
    xi = np.asarray(xi_of(s, sol))
    z = np.asarray(z_of(s, sol, allow_drift=allow_drift))
    scale = radius_scale(sol)
    if _is_planar(sol):
        signed = sol.k0 * np.asarray(jacobi_sn_cn_dn(xi, sol.m)[1])
        positions = np.multiply.outer(scale**2 * signed, _X_HAT)
        positions = positions + np.multiply.outer(z, _Z_HAT)
        return _planar_theta(xi, sol.m), scale**2 * np.abs(signed), positions
    theta = np.asarray(theta_of(xi, sol))
    rho = np.asarray(rho_of(s, sol))
    positions = (
        np.multiply.outer(rho * np.cos(theta), _X_HAT)
        + np.multiply.outer(rho * np.sin(theta), _Y_HAT)
        + np.multiply.outer(z, _Z_HAT)
    )
    return theta, rho, positions


def positions_at(s: ArrayLike, sol: CurvatureSolution, allow_drift: bool = False) -> np.ndarray:
    """Cartesian r(s), shape (..., 3), anchored at theta(0) = 0 and z(0) = 0."""
    if sol.m == 0.0:
        raise DomainError("m = 0 is a circle of infinite radius; nothing to reconstruct")
    return _cylindrical(np.asarray(s, dtype=float), sol, allow_drift)[2]


def reconstruct_curve(
    sol: CurvatureSolution,
    samples_per_period: int | None = None,
    periods: int = 1,
    allow_drift: bool = False,
) -> list[CurveSample]:
    """Sample r(s) = rho rho_hat + z z_hat over whole curvature periods.

    Returns samples_per_period * periods + 1 samples from s = 0 to s = periods * S,
    anchored at theta(0) = 0 and z(0) = 0.
    """
    if sol.m == 0.0:
        raise DomainError("m = 0 is a circle of infinite radius; nothing to reconstruct")
    n = settings.samples_per_period if samples_per_period is None else samples_per_period
    if n < 16:
        raise DomainError(f"samples_per_period must be at least 16, got {n}")
    if periods < 1:
        raise DomainError(f"periods must be positive, got {periods}")

    s = np.linspace(0.0, periods * sol.period_S, n * periods + 1)
    k2 = np.asarray(kappa2_jacobi(s, sol))
    tau = np.asarray(torsion(s, sol))
    theta, rho, positions = _cylindrical(s, sol, allow_drift)
    z = positions[:, 2]
    t_hat, n_hat, b_hat = frame_vectors(s, sol, theta)
    angle = np.asarray(darboux_angle(s, sol))

    logger.debug(f"Reconstructed {len(s)} samples over {periods} period(s) at m = {sol.m}")
    return [
        CurveSample(
            s=float(s[i]),
            kappa=float(math.sqrt(k2[i])),
            tau=float(tau[i]),
            rho=float(rho[i]),
            theta=float(theta[i]),
            z=float(z[i]),
            position=tuple(float(c) for c in positions[i]),
            t_hat=tuple(float(c) for c in t_hat[i]),
            n_hat=tuple(float(c) for c in n_hat[i]),
            b_hat=tuple(float(c) for c in b_hat[i]),
            theta_darboux=float(angle[i]),
        )
        for i in range(len(s))
    ]


def closure_error(samples: list[CurveSample], scale: float) -> float:
    """|r(end) - r(0)| / R."""
    first = np.asarray(samples[0].position)
    last = np.asarray(samples[-1].position)
    return float(np.linalg.norm(last - first)) / scale


def invariant_report(
    sol: CurvatureSolution, periods: int = 1, points: int = 100, allow_drift: bool = False
) -> InvariantReport:
    """Finite-difference checks of a reconstruction against the analytic curvature data.

    Derivatives use five-point stencils with h = S / fd_divisions at `points`
    interior arclengths per period.
    """
    h = sol.period_S / settings.fd_divisions
    count = points * periods
    s = (np.arange(count) + 0.5) * (periods * sol.period_S / count)
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    r = positions_at(np.add.outer(s, offsets), sol, allow_drift)
    d1 = (r[:, 0] - 8.0 * r[:, 1] + 8.0 * r[:, 3] - r[:, 4]) / (12.0 * h)
    d2 = (-r[:, 0] + 16.0 * r[:, 1] - 30.0 * r[:, 2] + 16.0 * r[:, 3] - r[:, 4]) / (12.0 * h * h)
    d3 = (-r[:, 0] + 2.0 * r[:, 1] - 2.0 * r[:, 3] + r[:, 4]) / (2.0 * h**3)

    kappa = np.sqrt(np.asarray(kappa2_jacobi(s, sol)))
    tau = np.asarray(torsion(s, sol))
    speed = np.linalg.norm(d1, axis=1)
    kappa_fd = np.linalg.norm(np.cross(d1, d2), axis=1) / speed**3
    tau_fd = np.einsum("ij,ij->i", np.cross(d1, d2), d3) / (kappa_fd**2 * speed**6)

    xi = np.asarray(xi_of(s, sol))
    theta = _planar_theta(xi, sol.m) if _is_planar(sol) else np.asarray(theta_of(xi, sol))
    t_hat, n_hat, b_hat = frame_vectors(s, sol, theta)
    frame = np.stack([t_hat, n_hat, b_hat], axis=1)
    gram = np.einsum("nij,nkj->nik", frame, frame)
    orthonormality = float(np.max(np.abs(gram - np.eye(3))))
    alpha, beta, gamma, _, _ = _frame_arrays(s, sol)
    if _is_planar(sol):
        k_sign = np.sign(np.asarray(jacobi_sn_cn_dn(xi, sol.m)[1]))
        beta = beta * np.where(k_sign == 0.0, 1.0, k_sign)
    z_rebuilt = alpha[:, None] * t_hat + beta[:, None] * n_hat + gamma[:, None] * b_hat
    tau_scale = np.maximum(np.abs(tau), 1e-300)

    report = InvariantReport(
        unit_speed=float(np.max(np.abs(speed - 1.0))),
        orthonormality=orthonormality,
        z_constancy=float(np.max(np.abs(z_rebuilt - _Z_HAT))),
        tangent=float(np.max(np.linalg.norm(d1 - t_hat, axis=1))),
        kappa_relative=float(np.max(np.abs(kappa_fd - kappa) / np.maximum(kappa, 1e-3 * sol.k0))),
        tau_relative=0.0 if sol.nu == 0.0 else float(np.max(np.abs(tau_fd - tau) / tau_scale)),
    )
    logger.debug(f"Invariants at m = {sol.m}: {report.model_dump()}")
    return report
