"""
Closure solving, equivalent-pair search and functional equivalence checks.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from scipy.optimize import brentq

from app.config import settings
from app.curvature import make_solution
from app.errors import DomainError, NonPeriodic, TargetOutOfRange, Unbounded
from app.functionals import curvature_functional, functional_set
from app.geometry import (
    closure_error,
    delta_theta,
    normalized_radius,
    radius_scale,
    reconstruct_curve,
)
from app.models import Branch, EquivalenceReport, EquivalentPair, KnotSolution
from app.parametrization import closed_q0, find_m0, n_of

logger = logging.getLogger(__name__)

# functional targets closer than this to the branch point F(0) = pi are flagged
_NEAR_BRANCH_POINT = 1e-3


def branch_grid(branch: Branch, points: int | None = None) -> np.ndarray:
    """Scan grid of one branch, ordered from m = 0 outwards and excluding m = 0.

    The classical grid ends on m0-; the extended grid stops short of m0+,
    where Q0 vanishes.
    """
    points = settings.scan_points if points is None else points
    m0_minus, m0_plus = find_m0()
    if branch is Branch.CLASSICAL:
        return np.linspace(0.0, m0_minus, points + 1)[1:]
    return np.linspace(0.0, m0_plus, points + 2)[1:-1]


def scan_branch(
    fn: Callable[[float], float],
    branch: Branch,
    points: int | None = None,
    include_origin: bool = False,
    root_tolerance: float | None = None,
) -> list[float]:
    """Every root of fn on a branch: a fixed grid scan, then Brent on each sign change.

    Grid points where fn vanishes to root_tolerance (settings.root_tolerance
    by default) count as roots, which
    picks up the m0- endpoint. With include_origin the grid also starts at
    m = 0, for functions that stay finite there. The result is ordered by
    distance from m = 0.
    """
    tol = settings.root_tolerance if root_tolerance is None else root_tolerance
    grid = branch_grid(branch, points)
    if include_origin:
        grid = np.concatenate([[0.0], grid])
    values = np.array([fn(float(m)) for m in grid])
    roots: list[float] = []
    for i, (m, value) in enumerate(zip(grid, values, strict=True)):
        if abs(value) <= tol:
            roots.append(float(m))
            continue
        if i + 1 < len(grid) and value * values[i + 1] < 0.0:
            if abs(values[i + 1]) <= tol:
                continue
            root = brentq(
                fn,
                float(m),
                float(grid[i + 1]),
                xtol=tol,
                rtol=4.0 * np.finfo(float).eps,
            )
            roots.append(float(root))
    logger.debug(f"Scan of the {branch.value} branch found {len(roots)} root(s)")
    return roots


def find_closure_moduli(
    p_int: int, q_int: int, branch: Branch, root_tolerance: float | None = None
) -> list[float]:
    """Every m on the branch with delta_theta(m) = -p pi / q."""
    if p_int <= 0 or q_int <= 0:
        raise DomainError(f"p and q must be positive integers, got ({p_int}, {q_int})")
    if p_int > q_int:
        raise TargetOutOfRange(
            f"-{p_int} pi/{q_int} lies below -pi, outside the range of delta theta"
        )
    target = -math.pi * p_int / q_int
    m0_minus, _ = find_m0(root_tolerance)
    if p_int == q_int:
        if branch is Branch.EXTENDED:
            raise TargetOutOfRange(
                "delta theta = -pi is reached only at m0+, which is outside the open "
                "extended branch; use the classical endpoint m0-"
            )
        return [m0_minus]
    return scan_branch(
        lambda m: delta_theta(m) - target, branch, root_tolerance=root_tolerance
    )


def build_knot(
    m: float,
    branch: Branch | None = None,
    p_int: int | None = None,
    q_int: int | None = None,
    ell: int | None = None,
    samples_per_period: int | None = None,
    k0: float | None = None,
    sample: bool = True,
) -> KnotSolution:
    """Evaluate every closed-knot quantity at m, with q0 = Q0(m).

    m = 0 is the constant-curvature circle of infinite radius: it can be
    evaluated (R and R_hat are inf) but not sampled.
    """
    if m == 0.0 and sample:
        raise Unbounded("m = 0 is the constant-curvature boundary with infinite radius")
    q0 = closed_q0(m)
    sol = make_solution(m, q0, k0)
    if branch is None:
        branch = Branch.CLASSICAL if m >= 0.0 else Branch.EXTENDED
    scale = math.inf if m == 0.0 else radius_scale(sol)
    knot = KnotSolution(
        m=m,
        q0=q0,
        k0=sol.k0,
        lam=sol.lam,
        nu=sol.nu,
        branch=branch,
        p_int=p_int,
        q_int=q_int,
        ell=ell,
        functionals=functional_set(m, q0),
        R_hat=math.inf if m == 0.0 else normalized_radius(m),
        R=scale,
        delta_theta=delta_theta(m, q0),
        period_S=sol.period_S,
    )
    if sample:
        periods = ell if ell is not None else 1
        samples = reconstruct_curve(sol, samples_per_period, periods)
        knot.samples = samples
        knot.closure_error = closure_error(samples, scale)
        if ell is not None and knot.closure_error > settings.closure_tolerance:
            logger.warning(
                f"Knot at m = {m} misses closure after {ell} periods by "
                f"{knot.closure_error:.3e} R"
            )
    return knot


def solve_closure(
    p_int: int,
    q_int: int,
    branch: Branch = Branch.CLASSICAL,
    samples_per_period: int | None = None,
    k0: float | None = None,
    sample: bool = True,
    root_tolerance: float | None = None,
) -> KnotSolution:
    """Closed knot with delta_theta = -p pi / q and l = 2q/p periods.

    Raises:
        TargetOutOfRange: the branch never reaches -p pi / q.
        NonPeriodic: 2q/p is not an integer; the solved m rides on the exception.
    """
    roots = find_closure_moduli(p_int, q_int, branch, root_tolerance)
    if not roots:
        raise TargetOutOfRange(
            f"delta theta never reaches -{p_int} pi/{q_int} on the {branch.value} branch"
        )
    if len(roots) > 1:
        logger.info(f"({p_int}, {q_int}) closes at {len(roots)} moduli; using m = {roots[0]}")
    m = roots[0]
    if (2 * q_int) % p_int != 0:
        raise NonPeriodic(
            f"l = 2q/p = {2 * q_int}/{p_int} is not an integer; m = {m} does not close",
            m,
            p_int,
            q_int,
        )
    ell = 2 * q_int // p_int
    logger.info(
        f"Solved ({p_int}, {q_int}) on the {branch.value} branch: m = {m:.12f}, l = {ell}"
    )
    return build_knot(m, branch, p_int, q_int, ell, samples_per_period, k0, sample)


def _functional_range() -> tuple[float, float]:
    m0_minus, _ = find_m0()
    edge = curvature_functional(m0_minus)
    return min(edge, math.pi), max(edge, math.pi)


def _solve_functional(target_f: float, branch: Branch, root_tolerance: float | None) -> float:
    low, high = _functional_range()
    if not (low <= target_f <= high):
        raise TargetOutOfRange(
            f"F = {target_f} is outside the attainable range [{low:.12g}, {high:.12g}]"
        )
    roots = scan_branch(
        lambda m: curvature_functional(m) - target_f,
        branch,
        include_origin=True,
        root_tolerance=root_tolerance,
    )
    if not roots:
        raise TargetOutOfRange(f"F = {target_f} is not attained on the {branch.value} branch")
    return roots[0]


def equivalent_pair_for_functional(
    target_f: float,
    samples_per_period: int | None = None,
    sample: bool = False,
    root_tolerance: float | None = None,
) -> EquivalentPair:
    """Pair (m-, m+) with equal curvature functional, one modulus per branch.

    Each branch is solved on its own, so n(m+) = m- is checked afterwards
    rather than imposed.

    Raises:
        TargetOutOfRange: target_f outside [F(m0), pi].
    """
    if abs(target_f - math.pi) <= settings.equivalence_tolerance:
        logger.warning("F = pi is the m = 0 fixed point of n; both members are the same circle")
        return pair_from_modulus(0.0, 0.0)
    if abs(target_f - math.pi) < _NEAR_BRANCH_POINT:
        logger.warning(
            f"F = {target_f} is within {_NEAR_BRANCH_POINT} of the branch point F(0) = pi; "
            f"the pair is nearly degenerate"
        )
    m_minus = _solve_functional(target_f, Branch.CLASSICAL, root_tolerance)
    m_plus = _solve_functional(target_f, Branch.EXTENDED, root_tolerance)
    gap = abs(n_of(m_plus) - m_minus)
    if gap > 1e-8:
        logger.warning(f"n(m+) differs from m- by {gap:.3e}")
    knot_minus = build_knot(
        m_minus, Branch.CLASSICAL, samples_per_period=samples_per_period, sample=sample
    )
    knot_plus = build_knot(
        m_plus, Branch.EXTENDED, samples_per_period=samples_per_period, sample=sample
    )
    logger.info(f"Equivalent pair for F = {target_f}: m- = {m_minus:.12f}, m+ = {m_plus:.12f}")
    return EquivalentPair(
        knot_minus=knot_minus,
        knot_plus=knot_plus,
        max_functional_gap=_gaps(knot_minus, knot_plus)[1],
    )


def _gap(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b) and a == b:
        return 0.0
    return abs(a - b)


def _gaps(first: KnotSolution, second: KnotSolution) -> tuple[dict[str, float], float]:
    gaps = {
        "F_hat": _gap(first.functionals.F_hat, second.functionals.F_hat),
        "tau_avg": _gap(first.functionals.tau_avg, second.functionals.tau_avg),
        "T_total": _gap(first.functionals.T_total, second.functionals.T_total),
        "R_hat": _gap(first.R_hat, second.R_hat),
        "delta_theta": _gap(first.delta_theta, second.delta_theta),
    }
    return gaps, max(gaps.values())


def verify_equivalence(
    pair: EquivalentPair, tolerance: float | None = None
) -> EquivalenceReport:
    """Gaps between the two members over F, <tau>, T, R_hat and delta theta."""
    tolerance = settings.equivalence_tolerance if tolerance is None else tolerance
    m_minus, m_plus = pair.knot_minus.m, pair.knot_plus.m
    gaps, worst = _gaps(pair.knot_minus, pair.knot_plus)
    involution_gap = abs(n_of(m_plus) - m_minus)
    passed = worst < tolerance
    if not passed:
        logger.warning(f"Equivalence gate failed for ({m_minus}, {m_plus}): max gap {worst:.3e}")
    return EquivalenceReport(
        m_minus=m_minus,
        m_plus=m_plus,
        involution_gap=involution_gap,
        gaps=gaps,
        tolerance=tolerance,
        passed=passed,
    )


def pair_from_modulus(m: float, partner: float | None = None) -> EquivalentPair:
    """Pair (m, n(m)) ordered as (classical, extended); partner overrides n(m)."""
    other = n_of(m) if partner is None else partner
    m_minus, m_plus = (m, other) if m > 0.0 else (other, m)
    knot_minus = build_knot(m_minus, Branch.CLASSICAL, sample=False)
    knot_plus = build_knot(m_plus, Branch.EXTENDED, sample=False)
    return EquivalentPair(
        knot_minus=knot_minus,
        knot_plus=knot_plus,
        max_functional_gap=_gaps(knot_minus, knot_plus)[1],
    )
