"""
Knot service: solving, sweeps, equivalent pairs and derived constants.
"""

import asyncio
import logging
import math
import time
from collections.abc import Callable
from functools import partial

import numpy as np

from app.config import settings
from app.curvature import make_solution
from app.errors import ClosureViolated, DomainError, ElasticaError, Unbounded
from app.functionals import (
    averaged_torsion,
    curvature_functional,
    functional_set,
    kappa_hat2,
    total_torsion,
)
from app.geometry import (
    closure_error,
    delta_theta,
    invariant_report,
    normalized_radius,
    omega_param,
    radius_scale,
    reconstruct_curve,
    vertical_drift,
)
from app.knot_search import (
    build_knot,
    equivalent_pair_for_functional,
    pair_from_modulus,
    solve_closure,
    verify_equivalence,
)
from app.models import (
    Branch,
    Chart,
    ChartLineRow,
    ConstantValue,
    CurvatureParams,
    EquivalenceReport,
    EquivalentPair,
    InvariantReport,
    KnotSolution,
    RootRow,
    RunConfig,
    SweepResult,
    SweepRow,
    TableRow,
)
from app.parametrization import (
    closed_q0,
    closure_q0,
    find_m0,
    find_nu_max,
    lambda_of,
    ls_roots,
    mu2_of,
    nu2_of,
    roots_from_physical,
)

logger = logging.getLogger(__name__)

# default lower end of a sweep; the chart itself is open at m0+ ~ -4.75
DEFAULT_SWEEP_MIN = -4.7
# nu0/2 = 1/(4 sqrt 2): g3 vanishes three times along the root table
DEFAULT_ROOT_NU = 1.0 / (4.0 * math.sqrt(2.0))
DEFAULT_LAMBDA_RANGE = (-1.0, 3.0)
DEFAULT_LINE_Q0 = 0.5


def open_curve(
    m: float, q0: float, k0: float | None = None, samples_per_period: int | None = None
) -> KnotSolution:
    """One period of the curve at an arbitrary chart point, drifting vertically."""
    sol = make_solution(m, q0, k0)
    scale = radius_scale(sol)
    samples = reconstruct_curve(sol, samples_per_period, 1, allow_drift=True)
    drift = vertical_drift(m, q0, k0)
    logger.info(f"Open curve at m = {m}, q0 = {q0}: vertical drift {drift:.6g} per period")
    return KnotSolution(
        m=m,
        q0=q0,
        k0=sol.k0,
        lam=sol.lam,
        nu=sol.nu,
        branch=Branch.CLASSICAL if m >= 0.0 else Branch.EXTENDED,
        functionals=functional_set(m, q0),
        R_hat=sol.k0 * math.sqrt(kappa_hat2(m, q0)) * scale,
        R=scale,
        delta_theta=delta_theta(m, q0),
        period_S=sol.period_S,
        samples=samples,
        closure_error=closure_error(samples, scale),
        closed=False,
        vertical_drift=drift,
    )


def solve_knot(config: RunConfig) -> KnotSolution:
    """Knot for `solve`: by (p, q) closure, by modulus, or as an open curve."""
    if config.p is not None or config.q is not None:
        if config.p is None or config.q is None:
            raise DomainError("--p and --q must be given together")
        return solve_closure(
            config.p,
            config.q,
            config.branch,
            config.samples,
            config.k0,
            root_tolerance=config.tol_root,
        )
    if config.m is None:
        raise DomainError("solve needs either --m or --p/--q")
    m = config.m
    if not config.closure:
        q0 = config.q0
        if q0 is None:
            q0 = 0.5 * (1.0 + m)
            logger.info(f"No q0 given for an open curve; using (1 + m)/2 = {q0}")
        return open_curve(m, q0, config.k0, config.samples)
    if config.q0 is not None and m < 1.0:
        mismatch = abs(config.q0 - closure_q0(m))
        if mismatch > settings.q0_closure_tolerance:
            raise ClosureViolated(
                f"q0 = {config.q0} differs from Q0({m}) by {mismatch:.3e}; "
                f"pass --no-closure for an open curve"
            )
    return build_knot(m, samples_per_period=config.samples, k0=config.k0)


def sweep_grid(config: RunConfig) -> np.ndarray:
    """Moduli of a sweep; a single --m gives a one-point grid."""
    if config.m is not None:
        return np.array([config.m])
    m0_minus, m0_plus = find_m0(config.tol_root)
    m_min = DEFAULT_SWEEP_MIN if config.m_min is None else config.m_min
    m_max = m0_minus if config.m_max is None else config.m_max
    if m_min > m_max:
        raise DomainError(f"empty sweep range [{m_min}, {m_max}]")
    if m_min <= m0_plus or m_max > m0_minus + 1e-12:
        raise DomainError(
            f"sweep range [{m_min}, {m_max}] leaves the closed-knot chart ({m0_plus}, {m0_minus}]"
        )
    if config.points == 1:
        return np.array([m_min])
    return np.linspace(m_min, m_max, config.points)


def sweep_row(m: float) -> SweepRow:
    """Every tabulated quantity at one modulus with q0 = Q0(m)."""
    q0 = closed_q0(m)
    ctx = ls_roots(m)
    functionals = functional_set(m, q0)
    try:
        r_hat = normalized_radius(m)
    except Unbounded:
        r_hat = math.inf
    return SweepRow(
        m=m,
        Q0=q0,
        nu=math.sqrt(nu2_of(m, q0)),
        lam=lambda_of(m, q0),
        p=ctx.p,
        omega1=ctx.omega1,
        omega3_abs=ctx.omega3_abs,
        F_hat=functionals.F_hat,
        tau_avg=functionals.tau_avg,
        T_total=functionals.T_total,
        R_hat=r_hat,
        mu2=mu2_of(m, q0),
        Omega=omega_param(m, q0).Omega,
        delta_theta=delta_theta(m, q0),
    )


def root_grid(config: RunConfig) -> np.ndarray:
    """Values of lambda for a root table."""
    lam_min = DEFAULT_LAMBDA_RANGE[0] if config.lam_min is None else config.lam_min
    lam_max = DEFAULT_LAMBDA_RANGE[1] if config.lam_max is None else config.lam_max
    if lam_min > lam_max:
        raise DomainError(f"empty lambda range [{lam_min}, {lam_max}]")
    if config.points == 1:
        return np.array([lam_min])
    return np.linspace(lam_min, lam_max, config.points)


def root_row(lam: float, nu: float) -> RootRow:
    """Cubic roots at scale q0 = 1, which are the normalized roots e_k / q0 for any q0."""
    params = CurvatureParams(lam=lam, nu=nu)
    ctx = roots_from_physical(params, 1.0)
    return RootRow(
        lam=lam,
        nu=nu,
        e1=ctx.e1,
        e2=ctx.e2,
        e3=ctx.e3,
        p=ctx.p,
        lambda_delta=params.lambda_delta,
    )


def line_grid(config: RunConfig) -> np.ndarray:
    """Moduli m <= q0 along one constant-q0 line."""
    q0 = _line_q0(config)
    m_min = DEFAULT_SWEEP_MIN if config.m_min is None else config.m_min
    m_max = q0 if config.m_max is None else config.m_max
    if m_min > m_max:
        raise DomainError(f"empty sweep range [{m_min}, {m_max}]")
    if m_max > q0:
        raise DomainError(f"constant-q0 lines need m <= q0, got m_max = {m_max}, q0 = {q0}")
    if config.points == 1:
        return np.array([m_min])
    return np.linspace(m_min, m_max, config.points)


def _line_q0(config: RunConfig) -> float:
    q0 = DEFAULT_LINE_Q0 if config.q0 is None else config.q0
    if not 0.0 < q0 <= 1.0:
        raise DomainError(f"q0 must satisfy 0 < q0 <= 1, got {q0}")
    return q0


def chart_line_row(m: float, q0: float) -> ChartLineRow:
    """(nu^2, lambda) at one modulus; both are linear in m, so each q0 traces a line."""
    return ChartLineRow(
        q0=q0,
        m=m,
        nu2=nu2_of(m, q0),
        lam=lambda_of(m, q0),
        mu2=mu2_of(m, q0),
    )


def _table_plan(
    config: RunConfig,
) -> tuple[np.ndarray, Callable[[float], TableRow], type[TableRow], str]:
    """Grid, row function, row type and name of the grid column for a sweep."""
    if config.chart is Chart.ROOTS:
        nu = DEFAULT_ROOT_NU if config.nu is None else config.nu
        return root_grid(config), partial(root_row, nu=nu), RootRow, "lam"
    if config.chart is Chart.LINES:
        q0 = _line_q0(config)
        return line_grid(config), partial(chart_line_row, q0=q0), ChartLineRow, "m"
    return sweep_grid(config), sweep_row, SweepRow, "m"


def sweep_metadata(config: RunConfig) -> dict:
    """Header fields naming what a table holds fixed."""
    if config.chart is Chart.ROOTS:
        nu = DEFAULT_ROOT_NU if config.nu is None else config.nu
        return {"chart": config.chart.value, "nu": nu, "roots": "e_k / q0"}
    if config.chart is Chart.LINES:
        return {"chart": config.chart.value, "q0": _line_q0(config)}
    return {"q0": "Q0(m)"}


def _failed_row(row_type: type[TableRow], key: str, value: float) -> TableRow:
    values = {name: math.nan for name in row_type.model_fields if name != key}
    return row_type(**{key: value}, **values)


def _safe_row(
    evaluate: Callable[[float], TableRow], row_type: type[TableRow], key: str, value: float
) -> tuple[TableRow, bool]:
    try:
        return evaluate(value), True
    except ElasticaError as e:
        logger.error(f"Sweep point {key} = {value} failed: {e}")
        return _failed_row(row_type, key, value), False


async def run_sweep(config: RunConfig) -> SweepResult:
    """
    Evaluate a sweep concurrently.

    Grid points run in worker threads, at most settings.threads at a time;
    rows come back in grid order. config.chart selects the table.
    """
    start_time = time.time()
    grid, evaluate_row, row_type, key = _table_plan(config)
    semaphore = asyncio.Semaphore(settings.threads)

    async def evaluate(value: float) -> tuple[TableRow, bool]:
        async with semaphore:
            return await asyncio.to_thread(_safe_row, evaluate_row, row_type, key, value)

    results = await asyncio.gather(*(evaluate(float(value)) for value in grid))
    rows = [row for row, _ in results]
    failed = sum(1 for _, ok in results if not ok)
    duration = time.time() - start_time

    logger.info(
        f"Sweep ({config.chart.value}) complete: {len(rows)} rows, {failed} failed, "
        f"{duration:.2f}s"
    )
    return SweepResult(rows=rows, failed=failed, duration_seconds=duration)


def build_pair(config: RunConfig) -> tuple[EquivalentPair, EquivalenceReport]:
    """Equivalent pair for --target-f, sampled over one period each, with its report."""
    if config.target_f is None:
        raise DomainError("pair needs --target-f")
    pair = equivalent_pair_for_functional(
        config.target_f, config.samples, sample=True, root_tolerance=config.tol_root
    )
    return pair, verify_equivalence(pair, config.tol_equiv)


def verify_pair(
    config: RunConfig,
) -> tuple[EquivalenceReport | None, InvariantReport | None, KnotSolution | None]:
    """Equivalence report for (m, n(m)) and, with --p/--q, the geometric invariant suite."""
    report = None
    invariants = None
    knot = None
    if config.m is not None:
        report = verify_equivalence(pair_from_modulus(config.m), config.tol_equiv)
    if config.p is not None and config.q is not None:
        knot = solve_closure(
            config.p,
            config.q,
            config.branch,
            sample=False,
            k0=config.k0,
            root_tolerance=config.tol_root,
        )
        sol = make_solution(knot.m, knot.q0, knot.k0)
        invariants = invariant_report(sol, periods=knot.ell or 1)
    if report is None and invariants is None:
        raise DomainError("verify needs --m or --p/--q")
    return report, invariants, knot


def constants() -> list[ConstantValue]:
    """Chart constants with the relation each one comes from."""
    m0_minus, m0_plus = find_m0()
    m_star, nu_star = find_nu_max()
    return [
        ConstantValue(name="m0_minus", value=m0_minus, provenance="root of 2E(m) = K(m)"),
        ConstantValue(name="m0_plus", value=m0_plus, provenance="n(m0-) = -m0-/(1 - m0-)"),
        ConstantValue(name="m_star", value=m_star, provenance="argmax of nu(m) on (0, m0-]"),
        ConstantValue(name="nu_star", value=nu_star, provenance="nu(m*) with q0 = Q0(m*)"),
        ConstantValue(
            name="F_hat_m0",
            value=curvature_functional(m0_minus),
            provenance="(2 m0 - 1) K(m0) / sqrt(m0)",
        ),
        ConstantValue(
            name="tau_avg_m0",
            value=averaged_torsion(m0_minus),
            provenance="pi / (4 sqrt(m0) K(m0))",
        ),
        ConstantValue(
            name="T_total_m0",
            value=total_torsion(m0_minus),
            provenance="1/2 from the Legendre relation",
        ),
        ConstantValue(name="R_hat_m0", value=normalized_radius(m0_minus), provenance="2 sqrt(m0)"),
        ConstantValue(
            name="delta_theta_m0", value=delta_theta(m0_minus), provenance="-pi at both endpoints"
        ),
    ]
