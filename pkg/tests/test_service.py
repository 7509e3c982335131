import math

import pytest

from app.config import settings
from app.errors import ClosureViolated, DomainError
from app.models import Chart, ChartLineRow, RootRow, RunConfig
from app.parametrization import find_m0
from app.service import (
    DEFAULT_ROOT_NU,
    DEFAULT_SWEEP_MIN,
    build_pair,
    chart_line_row,
    constants,
    line_grid,
    root_grid,
    root_row,
    run_sweep,
    solve_knot,
    sweep_grid,
    sweep_metadata,
    sweep_row,
    verify_pair,
)


def _config(**kwargs) -> RunConfig:
    return RunConfig(command="test", **kwargs)


class TestSweep:
    async def test_run_sweep(self):
        result = await run_sweep(_config(m_min=-1.0, m_max=0.5, points=5))
        assert len(result.rows) == 5
        assert result.failed == 0
        assert [row.m for row in result.rows] == pytest.approx([-1.0, -0.625, -0.25, 0.125, 0.5])
        assert result.duration_seconds >= 0.0

    async def test_single_point_at_the_circle(self):
        result = await run_sweep(_config(m=0.0))
        row = result.rows[0]
        assert result.failed == 0
        assert row.R_hat == math.inf
        assert row.delta_theta == pytest.approx(0.0, abs=1e-8)
        assert row.T_total == pytest.approx(0.0, abs=1e-9)
        assert row.tau_avg == pytest.approx(0.0, abs=1e-9)
        assert row.F_hat == pytest.approx(math.pi, abs=1e-9)

    async def test_failed_points_become_nan_rows(self):
        result = await run_sweep(_config(m=0.9))
        assert result.failed == 1
        assert result.rows[0].m == 0.9
        assert math.isnan(result.rows[0].F_hat)

    def test_symmetric_rows(self):
        first = sweep_row(-1.0)
        second = sweep_row(0.5)
        assert first.F_hat == pytest.approx(second.F_hat, abs=1e-8)
        assert first.R_hat == pytest.approx(second.R_hat, abs=1e-8)
        assert first.delta_theta == pytest.approx(second.delta_theta, abs=1e-8)

    def test_grid_defaults(self):
        m0_minus, _ = find_m0()
        grid = sweep_grid(_config(points=11))
        assert grid[0] == DEFAULT_SWEEP_MIN
        assert grid[-1] == m0_minus
        assert len(grid) == 11
        assert list(sweep_grid(_config(m_min=-1.0, m_max=0.5, points=1))) == [-1.0]

    def test_grid_rejections(self):
        with pytest.raises(DomainError):
            sweep_grid(_config(m_min=0.5, m_max=-1.0))
        with pytest.raises(DomainError):
            sweep_grid(_config(m_min=-5.0, m_max=0.5))
        with pytest.raises(DomainError):
            sweep_grid(_config(m_min=-1.0, m_max=0.9))


class TestSolve:
    def test_requires_complete_closure_data(self):
        with pytest.raises(DomainError):
            solve_knot(_config(p=2))
        with pytest.raises(DomainError):
            solve_knot(_config())

    def test_rejects_q0_off_the_closure_curve(self):
        with pytest.raises(ClosureViolated):
            solve_knot(_config(m=0.5, q0=0.7))

    def test_open_curve_default_scale(self):
        knot = solve_knot(_config(m=0.5, closure=False, samples=32))
        assert knot.q0 == 0.75
        assert not knot.closed
        assert len(knot.samples) == 33
        assert knot.vertical_drift != 0.0
        assert knot.samples[-1].z == pytest.approx(knot.vertical_drift, rel=1e-10)

    def test_knot_by_modulus(self):
        knot = solve_knot(_config(m=0.5, samples=16))
        assert len(knot.samples) == 17
        assert knot.closed
        assert knot.ell is None


class TestPairsAndConstants:
    def test_build_pair_needs_target(self):
        with pytest.raises(DomainError):
            build_pair(_config())

    def test_verify_needs_input(self):
        with pytest.raises(DomainError):
            verify_pair(_config())

    def test_verify_modulus(self):
        report, invariants, knot = verify_pair(_config(m=-1.0))
        assert report.passed
        assert invariants is None and knot is None

    def test_tolerances_leave_settings_untouched(self):
        saved = settings.model_dump()
        knot = solve_knot(_config(p=2, q=3, samples=16, tol_root=1e-9))
        assert settings.model_dump() == saved
        assert knot.ell == 3
        assert len(knot.samples) == 3 * 16 + 1

    def test_constants(self):
        values = {c.name: c.value for c in constants()}
        assert len(values) == 9
        assert values["m0_minus"] == pytest.approx(0.82611, abs=1e-4)
        assert values["m0_plus"] == pytest.approx(-4.75092, abs=2e-5)
        assert values["nu_star"] == pytest.approx(0.1632, abs=1e-3)
        assert values["T_total_m0"] == pytest.approx(0.5, abs=1e-6)
        assert values["R_hat_m0"] == pytest.approx(2.0 * math.sqrt(values["m0_minus"]), abs=1e-6)
        assert values["delta_theta_m0"] == pytest.approx(-math.pi, abs=1e-6)


class TestPhysicalCharts:
    def test_roots_are_traceless_and_ordered(self):
        for lam in (-0.5, 0.3, 1.2, 2.5):
            row = root_row(lam, DEFAULT_ROOT_NU)
            assert row.e1 + row.e2 + row.e3 == pytest.approx(0.0, abs=1e-14)
            assert row.e1 >= row.e2 >= row.e3

    def test_roots_merge_at_lambda_delta(self):
        lam_delta = 1.0 - 0.5 * DEFAULT_ROOT_NU**2
        row = root_row(lam_delta, DEFAULT_ROOT_NU)
        assert row.lambda_delta == lam_delta
        assert row.e1 == row.e2
        assert row.p == 1.0

    def test_modulus_is_one_half_at_three_halves(self):
        row = root_row(1.5, DEFAULT_ROOT_NU)
        assert row.e2 == pytest.approx(0.0, abs=1e-15)
        assert row.p == pytest.approx(0.5, abs=1e-14)

    def test_constant_q0_lines(self):
        q0 = 0.6
        rows = [chart_line_row(m, q0) for m in (-2.0, -0.5, 0.3)]
        slopes = [(b.lam - a.lam) / (b.nu2 - a.nu2) for a, b in zip(rows, rows[1:])]
        assert slopes == pytest.approx([q0 / (2.0 * (1.0 - q0))] * 2, rel=1e-12)
        end = chart_line_row(q0, q0)
        assert end.nu2 == 0.0
        assert end.lam == pytest.approx(1.0 - 1.0 / (2.0 * q0), abs=1e-15)

    def test_torsionless_line(self):
        for m in (-1.0, 0.0, 0.5):
            row = chart_line_row(m, 1.0)
            assert row.nu2 == 0.0
            assert row.lam == pytest.approx(1.0 - 0.5 * m, abs=1e-15)

    async def test_roots_table(self):
        config = _config(chart=Chart.ROOTS, lam_min=-1.0, lam_max=3.0, points=5)
        result = await run_sweep(config)
        assert result.failed == 0
        assert all(isinstance(row, RootRow) for row in result.rows)
        assert [row.lam for row in result.rows] == pytest.approx([-1.0, 0.0, 1.0, 2.0, 3.0])
        expected = {"chart": "roots", "nu": DEFAULT_ROOT_NU, "roots": "e_k / q0"}
        assert sweep_metadata(config) == expected

    async def test_lines_table(self):
        config = _config(chart=Chart.LINES, q0=0.5, m_min=-1.0, points=4)
        result = await run_sweep(config)
        assert result.failed == 0
        assert all(isinstance(row, ChartLineRow) for row in result.rows)
        assert result.rows[-1].m == 0.5
        assert result.rows[-1].nu2 == 0.0

    def test_chart_rejections(self):
        with pytest.raises(DomainError):
            line_grid(_config(chart=Chart.LINES, q0=0.5, m_max=0.8))
        with pytest.raises(DomainError):
            root_grid(_config(chart=Chart.ROOTS, lam_min=2.0, lam_max=1.0))
        with pytest.raises(DomainError):
            sweep_metadata(_config(chart=Chart.LINES, q0=1.5))
