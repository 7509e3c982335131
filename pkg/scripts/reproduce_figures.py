#!/usr/bin/env python3
"""
Script to regenerate the data tables behind the parameter, functional and azimuth plots.

Usage:
    python scripts/reproduce_figures.py [output_dir]
"""

import asyncio
import sys
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.export import render_curve, sweep_csv, write_text  # noqa: E402
from app.knot_search import solve_closure  # noqa: E402
from app.main import configure_logging  # noqa: E402
from app.models import Chart, RunConfig  # noqa: E402
from app.parametrization import find_m0  # noqa: E402
from app.service import constants, run_sweep, sweep_metadata  # noqa: E402


async def main():
    """Write the sweep tables and the (2, 3) knot into the output directory."""
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("figures")
    configure_logging()
    m0_minus, m0_plus = find_m0()

    print("Chart constants:")
    for value in constants():
        print(f"  {value.name}: {value.value:.12g} ({value.provenance})")
    print()

    tables = {
        "chart_full.csv": RunConfig(command="sweep", m_min=-4.7, m_max=m0_minus, points=500),
        "chart_classical.csv": RunConfig(command="sweep", m_min=1e-3, m_max=m0_minus, points=200),
        "chart_extended.csv": RunConfig(
            command="sweep", m_min=0.999 * m0_plus, m_max=-1e-3, points=200
        ),
    }
    for name, config in tables.items():
        print(f"Sweeping {name} ({config.points} points)...", end=" ")
        result = await run_sweep(config)
        metadata = {"m_min": config.m_min, "m_max": config.m_max, "failed": result.failed}
        write_text(out_dir / name, sweep_csv(result.rows, metadata))
        print(f"OK ({result.duration_seconds:.1f}s)")

    roots_config = RunConfig(command="sweep", chart=Chart.ROOTS, points=401)
    print("Tabulating the cubic roots against lambda...", end=" ")
    result = await run_sweep(roots_config)
    write_text(out_dir / "roots_lambda.csv", sweep_csv(result.rows, sweep_metadata(roots_config)))
    print(f"OK ({result.failed} failed)")

    for q0 in (0.25, 0.5, 0.75, 1.0):
        line_config = RunConfig(command="sweep", chart=Chart.LINES, q0=q0, m_min=-2.0, points=101)
        result = await run_sweep(line_config)
        name = f"lines_q0_{q0:.2f}.csv"
        write_text(out_dir / name, sweep_csv(result.rows, sweep_metadata(line_config)))
        print(f"Wrote {name} ({result.failed} failed)")

    print("Solving the (2, 3) knot...", end=" ")
    knot = solve_closure(2, 3)
    write_text(out_dir / "knot_2_3.csv", render_curve(knot, "csv"))
    write_text(out_dir / "knot_2_3.obj", render_curve(knot, "obj"))
    print(f"OK (m = {knot.m:.10f}, closure error {knot.closure_error:.2e} R)")

    print()
    print(f"Done! Tables written to {out_dir}")


if __name__ == "__main__":
    asyncio.run(main())
