"""
Writers for curve files and sweep tables: CSV, JSON and OBJ polylines.
"""

import json
import logging
import math
from pathlib import Path

from app.models import CurveSample, KnotSolution, SweepRow, TableRow

logger = logging.getLogger(__name__)

CURVE_COLUMNS = [
    "s",
    "kappa",
    "tau",
    "rho",
    "theta",
    "z",
    "x",
    "y",
    "t_x",
    "t_y",
    "t_z",
    "n_x",
    "n_y",
    "n_z",
    "b_x",
    "b_y",
    "b_z",
    "theta_darboux",
]

SWEEP_COLUMNS = list(SweepRow.model_fields)


def fmt(value: float | int | None) -> str:
    """Fixed 17-significant-digit formatting so identical inputs give identical files."""
    if value is None:
        return ""
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def curve_row(sample: CurveSample) -> list[float]:
    x, y, _ = sample.position
    return [
        sample.s,
        sample.kappa,
        sample.tau,
        sample.rho,
        sample.theta,
        sample.z,
        x,
        y,
        *sample.t_hat,
        *sample.n_hat,
        *sample.b_hat,
        sample.theta_darboux,
    ]


def knot_metadata(knot: KnotSolution) -> dict:
    """Header fields of a curve file: parameters, functionals and constant provenance."""
    return {
        "m": knot.m,
        "q0": knot.q0,
        "k0": knot.k0,
        "lambda": knot.lam,
        "nu": knot.nu,
        "branch": knot.branch.value,
        "p": knot.p_int,
        "q": knot.q_int,
        "ell": knot.ell,
        "F_hat": knot.functionals.F_hat,
        "tau_avg": knot.functionals.tau_avg,
        "T_total": knot.functionals.T_total,
        "R_hat": knot.R_hat,
        "R": knot.R,
        "delta_theta": knot.delta_theta,
        "period_S": knot.period_S,
        "closed": knot.closed,
        "vertical_drift": knot.vertical_drift,
        "closure_error": knot.closure_error,
        "q0_provenance": "Q0(m) = 2E(m)/K(m) - (1 - m)" if knot.closed else "user supplied",
        "samples": len(knot.samples),
    }


def _header_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, str):
        return value
    return fmt(value)


def curve_csv(knot: KnotSolution) -> str:
    lines = [f"# {key} = {_header_value(value)}" for key, value in knot_metadata(knot).items()]
    lines.append(",".join(CURVE_COLUMNS))
    lines.extend(",".join(fmt(v) for v in curve_row(sample)) for sample in knot.samples)
    return "\n".join(lines) + "\n"


def curve_json(knot: KnotSolution) -> str:
    data = {
        "metadata": knot_metadata(knot),
        "columns": CURVE_COLUMNS,
        "rows": [[fmt(v) for v in curve_row(sample)] for sample in knot.samples],
    }
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def curve_obj(knot: KnotSolution) -> str:
    """Wavefront OBJ: one vertex per sample and a single polyline through them."""
    lines = [f"# {key} = {_header_value(value)}" for key, value in knot_metadata(knot).items()]
    lines.extend("v " + " ".join(fmt(c) for c in sample.position) for sample in knot.samples)
    if knot.samples:
        lines.append("l " + " ".join(str(i) for i in range(1, len(knot.samples) + 1)))
    return "\n".join(lines) + "\n"


_CURVE_WRITERS = {"csv": curve_csv, "json": curve_json, "obj": curve_obj}


def render_curve(knot: KnotSolution, fmt_name: str = "csv") -> str:
    try:
        writer = _CURVE_WRITERS[fmt_name]
    except KeyError:
        raise ValueError(f"Unknown curve format: {fmt_name}") from None
    return writer(knot)


def table_columns(rows: list[TableRow]) -> list[str]:
    """Column names of a sweep table, taken from its row model."""
    if not rows:
        return SWEEP_COLUMNS
    return list(type(rows[0]).model_fields)


def sweep_csv(rows: list[TableRow], metadata: dict | None = None) -> str:
    columns = table_columns(rows)
    lines = [f"# {key} = {_header_value(value)}" for key, value in (metadata or {}).items()]
    lines.append(",".join(columns))
    lines.extend(",".join(fmt(getattr(row, name)) for name in columns) for row in rows)
    return "\n".join(lines) + "\n"


def sweep_json(rows: list[TableRow], metadata: dict | None = None) -> str:
    columns = table_columns(rows)
    data = {
        "metadata": metadata or {},
        "columns": columns,
        "rows": [[fmt(getattr(row, name)) for name in columns] for row in rows],
    }
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def write_text(path: Path, text: str) -> Path:
    """Write with LF line endings, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Wrote {path}")
    return path
