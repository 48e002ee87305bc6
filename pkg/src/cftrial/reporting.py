"""Plain-table and CSV rendering.

CSV output is locale-independent by construction: values are written with
``repr`` (dot decimal separator, full precision) in a fixed column order,
so emitted files round-trip through ``float()`` exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .mc import OperatingCharacteristics, SweepCell
from .sizing import SizingResult

SWEEP_HEADER = ["lambda_P", "lambda_A", "rejection_rate", "mc_std_err"]
CURVE_HEADER = ["x", "value"]
SIZING_HEADER = ["design", "total_py", "expected_events", "aux_json"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def render_table(headers: list[str], rows: list[list]) -> str:
    """Fixed-width text table (floats shortened for the terminal)."""

    def short(value) -> str:
        if isinstance(value, float) and math.isfinite(value):
            return f"{value:.6g}"
        return _cell(value)

    cells = [[short(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def render_csv(headers: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(path: str | Path, headers: list[str], rows: list[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(headers, rows), encoding="utf-8")
    return path


def sweep_rows(cells: list[SweepCell]) -> list[list]:
    return [[c.lambda_p, c.lambda_a, c.rejection_rate, c.mc_std_err] for c in cells]


def curve_rows(points: list[tuple[float, float]]) -> list[list]:
    return [[x, y] for x, y in points]


def sizing_row(design: str, result: SizingResult) -> list:
    return [design, result.total_py, result.expected_events,
            json.dumps(result.auxiliary, sort_keys=True)]


def oc_rows(oc: OperatingCharacteristics) -> list[list]:
    rows = [
        ["rejection_rate", oc.rejection_rate],
        ["mc_std_err", oc.mc_std_err],
        ["n_replicates", oc.n_replicates],
        ["n_estimator_undefined", oc.n_estimator_undefined],
    ]
    if oc.trial_py is not None:
        rows.append(["trial_py", oc.trial_py])
    if oc.mean_sized_py is not None:
        rows.append(["mean_sized_py", oc.mean_sized_py])
    if oc.mean_margin is not None:
        rows.append(["mean_margin", oc.mean_margin])
    return rows
