"""Run a scenario over its N grid and emit CSV or an aligned text table."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .montecarlo import ReplicationSummary, run_replications
from .scenarios import METRIC_LABELS, ScenarioSpec

_FIELDS = {
    "pcs": "pcs",
    "n1": "mean_n1",
    "second_max": "mean_n1",
    "inferior": "mean_inferior",
    "inferior_over_logn": "inferior_over_logn",
    "min_expected_count": "min_expected_count",
    "min_expected_ratio": "min_expected_count_ratio",
}


def fmt(v: float) -> str:
    """Six significant digits, '.' decimal point."""
    if isinstance(v, int):
        return str(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.6g}"


@dataclass
class ResultTable:
    name: str
    columns: list[str]
    rows: list[list]  # [N, metric values...]
    summaries: list[ReplicationSummary]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def to_text(self) -> str:
        cells = [self.columns] + [[fmt(v) for v in row] for row in self.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.columns))]
        lines = [f"# {self.name}"]
        for k, r in enumerate(cells):
            lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def run_scenario(spec: ScenarioSpec, master_seed: int, workers: int | None = None,
                 reps: int | None = None) -> ResultTable:
    """One row per N; every N uses the same master seed."""
    reps = spec.reps if reps is None else reps
    rows, summaries = [], []
    for n in spec.n_grid:
        s = run_replications(spec.config(n), reps, master_seed, workers)
        summaries.append(s)
        rows.append([n] + [getattr(s, _FIELDS[m]) for m in spec.metrics])
    return ResultTable(spec.name, spec.columns(), rows, summaries)


def read_csv(text: str) -> tuple[list[str], list[list[float]]]:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    return header, [[float(c) for c in r] for r in body if r]


LABEL_TO_METRIC = {v: k for k, v in METRIC_LABELS.items()}
