"""Replicated trials with order-independent seeding.

Replication ``i`` of a run with master seed ``s`` uses the 64-bit trial seed

    split_seed(s, i) = SeedSequence(s, spawn_key=(i,)).generate_state(1, uint64)[0]

and then runs exactly as ``run_trial(cfg.with_seed(split_seed(s, i)))``. Work
is cut into fixed blocks of replication indices; blocks may run in any order
or process and are reassembled by index before any averaging, so summaries
do not depend on the worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .engine import TrialConfig, draw_trial_inputs, simulate_batch, trial_rng
from .metrics import TiedMinimumError, n1_rows, worst_arm

WORKERS_ENV = "ADAPTALLOC_WORKERS"
_BLOCK_BYTES = 48 * 2**20


def split_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class ReplicationRecords:
    """Raw per-replication outputs, indexed by replication number."""

    counts: np.ndarray  # (R, m)
    decision: np.ndarray  # (R,)
    correct: np.ndarray  # (R,) bool


def _run_block(cfg: TrialConfig, master_seed: int, start: int, stop: int):
    u = np.empty((stop - start, cfg.m, cfg.arm_cap))
    ties = np.empty((stop - start, cfg.n_stages + 1))
    for r, i in enumerate(range(start, stop)):
        u[r], ties[r] = draw_trial_inputs(cfg, trial_rng(split_seed(master_seed, i)))
    res = simulate_batch(cfg, u, ties)
    return start, res.counts, res.decision


def _blocks(cfg: TrialConfig, reps: int) -> list[tuple[int, int]]:
    size = max(64, _BLOCK_BYTES // (8 * cfg.m * cfg.arm_cap))
    return [(a, min(a + size, reps)) for a in range(0, reps, size)]


def simulate_replications(
    cfg: TrialConfig, reps: int, master_seed: int, workers: int | None = None
) -> ReplicationRecords:
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    workers = default_workers() if workers is None else workers
    counts = np.empty((reps, cfg.m), dtype=np.int64)
    decision = np.empty(reps, dtype=np.int64)
    blocks = _blocks(cfg, reps)
    if workers <= 1 or len(blocks) == 1:
        results = (_run_block(cfg, master_seed, a, b) for a, b in blocks)
        for start, c, d in results:
            counts[start:start + len(c)] = c
            decision[start:start + len(d)] = d
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_run_block, cfg, master_seed, a, b) for a, b in blocks]
            for fut in futs:
                start, c, d = fut.result()
                counts[start:start + len(c)] = c
                decision[start:start + len(d)] = d
    return ReplicationRecords(counts, decision, decision == cfg.best_arm)


@dataclass(frozen=True)
class ReplicationSummary:
    reps: int
    n: int
    pcs: float
    mean_n1: float
    n1_se: float
    mean_inferior: float
    inferior_se: float
    inferior_over_logn: float
    min_expected_count: float
    min_expected_count_ratio: float
    pcs_se_bound: float
    mean_counts: tuple[float, ...] = field(default_factory=tuple)


def _se(x: np.ndarray) -> float:
    if len(x) < 2:
        return 0.0
    return float(np.std(x, ddof=1) / math.sqrt(len(x)))


def summarize(cfg: TrialConfig, rec: ReplicationRecords) -> ReplicationSummary:
    reps = len(rec.decision)
    n1 = n1_rows(rec.counts).astype(float)
    try:
        inf = rec.counts[:, worst_arm(cfg.true_means)].astype(float)
        mean_inf, inf_se = float(np.mean(inf)), _se(inf)
    except TiedMinimumError:
        mean_inf = inf_se = math.nan
    mean_counts = np.mean(rec.counts.astype(float), axis=0)
    lo = float(mean_counts.min())
    return ReplicationSummary(
        reps=reps,
        n=cfg.total_n,
        pcs=float(np.mean(rec.correct)),
        mean_n1=float(np.mean(n1)),
        n1_se=_se(n1),
        mean_inferior=mean_inf,
        inferior_se=inf_se,
        inferior_over_logn=mean_inf / math.log(cfg.total_n),
        min_expected_count=lo,
        min_expected_count_ratio=lo / cfg.total_n,
        pcs_se_bound=math.sqrt(1.0 / (4 * reps)),
        mean_counts=tuple(float(c) for c in mean_counts),
    )


def run_replications(
    cfg: TrialConfig, reps: int, master_seed: int, workers: int | None = None
) -> ReplicationSummary:
    """Estimate PCS and allocation counts from ``reps`` independent trials."""
    return summarize(cfg, simulate_replications(cfg, reps, master_seed, workers))


def log_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``values`` against ``ln(ns)``."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.asarray(values, dtype=float)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


@dataclass(frozen=True)
class BoundednessReport:
    ns: tuple[int, ...]
    n1_slope: float
    n1_flat: bool
    inferior_slope: float | None

    def lines(self) -> list[str]:
        out = [
            f"N grid: {', '.join(map(str, self.ns))}",
            f"E(N1) slope per ln N: {self.n1_slope:.4f} ({'flat' if self.n1_flat else 'growing'})",
        ]
        if self.inferior_slope is not None:
            out.append(f"E(inferior) slope per ln N: {self.inferior_slope:.4f}")
        return out


FLAT_SLOPE = 1.0


def _field(summary, name: str):
    if isinstance(summary, dict):
        return summary.get(name)
    return getattr(summary, name, None)


def boundedness_diagnostic(points) -> BoundednessReport:
    """Check whether E(N1) stays flat in ln N while E(inferior) grows.

    ``points`` is a sequence of ``(N, summary)`` with ascending N; a summary
    is a :class:`ReplicationSummary` or a dict with ``mean_n1`` and optionally
    ``mean_inferior``.
    """
    points = list(points)
    ns = [int(n) for n, _ in points]
    if len(set(ns)) < 3:
        raise ValueError("need at least 3 distinct N values")
    if ns != sorted(ns):
        raise ValueError("N values must be ascending")
    n1 = [_field(s, "mean_n1") for _, s in points]
    slope = log_slope(ns, n1)
    inf = [_field(s, "mean_inferior") for _, s in points]
    inf_slope = None
    if all(v is not None and math.isfinite(v) for v in inf):
        inf_slope = log_slope(ns, inf)
    return BoundednessReport(tuple(ns), slope, slope < FLAT_SLOPE, inf_slope)


@dataclass(frozen=True)
class CalibrationRow:
    initial_m: int
    pcs: float
    mean_n1: float
    score: float


def calibrate_initial_m(
    cfg: TrialConfig,
    target_pcs: float | None,
    target_n1: float | None,
    m_grid: Sequence[int] = range(2, 31),
    reps: int = 10_000,
    master_seed: int = 0,
    pcs_tol: float = 0.02,
    n1_rel_tol: float = 0.15,
) -> tuple[int, list[CalibrationRow]]:
    """Sweep the initial per-arm size at ``cfg.total_n`` and pick the best match.

    The score is the worst tolerance-normalised error,
    ``max(|pcs - target_pcs| / pcs_tol, |n1 - target_n1| / (n1_rel_tol * target_n1))``,
    so a score <= 1 means both targets are met; ties go to the smaller M.
    Values of M whose initial phase does not fit in ``total_n`` are skipped.
    """
    rows = []
    for m0 in m_grid:
        if cfg.m * m0 > cfg.total_n:
            continue
        s = run_replications(_with_m(cfg, m0), reps, master_seed)
        score = 0.0
        if target_pcs is not None:
            score = max(score, abs(s.pcs - target_pcs) / pcs_tol)
        if target_n1 is not None:
            score = max(score, abs(s.mean_n1 - target_n1) / (n1_rel_tol * target_n1))
        rows.append(CalibrationRow(m0, s.pcs, s.mean_n1, score))
    if not rows:
        raise ValueError("no initial size in the grid fits total_n")
    best = min(rows, key=lambda r: (r.score, r.initial_m))
    return best.initial_m, rows


def _with_m(cfg: TrialConfig, m0: int) -> TrialConfig:
    return replace(cfg, initial_m=m0)
