"""Allocation statistics of a finished trial.

``n1`` is the inferior-allocation count: for two arms the smaller of the two
counts, for m arms the largest count outside the most-sampled arm (ties for
most-sampled resolved by lowest index). ``inferior_count`` is the count of
the arm with the smallest true mean, which can be large on trajectories that
lock onto the wrong arm.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class TiedMinimumError(ValueError):
    """The true-worst arm is not unique, so ``inferior_count`` is undefined."""


@dataclass(frozen=True)
class TrialMetrics:
    n1: int
    inferior_count: int | None
    correct: bool
    decision: int


def n1_two_arm(counts: Sequence[int]) -> int:
    a, b = counts
    return min(int(a), int(b))


def n1_multi(counts: Sequence[int]) -> int:
    counts = [int(c) for c in counts]
    if len(counts) < 2:
        raise ValueError("need at least 2 arms")
    lead = counts.index(max(counts))
    return max(c for j, c in enumerate(counts) if j != lead)


def worst_arm(true_means: Sequence[float]) -> int:
    lo = min(true_means)
    worst = [j for j, v in enumerate(true_means) if v == lo]
    if len(worst) > 1:
        raise TiedMinimumError(
            f"arms {worst} share the smallest true mean; use the n1 metric instead"
        )
    return worst[0]


def inferior_count(counts: Sequence[int], true_means: Sequence[float]) -> int:
    return int(counts[worst_arm(true_means)])


def trial_metrics(outcome, true_means: Sequence[float]) -> TrialMetrics:
    counts = outcome.counts
    n1 = n1_two_arm(counts) if len(counts) == 2 else n1_multi(counts)
    try:
        inf = inferior_count(counts, true_means)
    except TiedMinimumError:
        inf = None
    return TrialMetrics(n1, inf, outcome.correct, outcome.decision)


def n1_rows(counts: np.ndarray) -> np.ndarray:
    """Row-wise ``n1`` of an (R, m) count matrix."""
    counts = np.asarray(counts)
    lead = np.argmax(counts, axis=1)
    masked = counts.copy()
    masked[np.arange(len(counts)), lead] = -1
    return masked.max(axis=1)
