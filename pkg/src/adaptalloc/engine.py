"""Follow-the-leader adaptive allocation for two or more arms.

A trial runs in three phases:

1. ``initial_m`` responses from every arm (arm order 0..m-1).
2. Until ``total_n`` responses have been drawn in total, sample the arm with
   the largest current sample mean; an exact tie among ``s`` leaders is
   broken uniformly at random.
3. Declare the arm with the largest final sample mean best, ties broken
   uniformly at random.

Random stream layout for one trial (generator built from ``cfg.seed``):

* ``rng.random((m, cap))`` with ``cap = total_n - (m - 1) * initial_m``: row
  ``j`` holds the uniforms behind arm ``j``'s responses, in the order they are
  consumed.  Arm ``j``'s ``k``-th response is ``arms[j].transform(u[j, k])``.
* ``rng.random(total_n - m * initial_m + 1)``: one uniform per adaptive
  stage for tie-breaking (consumed whether or not a tie occurs), the last
  one for the terminal decision.

Because every random input is fixed up front, :func:`run_trial` (scalar
reference loop) and :func:`simulate_batch` (vectorised over replications)
produce the same trajectory from the same inputs, bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .models import ArmState, ResponseModel, update

ADAPTIVE = "adaptive"


class ConfigError(ValueError):
    """Invalid trial configuration."""


@dataclass(frozen=True)
class TrialConfig:
    arms: tuple[ResponseModel, ...]
    total_n: int
    initial_m: int = 10
    seed: int = 0
    procedure: str = ADAPTIVE

    def __post_init__(self) -> None:
        object.__setattr__(self, "arms", tuple(self.arms))
        m = len(self.arms)
        if m < 2:
            raise ConfigError(f"need at least 2 arms, got {m}")
        if self.initial_m < 1:
            raise ConfigError(f"initial_m must be >= 1, got {self.initial_m}")
        if self.total_n < m * self.initial_m:
            raise ConfigError(
                f"total_n={self.total_n} is smaller than the initial phase "
                f"m*initial_m={m * self.initial_m}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.procedure != ADAPTIVE:
            raise ConfigError(f"unknown procedure {self.procedure!r}")

    @property
    def m(self) -> int:
        return len(self.arms)

    @property
    def arm_cap(self) -> int:
        """Most responses any single arm can receive."""
        return self.total_n - (self.m - 1) * self.initial_m

    @property
    def n_stages(self) -> int:
        """Adaptive allocations after the initial phase."""
        return self.total_n - self.m * self.initial_m

    @property
    def true_means(self) -> tuple[float, ...]:
        return tuple(a.true_mean for a in self.arms)

    @property
    def best_arm(self) -> int:
        """Lowest-indexed arm with the largest true mean."""
        means = self.true_means
        return means.index(max(means))

    def with_n(self, total_n: int) -> "TrialConfig":
        return replace(self, total_n=total_n)

    def with_seed(self, seed: int) -> "TrialConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class TrialOutcome:
    counts: tuple[int, ...]
    final_means: tuple[float, ...]
    decision: int
    correct: bool
    trace: tuple[int, ...] | None = field(default=None, compare=True)


def trial_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def draw_trial_inputs(cfg: TrialConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Pre-draw all randomness of one trial: (response uniforms, tie uniforms)."""
    u = rng.random((cfg.m, cfg.arm_cap))
    ties = rng.random(cfg.n_stages + 1)
    return u, ties


def _responses(cfg: TrialConfig, u: np.ndarray) -> np.ndarray:
    # u has shape (..., m, cap)
    out = np.empty_like(u)
    for j, arm in enumerate(cfg.arms):
        out[..., j, :] = arm.transform(u[..., j, :])
    return out


def _pick(means: Sequence[float], u: float) -> int:
    best = max(means)
    tied = [j for j, v in enumerate(means) if v == best]
    if len(tied) == 1:
        return tied[0]
    k = min(int(u * len(tied)), len(tied) - 1)
    return tied[k]


def allocate_next(states: Sequence[ArmState], rng: np.random.Generator) -> int:
    """Index of the arm to sample next.

    Returns the arm with the largest sample mean; among ``s`` exactly tied
    leaders each is returned with probability ``1/s``. Consumes one uniform
    from ``rng`` per call, tie or not.
    """
    if any(not s.defined for s in states):
        raise ValueError("every arm needs at least one response before adaptive allocation")
    u = rng.random()
    return _pick([s.mean for s in states], u)


def run_trial(cfg: TrialConfig, rng: np.random.Generator | None = None, trace: bool = False) -> TrialOutcome:
    """Run one trial with the scalar reference loop.

    ``rng`` defaults to the generator derived from ``cfg.seed``.
    """
    if rng is None:
        rng = trial_rng(cfg.seed)
    u, ties = draw_trial_inputs(cfg, rng)
    x = _responses(cfg, u)
    states = [ArmState() for _ in cfg.arms]
    for j in range(cfg.m):
        for k in range(cfg.initial_m):
            states[j] = update(states[j], x[j, k])
    chosen = []
    for t in range(cfg.n_stages):
        j = _pick([s.mean for s in states], ties[t])
        states[j] = update(states[j], x[j, states[j].count])
        chosen.append(j)
    means = tuple(s.mean for s in states)
    decision = _pick(means, ties[-1])
    return TrialOutcome(
        counts=tuple(s.count for s in states),
        final_means=means,
        decision=decision,
        correct=decision == cfg.best_arm,
        trace=tuple(chosen) if trace else None,
    )


@dataclass
class BatchResult:
    """Per-replication results of :func:`simulate_batch` (row r = replication r)."""

    counts: np.ndarray  # (R, m) int64
    sums: np.ndarray  # (R, m) float64
    decision: np.ndarray  # (R,) int64
    trace: np.ndarray | None = None  # (R, n_stages) int8

    @property
    def means(self) -> np.ndarray:
        return self.sums / self.counts


def _pick_batch(means: np.ndarray, u: np.ndarray) -> np.ndarray:
    tied = means == means.max(axis=1, keepdims=True)
    s = tied.sum(axis=1)
    k = np.minimum((u * s).astype(np.int64), s - 1)
    return np.argmax(np.cumsum(tied, axis=1) > k[:, None], axis=1)


def simulate_batch(cfg: TrialConfig, u: np.ndarray, ties: np.ndarray, trace: bool = False) -> BatchResult:
    """Run R trials at once from pre-drawn inputs.

    ``u`` has shape (R, m, cap) and ``ties`` shape (R, n_stages + 1), each row
    laid out as produced by :func:`draw_trial_inputs`.
    """
    x = _responses(cfg, u)
    R, m = x.shape[0], cfg.m
    rows = np.arange(R)
    sums = np.zeros((R, m))
    for k in range(cfg.initial_m):
        sums += x[:, :, k]
    counts = np.full((R, m), cfg.initial_m, dtype=np.int64)
    chosen = np.empty((R, cfg.n_stages), dtype=np.int8) if trace else None
    for t in range(cfg.n_stages):
        j = _pick_batch(sums / counts, ties[:, t])
        sums[rows, j] += x[rows, j, counts[rows, j]]
        counts[rows, j] += 1
        if trace:
            chosen[:, t] = j
    decision = _pick_batch(sums / counts, ties[:, -1])
    return BatchResult(counts, sums, decision, chosen)
