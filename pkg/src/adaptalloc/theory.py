"""Large-deviation quantities behind the finiteness of ``n1``.

For a centred response ``Z`` and a shift ``u > 0`` the increment
``X = Z - u`` has negative mean, and its moment generating function
``M(t) = E exp(t X)`` has a minimum ``rho < 1`` over ``t >= 0``. Partial
means of ``X`` are positive with probability at most ``C * rho**n``, which
makes the last time the running mean of ``Z`` exceeds ``u`` (the stopping
time below) a random variable with geometric tails and all moments finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .engine import TrialConfig
from .models import BERNOULLI, NORMAL, ResponseModel
from .montecarlo import simulate_replications, split_seed
from .metrics import n1_rows

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the C library's complementary error function.

    ``erfc`` keeps full relative precision in the lower tail, so the
    absolute error is at the level of double rounding (well under 1e-12).
    """
    return 0.5 * math.erfc(-x / _SQRT2)


@dataclass(frozen=True)
class ShiftedModel:
    """Increment ``X = Z - u`` where ``Z`` is ``base`` centred at its mean."""

    base: ResponseModel
    u: float

    def __post_init__(self) -> None:
        if not self.u > 0:
            raise ValueError(f"shift u must be > 0, got {self.u}")
        if self.base.kind == NORMAL and (self.base.mean != 0.0 or self.base.sd != 1.0):
            raise ValueError("normal base must be standard Normal(0, 1)")

    @classmethod
    def standard_normal(cls, u: float) -> "ShiftedModel":
        return cls(ResponseModel.normal(0.0, 1.0), u)

    @classmethod
    def bernoulli(cls, p: float, u: float) -> "ShiftedModel":
        return cls(ResponseModel.bernoulli(p), u)

    def log_mgf(self, t: float) -> float:
        """log E exp(t X)."""
        if self.base.kind == NORMAL:
            return -self.u * t + 0.5 * t * t
        p = self.base.mean
        # log(1 - p + p e^t) computed stably for large t
        if p == 0.0:
            lse = 0.0
        elif p == 1.0:
            lse = t
        else:
            lse = np.logaddexp(math.log1p(-p), math.log(p) + t)
        return float(lse - t * (p + self.u))

    def mgf(self, t: float) -> float:
        return math.exp(self.log_mgf(t))

    def sample_centered(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.base.kind == NORMAL:
            return rng.standard_normal(shape)
        p = self.base.mean
        return (rng.random(shape) < p).astype(float) - p


def chernoff_rho_normal(u: float) -> float:
    """min_t E exp(t (Z - u)) for standard normal Z, i.e. exp(-u^2 / 2)."""
    if not u > 0:
        raise ValueError(f"u must be > 0, got {u}")
    return math.exp(-0.5 * u * u)


class PreconditionError(ValueError):
    pass


def chernoff_rho_numeric(model: ShiftedModel, tol: float = 1e-12) -> float:
    """Minimise the increment's mgf over t >= 0 numerically.

    The search interval ``[0, t_max]`` starts at 1 and doubles until the
    mgf is increasing at ``t_max``; ``M`` is convex with ``M(0) = 1`` and
    ``M'(0) = E X < 0``, so the minimiser is interior. The minimisation runs
    on ``log M`` (same minimiser, better conditioned).
    """
    b = model.base
    mean_x = -model.u  # base is centred
    if not mean_x < 0:
        raise PreconditionError("E(X) must be negative")
    if b.kind == BERNOULLI and not (b.mean > 0 and 1.0 - b.mean - model.u > 0):
        raise PreconditionError("P(X > 0) must be positive: need p > 0 and u < 1 - p")
    f = model.log_mgf
    h = 1e-6
    t_max = 1.0
    while f(t_max + h) <= f(t_max):
        t_max *= 2.0
        if t_max > 1e6:
            raise PreconditionError("mgf keeps decreasing; P(X > 0) appears to be 0")
    res = minimize_scalar(f, bounds=(0.0, t_max), method="bounded", options={"xatol": tol})
    return math.exp(min(res.fun, 0.0))


@dataclass(frozen=True)
class TailBound:
    rho: float
    c: float
    horizon: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")


def tail_bound(k: int, tb: TailBound) -> float:
    """min(1, C * rho**k / (1 - rho)), a bound on P(stopping time > k)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return min(1.0, tb.c * tb.rho ** k / (1.0 - tb.rho))


def min_horizon(tb: TailBound, eps: float = 1e-6) -> int:
    """Smallest horizon h with C * rho**h / (1 - rho) < eps."""
    h = math.log(eps * (1.0 - tb.rho) / tb.c) / math.log(tb.rho)
    h = max(1, math.floor(h) + 1)
    while tb.c * tb.rho ** h / (1.0 - tb.rho) >= eps:
        h += 1
    return h


def incorrect_inference_bound(delta: float, eps: float, m_init: int) -> float:
    """Phi(-(delta + eps) * sqrt(m_init)): bound on selecting the worse arm."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if m_init < 1:
        raise ValueError("m_init must be >= 1")
    return normal_cdf(-(delta + eps) * math.sqrt(m_init))


def stopping_times_from_paths(z: np.ndarray, u: float, horizons: Sequence[int]) -> np.ndarray:
    """Truncated stopping times for each row of a matrix of centred draws.

    Returns an int array of shape (len(horizons), rows): the smallest ``k``
    with ``mean(z[:n]) <= u`` for all ``k <= n <= h``, or ``h + 1`` when the
    running mean still exceeds ``u`` at ``h`` (censored).
    """
    h_max = max(horizons)
    n = np.arange(1, h_max + 1)
    above = np.cumsum(z[:, :h_max], axis=1) / n > u
    out = np.empty((len(horizons), z.shape[0]), dtype=np.int64)
    for i, h in enumerate(horizons):
        a = above[:, :h]
        # index (1-based) of the last exceedance, 0 if none
        last = np.where(a.any(axis=1), h - np.argmax(a[:, ::-1], axis=1), 0)
        out[i] = last + 1
    return out


def stopping_time_oracle(model: ShiftedModel, horizon: int, rng: np.random.Generator) -> int:
    """One truncated stopping time; ``horizon + 1`` means censored."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    z = model.sample_centered(rng, (1, horizon))
    return int(stopping_times_from_paths(z, model.u, [horizon])[0, 0])


def simulate_stopping_times(
    model: ShiftedModel,
    horizons: Sequence[int] | int,
    runs: int,
    seed: int,
    block: int = 2**22,
) -> np.ndarray:
    """Stopping times of ``runs`` independent streams at each horizon.

    All horizons are evaluated on the same paths (a longer horizon extends the
    shorter one), so differences between horizons are pure truncation effects.
    Run ``i`` uses the generator seeded with ``split_seed(seed, i // rows)``
    for its block, so results are fixed by ``(seed, runs, horizons)``.
    """
    if isinstance(horizons, int):
        horizons = [horizons]
    horizons = list(horizons)
    if min(horizons) < 1:
        raise ValueError("horizon must be >= 1")
    h_max = max(horizons)
    rows = max(1, block // h_max)
    out = np.empty((len(horizons), runs), dtype=np.int64)
    for b, start in enumerate(range(0, runs, rows)):
        stop = min(start + rows, runs)
        rng = np.random.Generator(np.random.PCG64(split_seed(seed, b)))
        z = model.sample_centered(rng, (stop - start, h_max))
        out[:, start:stop] = stopping_times_from_paths(z, model.u, horizons)
    return out[0] if len(horizons) == 1 else out


def survival(samples: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Empirical P(T > k) for each k."""
    s = np.sort(np.asarray(samples))
    return 1.0 - np.searchsorted(s, ks, side="right") / len(s)


def fit_tail_constant(samples: np.ndarray, rho: float, k0: int = 20) -> TailBound:
    """Smallest C with empirical P(T > k) <= C rho^k / (1 - rho) for all k >= k0."""
    kmax = int(np.max(samples))
    ks = np.arange(k0, max(k0, kmax) + 1)
    ratio = survival(samples, ks) * (1.0 - rho) / rho ** ks.astype(float)
    c = float(ratio.max())
    if c <= 0:
        raise ValueError(f"no samples exceed k0={k0}; lower k0 or use more runs")
    return TailBound(rho, c, kmax)


def envelope_violations(samples: np.ndarray, tb: TailBound, k0: int = 20, z: float = 3.0) -> list[int]:
    """k >= k0 at which the empirical survival exceeds the bound beyond sampling error.

    A point counts as a violation when the number of samples above ``k``
    exceeds ``n b + z sqrt(n b (1 - b)) + 1`` for bound ``b``; the ``+ 1``
    absorbs the discreteness of a single tail hit.
    """
    n = len(samples)
    kmax = int(np.max(samples))
    ks = np.arange(k0, max(k0, kmax) + 1)
    hits = survival(samples, ks) * n
    b = np.array([tail_bound(int(k), tb) for k in ks])
    allowed = n * b + z * np.sqrt(n * b * (1 - b)) + 1.0
    return [int(k) for k, h, a in zip(ks, hits, allowed) if h > a + 1e-9]


def survival_log_slope(samples: np.ndarray, min_hits: int = 200) -> tuple[float, int, int]:
    """Slope of log P(T > k) over the upper tail that still has ``min_hits`` samples.

    The fit uses k from the median of T up to the last k with at least
    ``min_hits`` samples above it. Returns (slope, k_lo, k_hi).
    """
    n = len(samples)
    k_lo = int(np.median(samples))
    ks = np.arange(k_lo, int(np.max(samples)) + 1)
    s = survival(samples, ks)
    keep = s * n >= min_hits
    ks, s = ks[keep], s[keep]
    if len(ks) < 3:
        raise ValueError("not enough tail hits to fit a slope")
    slope = np.polyfit(ks.astype(float), np.log(s), 1)[0]
    return float(slope), int(ks[0]), int(ks[-1])


@dataclass(frozen=True)
class MomentReport:
    orders: tuple[int, ...]
    horizons: tuple[int, int]
    moments: tuple[tuple[float, ...], tuple[float, ...]]
    rel_change: tuple[float, ...]
    censored: tuple[float, float]
    stable: bool


STABLE_REL_CHANGE = 0.02
MAX_CENSORED = 1e-4


class HorizonTooSmall(ValueError):
    pass


def moment_stability(
    model: ShiftedModel,
    orders: Sequence[int],
    horizons: tuple[int, int],
    runs: int = 100_000,
    seed: int = 0,
    tb: TailBound | None = None,
) -> MomentReport:
    """Compare E[T^q] at two truncation horizons on common paths."""
    h1, h2 = horizons
    if not 1 <= h1 < h2:
        raise ValueError("need 1 <= h1 < h2")
    if tb is not None:
        need = min_horizon(tb)
        if h1 < need:
            raise HorizonTooSmall(f"horizon {h1} below bound-driven minimum {need}")
    t = simulate_stopping_times(model, [h1, h2], runs, seed)
    cens = tuple(float(np.mean(t[i] > h)) for i, h in enumerate((h1, h2)))
    if max(cens) > MAX_CENSORED:
        raise HorizonTooSmall(f"censored fraction {max(cens):.2e} exceeds {MAX_CENSORED:g}")
    tf = t.astype(float)
    mom = tuple(tuple(float(np.mean(tf[i] ** q)) for q in orders) for i in range(2))
    rel = tuple(abs(b - a) / a for a, b in zip(mom[0], mom[1]))
    return MomentReport(
        tuple(orders), (h1, h2), mom, rel, cens, all(r < STABLE_REL_CHANGE for r in rel)
    )


@dataclass(frozen=True)
class DominanceReport:
    u: float
    mean_n1: float
    n1_se: float
    mean_stop_sum: float
    stop_sum_se: float
    holds: bool


def n1_dominance(
    cfg: TrialConfig,
    reps: int,
    runs: int,
    horizon: int,
    seed: int = 0,
    z: float = 3.0,
) -> DominanceReport:
    """Compare E[n1] with E[T_0 + T_1] for two unit-variance normal arms.

    ``u`` is one third of the gap in true means; ``T_0``, ``T_1`` are
    independent stopping times of standard normal streams at that ``u``.
    The relation holds when ``E[n1] <= E[T_0 + T_1] + z * SE``, SE combining
    both estimates.
    """
    if cfg.m != 2:
        raise ValueError("two-arm configurations only")
    a, b = sorted(cfg.true_means, reverse=True)
    u = (a - b) / 3.0
    rec = simulate_replications(cfg, reps, seed)
    n1 = n1_rows(rec.counts).astype(float)
    model = ShiftedModel.standard_normal(u)
    t = simulate_stopping_times(model, horizon, 2 * runs, split_seed(seed, 1)).astype(float)
    pair = t[:runs] + t[runs:]
    m1, s1 = float(n1.mean()), float(n1.std(ddof=1) / math.sqrt(reps))
    m2, s2 = float(pair.mean()), float(pair.std(ddof=1) / math.sqrt(runs))
    return DominanceReport(u, m1, s1, m2, s2, m1 <= m2 + z * math.hypot(s1, s2))
