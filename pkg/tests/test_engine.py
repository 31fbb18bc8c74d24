import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptalloc.engine import (
    ConfigError, TrialConfig, _pick, allocate_next, draw_trial_inputs, run_trial,
    simulate_batch, trial_rng,
)
from adaptalloc.models import ArmState, ResponseModel


def states_with_means(*means):
    return [ArmState(1, m) for m in means]


def test_strict_leader():
    assert allocate_next(states_with_means(0.6, 0.3), np.random.default_rng(0)) == 0


def test_two_way_tie_is_fair():
    rng = np.random.default_rng(1)
    picks = [allocate_next(states_with_means(0.4, 0.4), rng) for _ in range(10**5)]
    assert abs(picks.count(0) / 10**5 - 0.5) < 0.01


def test_three_way_tie_excludes_trailing_arm():
    rng = np.random.default_rng(2)
    picks = np.array([allocate_next(states_with_means(1.0, 1.0, 0.2), rng) for _ in range(10**5)])
    assert not np.any(picks == 2)
    assert abs(np.mean(picks == 0) - 0.5) < 0.01
    assert abs(np.mean(picks == 1) - 0.5) < 0.01


def test_undefined_mean_rejected():
    with pytest.raises(ValueError):
        allocate_next([ArmState(1, 0.5), ArmState()], np.random.default_rng(0))


def test_pick_uses_uniform_for_ties():
    assert _pick([1.0, 1.0, 1.0], 0.0) == 0
    assert _pick([1.0, 1.0, 1.0], 0.5) == 1
    assert _pick([1.0, 1.0, 1.0], 0.999) == 2


def test_sure_thing_trial(sure_thing):
    out = run_trial(TrialConfig(sure_thing, total_n=10, initial_m=1, seed=5))
    assert out.counts == (9, 1)
    assert out.decision == 0 and out.correct


@pytest.mark.parametrize("kw", [dict(total_n=3, initial_m=2), dict(total_n=10, initial_m=0)])
def test_config_errors(sure_thing, kw):
    with pytest.raises(ConfigError):
        TrialConfig(sure_thing, **kw)


def test_single_arm_rejected():
    with pytest.raises(ConfigError):
        TrialConfig((ResponseModel.bernoulli(0.5),), 10, 1)


def test_determinism(table1_arms):
    cfg = TrialConfig(table1_arms, 300, 5, seed=99)
    assert run_trial(cfg, trace=True) == run_trial(cfg, trace=True)


def test_conservation_and_leader_dominance(table1_arms):
    cfg = TrialConfig(table1_arms, 400, 3, seed=3)
    rng = trial_rng(cfg.seed)
    u, _ = draw_trial_inputs(cfg, rng)
    x = np.stack([arm.transform(u[j]) for j, arm in enumerate(cfg.arms)])
    out = run_trial(cfg, trace=True)
    assert sum(out.counts) == cfg.total_n
    # replay the trace and check the chosen arm led at every stage
    counts = [cfg.initial_m] * cfg.m
    sums = [sum(x[j, :cfg.initial_m]) for j in range(cfg.m)]
    for j in out.trace:
        means = [sums[i] / counts[i] for i in range(cfg.m)]
        assert means[j] == max(means)
        sums[j] += x[j, counts[j]]
        counts[j] += 1
    assert tuple(counts) == out.counts


def test_shift_invariance(table1_arms):
    c = 7.25
    shifted = tuple(a.shifted(c) for a in table1_arms)
    for seed in range(20):
        a = run_trial(TrialConfig(table1_arms, 250, 2, seed=seed), trace=True)
        b = run_trial(TrialConfig(shifted, 250, 2, seed=seed), trace=True)
        assert a.trace == b.trace
        assert a.decision == b.decision


def _batch_vs_scalar(cfg, seeds):
    inputs = [draw_trial_inputs(cfg, trial_rng(s)) for s in seeds]
    u = np.stack([i[0] for i in inputs])
    ties = np.stack([i[1] for i in inputs])
    res = simulate_batch(cfg, u, ties, trace=True)
    for r, s in enumerate(seeds):
        ref = run_trial(cfg.with_seed(s), trace=True)
        assert tuple(res.counts[r]) == ref.counts
        assert int(res.decision[r]) == ref.decision
        assert tuple(int(j) for j in res.trace[r]) == ref.trace
        assert tuple(res.means[r]) == ref.final_means


@pytest.mark.parametrize("arms", [
    (ResponseModel.normal(0.8, 1), ResponseModel.normal(0.2, math.sqrt(0.7))),
    (ResponseModel.bernoulli(0.5), ResponseModel.bernoulli(0.2)),
    (ResponseModel.bernoulli(0.5), ResponseModel.bernoulli(0.5), ResponseModel.bernoulli(0.4)),
    (ResponseModel.normal(0.9, 1), ResponseModel.normal(0.2, math.sqrt(0.7)), ResponseModel.normal(0, math.sqrt(0.5))),
])
def test_batch_engine_matches_reference_loop(arms):
    _batch_vs_scalar(TrialConfig(arms, 120, 2), range(40))


@settings(max_examples=25, deadline=None)
@given(p0=st.sampled_from([0.1, 0.3, 0.5, 0.9]), p1=st.sampled_from([0.1, 0.3, 0.5, 0.9]),
       m0=st.integers(1, 4), n=st.integers(10, 80), seed=st.integers(0, 2**64 - 1))
def test_batch_matches_reference_property(p0, p1, m0, n, seed):
    cfg = TrialConfig((ResponseModel.bernoulli(p0), ResponseModel.bernoulli(p1)), n, m0)
    _batch_vs_scalar(cfg, [seed])


def test_two_arm_is_the_m_arm_rule_with_m_equal_2():
    # with two arms the general leader rule reduces to rules (i)-(iii)
    def two_arm_choice(m0, m1, u):
        if m0 > m1:
            return 0
        if m0 < m1:
            return 1
        return 0 if u < 0.5 else 1

    rng = np.random.default_rng(4)
    for _ in range(2000):
        a, b = rng.integers(0, 3, 2) / 2
        u = rng.random()
        assert _pick([a, b], u) == two_arm_choice(a, b, u)


def test_correct_scored_against_lowest_best_arm():
    arms = (ResponseModel.normal(1, 1), ResponseModel.normal(1, 1))
    assert TrialConfig(arms, 10, 1).best_arm == 0


@pytest.mark.slow
def test_identical_arms_split_evenly():
    from adaptalloc.montecarlo import simulate_replications

    cfg = TrialConfig((ResponseModel.normal(1, 1), ResponseModel.normal(1, 1)), 200, 10)
    rec = simulate_replications(cfg, 10_000, 17)
    assert abs(np.mean(rec.decision == 0) - 0.5) < 0.015
