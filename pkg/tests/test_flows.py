"""Sampling loop semantics, flow compositions and budget accounting."""

from __future__ import annotations

import json

import pytest

import symsearch as ss
from symsearch.algorithms import Exhaustive, RandomSearch, RegularizedEvolution
from symsearch.decisions import abstract_search_space, enumerate_dnas, minimal_dna
from symsearch.errors import (
    DoubleFeedback,
    EmptyRewards,
    EmptySelection,
    FeedbackSkipped,
    UnsupportedSpace,
)
from symsearch.flows import (
    SearchLoop,
    run_factorized,
    run_hybrid,
    run_joint,
    run_separate,
    sample,
    top5_average,
)
from symsearch.hyper import oneof, permutate
from symsearch.materialize import materialize
from symsearch.oracles import (
    OP_HINT,
    SyntheticNASOracle,
    build_nasbench_space,
    eval_oracle,
)


@pytest.fixture()
def bench():
    space = build_nasbench_space(3, 3)
    spec = abstract_search_space(space)
    oracle = SyntheticNASOracle(3, 3, seed=7)
    reward = lambda child, dna: eval_oracle(oracle, dna, spec)
    return space, spec, oracle, reward


def op_selector(point):
    return point.hints == OP_HINT


# -- sample -----------------------------------------------------------------------

def test_sample_joint_yields_deterministic_programs(bench):
    space, spec, oracle, reward = bench
    count = 0
    for child, feedback in sample(space, RegularizedEvolution(5, 2, seed=0), budget=30):
        assert ss.is_deterministic(child)
        feedback(reward(child, feedback.dna))
        count += 1
    assert count == 30


def test_sample_partitioned_yields_subspaces(bench):
    space, spec, oracle, reward = bench
    for sub_space, feedback in sample(space, RandomSearch(seed=1),
                                      partition=op_selector, budget=5):
        remaining = abstract_search_space(sub_space)
        assert not remaining.is_empty
        assert all(p.hints == "edge" for p in remaining.points)
        feedback(0.0)


def test_sample_exhaustive_stops_at_space_end():
    space = permutate([1, 2, 3])
    children = []
    for child, feedback in sample(space, Exhaustive(), budget=10):
        children.append(child)
        feedback(0.0)
    assert len(children) == 6


def test_sample_double_feedback_raises(bench):
    space, *_ = bench
    stream = sample(space, RandomSearch(seed=0), budget=2)
    child, feedback = next(stream)
    feedback(1.0)
    with pytest.raises(DoubleFeedback):
        feedback(1.0)


def test_sample_strict_mode_rejects_skips(bench):
    space, *_ = bench
    stream = sample(space, RandomSearch(seed=0), budget=3)
    next(stream)
    with pytest.raises(FeedbackSkipped):
        next(stream)


def test_sample_lenient_mode_feeds_neg_inf(bench):
    space, *_ = bench
    algo = RegularizedEvolution(2, 1, seed=0)
    stream = sample(space, algo, budget=3, strict=False)
    next(stream)
    next(stream)  # the skipped trial silently becomes reward -inf
    assert [entry[2] for entry in algo.population] == [float("-inf")]


def test_sample_empty_partition_raises(bench):
    space, *_ = bench
    with pytest.raises(EmptySelection):
        next(sample(space, RandomSearch(seed=0), partition=lambda p: False, budget=1))


# -- budget accounting ----------------------------------------------------------------

def test_budget_joint(bench):
    space, spec, oracle, reward = bench
    report = run_joint(space, RandomSearch(seed=0), reward, trials=17)
    assert report.oracle_calls == 17


def test_budget_factorized(bench):
    space, spec, oracle, reward = bench
    report = run_factorized(
        space, op_selector,
        SearchLoop(lambda s: RandomSearch(seed=s), 6, seed=0),
        SearchLoop(lambda s: RandomSearch(seed=s), 5, seed=0),
        reward)
    assert report.oracle_calls == 30
    assert report.budgets == {"outer_trials": 6, "inner_trials": 5}


def test_budget_hybrid(bench):
    space, spec, oracle, reward = bench
    report = run_hybrid(
        space, op_selector,
        SearchLoop(lambda s: RegularizedEvolution(3, 2, seed=s), 4, seed=0),
        SearchLoop(lambda s: RegularizedEvolution(3, 2, seed=s), 5, seed=0),
        7, reward)
    assert report.oracle_calls == 4 * 5 + 7


def test_budget_separate(bench):
    space, spec, oracle, reward = bench
    pivot = materialize(space, minimal_dna(spec))
    report = run_separate(
        space, op_selector, pivot,
        SearchLoop(lambda s: RandomSearch(seed=s), 8, seed=0),
        SearchLoop(lambda s: RandomSearch(seed=s), 5, seed=1),
        reward)
    assert report.oracle_calls == 13


# -- flow behaviour ----------------------------------------------------------------------

def test_best_so_far_non_decreasing(bench):
    space, spec, oracle, reward = bench
    reports = [
        run_joint(space, RandomSearch(seed=3), reward, trials=40),
        run_factorized(space, op_selector,
                       SearchLoop(lambda s: RandomSearch(seed=s), 5, seed=3),
                       SearchLoop(lambda s: RandomSearch(seed=s), 4, seed=3), reward),
        run_hybrid(space, op_selector,
                   SearchLoop(lambda s: RegularizedEvolution(3, 2, seed=s), 3, seed=3),
                   SearchLoop(lambda s: RegularizedEvolution(3, 2, seed=s), 4, seed=3),
                   6, reward),
    ]
    for report in reports:
        values = [record.best_so_far for record in report.records]
        assert values == sorted(values)
        assert values[-1] == max(record.reward for record in report.records)


def test_joint_exhaustive_equals_enumerate_argmax(bench):
    space, spec, oracle, reward = bench
    report = run_joint(space, Exhaustive(), reward, trials=500)
    assert report.oracle_calls == 216
    best_index, best = None, None
    for i, dna in enumerate(enumerate_dnas(spec)):
        value = eval_oracle(oracle, dna, spec)
        if best is None or value > best:
            best_index, best = i, value
    assert report.best_reward == best
    assert report.records[best_index].reward == best
    # tie-breaking: the recorded best dna is the first in enumeration order
    firsts = [r.trial_index for r in report.records if r.reward == best]
    assert report.best_dna == report.records[firsts[0]].dna


def test_factorized_fresh_inner_algorithm_each_outer(bench):
    space, spec, oracle, reward = bench
    built = []

    def make_inner(seed):
        algo = RegularizedEvolution(2, 1, seed=seed)
        built.append(algo)
        return algo

    run_factorized(space, op_selector,
                   SearchLoop(lambda s: RandomSearch(seed=s), 3, seed=0),
                   SearchLoop(make_inner, 4, seed=0),
                   reward)
    assert len(built) == 3
    assert len({id(a) for a in built}) == 3


def test_hybrid_resumes_best_population(bench):
    space, spec, oracle, reward = bench
    inner_instances = []

    def make_inner(seed):
        algo = RegularizedEvolution(3, 2, seed=seed)
        inner_instances.append(algo)
        return algo

    phase1_populations = {}

    class SnoopingOracle:
        def __call__(self, child, dna):
            return reward(child, dna)

    report = run_hybrid(space, op_selector,
                        SearchLoop(lambda s: RandomSearch(seed=s), 3, seed=5),
                        SearchLoop(make_inner, 4, seed=5),
                        6, SnoopingOracle())
    assert report.oracle_calls == 18
    # exactly one inner algorithm kept receiving feedback after phase 1
    resumed = [a for a in inner_instances if a._feedback_count > 4]
    assert len(resumed) == 1
    assert resumed[0]._feedback_count == 10


def test_hybrid_phase2_best_at_least_handoff(bench):
    space, spec, oracle, reward = bench
    for seed in range(6):
        report = run_hybrid(space, op_selector,
                            SearchLoop(lambda s: RegularizedEvolution(3, 2, seed=s), 3, seed=seed),
                            SearchLoop(lambda s: RegularizedEvolution(3, 2, seed=s), 4, seed=seed),
                            8, reward)
        handoff = report.records[3 * 4 - 1].best_so_far
        for record in report.records[3 * 4:]:
            assert record.best_so_far >= handoff


def test_hybrid_zero_phase2_equals_factorized(bench):
    space, spec, oracle, reward = bench
    hybrid = run_hybrid(space, op_selector,
                        SearchLoop(lambda s: RandomSearch(seed=s), 3, seed=1),
                        SearchLoop(lambda s: RandomSearch(seed=s), 4, seed=1),
                        0, reward)
    factorized = run_factorized(space, op_selector,
                                SearchLoop(lambda s: RandomSearch(seed=s), 3, seed=1),
                                SearchLoop(lambda s: RandomSearch(seed=s), 4, seed=1),
                                reward)
    assert [r.dna for r in hybrid.records] == [r.dna for r in factorized.records]
    assert [r.reward for r in hybrid.records] == [r.reward for r in factorized.records]


def test_separate_phases_fix_each_other(bench, types):
    space, spec, oracle, reward = bench
    pivot = materialize(space, minimal_dna(spec))
    seen_children = []

    def snoop(child, dna):
        seen_children.append(child)
        return reward(child, dna)

    report = run_separate(space, op_selector, pivot,
                          SearchLoop(lambda s: RandomSearch(seed=s), 4, seed=0),
                          SearchLoop(lambda s: RandomSearch(seed=s), 3, seed=1),
                          snoop)
    # phase A children share the pivot's edge settings
    pivot_edges = pivot[1]
    for child in seen_children[:4]:
        assert ss.equal(child[1], pivot_edges)
    # phase B children share the best phase-A op settings
    best_a = max(report.records[:4], key=lambda r: r.reward)
    winners = [c for c, r in zip(seen_children[:4], report.records[:4])
               if r.reward == best_a.reward]
    for child in seen_children[4:]:
        assert any(ss.equal(child[0], w[0]) for w in winners)


def test_separate_selector_all_runs_single_joint_phase(bench):
    space, spec, oracle, reward = bench
    pivot = materialize(space, minimal_dna(spec))
    report = run_separate(space, lambda p: True, pivot,
                          SearchLoop(lambda s: RandomSearch(seed=s), 6, seed=0),
                          SearchLoop(lambda s: RandomSearch(seed=s), 9, seed=1),
                          reward)
    assert report.oracle_calls == 6  # phase B has nothing left to optimize
    joint = run_joint(space, RandomSearch(seed=0), reward, trials=6)
    assert [r.reward for r in report.records] == [r.reward for r in joint.records]


def test_separate_rejects_cross_nested_partition(types):
    space = oneof([types.Conv(oneof([2, 4], hints="inner"), 3), types.Identity()],
                  hints="outer")
    spec = abstract_search_space(space)
    pivot = materialize(space, minimal_dna(spec))
    with pytest.raises(UnsupportedSpace):
        run_separate(space, lambda p: p.hints == "outer", pivot,
                     SearchLoop(lambda s: RandomSearch(seed=s), 2, seed=0),
                     SearchLoop(lambda s: RandomSearch(seed=s), 2, seed=0),
                     lambda child, dna: 0.0)


# -- aggregation -----------------------------------------------------------------------

def test_top5_average_examples():
    assert top5_average([1, 2, 3, 4, 5, 6, 7]) == 5.0
    assert top5_average([0.5]) == 0.5
    with pytest.raises(EmptyRewards):
        top5_average([])


def test_top5_average_matches_sort_oracle():
    import random as _random

    rng = _random.Random(4)
    for _ in range(50):
        rewards = [rng.random() for _ in range(20)]
        expected = sum(sorted(rewards, reverse=True)[:5]) / 5
        assert top5_average(rewards) == pytest.approx(expected, abs=0)


def test_factorized_outer_reward_is_aggregated(bench):
    space, spec, oracle, reward = bench
    outer_algo = RegularizedEvolution(2, 1, seed=0)
    captured = []
    original = outer_algo.feedback

    def spy(dna, value):
        captured.append(value)
        return original(dna, value)

    outer_algo.feedback = spy
    inner_rewards = []

    def tracking(child, dna):
        value = reward(child, dna)
        inner_rewards.append(value)
        return value

    run_factorized(space, op_selector,
                   SearchLoop(lambda s: outer_algo, 2, seed=0),
                   SearchLoop(lambda s: RandomSearch(seed=s), 7, seed=0),
                   tracking)
    assert captured == [top5_average(inner_rewards[:7]), top5_average(inner_rewards[7:])]


# -- report serialization -----------------------------------------------------------------

def test_jsonl_and_summary_roundtrip(tmp_path, bench):
    space, spec, oracle, reward = bench
    report = run_joint(space, RandomSearch(seed=2), reward, trials=5, seed=2)
    log = tmp_path / "run.jsonl"
    report.write_jsonl(log)
    report.write_summary(log.with_suffix(".summary.json"))
    lines = log.read_text().splitlines()
    assert len(lines) == 5
    first = json.loads(lines[0])
    assert set(first) == {"trial_index", "outer_index", "inner_index", "dna",
                          "reward", "best_so_far", "wall_ms"}
    assert first["wall_ms"] == 0  # timing disabled by default for reproducibility
    summary = json.loads(log.with_suffix(".summary.json").read_text())
    assert summary["oracle_calls"] == 5
    assert summary["best_reward"] == report.best_reward
