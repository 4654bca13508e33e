"""Search flows: the sampling loop and its for-loop compositions.

``sample`` is the basic loop: the algorithm proposes an abstract child
program over the (optionally partitioned) space, the space materializes it,
and the yielded feedback handle forwards the measured reward back to the
algorithm.  On top of it sit four drivers:

* joint      - one loop over the whole space; n trials, n oracle calls.
* separate   - optimize the selected part against a fixed pivot, then the
               complement against the best selection; a + b calls.
* factorized - outer loop proposes sub-spaces, a fresh inner algorithm
               optimizes each one; the outer reward aggregates the inner
               rewards (top-5 average by default); a * b calls.
* hybrid     - factorized phase, then resume the best sub-space with its
               retained inner algorithm state; a * b + c calls.

Reward functions are called as ``oracle(child, dna)`` where ``dna`` is the
child's full-space DNA, so tabular oracles keyed by canonical text work in
every flow.
"""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .decisions import (
    DNA,
    DecisionSpec,
    Selector,
    abstract_search_space,
    encode_dna,
    filter_spec,
    isomorphic,
    iter_all_points,
    merge_dna,
    split_dna,
)
from .errors import (
    DoubleFeedback,
    EmptyRewards,
    EmptySelection,
    ExhaustedSpace,
    FeedbackSkipped,
    UnsupportedSpace,
)
from .materialize import infer_dna, materialize_prepared, materialize_partial_prepared
from .algorithms import SearchAlgorithm
from .prng import derive_seed
from .values import Set, SymbolicValue, clone, get, rebind, to_symbolic, validate_tree

RewardFn = Callable[[SymbolicValue, DNA], float]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class TrialRecord:
    trial_index: int
    outer_index: int
    inner_index: int | None
    dna: str
    reward: float
    best_so_far: float
    wall_ms: int

    def to_json_obj(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "outer_index": self.outer_index,
            "inner_index": self.inner_index,
            "dna": self.dna,
            "reward": self.reward,
            "best_so_far": self.best_so_far,
            "wall_ms": self.wall_ms,
        }


@dataclass
class FlowReport:
    flow: str
    budgets: dict
    seed: int | None
    records: list[TrialRecord] = field(default_factory=list)

    @property
    def oracle_calls(self) -> int:
        return len(self.records)

    @property
    def best_record(self) -> TrialRecord | None:
        best = None
        for record in self.records:
            if best is None or record.reward > best.reward:
                best = record
        return best

    @property
    def best_reward(self) -> float | None:
        best = self.best_record
        return None if best is None else best.reward

    @property
    def best_dna(self) -> str | None:
        best = self.best_record
        return None if best is None else best.dna

    def summary_dict(self) -> dict:
        return {
            "flow": self.flow,
            "budgets": self.budgets,
            "seed": self.seed,
            "oracle_calls": self.oracle_calls,
            "best_dna": self.best_dna,
            "best_reward": self.best_reward,
        }

    def write_jsonl(self, path) -> None:
        with open(Path(path), "w", encoding="utf-8") as handle:
            for record in self.records:
                handle.write(json.dumps(record.to_json_obj(), separators=(",", ":")))
                handle.write("\n")

    def write_summary(self, path) -> None:
        with open(Path(path), "w", encoding="utf-8") as handle:
            json.dump(self.summary_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")


class _Tracker:
    """Accumulates trial records and the running best."""

    def __init__(self, flow: str, budgets: dict, seed: int | None,
                 resume_from: FlowReport | None = None):
        self.report = FlowReport(flow, budgets, seed)
        self._best = float("-inf")
        if resume_from is not None:
            self.report.records = resume_from.records
            if self.report.records:
                self._best = self.report.records[-1].best_so_far

    def record(self, outer: int, inner: int | None, dna_text: str,
               reward: float, wall_ms: int) -> None:
        self._best = max(self._best, reward)
        self.report.records.append(TrialRecord(
            trial_index=len(self.report.records),
            outer_index=outer,
            inner_index=inner,
            dna=dna_text,
            reward=reward,
            best_so_far=self._best,
            wall_ms=wall_ms,
        ))

    @property
    def best(self) -> float:
        return self._best


class _Stopwatch:
    def __init__(self, enabled: bool):
        self.enabled = enabled

    def time(self, fn, *args):
        if not self.enabled:
            return fn(*args), 0
        start = time.perf_counter()
        result = fn(*args)
        return result, int((time.perf_counter() - start) * 1000)


# ---------------------------------------------------------------------------
# The sampling loop
# ---------------------------------------------------------------------------

class Feedback:
    """Single-use reward channel bound to the DNA that produced one child."""

    def __init__(self, algorithm: SearchAlgorithm, dna: DNA, dna_text: str):
        self._algorithm = algorithm
        self.dna = dna
        self.dna_text = dna_text
        self.used = False

    def __call__(self, reward: float) -> None:
        if self.used:
            raise DoubleFeedback(f"reward for DNA {self.dna_text!r} already delivered")
        self._algorithm.feedback(self.dna, reward)
        self.used = True


def sample(space, algorithm: SearchAlgorithm, partition: Selector | None = None,
           budget: int | None = None, strict: bool = True,
           reset: bool = True) -> Iterator[tuple[SymbolicValue, Feedback]]:
    """Yield (child, feedback) pairs until the budget or the space runs out.

    Without a partition every child is a concrete program; with one, each
    child is the sub-space left after materializing the selected decision
    points.  In strict mode advancing past an un-fed trial raises
    FeedbackSkipped; in lenient mode the skipped trial is treated as
    infeasible and fed reward -inf.
    """
    space = to_symbolic(space)
    spec = abstract_search_space(space)
    if partition is not None:
        view = filter_spec(spec, partition)
        if view.is_empty:
            raise EmptySelection("partition selector matched no decision points")
    else:
        view = spec
    if reset:
        algorithm.setup(view)
    else:
        if algorithm.spec is None or not isomorphic(algorithm.spec, view):
            raise UnsupportedSpace("resumed algorithm was set up for a different space")
    produced = 0
    pending: Feedback | None = None
    while budget is None or produced < budget:
        if pending is not None and not pending.used:
            if strict:
                raise FeedbackSkipped(f"trial for DNA {pending.dna_text!r} received no reward")
            pending(float("-inf"))
        try:
            dna = algorithm.propose()
        except ExhaustedSpace:
            return
        if partition is None:
            child = materialize_prepared(space, spec, dna)
        else:
            child = materialize_partial_prepared(space, spec, view, dna, partition)
        handle = Feedback(algorithm, dna, encode_dna(dna, view, validate=False))
        pending = handle
        produced += 1
        yield child, handle


# ---------------------------------------------------------------------------
# Aggregators
# ---------------------------------------------------------------------------

def top5_average(rewards: list[float]) -> float:
    """Mean of the five largest rewards (fewer when fewer exist)."""
    if not rewards:
        raise EmptyRewards("no rewards to aggregate")
    top = heapq.nlargest(5, rewards)
    return sum(top) / len(top)


def mean_reward(rewards: list[float]) -> float:
    if not rewards:
        raise EmptyRewards("no rewards to aggregate")
    return sum(rewards) / len(rewards)


def max_reward(rewards: list[float]) -> float:
    if not rewards:
        raise EmptyRewards("no rewards to aggregate")
    return max(rewards)


AGGREGATORS = {"top5": top5_average, "mean": mean_reward, "max": max_reward}


# ---------------------------------------------------------------------------
# Flow drivers
# ---------------------------------------------------------------------------

@dataclass
class SearchLoop:
    """One loop's configuration: an algorithm factory (seed -> algorithm),
    a trial budget and the base seed."""

    make: Callable[[int], SearchAlgorithm]
    trials: int
    seed: int = 0

    def build(self, index: int | None = None) -> SearchAlgorithm:
        seed = self.seed if index is None else derive_seed(self.seed, index)
        return self.make(seed)


def run_joint(space, algorithm: SearchAlgorithm, oracle: RewardFn, trials: int,
              seed: int | None = None, timing: bool = False) -> FlowReport:
    """Optimize the whole space in a single loop."""
    tracker = _Tracker("joint", {"trials": trials}, seed)
    watch = _Stopwatch(timing)
    for index, (child, feedback) in enumerate(sample(space, algorithm, budget=trials)):
        reward, ms = watch.time(oracle, child, feedback.dna)
        feedback(reward)
        tracker.record(index, None, feedback.dna_text, reward, ms)
    return tracker.report


def run_separate(space, selector: Selector, pivot, phase_a: SearchLoop,
                 phase_b: SearchLoop, oracle: RewardFn,
                 timing: bool = False) -> FlowReport:
    """Optimize the selected points against a fixed pivot, then fix them to
    the phase-A best and optimize the complement.

    The pivot is a concrete child program of the space; its decisions fix
    the complement during phase A.  Selected and complement points must form
    disjoint top-level groups (no point of one group nested inside the
    other).
    """
    space = to_symbolic(space)
    spec = abstract_search_space(space)
    fspec = filter_spec(spec, selector)
    if fspec.is_empty:
        raise EmptySelection("partition selector matched no decision points")
    _require_flat_partition(spec, fspec, selector)

    pivot_dna = infer_dna(space, pivot)
    _, pivot_complement = split_dna(spec, pivot_dna, selector)

    budgets = {"phase_a_trials": phase_a.trials, "phase_b_trials": phase_b.trials}
    tracker = _Tracker("separate", budgets, phase_a.seed)
    watch = _Stopwatch(timing)

    phase_a_space = _transplant_complement(space, spec, selector, pivot)
    best_selected: DNA | None = None
    best_reward = float("-inf")
    for index, (child, feedback) in enumerate(
            sample(phase_a_space, phase_a.build(), budget=phase_a.trials)):
        full = merge_dna(spec, selector, feedback.dna, pivot_complement)
        reward, ms = watch.time(oracle, child, full)
        feedback(reward)
        tracker.record(index, None, encode_dna(full, spec, validate=False), reward, ms)
        if best_selected is None or reward > best_reward:
            best_selected, best_reward = feedback.dna, reward

    phase_b_space = materialize_partial_prepared(space, spec, fspec, best_selected, selector)
    if abstract_search_space(phase_b_space).is_empty:
        return tracker.report  # the selection covered everything
    offset = phase_a.trials
    for index, (child, feedback) in enumerate(
            sample(phase_b_space, phase_b.build(), budget=phase_b.trials)):
        full = merge_dna(spec, selector, best_selected, feedback.dna)
        reward, ms = watch.time(oracle, child, full)
        feedback(reward)
        tracker.record(offset + index, None, encode_dna(full, spec, validate=False), reward, ms)
    return tracker.report


def run_factorized(space, selector: Selector, outer: SearchLoop, inner: SearchLoop,
                   oracle: RewardFn, aggregator=top5_average,
                   timing: bool = False) -> FlowReport:
    """Outer loop over sub-spaces, fresh inner algorithm per outer trial."""
    report, _ = _factorized(space, selector, outer, inner, oracle, aggregator,
                            timing, flow="factorized",
                            budgets={"outer_trials": outer.trials,
                                     "inner_trials": inner.trials})
    return report


def run_hybrid(space, selector: Selector, outer: SearchLoop, inner: SearchLoop,
               phase2_trials: int, oracle: RewardFn, aggregator=top5_average,
               timing: bool = False) -> FlowReport:
    """Factorized phase, then resume the best sub-space with its retained
    inner algorithm (population, bookkeeping and rng carry over)."""
    budgets = {"outer_trials": outer.trials, "inner_trials": inner.trials,
               "phase2_trials": phase2_trials}
    report, attempts = _factorized(space, selector, outer, inner, oracle,
                                   aggregator, timing, flow="hybrid", budgets=budgets)
    if phase2_trials <= 0 or not attempts:
        return report
    best = max(attempts, key=lambda a: (a["reward"], -a["outer_index"]))
    tracker = _Tracker("hybrid", budgets, outer.seed, resume_from=report)
    spec = abstract_search_space(to_symbolic(space))
    watch = _Stopwatch(timing)
    for index, (child, feedback) in enumerate(
            sample(best["sub_space"], best["algorithm"], budget=phase2_trials, reset=False)):
        full = merge_dna(spec, selector, best["outer_dna"], feedback.dna)
        reward, ms = watch.time(oracle, child, full)
        feedback(reward)
        tracker.record(outer.trials + index, None,
                       encode_dna(full, spec, validate=False), reward, ms)
    return tracker.report


def _factorized(space, selector, outer, inner, oracle, aggregator, timing,
                flow, budgets):
    space = to_symbolic(space)
    spec = abstract_search_space(space)
    tracker = _Tracker(flow, budgets, outer.seed)
    watch = _Stopwatch(timing)
    attempts = []
    outer_algorithm = outer.build()
    for outer_index, (sub_space, outer_feedback) in enumerate(
            sample(space, outer_algorithm, partition=selector, budget=outer.trials)):
        inner_algorithm = inner.build(outer_index)
        rewards = []
        for inner_index, (child, inner_feedback) in enumerate(
                sample(sub_space, inner_algorithm, budget=inner.trials)):
            full = merge_dna(spec, selector, outer_feedback.dna, inner_feedback.dna)
            reward, ms = watch.time(oracle, child, full)
            inner_feedback(reward)
            rewards.append(reward)
            tracker.record(outer_index, inner_index,
                           encode_dna(full, spec, validate=False), reward, ms)
        aggregate = aggregator(rewards)
        outer_feedback(aggregate)
        attempts.append({
            "outer_index": outer_index,
            "sub_space": sub_space,
            "outer_dna": outer_feedback.dna,
            "algorithm": inner_algorithm,
            "reward": aggregate,
        })
    return tracker.report, attempts


def _require_flat_partition(spec: DecisionSpec, fspec: DecisionSpec, selector: Selector):
    """Separate flow needs selected/complement groups with no cross-nesting;
    otherwise the complement inside selected candidates cannot be pivoted."""
    full_selected = [p for p in spec.points if selector(p)]
    flat = DecisionSpec(full_selected)
    if sum(1 for _ in iter_all_points(fspec.points)) != sum(1 for _ in iter_all_points(flat.points)):
        raise UnsupportedSpace(
            "separate flow requires every point nested under a selected point to be selected too"
        )


def _transplant_complement(space, spec: DecisionSpec, selector: Selector, pivot):
    """Space with every unselected top-level hyper node replaced by the pivot
    program's content at the same path."""
    pivot = to_symbolic(pivot)
    if not abstract_search_space(pivot).is_empty:
        raise UnsupportedSpace("pivot must be a deterministic child program")
    edits = {}
    for point in spec.points:
        if not selector(point):
            edits[point.id] = Set(clone(get(pivot, point.id)))
    result = rebind(space, edits) if edits else clone(space)
    validate_tree(result)
    return result
