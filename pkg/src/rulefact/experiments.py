"""Monte-Carlo harness: many seeded iterations per experimental condition.

Each iteration generates an oracle network standing in for ground truth
plus a trainee of the condition's topology, draws a random source/target
path, trains, and scores the trained network by the normalized gap
between both networks' target values on the canonical assignment
(source fixed at 0.99). Iterations that cannot produce a meaningful
score are excluded rather than scored:

* no directed source->target path in either network,
* the canonical evaluation changes nothing (nothing to train),
* an evaluation never settles within its pass cap,
* the oracle's output is zero (the normalized gap is undefined),

and active filtering may drop an iteration's network outright.

Every iteration derives its own generator from (master_seed, index), so
results are identical no matter how many workers share the load.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from multiprocessing import get_context

import numpy as np

from .generators import PERFECT, TopologySpec, build, clone_structure_fresh_weights, gen_random
from .network import NonConvergenceError, RuleFactNetwork, RunStatus, evaluate, reachable
from .training import TrainingConfig, canonical_assignment, difference_value, train

CLONE_OF_TRAINEE = "clone_of_trainee"

DEFAULT_CLASSIFICATION_THRESHOLD = 0.10


class RecordStatus(Enum):
    COMPLETED = "completed"
    EXCLUDED_NO_PATH = "excluded_no_path"
    EXCLUDED_IMMEDIATE = "excluded_immediate"
    EXCLUDED_NON_CONVERGING = "excluded_non_converging"
    EXCLUDED_ZERO_ORACLE = "excluded_zero_oracle"
    DROPPED = "dropped"


EXCLUSION_STATUSES = (
    RecordStatus.EXCLUDED_NO_PATH,
    RecordStatus.EXCLUDED_IMMEDIATE,
    RecordStatus.EXCLUDED_NON_CONVERGING,
    RecordStatus.EXCLUDED_ZERO_ORACLE,
)


@dataclass(frozen=True)
class OracleSpec:
    """Ground-truth network: independent random, or the trainee's structure."""

    kind: str = "random"
    n_facts: int | None = None
    n_rules: int | None = None

    def __post_init__(self) -> None:
        if self.kind == CLONE_OF_TRAINEE:
            return
        if self.kind != "random":
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if self.n_facts is None or self.n_rules is None:
            raise ValueError("random oracle needs n_facts and n_rules")


@dataclass(frozen=True)
class ConditionConfig:
    topology: TopologySpec
    oracle: OracleSpec
    training: TrainingConfig
    iterations: int = 1000
    master_seed: int = 0
    classification_threshold: float = DEFAULT_CLASSIFICATION_THRESHOLD

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if not 0.0 < self.classification_threshold < 1.0:
            raise ValueError("classification_threshold must be in (0, 1)")


@dataclass
class RunRecord:
    seed: int
    status: RecordStatus
    error: float | None = None
    rules_after_prune: int | None = None


@dataclass
class ConditionStats:
    """Aggregates over one condition's completed runs.

    mean/median cover completions only; the high/low split classifies a
    completion by whether its error exceeds the threshold. Averages of
    empty buckets are absent (None), not zero.
    """

    mean: float | None
    median: float | None
    av_high: float | None
    av_low: float | None
    ct_high: int
    ct_low: int
    completions: int
    dropped: int
    excluded: dict[str, int] = field(default_factory=dict)


def iteration_seed(master_seed: int, index: int) -> int:
    """Collapse (master seed, iteration index) into one integer seed."""
    return int(np.random.SeedSequence((master_seed, index)).generate_state(1, np.uint64)[0])


def _draw_endpoints(trainee: RuleFactNetwork, rng: np.random.Generator) -> tuple[int, int]:
    """Pick distinct source/target facts; layered networks sample the
    boundary layers, since interior-to-interior draws are mostly dead ends."""
    layers = [f.layer for f in trainee.facts]
    if any(layer is not None for layer in layers):
        last = max(layer for layer in layers if layer is not None)
        first_ids = [f.id for f in trainee.facts if f.layer == 0]
        last_ids = [f.id for f in trainee.facts if f.layer == last]
        source = first_ids[int(rng.integers(len(first_ids)))]
        target = last_ids[int(rng.integers(len(last_ids)))]
        return source, target
    n = len(trainee.facts)
    source = int(rng.integers(n))
    target = int(rng.integers(n))
    while target == source:
        target = int(rng.integers(n))
    return source, target


def run_iteration(config: ConditionConfig, seed: int) -> RunRecord:
    """One full generate/train/score cycle; a pure function of (config, seed)."""
    rng = np.random.default_rng(seed)

    if config.oracle.kind == CLONE_OF_TRAINEE or config.topology.kind == PERFECT:
        oracle_net = build(config.topology, rng)
        trainee = clone_structure_fresh_weights(oracle_net, rng)
    else:
        oracle_net = gen_random(config.oracle.n_facts, config.oracle.n_rules, rng)
        trainee = build(config.topology, rng)

    source, target = _draw_endpoints(trainee, rng)

    if not reachable(trainee, source, target) or not reachable(oracle_net, source, target):
        return RunRecord(seed, RecordStatus.EXCLUDED_NO_PATH)

    canonical = canonical_assignment(source)
    oracle_out = evaluate(oracle_net, canonical, target)
    if oracle_out.status is RunStatus.NON_CONVERGING:
        return RunRecord(seed, RecordStatus.EXCLUDED_NON_CONVERGING)
    trainee_out = evaluate(trainee, canonical, target)
    if trainee_out.status is RunStatus.NON_CONVERGING:
        return RunRecord(seed, RecordStatus.EXCLUDED_NON_CONVERGING)
    if (
        oracle_out.status is RunStatus.IMMEDIATE_COMPLETION
        or trainee_out.status is RunStatus.IMMEDIATE_COMPLETION
    ):
        return RunRecord(seed, RecordStatus.EXCLUDED_IMMEDIATE)
    if oracle_out.target_value == 0.0:
        return RunRecord(seed, RecordStatus.EXCLUDED_ZERO_ORACLE)

    try:
        trained, _, _ = train(oracle_net, trainee, config.training, source, target, rng)
    except NonConvergenceError:
        return RunRecord(seed, RecordStatus.EXCLUDED_NON_CONVERGING)

    if trained is None:
        return RunRecord(seed, RecordStatus.DROPPED, rules_after_prune=0)

    final = evaluate(trained, canonical, target)
    if final.status is RunStatus.NON_CONVERGING:
        return RunRecord(seed, RecordStatus.EXCLUDED_NON_CONVERGING)
    error = difference_value(oracle_out.target_value, final.target_value)
    return RunRecord(seed, RecordStatus.COMPLETED, error=error, rules_after_prune=len(trained.rules))


def classify_and_aggregate(records: list[RunRecord], threshold: float) -> ConditionStats:
    """Fold records into the per-condition statistics table row."""
    errors = [r.error for r in records if r.status is RecordStatus.COMPLETED]
    high = [e for e in errors if e > threshold]
    low = [e for e in errors if e <= threshold]
    excluded = {
        status.value: sum(1 for r in records if r.status is status)
        for status in EXCLUSION_STATUSES
    }
    return ConditionStats(
        mean=statistics.fmean(errors) if errors else None,
        median=statistics.median(errors) if errors else None,
        av_high=statistics.fmean(high) if high else None,
        av_low=statistics.fmean(low) if low else None,
        ct_high=len(high),
        ct_low=len(low),
        completions=len(errors),
        dropped=sum(1 for r in records if r.status is RecordStatus.DROPPED),
        excluded=excluded,
    )


def run_condition(
    config: ConditionConfig, workers: int = 1
) -> tuple[ConditionStats, list[RunRecord]]:
    """Run every iteration of a condition and aggregate the records.

    Iteration seeds are derived upfront, and record order follows the
    iteration index, so any worker count produces identical results.
    """
    seeds = [iteration_seed(config.master_seed, i) for i in range(config.iterations)]
    if workers <= 1:
        records = [run_iteration(config, seed) for seed in seeds]
    else:
        chunk = max(1, len(seeds) // (workers * 8))
        with get_context("spawn").Pool(processes=workers) as pool:
            records = pool.map(partial(run_iteration, config), seeds, chunksize=chunk)
    stats = classify_and_aggregate(records, config.classification_threshold)
    return stats, records
