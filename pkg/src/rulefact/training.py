"""Single-path gradient training of a rule-fact network against an oracle.

Each epoch runs both networks on the same assignment, compares the target
values, and spreads a correcting step across the trainee's rules in
proportion to how much each one can influence the target:

* a rule's contribution is its own largest weight times the product of
  the weights its influence passes through on the strongest directed
  path to the target (only the maximum over paths is kept);
* contributions are normalized into shares, and each rule's step is
  ``share * velocity * difference``;
* the step shifts weight toward the rule's larger-valued input when the
  trainee undershoots the oracle, away from it when the trainee
  overshoots, and does nothing on tied input values.

Two assignment regimes exist: "same_facts" pins the path source at 0.99
every epoch, while "random_facts" redraws uniform values for every pure
input fact of both networks each epoch (both networks see the same draw).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .network import (
    NonConvergenceError,
    RuleFactNetwork,
    RunStatus,
    normalize_weights,
    reachable,
    settle,
)

if TYPE_CHECKING:  # circular at runtime: pruning consumes difference_value
    from .pruning import PruneReport

#: Value assigned to the path source in the canonical evaluation.
CANONICAL_SOURCE_VALUE = 0.99

SAME_FACTS = "same_facts"
RANDOM_FACTS = "random_facts"
APPROACHES = (SAME_FACTS, RANDOM_FACTS)

#: Per-rule maximal influence toward a target fact, keyed by rule id.
ContributionMap = dict[int, float]


@dataclass
class TrainingConfig:
    approach: str = SAME_FACTS
    epochs: int = 100
    velocity: float = 0.1
    prune: "PruneConfig | None" = None

    def __post_init__(self) -> None:
        if self.approach not in APPROACHES:
            raise ValueError(f"unknown training approach {self.approach!r}")
        if not 0.0 < self.velocity <= 1.0:
            raise ValueError("velocity must be in (0, 1]")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.prune is not None and not self.prune.prune_epoch < self.epochs:
            raise ValueError("prune_epoch must be smaller than the epoch count")


@dataclass
class EpochRecord:
    """Both networks' target values and their normalized difference."""

    epoch: int
    oracle_value: float
    trainee_value: float
    difference: float


def canonical_assignment(source: int) -> dict[int, float]:
    return {source: CANONICAL_SOURCE_VALUE}


def difference_value(oracle_value: float, trainee_value: float) -> float:
    """Normalized gap |a - b| / max(a, b), guarded to 0 when both are 0."""
    top = max(oracle_value, trainee_value)
    if top == 0.0:
        return 0.0
    return abs(oracle_value - trainee_value) / top


def contributing_rules(network: RuleFactNetwork, target: int) -> ContributionMap:
    """Map each rule on a directed path into ``target`` to its contribution.

    A rule's contribution along one path is its own larger weight times the
    product, over every downstream rule the path passes through, of that
    rule's weight on the entry input. Only the largest value over all paths
    is kept. Rules with no path to the target are absent from the map.
    """
    if not 0 <= target < len(network.facts):
        raise ValueError(f"unknown target fact id {target}")

    active = [r for r in network.rules if not r.suspended]
    writers: dict[int, list] = {}
    for rule in active:
        writers.setdefault(rule.output, []).append(rule)

    # Backward structural closure from the target.
    member: dict[int, object] = {}
    needed = {target}
    frontier = [target]
    while frontier:
        fact = frontier.pop()
        for rule in writers.get(fact, ()):
            if rule.id in member:
                continue
            member[rule.id] = rule
            for upstream in (rule.input1, rule.input2):
                if upstream not in needed:
                    needed.add(upstream)
                    frontier.append(upstream)
    if not member:
        return {}

    member_rules = sorted(member.values(), key=lambda r: r.id)

    # consumers[fact] = (rule, weight on the input that fact enters through)
    consumers: dict[int, list] = {}
    for rule in member_rules:
        consumers.setdefault(rule.input1, []).append((rule.id, rule.w1))
        consumers.setdefault(rule.input2, []).append((rule.id, rule.w2))

    # Best downstream entry-weight product per rule, relaxed to a fixpoint.
    # The optimum follows a simple path, so len(member) sweeps suffice.
    downstream = {rule.id: 1.0 if rule.output == target else 0.0 for rule in member_rules}
    for _ in range(len(member_rules)):
        changed = False
        for rule in member_rules:
            best = downstream[rule.id]
            for consumer_id, entry_weight in consumers.get(rule.output, ()):
                candidate = entry_weight * downstream[consumer_id]
                if candidate > best:
                    best = candidate
            if best > downstream[rule.id]:
                downstream[rule.id] = best
                changed = True
        if not changed:
            break

    return {rule.id: max(rule.w1, rule.w2) * downstream[rule.id] for rule in member_rules}


def rule_share(contributions: ContributionMap) -> dict[int, float]:
    """Normalize contributions so shares sum to 1; empty when all are zero."""
    total = sum(contributions.values())
    if total == 0.0:
        return {}
    return {rule_id: value / total for rule_id, value in contributions.items()}


def weight_delta(share: float, velocity: float, difference: float) -> float:
    return share * velocity * difference


def apply_epoch(
    oracle: RuleFactNetwork,
    trainee: RuleFactNetwork,
    assignment: dict[int, float],
    target: int,
    velocity: float,
    epoch: int = 0,
) -> EpochRecord:
    """Run one training epoch, updating the trainee's weights in place."""
    oracle_status, oracle_values, _ = settle(oracle, assignment)
    if oracle_status is RunStatus.NON_CONVERGING:
        raise NonConvergenceError(f"oracle network failed to settle in epoch {epoch}")
    trainee_status, trainee_values, _ = settle(trainee, assignment)
    if trainee_status is RunStatus.NON_CONVERGING:
        raise NonConvergenceError(f"trainee network failed to settle in epoch {epoch}")

    oracle_value = oracle_values[target]
    trainee_value = trainee_values[target]
    difference = difference_value(oracle_value, trainee_value)
    record = EpochRecord(epoch, oracle_value, trainee_value, difference)
    if difference == 0.0:
        return record

    shares = rule_share(contributing_rules(trainee, target))
    if not shares:
        return record

    rules = trainee.rule_by_id()
    undershooting = trainee_value < oracle_value
    for rule_id in sorted(shares):
        rule = rules[rule_id]
        delta = weight_delta(shares[rule_id], velocity, difference)
        if delta == 0.0:
            continue
        v1 = trainee_values[rule.input1]
        v2 = trainee_values[rule.input2]
        if v1 == v2:
            continue
        if (v1 > v2) == undershooting:
            rule.w1 += delta
            rule.w2 -= delta
        else:
            rule.w1 -= delta
            rule.w2 += delta
        rule.w1, rule.w2 = normalize_weights(rule.w1, rule.w2)
    return record


def _random_inputs(
    oracle: RuleFactNetwork, trainee: RuleFactNetwork, rng: np.random.Generator
) -> dict[int, float]:
    if len(oracle.facts) != len(trainee.facts):
        raise ValueError("random-facts training needs both networks on one fact id space")
    shared = sorted(set(oracle.pure_input_fact_ids()) | set(trainee.pure_input_fact_ids()))
    return {fact_id: float(rng.random()) for fact_id in shared}


def train(
    oracle: RuleFactNetwork,
    trainee: RuleFactNetwork,
    config: TrainingConfig,
    source: int,
    target: int,
    rng: np.random.Generator,
) -> tuple[RuleFactNetwork | None, list[EpochRecord], "PruneReport | None"]:
    """Train a copy of ``trainee`` against the oracle along (source, target).

    Returns the surviving network, the per-epoch trace, and the prune
    report when pruning ran. The network is None when active filtering
    dropped it. The oracle is never modified; the passed trainee isn't
    either (training operates on a copy).
    """
    from .pruning import ADAPTIVE, PruneVerdict, adaptive_prune, apply_active_filter, contribution_prune

    if not reachable(trainee, source, target):
        raise ValueError(f"target {target} unreachable from source {source} in trainee")
    if not reachable(oracle, source, target):
        raise ValueError(f"target {target} unreachable from source {source} in oracle")

    net = trainee.copy()
    canonical = canonical_assignment(source)
    trace: list[EpochRecord] = []
    report = None

    for epoch in range(1, config.epochs + 1):
        if config.approach == RANDOM_FACTS:
            assignment = _random_inputs(oracle, net, rng)
        else:
            assignment = canonical
        trace.append(apply_epoch(oracle, net, assignment, target, config.velocity, epoch=epoch))

        if config.prune is not None and epoch == config.prune.prune_epoch:
            snapshot = net.copy()
            if config.prune.kind == ADAPTIVE:
                pruned, report = adaptive_prune(net, oracle, canonical, target)
                outcome = apply_active_filter(snapshot, pruned, report, config.prune.active_filtering)
                if outcome.verdict is PruneVerdict.DROPPED:
                    return None, trace, report
                net = outcome.network
            else:
                net, report = contribution_prune(net, config.prune, target)

    return net, trace, report
