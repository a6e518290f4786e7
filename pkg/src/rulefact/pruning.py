"""Rule removal: contribution thresholding, adaptive scan, active filter.

Contribution pruning drops rules below an influence threshold in one shot.
The adaptive pruner instead earns each removal: it suspends one rule at a
time, re-runs the trainee on the training assignment, and keeps the
removal only when the gap to the oracle's output did not grow. Removals
re-baseline the gap, so the scan is a greedy descent on the training-path
error. Active filtering then discards any network the scan emptied out.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .network import NonConvergenceError, RuleFactNetwork, RunStatus, settle
from .training import contributing_rules

CONTRIBUTION = "contribution"
ADAPTIVE = "adaptive"
PRUNE_KINDS = (CONTRIBUTION, ADAPTIVE)

ANY_FACT = "any_fact"
TARGET_FACT = "target_fact"
PRUNE_SCOPES = (ANY_FACT, TARGET_FACT)


class PruneVerdict(Enum):
    KEPT = "kept"
    DROPPED = "dropped"
    REVERTED_TO_PRE_PRUNE = "reverted_to_pre_prune"


@dataclass
class PruneConfig:
    kind: str
    prune_epoch: int
    threshold: float | None = None
    scope: str = TARGET_FACT
    active_filtering: bool = False

    def __post_init__(self) -> None:
        if self.kind not in PRUNE_KINDS:
            raise ValueError(f"unknown prune kind {self.kind!r}")
        if self.prune_epoch < 1:
            raise ValueError("prune_epoch must be at least 1")
        if self.kind == CONTRIBUTION:
            if self.threshold is None:
                raise ValueError("contribution pruning needs a threshold")
            if not 0.0 <= self.threshold <= 1.0:
                raise ValueError("threshold must be in [0, 1]")
            if self.scope not in PRUNE_SCOPES:
                raise ValueError(f"unknown prune scope {self.scope!r}")
            if self.active_filtering:
                raise ValueError("active filtering applies to adaptive pruning only")
        elif self.threshold is not None:
            raise ValueError("threshold applies to contribution pruning only")


@dataclass
class PruneReport:
    tested: int
    removed: int
    reinstated: int
    baseline_error: float | None
    final_error: float | None
    verdict: PruneVerdict = PruneVerdict.KEPT
    dangling_facts: tuple[int, ...] = ()


@dataclass
class FilterOutcome:
    verdict: PruneVerdict
    network: RuleFactNetwork | None


def _dangling_facts(network: RuleFactNetwork) -> tuple[int, ...]:
    touched = set()
    for rule in network.rules:
        touched.update((rule.input1, rule.input2, rule.output))
    return tuple(f.id for f in network.facts if f.id not in touched)


def contribution_prune(
    network: RuleFactNetwork, config: PruneConfig, target: int
) -> tuple[RuleFactNetwork, PruneReport]:
    """Drop every rule whose maximal contribution is zero or below threshold.

    Scope "target_fact" measures contribution toward ``target`` only;
    "any_fact" lets a rule survive if it clears the threshold toward at
    least one fact. Facts left without incident rules are retained and
    reported as dangling.
    """
    if config.kind != CONTRIBUTION:
        raise ValueError("contribution_prune needs a contribution PruneConfig")

    net = network.copy()
    if config.scope == TARGET_FACT:
        best = contributing_rules(net, target)
    else:
        best = {}
        for fact in net.facts:
            for rule_id, value in contributing_rules(net, fact.id).items():
                if value > best.get(rule_id, 0.0):
                    best[rule_id] = value

    survivors = [
        r
        for r in net.rules
        if best.get(r.id, 0.0) > 0.0 and best.get(r.id, 0.0) >= config.threshold
    ]
    removed = len(net.rules) - len(survivors)
    net.rules = survivors
    report = PruneReport(
        tested=removed + len(survivors),
        removed=removed,
        reinstated=0,
        baseline_error=None,
        final_error=None,
        dangling_facts=_dangling_facts(net),
    )
    return net, report


def adaptive_prune(
    trainee: RuleFactNetwork,
    oracle: RuleFactNetwork,
    assignment: dict[int, float],
    target: int,
) -> tuple[RuleFactNetwork, PruneReport]:
    """Greedy suspend-test-remove scan over every rule in ascending id order.

    The scan error is the absolute gap between the oracle's target value
    and the trainee's. A suspension that leaves the gap at or below the
    running baseline becomes a permanent removal and re-baselines the
    scan; one that widens the gap is reinstated. A non-converging
    evaluation aborts the scan with the caller's network untouched.
    """
    oracle_status, oracle_values, _ = settle(oracle, assignment)
    if oracle_status is RunStatus.NON_CONVERGING:
        raise NonConvergenceError("oracle network failed to settle for the prune baseline")
    oracle_value = oracle_values[target]

    net = trainee.copy()

    def scan_error() -> float:
        status, values, _ = settle(net, assignment)
        if status is RunStatus.NON_CONVERGING:
            raise NonConvergenceError("trainee failed to settle during the prune scan")
        return abs(oracle_value - values[target])

    baseline = scan_error()
    running = baseline
    removed_ids: set[int] = set()
    reinstated = 0
    scan_order = sorted(net.rules, key=lambda r: r.id)
    for rule in scan_order:
        was_suspended = rule.suspended
        rule.suspended = True
        error = scan_error()
        if error > running:
            rule.suspended = was_suspended
            reinstated += 1
        else:
            removed_ids.add(rule.id)
            running = error

    net.rules = [r for r in net.rules if r.id not in removed_ids]
    report = PruneReport(
        tested=len(scan_order),
        removed=len(removed_ids),
        reinstated=reinstated,
        baseline_error=baseline,
        final_error=running,
        dangling_facts=_dangling_facts(net),
    )
    return net, report


def apply_active_filter(
    pre_prune_snapshot: RuleFactNetwork,
    pruned: RuleFactNetwork,
    report: PruneReport,
    active_filtering: bool,
) -> FilterOutcome:
    """Decide what a fully emptied prune scan means for the run.

    A pruned network with at least one live rule is kept. An emptied one
    is dropped under active filtering; without filtering the pre-prune
    snapshot is used instead.
    """
    if any(not r.suspended for r in pruned.rules):
        report.verdict = PruneVerdict.KEPT
        return FilterOutcome(PruneVerdict.KEPT, pruned)
    if active_filtering:
        report.verdict = PruneVerdict.DROPPED
        return FilterOutcome(PruneVerdict.DROPPED, None)
    report.verdict = PruneVerdict.REVERTED_TO_PRE_PRUNE
    return FilterOutcome(PruneVerdict.REVERTED_TO_PRE_PRUNE, pre_prune_snapshot)
