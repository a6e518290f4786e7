"""Rule-fact networks and the forward-chaining evaluation engine.

A network couples facts, which hold partial-membership values in [0, 1],
with two-input weighted rules.  A rule firing writes a convex combination
of its input values to its output fact::

    candidate = w1 * value(input1) + w2 * value(input2)

with ``w1 + w2 = 1``, so no firing can ever push a fact outside [0, 1].

Evaluation sweeps all non-suspended rules in ascending rule-id order,
writing each candidate immediately (later rules in the same sweep see
earlier writes).  Sweeps repeat until one leaves every fact's value where
it started (within ``change_epsilon``), or until ``pass_cap`` sweeps have
run, which flags the run as non-converging.  Facts named in the run's
assignment are pinned: they keep their assigned value for the whole run
and rule writes to them are discarded.  All other facts start at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


#: Tolerance on |w1 + w2 - 1| before a rule counts as mis-weighted.
WEIGHT_SUM_TOLERANCE = 1e-9

#: Default per-fact net change below which a sweep counts as quiet.
DEFAULT_CHANGE_EPSILON = 1e-9

#: Default pass cap is this many sweeps per rule in the network.
PASS_CAP_PER_RULE = 100

# Slack allowed on a firing before the engine declares the network corrupt.
_FIRING_RANGE_SLACK = 1e-6


class RunStatus(Enum):
    """Terminal status of one evaluation run."""

    COMPLETED = "completed"
    IMMEDIATE_COMPLETION = "immediate_completion"
    NON_CONVERGING = "non_converging"


class NonConvergenceError(RuntimeError):
    """An evaluation required by training or pruning failed to settle."""


@dataclass
class Fact:
    """A node holding a partial-membership value.

    ``layer`` is populated only by the layered generator and records which
    layer the fact belongs to (0 = input layer).
    """

    id: int
    value: float = 0.0
    label: str | None = None
    layer: int | None = None


@dataclass
class Rule:
    """A weighted association: output <- w1 * input1 + w2 * input2.

    Suspended rules are skipped by evaluation; suspension is how the
    adaptive pruner tests a rule's removal without committing to it.
    """

    id: int
    input1: int
    input2: int
    output: int
    w1: float
    w2: float
    suspended: bool = False
    label: str | None = None


@dataclass
class RuleFactNetwork:
    """An ordered collection of facts and rules.

    Fact ids are dense and contiguous from 0, so ``facts[i].id == i``.
    Rule ids are unique but may become non-contiguous once rules are
    pruned away.
    """

    facts: list[Fact] = field(default_factory=list)
    rules: list[Rule] = field(default_factory=list)

    def copy(self) -> RuleFactNetwork:
        return RuleFactNetwork(
            facts=[Fact(f.id, f.value, f.label, f.layer) for f in self.facts],
            rules=[
                Rule(r.id, r.input1, r.input2, r.output, r.w1, r.w2, r.suspended, r.label)
                for r in self.rules
            ],
        )

    def fact_count(self) -> int:
        return len(self.facts)

    def rule_by_id(self) -> dict[int, Rule]:
        return {r.id: r for r in self.rules}

    def pure_input_fact_ids(self) -> list[int]:
        """Facts that are no rule's output; these can only be set externally."""
        written = {r.output for r in self.rules}
        return [f.id for f in self.facts if f.id not in written]


@dataclass
class RunOutcome:
    """Result of evaluating a network for one target fact."""

    status: RunStatus
    target_value: float
    passes: int


@dataclass
class ValidationReport:
    """Every invariant violation found in a network; empty means well-formed."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def normalize_weights(w1: float, w2: float) -> tuple[float, float]:
    """Clamp both weights to [0, 1], then scale so they sum to 1.

    If both clamp to zero there is nothing to scale, so the pair resets
    to the neutral (0.5, 0.5).
    """
    w1 = min(1.0, max(0.0, w1))
    w2 = min(1.0, max(0.0, w2))
    total = w1 + w2
    if total == 0.0:
        return 0.5, 0.5
    return w1 / total, w2 / total


def renormalize(rule: Rule) -> Rule:
    """Return a copy of ``rule`` with weights clamped and rescaled to sum 1."""
    w1, w2 = normalize_weights(rule.w1, rule.w2)
    return Rule(rule.id, rule.input1, rule.input2, rule.output, w1, w2, rule.suspended, rule.label)


def validate(network: RuleFactNetwork) -> ValidationReport:
    """Check every structural invariant; violations are data, not faults."""
    violations: list[str] = []
    n = len(network.facts)

    for position, fact in enumerate(network.facts):
        if fact.id != position:
            violations.append(
                f"fact ids not contiguous from 0: position {position} holds id {fact.id}"
            )
        if not 0.0 <= fact.value <= 1.0:
            violations.append(f"fact {fact.id}: value {fact.value} outside [0, 1]")

    seen_rule_ids: set[int] = set()
    seen_triples: set[tuple[int, int, int]] = set()
    for rule in network.rules:
        if rule.id in seen_rule_ids:
            violations.append(f"duplicate rule id {rule.id}")
        seen_rule_ids.add(rule.id)

        for endpoint, name in ((rule.input1, "input1"), (rule.input2, "input2"), (rule.output, "output")):
            if not 0 <= endpoint < n:
                violations.append(f"rule {rule.id}: dangling {name} fact id {endpoint}")
        if rule.input1 == rule.input2:
            violations.append(f"rule {rule.id}: self-loop, input1 == input2 == {rule.input1}")
        if rule.output in (rule.input1, rule.input2):
            violations.append(f"rule {rule.id}: self-loop, output {rule.output} is also an input")

        if not 0.0 <= rule.w1 <= 1.0 or not 0.0 <= rule.w2 <= 1.0:
            violations.append(f"rule {rule.id}: weight outside [0, 1] ({rule.w1}, {rule.w2})")
        if abs(rule.w1 + rule.w2 - 1.0) > WEIGHT_SUM_TOLERANCE:
            violations.append(f"rule {rule.id}: weight sum != 1 ({rule.w1} + {rule.w2})")

        lo, hi = min(rule.input1, rule.input2), max(rule.input1, rule.input2)
        triple = (lo, hi, rule.output)
        if triple in seen_triples:
            violations.append(
                f"duplicate rule: inputs {{{lo}, {hi}}} -> output {rule.output} appears twice"
            )
        seen_triples.add(triple)

    return ValidationReport(violations)


def default_pass_cap(network: RuleFactNetwork) -> int:
    return PASS_CAP_PER_RULE * max(1, len(network.rules))


def settle(
    network: RuleFactNetwork,
    assignment: dict[int, float],
    change_epsilon: float = DEFAULT_CHANGE_EPSILON,
    pass_cap: int | None = None,
) -> tuple[RunStatus, list[float], int]:
    """Run sweeps to a fixpoint and return (status, final values, passes).

    This is the engine behind :func:`evaluate`; callers that need the whole
    final value vector (training, pruning) use it directly.
    """
    n_facts = len(network.facts)
    values = [0.0] * n_facts
    for fact_id, value in assignment.items():
        if not 0 <= fact_id < n_facts:
            raise ValueError(f"unknown fact id {fact_id} in assignment")
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"assignment value {value} for fact {fact_id} outside [0, 1]")
        values[fact_id] = float(value)

    if pass_cap is None:
        pass_cap = default_pass_cap(network)
    if pass_cap < 1:
        raise ValueError("pass_cap must be at least 1")

    pinned = set(assignment)
    compiled = [
        (r.w1, r.input1, r.w2, r.input2, r.output)
        for r in sorted(network.rules, key=lambda r: r.id)
        if not r.suspended and r.output not in pinned
    ]

    passes = 0
    while passes < pass_cap:
        passes += 1
        before = values.copy()
        for w1, in1, w2, in2, out in compiled:
            candidate = w1 * values[in1] + w2 * values[in2]
            if candidate < 0.0 or candidate > 1.0:
                if candidate < -_FIRING_RANGE_SLACK or candidate > 1.0 + _FIRING_RANGE_SLACK:
                    raise ValueError(
                        f"firing produced {candidate}, outside [0, 1]; network weights are corrupt"
                    )
                candidate = 0.0 if candidate < 0.0 else 1.0
            values[out] = candidate
        quiet = True
        for fact_id in range(n_facts):
            delta = values[fact_id] - before[fact_id]
            if delta > change_epsilon or delta < -change_epsilon:
                quiet = False
                break
        if quiet:
            status = RunStatus.IMMEDIATE_COMPLETION if passes == 1 else RunStatus.COMPLETED
            return status, values, passes
    return RunStatus.NON_CONVERGING, values, passes


def evaluate(
    network: RuleFactNetwork,
    assignment: dict[int, float],
    target: int,
    change_epsilon: float = DEFAULT_CHANGE_EPSILON,
    pass_cap: int | None = None,
) -> RunOutcome:
    """Evaluate the network on ``assignment`` and report the target's value."""
    if not 0 <= target < len(network.facts):
        raise ValueError(f"unknown target fact id {target}")
    status, values, passes = settle(network, assignment, change_epsilon, pass_cap)
    return RunOutcome(status=status, target_value=values[target], passes=passes)


def reachable(network: RuleFactNetwork, source: int, target: int) -> bool:
    """True iff a directed path of rule input->output edges links source to target."""
    n = len(network.facts)
    if not 0 <= source < n:
        raise ValueError(f"unknown source fact id {source}")
    if not 0 <= target < n:
        raise ValueError(f"unknown target fact id {target}")

    downstream: dict[int, list[int]] = {}
    for rule in network.rules:
        if rule.suspended:
            continue
        downstream.setdefault(rule.input1, []).append(rule.output)
        downstream.setdefault(rule.input2, []).append(rule.output)

    seen = {source}
    frontier = [source]
    while frontier:
        fact = frontier.pop()
        for nxt in downstream.get(fact, ()):
            if nxt == target:
                return True
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False
