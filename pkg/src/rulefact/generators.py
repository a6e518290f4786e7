"""Seeded constructors for the network families used in experiments.

All generators are pure functions of their parameters and the supplied
numpy ``Generator``; calling one twice with generators seeded alike gives
identical networks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Fact, Rule, RuleFactNetwork

RANDOM = "random"
PERFECT = "perfect"
FULLY_CONNECTED = "fully_connected"
DENSE = "dense"
LAYERED = "layered"

TOPOLOGY_KINDS = (RANDOM, PERFECT, FULLY_CONNECTED, DENSE, LAYERED)

DEFAULT_BOUNDARY_WIDTH = 5


class GenerationError(ValueError):
    """Requested network cannot be constructed from the given parameters."""


@dataclass(frozen=True)
class TopologySpec:
    """Parameters for one network family.

    kind "perfect" is structural sugar: it generates like "random" and
    signals to the harness that the oracle should share the structure.
    """

    kind: str
    n_facts: int | None = None
    n_rules: int | None = None
    density_pct: int | None = None
    depth: int | None = None
    interior_width: int | None = None
    boundary_width: int = DEFAULT_BOUNDARY_WIDTH

    def __post_init__(self) -> None:
        if self.kind not in TOPOLOGY_KINDS:
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.kind in (RANDOM, PERFECT):
            if self.n_facts is None or self.n_rules is None:
                raise ValueError(f"{self.kind} topology needs n_facts and n_rules")
        elif self.kind == FULLY_CONNECTED:
            if self.n_facts is None:
                raise ValueError("fully_connected topology needs n_facts")
        elif self.kind == DENSE:
            if self.n_facts is None or self.density_pct is None:
                raise ValueError("dense topology needs n_facts and density_pct")
            if not 1 <= self.density_pct <= 100:
                raise ValueError("density_pct must be in [1, 100]")
        elif self.kind == LAYERED:
            if self.depth is None or self.interior_width is None:
                raise ValueError("layered topology needs depth and interior_width")
            if self.depth < 2:
                raise ValueError("layered depth must be at least 2")
            if self.interior_width < 2 or self.boundary_width < 2:
                raise ValueError("layer widths must be at least 2")


def _draw_weights(rng: np.random.Generator) -> tuple[float, float]:
    # Uniform draws rescaled to sum 1; a double-zero draw has probability 0
    # but normalize_weights-style care is unnecessary here.
    a = float(rng.uniform())
    b = float(rng.uniform())
    total = a + b
    if total == 0.0:
        return 0.5, 0.5
    return a / total, b / total


def _draw_output(rng: np.random.Generator, n_facts: int, excluded: tuple[int, int]) -> int:
    candidates = [f for f in range(n_facts) if f not in excluded]
    return candidates[int(rng.integers(len(candidates)))]


def gen_random(n_facts: int, n_rules: int, rng: np.random.Generator) -> RuleFactNetwork:
    """Rules with random distinct inputs and a distinct random output.

    Duplicate triples (same unordered input pair and output) are rejected
    and redrawn, so construction fails upfront if more rules are requested
    than distinct triples exist.
    """
    if n_facts < 3:
        raise GenerationError("need at least 3 facts for a two-input rule")
    if n_rules < 1:
        raise GenerationError("need at least 1 rule")
    max_triples = n_facts * (n_facts - 1) // 2 * (n_facts - 2)
    if n_rules > max_triples:
        raise GenerationError(
            f"{n_rules} duplicate-free rules impossible with {n_facts} facts "
            f"(only {max_triples} distinct triples)"
        )

    rules: list[Rule] = []
    seen: set[tuple[int, int, int]] = set()
    while len(rules) < n_rules:
        pair = rng.choice(n_facts, size=2, replace=False)
        in1, in2 = int(pair[0]), int(pair[1])
        out = _draw_output(rng, n_facts, (in1, in2))
        key = (min(in1, in2), max(in1, in2), out)
        if key in seen:
            continue
        seen.add(key)
        w1, w2 = _draw_weights(rng)
        rules.append(Rule(len(rules), in1, in2, out, w1, w2))

    return RuleFactNetwork(facts=[Fact(i) for i in range(n_facts)], rules=rules)


def _rules_from_pairs(
    pairs: list[tuple[int, int]], n_facts: int, rng: np.random.Generator
) -> list[Rule]:
    rules = []
    for rule_id, (a, b) in enumerate(pairs):
        out = _draw_output(rng, n_facts, (a, b))
        w1, w2 = _draw_weights(rng)
        rules.append(Rule(rule_id, a, b, out, w1, w2))
    return rules


def gen_fully_connected(n_facts: int, rng: np.random.Generator) -> RuleFactNetwork:
    """One rule per unordered fact pair; the output is a random third fact."""
    if n_facts < 3:
        raise GenerationError("need at least 3 facts for a two-input rule")
    pairs = [(a, b) for a in range(n_facts) for b in range(a + 1, n_facts)]
    return RuleFactNetwork(
        facts=[Fact(i) for i in range(n_facts)],
        rules=_rules_from_pairs(pairs, n_facts, rng),
    )


def gen_dense(n_facts: int, density_pct: int, rng: np.random.Generator) -> RuleFactNetwork:
    """Like fully connected, but over a sampled fraction of the pair set."""
    if n_facts < 3:
        raise GenerationError("need at least 3 facts for a two-input rule")
    if not 1 <= density_pct <= 100:
        raise GenerationError("density_pct must be in [1, 100]")
    all_pairs = [(a, b) for a in range(n_facts) for b in range(a + 1, n_facts)]
    n_rules = density_pct * len(all_pairs) // 100
    if n_rules == 0:
        raise GenerationError(
            f"density {density_pct}% of {len(all_pairs)} pairs rounds down to 0 rules"
        )
    chosen = rng.choice(len(all_pairs), size=n_rules, replace=False)
    pairs = [all_pairs[int(i)] for i in chosen]
    return RuleFactNetwork(
        facts=[Fact(i) for i in range(n_facts)],
        rules=_rules_from_pairs(pairs, n_facts, rng),
    )


def _cyclic_pairs(width: int) -> list[tuple[int, int]]:
    # Width 2 would yield (0,1) and (1,0): the same unordered pair, which the
    # duplication ban forbids once both target one output. Keep the unique pair.
    if width == 2:
        return [(0, 1)]
    return [(i, (i + 1) % width) for i in range(width)]


def gen_layered(
    depth: int,
    interior_width: int,
    boundary_width: int = DEFAULT_BOUNDARY_WIDTH,
    rng: np.random.Generator | None = None,
) -> RuleFactNetwork:
    """Acyclic network with rules only between adjacent layers.

    Every node of layer L+1 is written by one rule per cyclically adjacent
    input pair of layer L, so each gap contributes width(L) * width(L+1)
    rules and every upstream node feeds every downstream node.
    """
    if rng is None:
        raise ValueError("gen_layered requires a seeded generator")
    if depth < 2:
        raise GenerationError("layered depth must be at least 2")
    if interior_width < 2 or boundary_width < 2:
        raise GenerationError("layer widths must be at least 2")

    widths = [boundary_width] + [interior_width] * (depth - 2) + [boundary_width]
    facts: list[Fact] = []
    layers: list[list[int]] = []
    for layer_index, width in enumerate(widths):
        ids = []
        for _ in range(width):
            fact = Fact(len(facts), layer=layer_index)
            facts.append(fact)
            ids.append(fact.id)
        layers.append(ids)

    rules: list[Rule] = []
    for upstream, downstream in zip(layers, layers[1:]):
        pairs = _cyclic_pairs(len(upstream))
        for out in downstream:
            for i, j in pairs:
                w1, w2 = _draw_weights(rng)
                rules.append(Rule(len(rules), upstream[i], upstream[j], out, w1, w2))

    return RuleFactNetwork(facts=facts, rules=rules)


def clone_structure_fresh_weights(
    network: RuleFactNetwork, rng: np.random.Generator
) -> RuleFactNetwork:
    """Copy facts and rule endpoints but redraw every rule's weights."""
    clone = network.copy()
    for rule in sorted(clone.rules, key=lambda r: r.id):
        rule.w1, rule.w2 = _draw_weights(rng)
    return clone


def build(spec: TopologySpec, rng: np.random.Generator) -> RuleFactNetwork:
    """Construct a network from a TopologySpec."""
    if spec.kind in (RANDOM, PERFECT):
        return gen_random(spec.n_facts, spec.n_rules, rng)
    if spec.kind == FULLY_CONNECTED:
        return gen_fully_connected(spec.n_facts, rng)
    if spec.kind == DENSE:
        return gen_dense(spec.n_facts, spec.density_pct, rng)
    if spec.kind == LAYERED:
        return gen_layered(spec.depth, spec.interior_width, spec.boundary_width, rng)
    raise ValueError(f"unknown topology kind {spec.kind!r}")
