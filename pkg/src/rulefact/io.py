"""File formats and reporters.

Everything on disk is JSON or CSV. Network and annotation documents carry
a format tag; suite files use a strict, documented key set and reject
anything they don't know, naming the offending key.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass
from pathlib import Path

from .experiments import (
    CLONE_OF_TRAINEE,
    ConditionConfig,
    ConditionStats,
    EXCLUSION_STATUSES,
    OracleSpec,
    RecordStatus,
    RunRecord,
    run_condition,
)
from .generators import TopologySpec
from .network import Fact, Rule, RuleFactNetwork, validate
from .pruning import PruneConfig
from .training import TrainingConfig

NETWORK_FORMAT = "rulefact-network/1"
ANNOTATION_FORMAT = "rulefact-annotations/1"

DISPOSITIONS = ("", "functional", "meaningful", "remove")

SUMMARY_COLUMNS = (
    "condition",
    "mean",
    "median",
    "av_high",
    "av_low",
    "ct_high",
    "ct_low",
    "completions",
    "dropped",
    "excluded_no_path",
    "excluded_immediate",
    "excluded_non_converging",
    "excluded_zero_oracle",
)


class FormatError(ValueError):
    """A document on disk does not match its declared format."""


class SuiteError(ValueError):
    """A suite file is malformed or violates a config invariant."""


# ---------------------------------------------------------------------------
# network files


def network_to_dict(network: RuleFactNetwork) -> dict:
    return {
        "format": NETWORK_FORMAT,
        "facts": [
            {"id": f.id, "value": f.value, "label": f.label, "layer": f.layer}
            for f in network.facts
        ],
        "rules": [
            {
                "id": r.id,
                "input1": r.input1,
                "input2": r.input2,
                "output": r.output,
                "w1": r.w1,
                "w2": r.w2,
                "suspended": r.suspended,
                "label": r.label,
            }
            for r in network.rules
        ],
    }


def _check_keys(entry: dict, allowed: set[str], where: str) -> None:
    for key in entry:
        if key not in allowed:
            raise FormatError(f'unknown key "{key}" in {where}')


def network_from_dict(document: dict) -> RuleFactNetwork:
    if not isinstance(document, dict) or document.get("format") != NETWORK_FORMAT:
        raise FormatError(f"not a {NETWORK_FORMAT} document")
    _check_keys(document, {"format", "facts", "rules"}, "network document")
    facts = []
    for entry in document.get("facts", []):
        _check_keys(entry, {"id", "value", "label", "layer"}, f"fact entry {entry.get('id')}")
        facts.append(
            Fact(int(entry["id"]), float(entry.get("value", 0.0)), entry.get("label"), entry.get("layer"))
        )
    rules = []
    for entry in document.get("rules", []):
        _check_keys(
            entry,
            {"id", "input1", "input2", "output", "w1", "w2", "suspended", "label"},
            f"rule entry {entry.get('id')}",
        )
        rules.append(
            Rule(
                int(entry["id"]),
                int(entry["input1"]),
                int(entry["input2"]),
                int(entry["output"]),
                float(entry["w1"]),
                float(entry["w2"]),
                bool(entry.get("suspended", False)),
                entry.get("label"),
            )
        )
    network = RuleFactNetwork(facts=facts, rules=rules)
    report = validate(network)
    if not report.ok:
        raise FormatError("network file violates invariants: " + "; ".join(report.violations))
    return network


def save_network(network: RuleFactNetwork, path: str | Path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(network), indent=2) + "\n")


def load_network(path: str | Path) -> RuleFactNetwork:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"network file not found: {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"network file {path} is not valid JSON: {exc}") from exc
    return network_from_dict(document)


# ---------------------------------------------------------------------------
# annotations


def export_annotations(network: RuleFactNetwork, reference: str = "") -> dict:
    """List every fact and rule with an empty disposition for human review."""
    return {
        "format": ANNOTATION_FORMAT,
        "network": reference,
        "facts": [{"id": f.id, "label": f.label or "", "disposition": ""} for f in network.facts],
        "rules": [{"id": r.id, "label": r.label or "", "disposition": ""} for r in network.rules],
    }


def import_annotations(network: RuleFactNetwork, document: dict) -> RuleFactNetwork:
    """Apply labels and removals from an annotation document.

    Rules disposed "remove" are deleted. Facts disposed "remove" are
    deleted too, with surviving fact ids compacted; a surviving rule that
    still references a removed fact fails validation.
    """
    if not isinstance(document, dict) or document.get("format") != ANNOTATION_FORMAT:
        raise FormatError(f"not an {ANNOTATION_FORMAT} document")
    _check_keys(document, {"format", "network", "facts", "rules"}, "annotation document")

    net = network.copy()
    facts_by_id = {f.id: f for f in net.facts}
    rules_by_id = net.rule_by_id()

    removed_facts: set[int] = set()
    for entry in document.get("facts", []):
        _check_keys(entry, {"id", "label", "disposition"}, f"fact annotation {entry.get('id')}")
        fact = facts_by_id.get(int(entry["id"]))
        if fact is None:
            raise FormatError(f"annotation refers to unknown fact id {entry['id']}")
        disposition = entry.get("disposition", "")
        if disposition not in DISPOSITIONS:
            raise FormatError(f'unknown disposition "{disposition}" on fact {fact.id}')
        if entry.get("label"):
            fact.label = entry["label"]
        if disposition == "remove":
            removed_facts.add(fact.id)

    removed_rules: set[int] = set()
    for entry in document.get("rules", []):
        _check_keys(entry, {"id", "label", "disposition"}, f"rule annotation {entry.get('id')}")
        rule = rules_by_id.get(int(entry["id"]))
        if rule is None:
            raise FormatError(f"annotation refers to unknown rule id {entry['id']}")
        disposition = entry.get("disposition", "")
        if disposition not in DISPOSITIONS:
            raise FormatError(f'unknown disposition "{disposition}" on rule {rule.id}')
        if entry.get("label"):
            rule.label = entry["label"]
        if disposition == "remove":
            removed_rules.add(rule.id)

    net.rules = [r for r in net.rules if r.id not in removed_rules]
    if removed_facts:
        survivors = [f for f in net.facts if f.id not in removed_facts]
        remap = {fact.id: position for position, fact in enumerate(survivors)}
        for rule in net.rules:
            for endpoint in (rule.input1, rule.input2, rule.output):
                if endpoint in removed_facts:
                    raise FormatError(
                        f"rule {rule.id} still references removed fact {endpoint}"
                    )
            rule.input1 = remap[rule.input1]
            rule.input2 = remap[rule.input2]
            rule.output = remap[rule.output]
        for fact in survivors:
            fact.id = remap[fact.id]
        net.facts = survivors

    report = validate(net)
    if not report.ok:
        raise FormatError("annotated network violates invariants: " + "; ".join(report.violations))
    return net


def save_annotations(document: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(document, indent=2) + "\n")


def load_annotations(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"annotation file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"annotation file {path} is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# DOT export


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(network: RuleFactNetwork, path: str | Path | None = None) -> str:
    """Render the network as a DOT digraph; rule nodes sit between facts.

    Returns the DOT text and, when a path is given, writes it there too.
    Suspended rules and their edges are dashed.
    """
    lines = ["digraph rulefact {", "  rankdir=LR;"]
    for fact in network.facts:
        label = f"f{fact.id}"
        if fact.label:
            label += f"\\n{fact.label}"
        label += f"\\nvalue={fact.value:.3f}"
        lines.append(f"  f{fact.id} [shape=ellipse, label={_dot_quote(label)}];")
    for rule in network.rules:
        label = f"r{rule.id}\\n({rule.w1:.3f}, {rule.w2:.3f})"
        if rule.label:
            label += f"\\n{rule.label}"
        style = ", style=dashed" if rule.suspended else ""
        lines.append(f"  r{rule.id} [shape=box, label={_dot_quote(label)}{style}];")
        edge_style = " [style=dashed]" if rule.suspended else ""
        lines.append(f"  f{rule.input1} -> r{rule.id}{edge_style};")
        lines.append(f"  f{rule.input2} -> r{rule.id}{edge_style};")
        lines.append(f"  r{rule.id} -> f{rule.output}{edge_style};")
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# suite files


@dataclass
class ExperimentSuite:
    name: str
    output_dir: str
    conditions: list[tuple[str, ConditionConfig]]


_TOPOLOGY_KEYS = {"kind", "n_facts", "n_rules", "density_pct", "depth", "interior_width", "boundary_width"}
_PRUNE_KEYS = {"kind", "prune_epoch", "threshold", "scope", "active_filtering"}
_CONDITION_KEYS = {
    "name",
    "topology",
    "oracle",
    "approach",
    "epochs",
    "velocity",
    "prune",
    "iterations",
    "master_seed",
    "classification_threshold",
}
_SUITE_KEYS = {"suite", "output_dir", "conditions"}


def _parse_topology(entry: dict, where: str) -> TopologySpec:
    if not isinstance(entry, dict):
        raise SuiteError(f"topology of {where} must be an object")
    for key in entry:
        if key not in _TOPOLOGY_KEYS:
            raise SuiteError(f'unknown key "{key}" in topology of {where}')
    if "kind" not in entry:
        raise SuiteError(f'topology of {where} needs a "kind"')
    try:
        return TopologySpec(**entry)
    except ValueError as exc:
        raise SuiteError(f"bad topology in {where}: {exc}") from exc


def _parse_oracle(entry, where: str) -> OracleSpec:
    if entry == CLONE_OF_TRAINEE:
        return OracleSpec(kind=CLONE_OF_TRAINEE)
    if not isinstance(entry, dict):
        raise SuiteError(f'oracle of {where} must be "{CLONE_OF_TRAINEE}" or an object')
    for key in entry:
        if key not in {"n_facts", "n_rules"}:
            raise SuiteError(f'unknown key "{key}" in oracle of {where}')
    try:
        return OracleSpec(kind="random", **entry)
    except ValueError as exc:
        raise SuiteError(f"bad oracle in {where}: {exc}") from exc


def _parse_prune(entry, where: str) -> PruneConfig | None:
    if entry is None:
        return None
    if not isinstance(entry, dict):
        raise SuiteError(f"prune of {where} must be null or an object")
    for key in entry:
        if key not in _PRUNE_KEYS:
            raise SuiteError(f'unknown key "{key}" in prune of {where}')
    try:
        return PruneConfig(**entry)
    except (TypeError, ValueError) as exc:
        raise SuiteError(f"bad prune config in {where}: {exc}") from exc


def _parse_condition(entry: dict, position: int) -> tuple[str, ConditionConfig]:
    if not isinstance(entry, dict):
        raise SuiteError(f"condition #{position} must be an object")
    name = entry.get("name")
    if not name or not isinstance(name, str):
        raise SuiteError(f'condition #{position} needs a non-empty "name"')
    where = f'condition "{name}"'
    for key in entry:
        if key not in _CONDITION_KEYS:
            raise SuiteError(f'unknown key "{key}" in {where}')
    for required in ("topology", "oracle", "epochs", "velocity", "master_seed"):
        if required not in entry:
            raise SuiteError(f'{where} is missing "{required}"')

    topology = _parse_topology(entry["topology"], where)
    oracle = _parse_oracle(entry["oracle"], where)
    prune = _parse_prune(entry.get("prune"), where)
    try:
        training = TrainingConfig(
            approach=entry.get("approach", "same_facts"),
            epochs=int(entry["epochs"]),
            velocity=float(entry["velocity"]),
            prune=prune,
        )
        config = ConditionConfig(
            topology=topology,
            oracle=oracle,
            training=training,
            iterations=int(entry.get("iterations", 1000)),
            master_seed=int(entry["master_seed"]),
            classification_threshold=float(entry.get("classification_threshold", 0.10)),
        )
    except ValueError as exc:
        raise SuiteError(f"bad {where}: {exc}") from exc
    return name, config


def parse_suite(path: str | Path) -> ExperimentSuite:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"suite file not found: {path}")
    text = path.read_text()
    if not text.strip():
        raise SuiteError(f"suite file {path} is empty")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SuiteError(f"suite file {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SuiteError("suite document must be a JSON object")
    for key in document:
        if key not in _SUITE_KEYS:
            raise SuiteError(f'unknown key "{key}" in suite document')
    name = document.get("suite")
    if not name or not isinstance(name, str):
        raise SuiteError('suite document needs a non-empty "suite" name')
    output_dir = document.get("output_dir", "results")
    entries = document.get("conditions")
    if not isinstance(entries, list) or not entries:
        raise SuiteError("suite document needs a non-empty conditions list")

    conditions = [_parse_condition(entry, i) for i, entry in enumerate(entries)]
    names = [n for n, _ in conditions]
    for n in names:
        if names.count(n) > 1:
            raise SuiteError(f'duplicate condition name "{n}"')
    return ExperimentSuite(name=name, output_dir=output_dir, conditions=conditions)


# ---------------------------------------------------------------------------
# reporters


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def stats_row(name: str, stats: ConditionStats) -> dict[str, str]:
    row = {
        "condition": name,
        "mean": _fmt(stats.mean),
        "median": _fmt(stats.median),
        "av_high": _fmt(stats.av_high),
        "av_low": _fmt(stats.av_low),
        "ct_high": str(stats.ct_high),
        "ct_low": str(stats.ct_low),
        "completions": str(stats.completions),
        "dropped": str(stats.dropped),
    }
    for status in EXCLUSION_STATUSES:
        row[status.value] = str(stats.excluded.get(status.value, 0))
    return row


def write_summary_csv(rows: list[dict[str, str]], path: str | Path) -> None:
    buffer = _io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    Path(path).write_text(buffer.getvalue())


def format_summary_table(rows: list[dict[str, str]]) -> str:
    widths = {
        col: max(len(col), *(len(row[col]) for row in rows)) if rows else len(col)
        for col in SUMMARY_COLUMNS
    }
    header = "  ".join(col.ljust(widths[col]) for col in SUMMARY_COLUMNS)
    ruler = "  ".join("-" * widths[col] for col in SUMMARY_COLUMNS)
    body = [
        "  ".join(row[col].ljust(widths[col]) for col in SUMMARY_COLUMNS) for row in rows
    ]
    return "\n".join([header, ruler, *body]) + "\n"


def write_records_csv(records: list[RunRecord], path: str | Path) -> None:
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["index", "seed", "status", "error", "rules_after_prune"])
    for index, record in enumerate(records):
        writer.writerow(
            [
                index,
                record.seed,
                record.status.value,
                "" if record.error is None else repr(record.error),
                "" if record.rules_after_prune is None else record.rules_after_prune,
            ]
        )
    Path(path).write_text(buffer.getvalue())


def load_records(path: str | Path) -> list[RunRecord]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"records file not found: {path}")
    records = []
    with path.open(newline="") as handle:
        for row in csv.DictReader(handle):
            records.append(
                RunRecord(
                    seed=int(row["seed"]),
                    status=RecordStatus(row["status"]),
                    error=float(row["error"]) if row["error"] else None,
                    rules_after_prune=(
                        int(row["rules_after_prune"]) if row["rules_after_prune"] else None
                    ),
                )
            )
    return records


def run_suite(suite: ExperimentSuite, workers: int = 1, echo=print) -> int:
    """Run every condition, writing a summary pair and per-condition records."""
    out = Path(suite.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name, config in suite.conditions:
        echo(f"running condition {name} ({config.iterations} iterations)")
        stats, records = run_condition(config, workers=workers)
        write_records_csv(records, out / f"{name}.runs.csv")
        rows.append(stats_row(name, stats))
    write_summary_csv(rows, out / "summary.csv")
    table = format_summary_table(rows)
    (out / "summary.txt").write_text(table)
    echo(table)
    return 0
