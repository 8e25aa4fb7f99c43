"""Run reports: per-instance records plus error, semantic and diversity aggregates."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Sequence

from .conformance import CheckResult, full_check
from .model import ClassModel, InstanceModel
from .metrics import ScoreKind, ValidatorBinding, diversity_across, diversity_within, run_validators

OVERCONSTRAINT = "OverConstraint"
STATUSES = ("accepted", "failed-syntax", "failed-conformance", "expected-nonconforming")

_TAG = re.compile(r"^--\s*umlinst:(\w+)=(.*)$")


@dataclass
class InstanceRecord:
    name: str
    check: CheckResult
    status: str
    strategy: str | None = None
    category: str | None = None
    repair_rounds_syntax: int = 0
    repair_rounds_conformance: int = 0

    @property
    def instance(self) -> InstanceModel | None:
        return self.check.instance

    @property
    def in_error_aggregates(self) -> bool:
        return self.category != OVERCONSTRAINT


def status_for(check: CheckResult, category: str | None) -> str:
    if check.passed:
        return "accepted"
    if not check.syntax_passed:
        return "failed-syntax"
    return "expected-nonconforming" if category == OVERCONSTRAINT else "failed-conformance"


def provenance_footer(strategy: str | None, category: str | None, rounds_syntax: int,
                      rounds_conformance: int) -> str:
    """Trailing comment lines; placed last so diagnostic line numbers are unaffected."""
    tags = {"strategy": strategy, "category": category,
            "repair_rounds_syntax": rounds_syntax, "repair_rounds_conformance": rounds_conformance}
    return "".join(f"-- umlinst:{k}={v}\n" for k, v in tags.items() if v is not None)


def read_tags(soil_text: str) -> dict[str, str]:
    tags = {}
    for line in soil_text.splitlines():
        m = _TAG.match(line.strip())
        if m:
            tags[m.group(1)] = m.group(2).strip()
    return tags


def record_from_text(name: str, soil_text: str, model: ClassModel) -> InstanceRecord:
    """Re-check a stored instance, taking provenance from its tag comments."""
    tags = read_tags(soil_text)
    category = tags.get("category")
    check = full_check(soil_text, model)

    def count(key):
        try:
            return int(tags.get(key, 0))
        except ValueError:
            return 0

    return InstanceRecord(name, check, status_for(check, category), tags.get("strategy"), category,
                          count("repair_rounds_syntax"), count("repair_rounds_conformance"))


def invariant_checks(instance: InstanceModel, model: ClassModel) -> int:
    """Number of (object, invariant) pairs that were evaluated."""
    return sum(1 for obj in instance.objects for inv in model.invariants
               if model.is_subclass(obj.class_name, inv.context))


def _record_dict(record: InstanceRecord, model: ClassModel) -> dict:
    check = record.check
    doc = {
        "name": record.name,
        "status": record.status,
        "strategy": record.strategy,
        "category": record.category,
        "repair_rounds_syntax": record.repair_rounds_syntax,
        "repair_rounds_conformance": record.repair_rounds_conformance,
        "elements": check.element_count,
        "syntax_errors": len(check.syntax_diagnostics),
        "diagnostics": [d.to_dict() for d in check.diagnostics],
    }
    if check.report is not None:
        doc.update({
            "links": len(check.instance.links),
            "multiplicity_violations": len(check.report.multiplicity_violations),
            "invariant_checks": invariant_checks(check.instance, model),
            "invariant_violations": len(check.report.invariant_violations),
            "diversity": {k.value: s.to_dict() for k, s in diversity_within(check.instance).items()},
        })
    return doc


def _ratio(errors: int, total: int) -> dict:
    return {"errors": errors, "total": total}


def aggregate_errors(records: Sequence[InstanceRecord], model: ClassModel) -> dict:
    """Error counts over the instances that are expected to conform."""
    counted = [r for r in records if r.in_error_aggregates]
    checked = [r for r in counted if r.check.report is not None]
    return {
        "instances_counted": len(counted),
        "instances_excluded": len(records) - len(counted),
        "syntax": _ratio(sum(len(r.check.syntax_diagnostics) for r in counted),
                         sum(r.check.element_count for r in counted)),
        "multiplicities": _ratio(sum(len(r.check.report.multiplicity_violations) for r in checked),
                                 sum(len(r.instance.links) for r in checked)),
        "constraints": _ratio(sum(len(r.check.report.invariant_violations) for r in checked),
                              sum(invariant_checks(r.instance, model) for r in checked)),
    }


@dataclass
class RunReport:
    model_name: str
    records: list[InstanceRecord]
    doc: dict = field(repr=False)

    @property
    def all_conforming(self) -> bool:
        """True when every instance outside the over-constraint category was accepted."""
        return all(r.status == "accepted" for r in self.records if r.in_error_aggregates)


def build_report(model: ClassModel, records: Sequence[InstanceRecord],
                 bindings: Sequence[ValidatorBinding] = (), run: dict | None = None) -> RunReport:
    parsed = [r.instance for r in records if r.instance is not None]
    diversity = diversity_across(parsed)
    semantic = run_validators(parsed, model, bindings)
    statuses = {s: 0 for s in STATUSES}
    for r in records:
        statuses[r.status] += 1
    doc = {
        "model": model.name,
        "instances": [_record_dict(r, model) for r in records],
        "status_counts": statuses,
        "errors": aggregate_errors(records, model),
        "semantic": semantic.to_dict(),
        "diversity": diversity.to_dict(),
    }
    if run is not None:
        doc["run"] = run
    return RunReport(model.name, list(records), doc)


CSV_FIELDS = ("name", "status", "strategy", "category", "repair_rounds_syntax", "repair_rounds_conformance",
              "elements", "syntax_errors", "multiplicity_violations", "invariant_violations",
              *(k.value for k in ScoreKind))


def instances_csv(report: RunReport) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in report.doc["instances"]:
        row = {k: rec.get(k, "") for k in CSV_FIELDS[:10]}
        for kind in ScoreKind:
            value = rec.get("diversity", {}).get(kind.value, {}).get("value")
            row[kind.value] = "" if value is None else f"{value:.6f}"
        row = {k: "" if v is None else v for k, v in row.items()}
        writer.writerow(row)
    return out.getvalue()


def format_text(report: RunReport) -> str:
    doc = report.doc
    errors = doc["errors"]
    lines = [f"model: {doc['model']}",
             f"instances: {len(doc['instances'])} "
             + " ".join(f"{k}={v}" for k, v in doc["status_counts"].items())]
    for key in ("syntax", "multiplicities", "constraints"):
        lines.append(f"{key}: {errors[key]['errors']}/{errors[key]['total']}")
    for b in doc["semantic"]["bindings"]:
        label = "/".join(b["attribute"]) if isinstance(b["attribute"], list) else b["attribute"]
        lines.append(f"semantic {b['class']}.{label} [{b['validator']}]: {b['passed']}/{b['total']}")
    for kind, block in doc["diversity"].items():
        within, across = block["within"], block["across"]["value"]
        w = "-" if within["mean"] is None else f"{within['mean']:.2f} +/- {within['std']:.2f}"
        a = "-" if across is None else f"{across:.2f}"
        lines.append(f"diversity {kind}: within {w}, across {a}")
    return "\n".join(lines) + "\n"
