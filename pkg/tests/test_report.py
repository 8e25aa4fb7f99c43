from umlinst.conformance import full_check
from umlinst.generation import extract_soil
from umlinst.plotting import render_figures
from umlinst.report import (
    InstanceRecord, build_report, format_text, instances_csv, provenance_footer, read_tags, record_from_text,
    status_for,
)

import transcripts as T


def records(bank_model):
    texts = [("good", T.GOOD[0], "Base"), ("minor", T.UNDERAGE, "Base"), ("over", T.UNDERAGE, "OverConstraint"),
             ("broken", T.SYNTAX_BAD, "Edge"), ("plain", T.BANK_SOIL, None)]
    out = []
    for name, text, category in texts:
        check = full_check(extract_soil(text), bank_model)
        out.append(InstanceRecord(name, check, status_for(check, category), "CoT", category))
    return out


def test_statuses(bank_model):
    assert [r.status for r in records(bank_model)] == [
        "accepted", "failed-conformance", "expected-nonconforming", "failed-syntax", "accepted"]


def test_aggregates_equal_sum_of_counted_records(bank_model):
    recs = records(bank_model)
    doc = build_report(bank_model, recs).doc
    counted = [i for i in doc["instances"] if i["category"] != "OverConstraint"]
    errors = doc["errors"]
    assert errors["instances_counted"] == 4 and errors["instances_excluded"] == 1
    assert errors["syntax"] == {"errors": sum(i["syntax_errors"] for i in counted),
                                "total": sum(i["elements"] for i in counted)}
    assert errors["constraints"] == {"errors": sum(i.get("invariant_violations", 0) for i in counted),
                                     "total": sum(i.get("invariant_checks", 0) for i in counted)}
    assert errors["multiplicities"]["total"] == sum(i.get("links", 0) for i in counted)
    assert errors["constraints"]["errors"] == 1 and errors["syntax"]["errors"] == 1


def test_overconstraint_failures_do_not_block_all_conforming(bank_model):
    recs = records(bank_model)
    assert not build_report(bank_model, recs).all_conforming
    keep = [r for r in recs if r.name in ("good", "over", "plain")]
    assert build_report(bank_model, keep).all_conforming


def test_footer_keeps_line_numbers_and_round_trips(bank_model):
    text = T.SYNTAX_BAD + provenance_footer("CoT", "Edge", 2, 0)
    assert read_tags(text) == {"strategy": "CoT", "category": "Edge", "repair_rounds_syntax": "2",
                               "repair_rounds_conformance": "0"}
    rec = record_from_text("x", text, bank_model)
    assert rec.check.diagnostics[0].line == 2
    assert (rec.category, rec.repair_rounds_syntax) == ("Edge", 2)
    assert provenance_footer("IL", None, 0, 1).count("\n") == 3


def test_text_and_csv(bank_model):
    report = build_report(bank_model, records(bank_model))
    text = format_text(report)
    assert "constraints: 1/" in text and "diversity StringExact: within" in text
    rows = instances_csv(report).splitlines()
    assert rows[0].startswith("name,status,strategy,category") and len(rows) == 6
    assert rows[4].startswith("broken,failed-syntax,CoT,Edge")


def test_figures_are_deterministic(bank_model, tmp_path):
    doc = build_report(bank_model, records(bank_model)).doc
    a = render_figures(doc, tmp_path / "a")
    b = render_figures(doc, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes() and pa.read_bytes()[:4] == b"\x89PNG"
