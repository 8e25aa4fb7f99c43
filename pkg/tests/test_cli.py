import json
import subprocess
import sys

import pytest
import yaml

from umlinst.cli import main

import transcripts as T
from conftest import BUNDLED, FIXTURES

BANK_USE = str(BUNDLED / "bank.use")
BANK_SOIL = str(BUNDLED / "bank.soil")


def write_config(tmp_path, name="run.yaml", **overrides):
    doc = {"model_path": BANK_USE, "shot_path": BANK_SOIL, "strategy": "IL", "num_instances": 3,
           "max_checks": 2, "provider": {"kind": "replay", "transcript_path": str(FIXTURES / "il_clean.jsonl")},
           "validators": [{"class": "Account", "attribute": "iban", "validator": "iban_checksum"}]}
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return path


def run(*argv):
    return main([str(a) for a in argv])


def report(path):
    return json.loads((path / "report.json").read_text(encoding="utf-8"))


def test_validate_model(capsys):
    assert run("validate-model", BANK_USE) == 0
    assert "model BankAccount is valid (2 classes, 1 associations, 1 invariants)" in capsys.readouterr().out


def test_validate_model_reports_cycles(tmp_path, capsys):
    bad = tmp_path / "cycle.use"
    bad.write_text("model M\nclass A < B end\nclass B < A end\n")
    assert run("validate-model", bad) == 1
    assert "Cyclic inheritance" in capsys.readouterr().err


def test_missing_file_is_usage_error(tmp_path, capsys):
    assert run("validate-model", tmp_path / "none.use") == 2
    assert run("check", BANK_USE, tmp_path / "none.soil") == 2


def test_check_pass_and_failures(tmp_path, capsys):
    assert run("check", BANK_USE, BANK_SOIL) == 0
    assert capsys.readouterr().out == "PASS\n"
    soil = tmp_path / "x.soil"
    soil.write_text("\n".join(l for l in T.BANK_SOIL.splitlines() if not l.startswith("!insert")))
    assert run("check", BANK_USE, soil) == 1
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("[multiplicity] ") and "'owner'" in out[0] and out[1] == "FAIL (1 diagnostic(s))"
    soil.write_text("!new Account('a')\n!oops\n")
    assert run("check", BANK_USE, soil, "--format", "json") == 1
    doc = json.loads(capsys.readouterr().out)
    assert not doc["syntax_passed"] and [d["phase"] for d in doc["diagnostics"]] == ["syntax"]


def test_generate_il_replay(tmp_path, capsys):
    out = tmp_path / "out"
    assert run("generate", "--config", write_config(tmp_path), "--out", out) == 0
    assert sorted(p.name for p in (out / "instances").iterdir()) == [f"instance_{k}.soil" for k in (1, 2, 3)]
    assert (out / "transcripts" / "run.jsonl").read_text() == (FIXTURES / "il_clean.jsonl").read_text()
    doc = report(out)
    assert doc["status_counts"]["accepted"] == 3 and doc["run"]["provider_calls"] == 3
    assert doc["semantic"]["bindings"][0]["passed"] == 3
    assert (out / "figures" / "diversity.png").is_file() and (out / "figures" / "status.png").is_file()
    assert (out / "instances.csv").read_text().count("\n") == 4
    assert json.loads((out / "config.resolved.json").read_text())["model_path"] == BANK_USE
    text = (out / "instances" / "instance_2.soil").read_text()
    assert text.endswith("-- umlinst:strategy=IL\n-- umlinst:repair_rounds_syntax=0\n"
                         "-- umlinst:repair_rounds_conformance=0\n")


def test_generate_then_evaluate_is_self_consistent(tmp_path):
    config = write_config(tmp_path, strategy="CoT", num_instances=5,
                          categories=[c for c, _ in T.COT_PLAN],
                          provider={"kind": "replay", "transcript_path": str(FIXTURES / "cot_five.jsonl")})
    first, second, evaluated = tmp_path / "a", tmp_path / "b", tmp_path / "e"
    assert run("generate", "--config", config, "--out", first, "--no-figures") == 0
    assert run("generate", "--config", config, "--out", second, "--no-figures") == 0
    assert (first / "report.json").read_bytes() == (second / "report.json").read_bytes()
    assert (first / "instances.csv").read_bytes() == (second / "instances.csv").read_bytes()

    bindings = tmp_path / "bindings.yaml"
    bindings.write_text(yaml.safe_dump({"validators": yaml.safe_load(config.read_text())["validators"]}))
    assert run("evaluate", BANK_USE, first, "--bindings", bindings, "--out", evaluated, "--no-figures") == 0
    generated, rechecked = report(first), report(evaluated)
    assert "run" not in rechecked
    generated.pop("run")
    assert rechecked == generated
    errors = generated["errors"]
    assert errors["instances_excluded"] == 1 and errors["constraints"]["errors"] == 0
    assert generated["status_counts"]["expected-nonconforming"] == 1


def test_parallel_cot_generation_matches_sequential(tmp_path):
    config = write_config(tmp_path, strategy="CoT", num_instances=5,
                          categories=[c for c, _ in T.COT_PLAN],
                          provider={"kind": "replay", "transcript_path": str(FIXTURES / "cot_five.jsonl")})
    assert run("generate", "--config", config, "--out", tmp_path / "s", "--no-figures") == 0
    assert run("generate", "--config", config, "--out", tmp_path / "p", "--no-figures", "--jobs", "3") == 0
    assert (tmp_path / "s" / "report.json").read_bytes() == (tmp_path / "p" / "report.json").read_bytes()
    assert ((tmp_path / "s" / "transcripts" / "run.jsonl").read_bytes()
            == (tmp_path / "p" / "transcripts" / "run.jsonl").read_bytes())


def test_generate_with_failures_exits_3(tmp_path):
    config = write_config(tmp_path, num_instances=2, validators=[],
                          provider={"kind": "replay", "transcript_path": str(FIXTURES / "il_repair.jsonl")})
    out = tmp_path / "out"
    assert run("generate", "--config", config, "--out", out, "--no-figures") == 3
    doc = report(out)
    assert [i["status"] for i in doc["instances"]] == ["accepted", "failed-conformance"]
    assert [i["repair_rounds_conformance"] for i in doc["instances"]] == [1, 2]


def test_exhausted_replay_exits_4_and_keeps_artifacts(tmp_path, capsys):
    config = write_config(tmp_path, num_instances=4)
    out = tmp_path / "out"
    assert run("generate", "--config", config, "--out", out, "--no-figures") == 4
    assert len(list((out / "instances").iterdir())) == 3
    assert "transcript-exhausted" in report(out)["run"]["aborted"]
    assert "generation aborted" in capsys.readouterr().err


def test_unset_auth_env_fails_before_any_request(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("UMLINST_NO_SUCH_KEY", raising=False)
    config = write_config(tmp_path, provider={"kind": "http-chat", "endpoint": "http://127.0.0.1:9/v1",
                                              "model_name": "m", "auth_env": "UMLINST_NO_SUCH_KEY"})
    out = tmp_path / "out"
    assert run("generate", "--config", config, "--out", out) == 4
    assert "UMLINST_NO_SUCH_KEY" in capsys.readouterr().err and not out.exists()


@pytest.mark.parametrize("overrides, message", [
    ({"temperature": 0.2}, "unknown key(s): temperature"),
    ({"provider": {"kind": "replay", "transcript_path": "missing.jsonl"}}, "does not exist"),
    ({"provider": {"kind": "replay", "transcript_path": str(FIXTURES / "il_clean.jsonl"), "token": "x"}},
     "unknown key(s): token"),
    ({"validators": [{"class": "Account", "attribute": "iban", "validator": "nope"}]}, "nope"),
    ({"strategy": "CoT"}, "at least one category"),
])
def test_bad_configs_exit_4(tmp_path, capsys, overrides, message):
    assert run("generate", "--config", write_config(tmp_path, **overrides), "--out", tmp_path / "o") == 4
    assert message in capsys.readouterr().err


def test_generate_missing_config_is_usage_error(tmp_path):
    assert run("generate", "--config", tmp_path / "none.yaml") == 2


def test_evaluate_single_instance_corpus(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "bank.soil").write_text(T.BANK_SOIL)
    assert run("evaluate", BANK_USE, corpus, "--format", "json", "--no-figures") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["errors"]["constraints"] == {"errors": 0, "total": 1}
    assert doc["diversity"]["Numeric"]["within"]["mean"] == 1.0
    assert (corpus / "report.json").is_file()


def test_evaluate_empty_corpus(tmp_path, capsys):
    corpus = tmp_path / "empty"
    corpus.mkdir()
    assert run("evaluate", BANK_USE, corpus) == 0
    out = capsys.readouterr().out
    assert "diversity Numeric: within -, across -" in out
    assert all(v["across"]["value"] is None for v in report(corpus)["diversity"].values())


def test_evaluate_isolates_an_invalid_file(tmp_path):
    corpus = tmp_path / "c"
    corpus.mkdir()
    for k in range(1, 12):
        (corpus / f"instance_{k}.soil").write_text(T.BANK_SOIL)
    (corpus / "instance_5.soil").write_text("!new Nope('x')\n")
    assert run("evaluate", BANK_USE, corpus, "--no-figures", "--jobs", "4") == 0
    doc = report(corpus)
    assert [i["name"] for i in doc["instances"]][:3] == ["instance_1", "instance_2", "instance_3"]
    assert doc["instances"][4]["status"] == "failed-syntax"
    assert doc["status_counts"] == {"accepted": 10, "failed-syntax": 1, "failed-conformance": 0,
                                    "expected-nonconforming": 0}


def test_evaluate_missing_corpus(tmp_path):
    assert run("evaluate", BANK_USE, tmp_path / "nowhere") == 2


def test_bad_jobs_value():
    with pytest.raises(SystemExit) as info:
        main(["generate", "--config", "x", "--jobs", "0"])
    assert info.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "umlinst.cli", "check", BANK_USE, BANK_SOIL],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and proc.stdout == "PASS\n"
