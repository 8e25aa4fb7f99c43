"""Command-line interface.

Exit codes: 0 success, 1 check failure, 2 usage or I/O error,
3 generation finished but some instances failed, 4 provider or configuration failure.
"""

from __future__ import annotations

import argparse
import json
import re
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .conformance import full_check
from .config import load_bindings, load_run_config
from .errors import (
    ConfigError, OclTypeError, ProviderError, ResolutionError, UnknownValidator, UnresolvedBinding,
    UseSyntaxError,
)
from .generation import GenerationAborted, make_provider, run_generation, write_transcript
from .model import ClassModel
from .report import (
    InstanceRecord, RunReport, build_report, format_text, instances_csv, provenance_footer,
    record_from_text, status_for,
)
from .resolve import load_model
from .serialize import dumps

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_PARTIAL, EXIT_PROVIDER = 0, 1, 2, 3, 4

MODEL_ERRORS = (UseSyntaxError, ResolutionError, OclTypeError)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_USAGE) from None


def _model(path: Path, failure_code: int = EXIT_CHECK) -> tuple[ClassModel, str]:
    text = _read(path)
    try:
        return load_model(text), text
    except MODEL_ERRORS as exc:
        raise CliError(f"{path}: {exc}", failure_code) from None


def _emit(args, doc: dict, text: str) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n" if args.format == "json" else text)


def cmd_validate_model(args) -> int:
    model, _ = _model(args.model)
    doc = {"model": model.name, "classes": len(model.classes), "enums": len(model.enums),
           "associations": len(model.associations), "invariants": len(model.invariants)}
    _emit(args, doc, f"{args.model}: model {model.name} is valid ({len(model.classes)} classes, "
                     f"{len(model.associations)} associations, {len(model.invariants)} invariants)\n")
    return EXIT_OK


def cmd_check(args) -> int:
    model, _ = _model(args.model)
    result = full_check(_read(args.soil), model)
    doc = {"passed": result.passed, "syntax_passed": result.syntax_passed,
           "diagnostics": [d.to_dict() for d in result.diagnostics]}
    lines = [f"[{d.phase}] {d.render()}" for d in result.diagnostics]
    lines.append("PASS" if result.passed else f"FAIL ({len(result.diagnostics)} diagnostic(s))")
    _emit(args, doc, "\n".join(lines) + "\n")
    return EXIT_OK if result.passed else EXIT_CHECK


def _write_outputs(out: Path, report: RunReport, figures: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(report.doc), encoding="utf-8")
    (out / "instances.csv").write_text(instances_csv(report), encoding="utf-8")
    if figures:
        from .plotting import render_figures
        render_figures(report.doc, out / "figures")


def cmd_generate(args) -> int:
    if not args.config:
        raise CliError("generate needs --config", EXIT_USAGE)
    if not Path(args.config).is_file():
        raise CliError(f"cannot read {args.config}: no such file", EXIT_USAGE)
    try:
        config = load_run_config(Path(args.config))
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_PROVIDER) from None
    model, model_text = _model(config.model_path, EXIT_PROVIDER)
    shot = _read(config.shot_path)
    out = Path(args.out) if args.out else config.output_dir
    if out is None:
        raise CliError("no output directory: set output_dir in the config or pass --out", EXIT_USAGE)
    for binding in config.validators:
        try:
            binding.resolve(model)
        except (UnknownValidator, UnresolvedBinding) as exc:
            raise CliError(str(exc), EXIT_PROVIDER) from None
    jobs = args.jobs or config.provider.parallelism
    try:
        provider = make_provider(config.provider, content_match=jobs > 1)
    except ProviderError as exc:
        raise CliError(f"provider: {exc}", EXIT_PROVIDER) from None

    sessions = []
    aborted: ProviderError | None = None
    try:
        items = run_generation(model, shot, config.generation, provider, model_text=model_text,
                               log=sessions, jobs=jobs)
    except GenerationAborted as exc:
        items, aborted = exc.instances, exc.cause

    instances_dir = out / "instances"
    if instances_dir.exists():
        shutil.rmtree(instances_dir)
    instances_dir.mkdir(parents=True)
    records = []
    for k, item in enumerate(items, start=1):
        name = f"instance_{k}"
        category = item.category.value if item.category else None
        text = item.soil_text if item.soil_text.endswith("\n") or not item.soil_text else item.soil_text + "\n"
        text += provenance_footer(item.strategy, category, item.repair_rounds_syntax,
                                  item.repair_rounds_conformance)
        (instances_dir / f"{name}.soil").write_text(text, encoding="utf-8")
        records.append(InstanceRecord(name, item.check, status_for(item.check, category), item.strategy,
                                      category, item.repair_rounds_syntax, item.repair_rounds_conformance))
    write_transcript(out / "transcripts" / "run.jsonl", sessions)
    (out / "config.resolved.json").write_text(dumps(config.resolved()), encoding="utf-8")

    g = config.generation
    run = {"strategy": g.strategy, "num_instances": g.num_instances, "max_checks": g.max_checks,
           "categories": [c.value for c in g.categories], "seed_note": g.seed_note,
           "provider_calls": sum(len(s.exchanges) for s in sessions), "sessions": len(sessions),
           "aborted": None if aborted is None else str(aborted)}
    report = build_report(model, records, config.validators, run)
    _write_outputs(out, report, not args.no_figures)
    _emit(args, report.doc, format_text(report))
    if aborted is not None:
        print(f"error: generation aborted: {aborted}", file=sys.stderr)
        return EXIT_PROVIDER
    return EXIT_OK if report.all_conforming else EXIT_PARTIAL


def _natural_key(path: Path):
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", path.name)]


def cmd_evaluate(args) -> int:
    model, _ = _model(args.model)
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise CliError(f"corpus directory {corpus} does not exist", EXIT_USAGE)
    folder = corpus / "instances" if (corpus / "instances").is_dir() else corpus
    bindings = ()
    if args.bindings:
        try:
            bindings = load_bindings(Path(args.bindings))
            for binding in bindings:
                binding.resolve(model)
        except OSError as exc:
            raise CliError(f"cannot read {args.bindings}: {exc.strerror or exc}", EXIT_USAGE) from None
        except (ConfigError, UnknownValidator, UnresolvedBinding) as exc:
            raise CliError(str(exc), EXIT_PROVIDER) from None
    texts = []
    for path in sorted(folder.glob("*.soil"), key=_natural_key):
        try:
            texts.append((path.stem, path.read_text(encoding="utf-8", errors="replace")))
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_USAGE) from None
    if (args.jobs or 1) > 1 and len(texts) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(lambda item: record_from_text(*item, model), texts))
    else:
        records = [record_from_text(name, text, model) for name, text in texts]
    report = build_report(model, records, bindings)
    _write_outputs(Path(args.out) if args.out else corpus, report, not args.no_figures)
    _emit(args, report.doc, format_text(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text", help="stdout format")
    parser = argparse.ArgumentParser(prog="umlinst", description="Check, generate and evaluate "
                                     "object-diagram instances of textual UML class diagrams.",
                                     epilog="exit codes: 0 ok, 1 check failure, 2 usage/I-O, "
                                     "3 partial generation, 4 provider/config failure")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-model", parents=[common], help="parse and resolve a .use class diagram")
    p.add_argument("model", type=Path)
    p.set_defaults(func=cmd_validate_model)

    p = sub.add_parser("check", parents=[common], help="check a .soil instance against a class diagram")
    p.add_argument("model", type=Path)
    p.add_argument("soil", type=Path)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("generate", parents=[common], help="generate a corpus of instances from a run configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--jobs", type=int, default=None, help="parallel scenario sessions (CoT)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", parents=[common], help="re-check a corpus and compute semantic and diversity metrics")
    p.add_argument("model", type=Path)
    p.add_argument("corpus", type=Path)
    p.add_argument("--bindings", help="YAML/JSON file with validator bindings")
    p.add_argument("--out", help="where to write report.json (default: the corpus directory)")
    p.add_argument("--jobs", type=int, default=None, help="instances checked in parallel")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
