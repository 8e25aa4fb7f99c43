"""Strict loading of run configuration files (YAML or JSON)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError, ProviderError
from .generation import GenerationConfig, ProviderConfig
from .metrics import ValidatorBinding

TOP_KEYS = {"model_path", "shot_path", "strategy", "num_instances", "max_checks", "categories",
            "provider", "validators", "output_dir", "seed_note"}
PROVIDER_KEYS = {"kind", "endpoint", "model_name", "auth_env", "transcript_path", "timeout",
                 "retries", "parallelism"}
BINDING_KEYS = {"class", "attribute", "validator", "params"}


@dataclass(frozen=True)
class RunConfig:
    source: Path
    model_path: Path
    shot_path: Path
    generation: GenerationConfig
    provider: ProviderConfig
    validators: tuple[ValidatorBinding, ...] = ()
    output_dir: Path | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def resolved(self) -> dict:
        """The configuration with every path made absolute."""
        doc = dict(self.raw)
        doc["model_path"] = str(self.model_path)
        doc["shot_path"] = str(self.shot_path)
        provider = dict(doc.get("provider", {}))
        if self.provider.transcript_path:
            provider["transcript_path"] = self.provider.transcript_path
        doc["provider"] = provider
        if self.output_dir is not None:
            doc["output_dir"] = str(self.output_dir)
        return doc


def read_document(path: Path) -> object:
    """Parse a YAML or JSON file; raises OSError when it cannot be read."""
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix == ".json":
            return json.loads(text)
        return yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: not valid {'JSON' if path.suffix == '.json' else 'YAML'}: {exc}") from None


def _strict(doc: object, allowed: set[str], where: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a mapping")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s): {', '.join(map(str, unknown))}")
    return doc


def _existing(base: Path, value: object, key: str) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{key} must be a non-empty path")
    path = (base / value).resolve()
    if not path.exists():
        raise ConfigError(f"{key}: {path} does not exist")
    return path


def parse_bindings(items: object, where: str = "validators") -> tuple[ValidatorBinding, ...]:
    if items is None:
        return ()
    if not isinstance(items, list):
        raise ConfigError(f"{where}: expected a list")
    bindings = []
    for n, item in enumerate(items):
        item = _strict(item, BINDING_KEYS, f"{where}[{n}]")
        missing = {"class", "attribute", "validator"} - set(item)
        if missing:
            raise ConfigError(f"{where}[{n}]: missing {', '.join(sorted(missing))}")
        attr = item["attribute"]
        if isinstance(attr, list):
            if len(attr) != 2 or not all(isinstance(a, str) for a in attr):
                raise ConfigError(f"{where}[{n}]: an attribute pair must be two names")
            attr = tuple(attr)
        elif not isinstance(attr, str):
            raise ConfigError(f"{where}[{n}]: attribute must be a name or a pair of names")
        params = item.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError(f"{where}[{n}]: params must be a mapping")
        bindings.append(ValidatorBinding(item["class"], attr, item["validator"], params))
    return tuple(bindings)


def load_bindings(path: Path) -> tuple[ValidatorBinding, ...]:
    doc = read_document(path)
    if isinstance(doc, dict):
        doc = _strict(doc, {"validators"}, str(path)).get("validators")
    return parse_bindings(doc, str(path))


def load_run_config(path: Path) -> RunConfig:
    """Read and validate ``path``. Relative paths are taken from the file's directory."""
    path = Path(path)
    doc = _strict(read_document(path), TOP_KEYS, str(path))
    base = path.resolve().parent
    for key in ("model_path", "shot_path", "provider"):
        if key not in doc:
            raise ConfigError(f"{path}: missing required key {key!r}")
    p = _strict(doc["provider"], PROVIDER_KEYS, "provider")
    if "kind" not in p:
        raise ConfigError("provider: missing required key 'kind'")
    transcript = p.get("transcript_path")
    if p["kind"] == "replay":
        transcript = str(_existing(base, transcript, "provider.transcript_path"))
    try:
        provider = ProviderConfig(
            kind=p["kind"], endpoint=p.get("endpoint"), model_name=p.get("model_name"),
            auth_env=p.get("auth_env"), transcript_path=transcript,
            request_timeout=float(p.get("timeout", 60.0)), max_retries=int(p.get("retries", 2)),
            parallelism=int(p.get("parallelism", 1)))
        provider.validate()
        generation = GenerationConfig(
            num_instances=int(doc.get("num_instances", 30)), max_checks=int(doc.get("max_checks", 2)),
            strategy=doc.get("strategy", "IL"), categories=tuple(doc.get("categories") or ()),
            provider=provider, seed_note=doc.get("seed_note"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except ProviderError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    output = doc.get("output_dir")
    return RunConfig(
        source=path.resolve(),
        model_path=_existing(base, doc["model_path"], "model_path"),
        shot_path=_existing(base, doc["shot_path"], "shot_path"),
        generation=generation,
        provider=provider,
        validators=parse_bindings(doc.get("validators")),
        output_dir=(base / output).resolve() if output else None,
        raw=doc,
    )
