"""Offline checks that attribute values look like real-world data (IBANs, e-mails, dates...)."""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib.resources import files
from typing import Callable, Sequence
from urllib.parse import urlsplit

from ..errors import UnknownValidator, UnresolvedBinding
from ..model import ClassModel, InstanceModel, UndefinedV, Value

# Each check returns None when the value passes, otherwise the reason it fails.
Check = Callable[..., "str | None"]


@lru_cache(maxsize=1)
def country_codes() -> frozenset[str]:
    text = (files("umlinst") / "data" / "country_codes.txt").read_text(encoding="utf-8")
    return frozenset(w for line in text.splitlines() if not line.startswith("#") for w in line.split())


_EMAIL = re.compile(r"[A-Za-z0-9!#$%&'*+/=?^_`{|}~-]+(\.[A-Za-z0-9!#$%&'*+/=?^_`{|}~-]+)*"
                    r"@([A-Za-z0-9]([A-Za-z0-9-]*[A-Za-z0-9])?\.)+[A-Za-z]{2,}")


def check_email(value: str, params: dict) -> str | None:
    return None if _EMAIL.fullmatch(value) else "not of the form local@domain.tld"


_PHONE = re.compile(r"\+?\(?[0-9][0-9 ().\-/]*")


def check_phone(value: str, params: dict) -> str | None:
    if not _PHONE.fullmatch(value.strip()) or value.count("(") != value.count(")"):
        return "only an optional leading + followed by digits and separators is allowed"
    digits = sum(ch.isdigit() for ch in value)
    if not 7 <= digits <= 15:
        return f"has {digits} digits, expected 7 to 15"
    return None


def check_url(value: str, params: dict) -> str | None:
    if any(ch.isspace() for ch in value):
        return "contains whitespace"
    try:
        parts = urlsplit(value)
        host = parts.hostname
    except ValueError as exc:
        return f"cannot be parsed ({exc})"
    if parts.scheme not in ("http", "https"):
        return "scheme must be http or https"
    if not host or "." not in host.strip(".") or ".." in host:
        return "host must be a dotted domain name"
    return None


# country code -> total IBAN length
IBAN_LENGTHS = {
    "AD": 24, "AT": 20, "BE": 16, "BG": 22, "CH": 21, "CY": 28, "CZ": 24, "DE": 22, "DK": 18,
    "EE": 20, "ES": 24, "FI": 18, "FR": 27, "GB": 22, "GR": 27, "HR": 21, "HU": 28, "IE": 22,
    "IS": 26, "IT": 27, "LI": 21, "LT": 20, "LU": 20, "LV": 21, "MC": 27, "MT": 31, "NL": 18,
    "NO": 15, "PL": 28, "PT": 25, "RO": 24, "SE": 24, "SI": 19, "SK": 24, "SM": 27,
}

_IBAN = re.compile(r"[A-Z]{2}[0-9]{2}[A-Z0-9]{1,30}")


def _compact(value: str) -> str:
    return value.replace(" ", "").upper()


def check_iban_structure(value: str, params: dict) -> str | None:
    iban = _compact(value)
    if not _IBAN.fullmatch(iban):
        return "expected 2 letters, 2 check digits and up to 30 letters or digits"
    expected = IBAN_LENGTHS.get(iban[:2])
    if expected is not None and len(iban) != expected:
        return f"{iban[:2]} IBANs have {expected} characters, found {len(iban)}"
    return None


def iban_remainder(iban: str) -> int:
    """ISO 7064 mod 97-10 remainder, computed one character at a time."""
    rearranged = iban[4:] + iban[:4]
    remainder = 0
    for ch in rearranged:
        if ch.isdigit():
            remainder = (remainder * 10 + int(ch)) % 97
        else:
            remainder = (remainder * 100 + ord(ch) - ord("A") + 10) % 97
    return remainder


def check_iban_checksum(value: str, params: dict) -> str | None:
    iban = _compact(value)
    if len(iban) < 5 or not iban.isascii() or not iban.isalnum():
        return "too short or contains characters other than letters and digits"
    remainder = iban_remainder(iban)
    return None if remainder == 1 else f"mod-97 remainder is {remainder}, expected 1"


_BIC = re.compile(r"[A-Z]{4}([A-Z]{2})[A-Z0-9]{2}([A-Z0-9]{3})?")


def check_bic(value: str, params: dict) -> str | None:
    m = _BIC.fullmatch(value)
    if not m:
        return "expected 4 letters, 2-letter country, 2 letters or digits and an optional 3-character branch"
    if m.group(1) not in country_codes():
        return f"unknown country code {m.group(1)}"
    return None


def check_country_code(value: str, params: dict) -> str | None:
    return None if value in country_codes() else "not an ISO 3166-1 alpha-2 code"


_X_USER = re.compile(r"@?[A-Za-z0-9_]{1,15}")


def check_x_username(value: str, params: dict) -> str | None:
    return None if _X_USER.fullmatch(value) else "expected an optional @ and 1 to 15 letters, digits or _"


DEFAULT_PLATE = r"[A-Z]{1,3}-?[0-9]{1,4}[A-Z]{0,3}"


def check_license_plate(value: str, params: dict) -> str | None:
    pattern = params.get("pattern", DEFAULT_PLATE)
    return None if re.fullmatch(pattern, value) else f"does not match {pattern}"


def _parse_date(value: str) -> dt.date | None:
    if not re.fullmatch(r"\d{4}-\d{2}-\d{2}", value):
        return None
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        return None


def check_date_iso(value: str, params: dict) -> str | None:
    return None if _parse_date(value) else "not a valid calendar date YYYY-MM-DD"


def _orderable(value):
    if isinstance(value, str):
        return _parse_date(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return value
    return None


def check_date_order(first, second, params: dict) -> str | None:
    relation = params.get("relation", "<=")
    a, b = _orderable(first), _orderable(second)
    if a is None or b is None or isinstance(a, dt.date) != isinstance(b, dt.date):
        return "values are not comparable dates or numbers"
    ok = a < b if relation == "<" else a <= b
    return None if ok else f"{first} is not {relation} {second}"


def check_latlong(first, second=None, params: dict | None = None) -> str | None:
    if second is None:
        params = params or {}
        axis = params.get("axis", "lat")
        bound = 90 if axis == "lat" else 180
        pairs = [(first, bound, axis)]
    else:
        pairs = [(first, 90, "lat"), (second, 180, "lon")]
    for value, bound, axis in pairs:
        try:
            number = float(value)
        except (TypeError, ValueError):
            return f"{axis} {value!r} is not a number"
        if not -bound <= number <= bound:
            return f"{axis} {number} is outside [-{bound}, {bound}]"
    return None


@dataclass(frozen=True)
class Validator:
    name: str
    check: Check
    pair: bool = False        # needs an attribute pair
    pair_optional: bool = False


VALIDATORS: dict[str, Validator] = {v.name: v for v in (
    Validator("email", check_email),
    Validator("phone", check_phone),
    Validator("url", check_url),
    Validator("iban_structure", check_iban_structure),
    Validator("iban_checksum", check_iban_checksum),
    Validator("bic", check_bic),
    Validator("country_code", check_country_code),
    Validator("x_username", check_x_username),
    Validator("license_plate", check_license_plate),
    Validator("date_iso", check_date_iso),
    Validator("date_order", check_date_order, pair=True),
    Validator("latlong_range", check_latlong, pair_optional=True),
)}


def register_validator(validator: Validator) -> None:
    VALIDATORS[validator.name] = validator


@dataclass(frozen=True)
class ValidatorBinding:
    class_name: str
    attribute: str | tuple[str, str]
    validator: str
    params: dict = field(default_factory=dict, hash=False)

    @property
    def attributes(self) -> tuple[str, ...]:
        return (self.attribute,) if isinstance(self.attribute, str) else tuple(self.attribute)

    @property
    def label(self) -> str:
        return f"{self.class_name}.{'/'.join(self.attributes)}:{self.validator}"

    def resolve(self, model: ClassModel) -> Validator:
        if self.validator not in VALIDATORS:
            raise UnknownValidator(f"unknown validator {self.validator!r}; registered: "
                                   + ", ".join(sorted(VALIDATORS)))
        validator = VALIDATORS[self.validator]
        if not model.has_class(self.class_name):
            raise UnresolvedBinding(f"{self.label}: class {self.class_name!r} is not in the model")
        for attr in self.attributes:
            if model.attribute(self.class_name, attr) is None:
                raise UnresolvedBinding(f"{self.label}: class {self.class_name!r} has no attribute {attr!r}")
        arity = len(self.attributes)
        if (validator.pair and arity != 2) or (not validator.pair and not validator.pair_optional and arity != 1) \
                or arity not in (1, 2):
            raise UnresolvedBinding(f"{self.label}: wrong number of attributes for {self.validator}")
        return validator

    def to_dict(self) -> dict:
        attr = self.attribute if isinstance(self.attribute, str) else list(self.attribute)
        return {"class": self.class_name, "attribute": attr, "validator": self.validator,
                "params": dict(self.params)}


@dataclass
class BindingResult:
    binding: ValidatorBinding
    passed: int = 0
    total: int = 0
    failures: list[tuple[str, str, str]] = field(default_factory=list)  # (object id, value, reason)

    def to_dict(self) -> dict:
        return {**self.binding.to_dict(), "passed": self.passed, "total": self.total,
                "failures": [{"object": o, "value": v, "reason": r} for o, v, r in self.failures]}


@dataclass
class SemanticReport:
    results: list[BindingResult]

    def to_dict(self) -> dict:
        return {"bindings": [r.to_dict() for r in self.results]}


def _raw(value: Value):
    return value.value if hasattr(value, "value") else str(value)


def run_validators(corpus: Sequence[InstanceModel], model: ClassModel,
                   bindings: Sequence[ValidatorBinding]) -> SemanticReport:
    """Apply each binding to every defined slot of matching objects in the corpus.

    Pair bindings only count objects where both slots are defined.
    """
    resolved = [(b, b.resolve(model)) for b in bindings]
    results = []
    for binding, validator in resolved:
        result = BindingResult(binding)
        for instance in corpus:
            for obj in instance.objects:
                if not model.is_subclass(obj.class_name, binding.class_name):
                    continue
                values = [obj.slots.get(a) for a in binding.attributes]
                if any(v is None or isinstance(v, UndefinedV) for v in values):
                    continue
                raw = [_raw(v) for v in values]
                if len(raw) == 1 and not validator.pair:
                    arg = raw[0] if isinstance(raw[0], str) or validator.pair_optional else str(raw[0])
                    reason = (validator.check(arg, params=binding.params) if validator.pair_optional
                              else validator.check(arg, binding.params))
                else:
                    reason = validator.check(raw[0], raw[1], params=binding.params)
                result.total += 1
                if reason is None:
                    result.passed += 1
                else:
                    shown = " / ".join(str(r) for r in raw)
                    result.failures.append((obj.object_id, shown, reason))
        results.append(result)
    return SemanticReport(results)
