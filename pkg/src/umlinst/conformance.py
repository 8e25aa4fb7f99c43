"""Two-stage conformance check: syntax/typing first, then multiplicities and invariants."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EvalError, SoilError
from .model import (
    BoolV, ClassModel, Diagnostic, InstanceModel, RunProvenance, UndefinedV,
    render_diagnostics,
)
from .ocl import evaluate
from .soil import execute_soil, parse_soil, strip_comment


@dataclass(frozen=True)
class ConformanceReport:
    multiplicity_violations: tuple[Diagnostic, ...] = ()
    invariant_violations: tuple[Diagnostic, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.multiplicity_violations and not self.invariant_violations

    @property
    def diagnostics(self) -> list[Diagnostic]:
        return [*self.multiplicity_violations, *self.invariant_violations]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "multiplicity_violations": [d.to_dict() for d in self.multiplicity_violations],
            "invariant_violations": [d.to_dict() for d in self.invariant_violations],
        }


def check_multiplicities(instance: InstanceModel, model: ClassModel) -> list[Diagnostic]:
    """One diagnostic per (object, association end) whose link count is out of range.

    An object sitting at one end of an association is constrained by the
    multiplicity of the opposite end, which is also the end it navigates to.
    """
    found = []
    for obj in instance.objects:
        for assoc in model.associations:
            for own, other in ((0, 1), (1, 0)):
                if not model.is_subclass(obj.class_name, assoc.ends[own].class_name):
                    continue
                end = assoc.ends[other]
                count = len(instance.partners(assoc.name, own, obj.object_id))
                if not end.multiplicity.admits(count):
                    found.append(Diagnostic(
                        "multiplicity", obj.object_id,
                        f"Object '{obj.object_id}' of class '{obj.class_name}' has {count} link(s) "
                        f"at end '{end.role}' of association '{assoc.name}' but the multiplicity "
                        f"is '{end.multiplicity.range_text()}'.",
                        code="MultiplicityViolation"))
    return found


def check_invariants(instance: InstanceModel, model: ClassModel) -> list[Diagnostic]:
    """One diagnostic per (object, invariant) that evaluates to false or undefined."""
    found = []
    for obj in instance.objects:
        for inv in model.invariants:
            if not model.is_subclass(obj.class_name, inv.context):
                continue
            subject = inv.qualified_name
            try:
                result = evaluate(inv.body, instance, model, obj.object_id)
            except EvalError as exc:
                found.append(Diagnostic(
                    "invariant", subject,
                    f"Invariant '{subject}' could not be evaluated for object "
                    f"'{obj.object_id}': {exc}.", code="EvalError"))
                continue
            if result == BoolV(True):
                continue
            suffix = " (evaluates to undefined)" if isinstance(result, UndefinedV) else ""
            found.append(Diagnostic(
                "invariant", subject,
                f"Invariant '{subject}' is violated by object '{obj.object_id}'{suffix}.",
                code="InvariantViolation"))
    return found


def check_instance(instance: InstanceModel, model: ClassModel) -> ConformanceReport:
    return ConformanceReport(tuple(check_multiplicities(instance, model)),
                             tuple(check_invariants(instance, model)))


@dataclass(frozen=True)
class CheckResult:
    """Outcome of :func:`full_check`.

    ``report`` is None exactly when the syntax stage failed.
    """
    syntax_passed: bool
    syntax_diagnostics: tuple[Diagnostic, ...] = ()
    report: ConformanceReport | None = None
    instance: InstanceModel | None = field(default=None, compare=False)
    element_count: int = 0

    @property
    def passed(self) -> bool:
        return self.syntax_passed and self.report is not None and self.report.passed

    @property
    def diagnostics(self) -> list[Diagnostic]:
        if not self.syntax_passed:
            return list(self.syntax_diagnostics)
        return self.report.diagnostics

    def render(self) -> str:
        """Diagnostics as repair-prompt text, one per line."""
        return render_diagnostics(self.diagnostics)


def count_elements(soil_source: str) -> int:
    """Number of non-blank, non-comment lines, i.e. attempted model elements."""
    return sum(1 for line in soil_source.splitlines() if strip_comment(line).strip())


def full_check(soil_source: str, model: ClassModel,
               provenance: RunProvenance | None = None) -> CheckResult:
    """Parse and execute ``soil_source``; only when that is clean, check conformance."""
    elements = count_elements(soil_source)
    try:
        instance = execute_soil(parse_soil(soil_source), model, provenance)
    except SoilError as exc:
        return CheckResult(False, tuple(exc.diagnostics), None, None, elements)
    return CheckResult(True, (), check_instance(instance, model), instance, elements)
