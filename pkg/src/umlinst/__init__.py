"""Class-diagram and object-diagram toolkit with LLM-driven instance generation."""

from .conformance import CheckResult, ConformanceReport, check_instance, full_check
from .errors import UmlInstError
from .model import ClassModel, Diagnostic, InstanceModel
from .resolve import load_model
from .soil import load_instance

__all__ = [
    "CheckResult", "ClassModel", "ConformanceReport", "Diagnostic", "InstanceModel",
    "UmlInstError", "check_instance", "full_check", "load_instance", "load_model",
]
__version__ = "0.1.0"
