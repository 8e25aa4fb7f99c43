"""Exception hierarchy shared by the parsers, resolver, checker and generator."""

from __future__ import annotations


class UmlInstError(Exception):
    """Base class for every error raised by this package."""


class UseSyntaxError(UmlInstError):
    """A class-diagram or constraint source does not match the grammar.

    The message is a self-contained sentence because it is fed back to the
    LLM verbatim during repair rounds.
    """

    def __init__(self, message: str, line: int, column: int = 0):
        self.line = max(int(line), 1)
        self.column = column
        self.detail = message
        where = f"Line {self.line}, column {column}" if column else f"Line {self.line}"
        super().__init__(f"{where}: {message}")


class ResolutionError(UmlInstError):
    """A name in a parsed class diagram cannot be resolved consistently."""

    kind = "resolution error"

    def __init__(self, identifier: str, line: int | None = None, detail: str | None = None):
        self.identifier = identifier
        self.line = line
        text = detail or f"{self.kind} '{identifier}'"
        if line is not None:
            text = f"{text} (line {line})"
        super().__init__(text)


class UnknownClass(ResolutionError):
    kind = "Unknown class"


class UnknownType(ResolutionError):
    kind = "Unknown type"


# The only non-primitive attribute types are enums, so an unknown type name
# is reported as an unknown enum.
UnknownEnum = UnknownType


class UnknownAssociation(ResolutionError):
    kind = "Unknown association"


class DuplicateName(ResolutionError):
    kind = "Duplicate name"


class CyclicInheritance(ResolutionError):
    kind = "Cyclic inheritance involving class"


class UnknownMember(ResolutionError):
    kind = "Unknown member"


class OclTypeError(UmlInstError):
    """A constraint expression is ill-typed."""

    def __init__(self, message: str, line: int = 0, column: int = 0,
                 expected: str | None = None, found: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"Line {line}, column {column}: {message}" if line else message)


class EvalError(UmlInstError):
    """Runtime failure while evaluating a well-typed constraint."""

    def __init__(self, reason: str, line: int = 0, column: int = 0):
        self.reason = reason
        self.line = line
        self.column = column
        super().__init__(f"{reason} at line {line}, column {column}" if line else reason)


class SoilError(UmlInstError):
    """Carries every diagnostic found in a SOIL script."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.render() for d in self.diagnostics))


class SoilSyntaxError(SoilError):
    pass


class SoilExecutionError(SoilError):
    pass


class ProviderError(UmlInstError):
    """LLM provider failure; ``kind`` is one of timeout, http-status,
    transcript-mismatch, transcript-exhausted or config."""

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")


class MissingBinding(UmlInstError):
    def __init__(self, placeholder: str, template: str = ""):
        self.placeholder = placeholder
        super().__init__(f"Template {template!r} needs a binding for {{{{{placeholder}}}}}")


class ConfigError(UmlInstError):
    pass


class UnknownValidator(UmlInstError):
    pass


class UnresolvedBinding(UmlInstError):
    pass


class KindMismatch(UmlInstError):
    """Two values of different kinds were compared for diversity."""
