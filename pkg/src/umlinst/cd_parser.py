"""Parser and printer for the USE-style textual class-diagram language.

Grammar::

    model <Id>
    enum <Id> { <Id> (, <Id>)* }
    [abstract] class <Id> [< <Id>] [attributes (<id> : <Type>)*] end
    association <Id> between
        <Id> [<Mult>] role <id>
        <Id> [<Mult>] role <id>
    end
    constraints
    context <Id> inv <Id>: <expr>

``<Mult>`` is ``*``, ``n``, ``n..m`` or ``n..*``. Enum, class and association
declarations may be interleaved; the constraints block comes last. Names are
not resolved here, see :mod:`umlinst.resolve`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UseSyntaxError
from .lexer import TokenStream, tokenize
from .model import Multiplicity
from .ocl import Expr, format_expr, parse_expression_tokens

UNSUPPORTED = {
    "operations": "operations on classes are not supported",
    "composition": "composition is not supported; declare a plain association",
    "aggregation": "aggregation is not supported; declare a plain association",
    "associationclass": "association classes are not supported",
    "associationClass": "association classes are not supported",
    "derived": "derived attributes are not supported",
    "derive": "derived attributes are not supported",
    "init": "attribute initialisation is not supported",
    "qualifier": "qualified associations are not supported",
    "pre": "operation pre/postconditions are not supported",
    "post": "operation pre/postconditions are not supported",
    "datatype": "custom datatypes are not supported",
}


@dataclass(frozen=True)
class CdEnum:
    name: str
    literals: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CdAttribute:
    name: str
    type_name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CdClass:
    name: str
    is_abstract: bool
    parent: str | None
    attributes: tuple[CdAttribute, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CdEnd:
    class_name: str
    multiplicity: Multiplicity
    role: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CdAssociation:
    name: str
    end_a: CdEnd
    end_b: CdEnd
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CdInvariant:
    context: str
    name: str
    body: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CdModel:
    """Unresolved syntax tree of a class diagram."""
    name: str
    enums: tuple[CdEnum, ...] = ()
    classes: tuple[CdClass, ...] = ()
    associations: tuple[CdAssociation, ...] = ()
    invariants: tuple[CdInvariant, ...] = ()


class _CdParser:
    def __init__(self, source: str):
        self.ts = TokenStream(tokenize(source))

    def unsupported(self):
        tok = self.ts.current
        if tok.kind == "identifier" and tok.lexeme in UNSUPPORTED:
            raise UseSyntaxError(f"{UNSUPPORTED[tok.lexeme]} (found '{tok.lexeme}').",
                                 tok.line, tok.column)

    def parse(self) -> CdModel:
        self.unsupported()
        self.ts.expect("model")
        name = self.ts.expect_identifier("the model name after 'model'").lexeme
        enums, classes, assocs, invariants = [], [], [], []
        while True:
            self.unsupported()
            if self.ts.at("enum"):
                enums.append(self.enum())
            elif self.ts.at("class") or self.ts.at("abstract"):
                classes.append(self.klass())
            elif self.ts.at("association"):
                assocs.append(self.association())
            elif self.ts.at("constraints"):
                self.ts.advance()
                invariants = self.constraints()
                break
            elif self.ts.current.kind == "eof":
                break
            else:
                raise self.ts.error("'enum', 'class', 'abstract', 'association' or 'constraints'")
        if self.ts.current.kind != "eof":
            raise self.ts.error("end of input")
        return CdModel(name, tuple(enums), tuple(classes), tuple(assocs), tuple(invariants))

    def enum(self) -> CdEnum:
        line = self.ts.expect("enum").line
        name = self.ts.expect_identifier("the enumeration name after 'enum'").lexeme
        self.ts.expect("{")
        literals = [self.ts.expect_identifier("an enumeration literal").lexeme]
        while self.ts.accept(","):
            literals.append(self.ts.expect_identifier("an enumeration literal after ','").lexeme)
        self.ts.expect("}")
        return CdEnum(name, tuple(literals), line)

    def klass(self) -> CdClass:
        line = self.ts.current.line
        is_abstract = bool(self.ts.accept("abstract"))
        self.ts.expect("class")
        name = self.ts.expect_identifier("the class name after 'class'").lexeme
        parent = None
        if self.ts.accept("<"):
            parent = self.ts.expect_identifier("a superclass name after '<'").lexeme
        attributes = []
        self.unsupported()
        if self.ts.accept("attributes"):
            while self.ts.current.kind == "identifier" and self.ts.peek().lexeme == ":":
                attr = self.ts.advance()
                self.ts.expect(":")
                type_tok = self.ts.expect_identifier(f"a type name for attribute '{attr.lexeme}'")
                attributes.append(CdAttribute(attr.lexeme, type_tok.lexeme, attr.line))
        self.unsupported()
        if not self.ts.at("end"):
            raise self.ts.error(f"an attribute declaration or 'end' to close class '{name}'")
        self.ts.advance()
        return CdClass(name, is_abstract, parent, tuple(attributes), line)

    def multiplicity(self) -> Multiplicity:
        self.ts.expect("[")
        tok = self.ts.current
        if self.ts.accept("*"):
            mult = Multiplicity(0, None)
        else:
            lower = self.ts.expect_integer("a multiplicity such as '*', '1', '0..1' or '1..*'")
            if self.ts.accept(".."):
                if self.ts.accept("*"):
                    upper = None
                else:
                    upper = self.ts.expect_integer("an upper bound or '*' after '..'")
            else:
                upper = lower
            if upper is not None and upper < lower:
                raise UseSyntaxError(
                    f"multiplicity upper bound {upper} is smaller than lower bound {lower}.",
                    tok.line, tok.column)
            mult = Multiplicity(lower, upper)
        self.ts.expect("]")
        return mult

    def end(self) -> CdEnd:
        cls = self.ts.expect_identifier("the class name of an association end")
        mult = self.multiplicity()
        self.ts.expect("role")
        role = self.ts.expect_identifier("a role name after 'role'").lexeme
        return CdEnd(cls.lexeme, mult, role, cls.line)

    def association(self) -> CdAssociation:
        line = self.ts.expect("association").line
        name = self.ts.expect_identifier("the association name after 'association'").lexeme
        self.ts.expect("between")
        end_a = self.end()
        end_b = self.end()
        if self.ts.current.kind == "identifier":
            raise UseSyntaxError(
                f"association '{name}' has more than two ends; only binary associations are supported.",
                self.ts.current.line, self.ts.current.column)
        self.ts.expect("end")
        return CdAssociation(name, end_a, end_b, line)

    def constraints(self) -> list[CdInvariant]:
        invariants = []
        while self.ts.at("context"):
            self.ts.advance()
            context = self.ts.expect_identifier("a class name after 'context'").lexeme
            self.unsupported()
            if not self.ts.at("inv"):
                raise self.ts.error("'inv'")
            while self.ts.at("inv"):
                line = self.ts.advance().line
                name = self.ts.expect_identifier("an invariant name after 'inv'").lexeme
                self.ts.expect(":")
                body = parse_expression_tokens(self.ts)
                invariants.append(CdInvariant(context, name, body, line))
        self.unsupported()
        return invariants


def parse_class_diagram(source: str) -> CdModel:
    """Parse class-diagram text into an unresolved :class:`CdModel`.

    Raises :class:`~umlinst.errors.UseSyntaxError` with line and column.
    """
    return _CdParser(source).parse()


def format_class_diagram(tree: CdModel) -> str:
    """Canonical text for ``tree``; enums come first, then classes, associations, constraints."""
    out = [f"model {tree.name}", ""]
    for enum in tree.enums:
        out.append(f"enum {enum.name} {{ {', '.join(enum.literals)} }}")
        out.append("")
    for cls in tree.classes:
        head = ("abstract " if cls.is_abstract else "") + f"class {cls.name}"
        if cls.parent:
            head += f" < {cls.parent}"
        out.append(head)
        if cls.attributes:
            out.append("attributes")
            out.extend(f"    {a.name} : {a.type_name}" for a in cls.attributes)
        out.append("end")
        out.append("")
    for assoc in tree.associations:
        out.append(f"association {assoc.name} between")
        for e in (assoc.end_a, assoc.end_b):
            out.append(f"    {e.class_name} [{e.multiplicity.canonical()}] role {e.role}")
        out.append("end")
        out.append("")
    if tree.invariants:
        out.append("constraints")
        for inv in tree.invariants:
            out.append(f"context {inv.context} inv {inv.name}:")
            out.append(f"    {format_expr(inv.body)}")
        out.append("")
    return "\n".join(out).rstrip("\n") + "\n"
