"""SOIL-style instance scripts: parsing, execution against a class model, formatting.

Only three command forms exist, one per line::

    !new <Class>('<id>')
    !<id>.<attr> := <literal>
    !insert (<id>, <id>) into <Assoc>

Literals are integers, reals, single-quoted strings (``\\'`` escapes a quote),
``true``/``false``, ``Enum::literal`` and ``Undefined``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import SoilExecutionError, SoilSyntaxError, UnknownAssociation
from .model import (
    BOOLEAN, INTEGER, REAL, STRING, UNDEFINED, BoolV, ClassModel, Diagnostic,
    EnumType, EnumV, InstanceModel, IntV, Link, ObjectSpec, RealV, RunProvenance,
    StringV, UndefinedV, Value, quote_string,
)

_ID = r"[A-Za-z_][A-Za-z0-9_]*"


@dataclass(frozen=True)
class New:
    class_name: str
    object_id: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    object_id: str
    attribute: str
    value: Value
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Insert:
    assoc: str
    object_a: str
    object_b: str
    line: int = field(default=0, compare=False)


SoilCommand = New | Assign | Insert

_NEW = re.compile(rf"!\s*new\s+({_ID})\s*\(\s*'({_ID})'\s*\)")
_ASSIGN = re.compile(rf"!\s*({_ID})\s*\.\s*({_ID})\s*:=\s*(.+)")
_INSERT = re.compile(rf"!\s*insert\s*\(\s*({_ID})\s*,\s*({_ID})\s*\)\s*into\s+({_ID})")

_INT = re.compile(r"[+-]?\d+")
_REAL = re.compile(r"[+-]?(?:\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)")
_STRING = re.compile(r"'((?:[^'\\]|\\.)*)'")
_ENUM = re.compile(rf"({_ID})::({_ID})")


def strip_comment(text: str) -> str:
    in_string = False
    i = 0
    while i < len(text):
        ch = text[i]
        if in_string:
            if ch == "\\":
                i += 1
            elif ch == "'":
                in_string = False
        elif ch == "'":
            in_string = True
        elif text.startswith("--", i):
            return text[:i]
        i += 1
    return text


def parse_literal(text: str) -> Value | None:
    """Parse a SOIL literal; None if ``text`` is not one."""
    text = text.strip()
    if text == "true":
        return BoolV(True)
    if text == "false":
        return BoolV(False)
    if text == "Undefined":
        return UNDEFINED
    if _INT.fullmatch(text):
        return IntV(int(text))
    if _REAL.fullmatch(text):
        number = float(text)
        return RealV(number) if math.isfinite(number) else None
    m = _STRING.fullmatch(text)
    if m:
        return StringV(re.sub(r"\\(.)", r"\1", m.group(1)))
    m = _ENUM.fullmatch(text)
    if m:
        return EnumV(m.group(1), m.group(2))
    return None


def _syntax(line: int, message: str, subject: str = "") -> Diagnostic:
    return Diagnostic("syntax", subject, message, line, code="SyntaxError")


def _parse_line(text: str, line: int) -> SoilCommand | Diagnostic:
    if not text.startswith("!"):
        return _syntax(line, f"Every command must start with '!', found \"{text}\".")
    m = _NEW.fullmatch(text)
    if m:
        return New(m.group(1), m.group(2), line)
    m = _INSERT.fullmatch(text)
    if m:
        return Insert(m.group(3), m.group(1), m.group(2), line)
    m = _ASSIGN.fullmatch(text)
    if m and not re.match(r"!\s*(new|insert)\b", text):
        value = parse_literal(m.group(3))
        if value is None:
            return _syntax(line, f"Invalid value {m.group(3).strip()} in \"{text}\"; expected an "
                           "integer, a real, a quoted string, true, false, Enum::literal or Undefined.",
                           m.group(1))
        return Assign(m.group(1), m.group(2), value, line)
    body = text[1:].lstrip()
    if body.startswith("new"):
        form = "!new <Class>('<objectName>')"
    elif body.startswith("insert"):
        form = "!insert (<object1>, <object2>) into <Association>"
    elif ":=" in body:
        form = "!<object>.<attribute> := <value>"
    else:
        form = "one of !new <Class>('<objectName>'), !<object>.<attribute> := <value>, " \
               "!insert (<object1>, <object2>) into <Association>"
    return _syntax(line, f"Malformed command \"{text}\"; expected {form}.")


def parse_soil(source: str) -> list[SoilCommand]:
    """Parse a script into commands.

    Blank lines and ``--`` comments are skipped. All malformed lines are
    reported together in a :class:`~umlinst.errors.SoilSyntaxError`.
    """
    commands: list[SoilCommand] = []
    errors: list[Diagnostic] = []
    for number, raw in enumerate(source.splitlines(), start=1):
        text = strip_comment(raw).strip()
        if not text:
            continue
        parsed = _parse_line(text, number)
        if isinstance(parsed, Diagnostic):
            errors.append(parsed)
        else:
            commands.append(parsed)
    if errors:
        raise SoilSyntaxError(errors)
    return commands


def _describe(value: Value) -> str:
    if isinstance(value, IntV):
        return f"Integer {value.value}"
    if isinstance(value, RealV):
        return f"Real {value}"
    if isinstance(value, StringV):
        return f"String {quote_string(value.value)}"
    if isinstance(value, BoolV):
        return f"Boolean {value}"
    if isinstance(value, EnumV):
        return f"enumeration literal {value}"
    return "Undefined"


def _coerce(value: Value, expected, model: ClassModel) -> tuple[Value | None, str | None]:
    """Return the stored value, or an explanation when it does not fit ``expected``."""
    if isinstance(value, UndefinedV):
        return value, None
    if expected == INTEGER and isinstance(value, IntV):
        return value, None
    if expected == REAL and isinstance(value, (IntV, RealV)):
        return RealV(float(value.value)), None
    if expected == STRING and isinstance(value, StringV):
        return value, None
    if expected == BOOLEAN and isinstance(value, BoolV):
        return value, None
    if isinstance(expected, EnumType) and isinstance(value, EnumV) and value.enum == expected.name:
        literals = model.get_enum(expected.name).literals
        if value.literal in literals:
            return value, None
        return None, (f"enumeration '{expected.name}' has no literal '{value.literal}' "
                      f"(valid literals: {', '.join(literals)})")
    return None, f"expects a value of type {expected} but got {_describe(value)}"


def execute_soil(commands: list[SoilCommand], model: ClassModel,
                 provenance: RunProvenance | None = None) -> InstanceModel:
    """Run ``commands`` against ``model`` and build the resulting object diagram.

    Every problem in the script is collected; if there is at least one, a
    :class:`~umlinst.errors.SoilExecutionError` carrying all diagnostics is
    raised and no instance is produced.
    """
    diags: list[Diagnostic] = []
    objects: dict[str, dict] = {}       # id -> {"class": name, "slots": {...}, "line": n}
    poisoned: set[str] = set()          # ids whose creation already failed
    links: list[Link] = []
    link_lines: dict[Link, int] = {}

    def typing(line, subject, code, message):
        diags.append(Diagnostic("typing", subject, message, line, code=code))

    def lookup(obj_id: str, line: int, usage: str) -> dict | None:
        if obj_id in poisoned:
            return None
        if obj_id not in objects:
            typing(line, obj_id, "UnknownObject",
                   f"Object '{obj_id}' is {usage} but no object with that name has been created before.")
            return None
        return objects[obj_id]

    for cmd in commands:
        if isinstance(cmd, New):
            if cmd.object_id in objects or cmd.object_id in poisoned:
                first = objects.get(cmd.object_id, {}).get("line")
                where = f" (first created on line {first})" if first else ""
                typing(cmd.line, cmd.object_id, "DuplicateObjectId",
                       f"Object '{cmd.object_id}' is created twice{where}; object names must be unique.")
                continue
            if not model.has_class(cmd.class_name):
                typing(cmd.line, cmd.object_id, "UnknownClass",
                       f"Cannot create object '{cmd.object_id}' because class '{cmd.class_name}' "
                       "does not exist in the model.")
                poisoned.add(cmd.object_id)
                continue
            if model.get_class(cmd.class_name).is_abstract:
                typing(cmd.line, cmd.object_id, "AbstractClassInstantiated",
                       f"Cannot create object '{cmd.object_id}' because class '{cmd.class_name}' "
                       "is abstract; instantiate one of its concrete subclasses instead.")
                poisoned.add(cmd.object_id)
                continue
            slots = {a.name: UNDEFINED for a in model.all_attributes(cmd.class_name)}
            objects[cmd.object_id] = {"class": cmd.class_name, "slots": slots, "line": cmd.line}
        elif isinstance(cmd, Assign):
            obj = lookup(cmd.object_id, cmd.line, f"assigned attribute '{cmd.attribute}'")
            if obj is None:
                continue
            attr = model.attribute(obj["class"], cmd.attribute)
            if attr is None:
                typing(cmd.line, cmd.object_id, "UnknownAttribute",
                       f"Class '{obj['class']}' has no attribute '{cmd.attribute}' "
                       f"(assigned on object '{cmd.object_id}').")
                continue
            stored, problem = _coerce(cmd.value, attr.type, model)
            if problem:
                typing(cmd.line, cmd.object_id, "TypeMismatch",
                       f"Attribute '{cmd.object_id}.{cmd.attribute}' of class '{obj['class']}' {problem}.")
                continue
            obj["slots"][cmd.attribute] = stored
        else:
            try:
                assoc = model.get_association(cmd.assoc)
            except UnknownAssociation:
                typing(cmd.line, cmd.assoc, "UnknownAssociation",
                       f"Association '{cmd.assoc}' does not exist in the model "
                       f"(used to link '{cmd.object_a}' and '{cmd.object_b}').")
                continue
            usage = f"linked through association '{cmd.assoc}'"
            a = lookup(cmd.object_a, cmd.line, usage)
            b = lookup(cmd.object_b, cmd.line, usage)
            if a is None or b is None:
                continue
            if not (model.is_subclass(a["class"], assoc.end_a.class_name)
                    and model.is_subclass(b["class"], assoc.end_b.class_name)):
                typing(cmd.line, cmd.assoc, "WrongEndTypes",
                       f"Link ({cmd.object_a}, {cmd.object_b}) does not fit association '{cmd.assoc}': "
                       f"it expects objects of classes ({assoc.end_a.class_name}, {assoc.end_b.class_name}) "
                       f"in this order but got ({a['class']}, {b['class']}).")
                continue
            link = Link(cmd.assoc, cmd.object_a, cmd.object_b)
            if link in link_lines:
                typing(cmd.line, cmd.assoc, "DuplicateLink",
                       f"Link ({cmd.object_a}, {cmd.object_b}) is inserted into association "
                       f"'{cmd.assoc}' twice (first on line {link_lines[link]}).")
                continue
            link_lines[link] = cmd.line
            links.append(link)

    if diags:
        raise SoilExecutionError(diags)
    return InstanceModel(
        tuple(ObjectSpec(oid, o["class"], o["slots"]) for oid, o in objects.items()),
        tuple(links),
        provenance,
    )


def load_instance(source: str, model: ClassModel) -> InstanceModel:
    return execute_soil(parse_soil(source), model)


def format_literal(value: Value) -> str:
    if isinstance(value, RealV):
        return repr(float(value.value))
    return str(value)


def format_soil(instance: InstanceModel) -> str:
    """Creations first, then assignments of defined slots, then link insertions."""
    lines = [f"!new {o.class_name}('{o.object_id}')" for o in instance.objects]
    for o in instance.objects:
        for name, value in o.slots.items():
            if not isinstance(value, UndefinedV):
                lines.append(f"!{o.object_id}.{name} := {format_literal(value)}")
    lines.extend(f"!insert ({l.object_a}, {l.object_b}) into {l.assoc}" for l in instance.links)
    return "\n".join(lines) + ("\n" if lines else "")
