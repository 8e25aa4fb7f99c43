"""Semantic model for class diagrams and object diagrams.

Everything here is immutable once built. ``ClassModel`` instances are produced
by :func:`umlinst.resolve.resolve_model`; ``InstanceModel`` instances by
:func:`umlinst.soil.execute_soil`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

from .errors import UnknownAssociation, UnknownClass


# --------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class PrimitiveType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class EnumType:
    name: str

    def __str__(self) -> str:
        return self.name


INTEGER = PrimitiveType("Integer")
REAL = PrimitiveType("Real")
STRING = PrimitiveType("String")
BOOLEAN = PrimitiveType("Boolean")
PRIMITIVES = {t.name: t for t in (INTEGER, REAL, STRING, BOOLEAN)}

AttrType = PrimitiveType | EnumType


@dataclass(frozen=True)
class Multiplicity:
    lower: int
    upper: int | None  # None means unbounded

    def __post_init__(self):
        if self.lower < 0 or (self.upper is not None and self.upper < self.lower):
            raise ValueError(f"invalid multiplicity {self.lower}..{self.upper}")

    def admits(self, count: int) -> bool:
        return count >= self.lower and (self.upper is None or count <= self.upper)

    @property
    def is_single(self) -> bool:
        return self.upper is not None and self.upper <= 1

    def range_text(self) -> str:
        """Always ``lo..hi``; used in diagnostics."""
        return f"{self.lower}..{'*' if self.upper is None else self.upper}"

    def canonical(self) -> str:
        """Shortest textual form accepted by the class-diagram parser."""
        if self.lower == 0 and self.upper is None:
            return "*"
        if self.upper == self.lower:
            return str(self.lower)
        return self.range_text()

    def __str__(self) -> str:
        return self.range_text()


MANY = Multiplicity(0, None)


# --------------------------------------------------------------------------
# class diagrams


@dataclass(frozen=True)
class EnumDef:
    name: str
    literals: tuple[str, ...]


@dataclass(frozen=True)
class Attribute:
    name: str
    type: AttrType


@dataclass(frozen=True)
class ClassDef:
    name: str
    is_abstract: bool = False
    parent: str | None = None
    attributes: tuple[Attribute, ...] = ()


@dataclass(frozen=True)
class AssocEnd:
    class_name: str
    role: str
    multiplicity: Multiplicity


@dataclass(frozen=True)
class AssocDef:
    name: str
    end_a: AssocEnd
    end_b: AssocEnd

    @property
    def ends(self) -> tuple[AssocEnd, AssocEnd]:
        return (self.end_a, self.end_b)


@dataclass(frozen=True)
class Invariant:
    context: str
    name: str
    body: Any  # typed ocl expression

    @property
    def qualified_name(self) -> str:
        return f"{self.context}::{self.name}"


@dataclass(frozen=True)
class RoleRef:
    """Navigation target reached through ``role`` from the opposite end."""
    assoc: str
    end: int  # index (0 or 1) of the end the role names
    target_class: str
    multiplicity: Multiplicity


@dataclass(frozen=True)
class ClassModel:
    name: str
    enums: tuple[EnumDef, ...] = ()
    classes: tuple[ClassDef, ...] = ()
    associations: tuple[AssocDef, ...] = ()
    invariants: tuple[Invariant, ...] = ()

    @cached_property
    def _classes(self) -> dict[str, ClassDef]:
        return {c.name: c for c in self.classes}

    @cached_property
    def _enums(self) -> dict[str, EnumDef]:
        return {e.name: e for e in self.enums}

    @cached_property
    def _assocs(self) -> dict[str, AssocDef]:
        return {a.name: a for a in self.associations}

    def has_class(self, name: str) -> bool:
        return name in self._classes

    def get_class(self, name: str) -> ClassDef:
        try:
            return self._classes[name]
        except KeyError:
            raise UnknownClass(name) from None

    def get_enum(self, name: str) -> EnumDef | None:
        return self._enums.get(name)

    def get_association(self, name: str) -> AssocDef:
        try:
            return self._assocs[name]
        except KeyError:
            raise UnknownAssociation(name) from None

    def lineage(self, name: str) -> list[str]:
        """Class names from the root ancestor down to ``name``."""
        chain = []
        current: str | None = name
        while current is not None:
            chain.append(current)
            current = self.get_class(current).parent
        return chain[::-1]

    def is_subclass(self, name: str, ancestor: str) -> bool:
        """True if ``name`` equals ``ancestor`` or descends from it."""
        current: str | None = name
        while current is not None:
            if current == ancestor:
                return True
            current = self.get_class(current).parent
        return False

    @cached_property
    def _flat_attributes(self) -> dict[str, tuple[Attribute, ...]]:
        flat = {}
        for cls in self.classes:
            attrs: list[Attribute] = []
            for name in self.lineage(cls.name):
                attrs.extend(self._classes[name].attributes)
            flat[cls.name] = tuple(attrs)
        return flat

    def all_attributes(self, name: str) -> tuple[Attribute, ...]:
        self.get_class(name)
        return self._flat_attributes[name]

    def attribute(self, class_name: str, attr: str) -> Attribute | None:
        for a in self.all_attributes(class_name):
            if a.name == attr:
                return a
        return None

    def roles(self, class_name: str) -> dict[str, RoleRef]:
        """Role names navigable from objects of ``class_name``."""
        return self._roles[class_name]

    @cached_property
    def _roles(self) -> dict[str, dict[str, RoleRef]]:
        table: dict[str, dict[str, RoleRef]] = {c.name: {} for c in self.classes}
        for cls in self.classes:
            for assoc in self.associations:
                for src, dst in ((0, 1), (1, 0)):
                    if self.is_subclass(cls.name, assoc.ends[src].class_name):
                        end = assoc.ends[dst]
                        table[cls.name].setdefault(
                            end.role, RoleRef(assoc.name, dst, end.class_name, end.multiplicity))
        return table

    def concrete_subclasses(self, name: str) -> list[str]:
        return [c.name for c in self.classes
                if not c.is_abstract and self.is_subclass(c.name, name)]


def all_attributes(model: ClassModel, class_name: str) -> list[tuple[str, AttrType]]:
    """Inherited attributes first (root to leaf), then the class's own."""
    return [(a.name, a.type) for a in model.all_attributes(class_name)]


def conforms_links(model: ClassModel, assoc: str, class_a: str, class_b: str) -> bool:
    """Whether a link from a ``class_a`` object to a ``class_b`` object fits ``assoc``."""
    definition = model.get_association(assoc)
    model.get_class(class_a)
    model.get_class(class_b)
    return (model.is_subclass(class_a, definition.end_a.class_name)
            and model.is_subclass(class_b, definition.end_b.class_name))


# --------------------------------------------------------------------------
# values


@dataclass(frozen=True)
class IntV:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class RealV:
    value: float

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class StringV:
    value: str

    def __str__(self):
        return quote_string(self.value)


@dataclass(frozen=True)
class BoolV:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class EnumV:
    enum: str
    literal: str

    def __str__(self):
        return f"{self.enum}::{self.literal}"


@dataclass(frozen=True)
class UndefinedV:
    def __str__(self):
        return "Undefined"


UNDEFINED = UndefinedV()
TRUE = BoolV(True)
FALSE = BoolV(False)


@dataclass(frozen=True)
class ObjectRef:
    object_id: str

    def __str__(self):
        return self.object_id


@dataclass(frozen=True)
class SetV:
    """Set of object references, kept in object declaration order."""
    items: tuple[ObjectRef, ...] = ()

    def __post_init__(self):
        if len(set(self.items)) != len(self.items):
            raise ValueError("SetV may not contain duplicates")

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __str__(self):
        return "Set{" + ", ".join(str(i) for i in self.items) + "}"


Value = IntV | RealV | StringV | BoolV | EnumV | UndefinedV
EvalValue = IntV | RealV | StringV | BoolV | EnumV | UndefinedV | ObjectRef | SetV


def quote_string(text: str) -> str:
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Diagnostic:
    phase: str  # syntax | typing | multiplicity | invariant
    subject: str
    message: str
    line: int | None = None
    severity: str = "error"
    code: str = ""  # e.g. TypeMismatch, DuplicateLink

    def render(self) -> str:
        if self.line is not None:
            return f"line {self.line}: {self.message}"
        return self.message

    def to_dict(self) -> dict:
        out = {"phase": self.phase, "subject": self.subject, "message": self.message}
        if self.line is not None:
            out["line"] = self.line
        if self.code:
            out["code"] = self.code
        return out


def render_diagnostics(diagnostics) -> str:
    return "\n".join(d.render() for d in diagnostics)


# --------------------------------------------------------------------------
# object diagrams


@dataclass(frozen=True)
class ObjectSpec:
    object_id: str
    class_name: str
    slots: Mapping[str, Value] = field(default_factory=dict)


@dataclass(frozen=True)
class Link:
    assoc: str
    object_a: str
    object_b: str


@dataclass(frozen=True)
class RunProvenance:
    strategy: str | None = None
    category: str | None = None
    repair_rounds_syntax: int = 0
    repair_rounds_conformance: int = 0

    @property
    def expected_nonconforming(self) -> bool:
        return self.category == "OverConstraint"


@dataclass(frozen=True, eq=True)
class InstanceModel:
    objects: tuple[ObjectSpec, ...] = ()
    links: tuple[Link, ...] = ()
    provenance: RunProvenance | None = field(default=None, compare=False)

    __hash__ = None  # slots are dicts

    @cached_property
    def _objects(self) -> dict[str, ObjectSpec]:
        return {o.object_id: o for o in self.objects}

    @cached_property
    def order(self) -> dict[str, int]:
        return {o.object_id: i for i, o in enumerate(self.objects)}

    def get(self, object_id: str) -> ObjectSpec:
        return self._objects[object_id]

    def has_object(self, object_id: str) -> bool:
        return object_id in self._objects

    @cached_property
    def _adjacency(self) -> dict[tuple[str, int, str], list[str]]:
        # (assoc, end index of the object, object id) -> partner ids
        adj: dict[tuple[str, int, str], list[str]] = {}
        for link in self.links:
            adj.setdefault((link.assoc, 0, link.object_a), []).append(link.object_b)
            adj.setdefault((link.assoc, 1, link.object_b), []).append(link.object_a)
        return adj

    def partners(self, assoc: str, own_end: int, object_id: str) -> list[str]:
        """Ids of objects linked to ``object_id`` when it sits at ``own_end``,
        in object declaration order."""
        found = self._adjacency.get((assoc, own_end, object_id), [])
        return sorted(set(found), key=self.order.__getitem__)
