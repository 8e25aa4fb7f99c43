"""Name resolution from a parsed class diagram to a :class:`ClassModel`."""

from __future__ import annotations

from .cd_parser import (
    CdAssociation, CdAttribute, CdClass, CdEnd, CdEnum, CdInvariant, CdModel,
    parse_class_diagram,
)
from .errors import CyclicInheritance, DuplicateName, UnknownClass, UnknownType
from .model import (
    PRIMITIVES, AssocDef, AssocEnd, Attribute, ClassDef, ClassModel, EnumDef,
    EnumType, Invariant,
)
from .ocl import typecheck


def _unique(items, what: str):
    seen = set()
    for item in items:
        if item.name in seen:
            raise DuplicateName(item.name, item.line or None,
                                f"Duplicate {what} name '{item.name}'")
        seen.add(item.name)


def _check_inheritance(classes: dict[str, CdClass]):
    for cls in classes.values():
        if cls.parent is not None and cls.parent not in classes:
            raise UnknownClass(cls.parent, cls.line or None,
                               f"Class '{cls.name}' inherits from unknown class '{cls.parent}'")
    for cls in classes.values():
        seen = {cls.name}
        current = cls.parent
        while current is not None:
            if current in seen:
                raise CyclicInheritance(cls.name, cls.line or None,
                                        f"Cyclic inheritance involving class '{cls.name}'")
            seen.add(current)
            current = classes[current].parent


def resolve_model(raw: CdModel) -> ClassModel:
    """Resolve every name in ``raw`` and type-check its invariants.

    Raises a :class:`~umlinst.errors.ResolutionError` subclass naming the
    offending identifier and source line, or an ``OclTypeError`` for
    ill-typed invariant bodies.
    """
    _unique(raw.enums, "enumeration")
    _unique(raw.classes, "class")
    _unique(raw.associations, "association")
    type_names = {e.name: e for e in raw.enums}
    for cls in raw.classes:
        if cls.name in type_names or cls.name in PRIMITIVES:
            raise DuplicateName(cls.name, cls.line or None,
                                f"Class '{cls.name}' clashes with a type of the same name")
    for enum in raw.enums:
        if enum.name in PRIMITIVES:
            raise DuplicateName(enum.name, enum.line or None,
                                f"Enumeration '{enum.name}' clashes with a primitive type")
        if len(set(enum.literals)) != len(enum.literals):
            dup = next(l for l in enum.literals if enum.literals.count(l) > 1)
            raise DuplicateName(dup, enum.line or None,
                                f"Enumeration '{enum.name}' repeats literal '{dup}'")

    classes = {c.name: c for c in raw.classes}
    _check_inheritance(classes)

    def resolve_type(attr: CdAttribute):
        if attr.type_name in PRIMITIVES:
            return PRIMITIVES[attr.type_name]
        if attr.type_name in type_names:
            return EnumType(attr.type_name)
        raise UnknownType(attr.type_name, attr.line or None,
                          f"Unknown type '{attr.type_name}' for attribute '{attr.name}'")

    def inherited_names(name: str | None) -> set[str]:
        names: set[str] = set()
        while name is not None:
            names.update(a.name for a in classes[name].attributes)
            name = classes[name].parent
        return names

    class_defs = []
    for cls in raw.classes:
        _unique(cls.attributes, f"attribute (in class '{cls.name}')")
        above = inherited_names(cls.parent)
        for attr in cls.attributes:
            if attr.name in above:
                raise DuplicateName(attr.name, attr.line or None,
                                    f"Attribute '{cls.name}.{attr.name}' shadows an inherited attribute")
        class_defs.append(ClassDef(
            cls.name, cls.is_abstract, cls.parent,
            tuple(Attribute(a.name, resolve_type(a)) for a in cls.attributes)))

    assoc_defs = []
    for assoc in raw.associations:
        for end in (assoc.end_a, assoc.end_b):
            if end.class_name not in classes:
                raise UnknownClass(end.class_name, end.line or None,
                                   f"Association '{assoc.name}' refers to unknown class '{end.class_name}'")
        if assoc.end_a.role == assoc.end_b.role:
            raise DuplicateName(assoc.end_a.role, assoc.line or None,
                                f"Association '{assoc.name}' uses role '{assoc.end_a.role}' on both ends")
        assoc_defs.append(AssocDef(
            assoc.name,
            AssocEnd(assoc.end_a.class_name, assoc.end_a.role, assoc.end_a.multiplicity),
            AssocEnd(assoc.end_b.class_name, assoc.end_b.role, assoc.end_b.multiplicity)))

    partial = ClassModel(raw.name, tuple(EnumDef(e.name, e.literals) for e in raw.enums),
                         tuple(class_defs), tuple(assoc_defs))

    # a role must not collide with an attribute, or with another role, as seen
    # from any class that can navigate it
    for cls in class_defs:
        attr_names = {a.name for a in partial.all_attributes(cls.name)}
        seen_roles: dict[str, str] = {}
        for assoc in assoc_defs:
            for src, dst in ((0, 1), (1, 0)):
                if not partial.is_subclass(cls.name, assoc.ends[src].class_name):
                    continue
                role = assoc.ends[dst].role
                line = raw.associations[assoc_defs.index(assoc)].line or None
                if role in attr_names:
                    raise DuplicateName(role, line,
                                        f"Role '{role}' of association '{assoc.name}' collides with "
                                        f"an attribute of class '{cls.name}'")
                key = f"{assoc.name}:{dst}"
                if role in seen_roles and seen_roles[role] != key:
                    raise DuplicateName(role, line,
                                        f"Role '{role}' is navigable twice from class '{cls.name}'")
                seen_roles[role] = key

    invariants = []
    seen_inv = set()
    for inv in raw.invariants:
        if inv.context not in classes:
            raise UnknownClass(inv.context, inv.line or None,
                               f"Invariant '{inv.name}' has unknown context class '{inv.context}'")
        key = (inv.context, inv.name)
        if key in seen_inv:
            raise DuplicateName(inv.name, inv.line or None,
                                f"Duplicate invariant '{inv.context}::{inv.name}'")
        seen_inv.add(key)
        body = typecheck(inv.body, partial, inv.context, expect_boolean=True)
        invariants.append(Invariant(inv.context, inv.name, body))

    return ClassModel(partial.name, partial.enums, partial.classes, partial.associations,
                      tuple(invariants))


def load_model(source: str) -> ClassModel:
    """Parse and resolve class-diagram text in one step."""
    return resolve_model(parse_class_diagram(source))


def to_tree(model: ClassModel) -> CdModel:
    """Inverse of :func:`resolve_model` up to source positions."""
    return CdModel(
        model.name,
        tuple(CdEnum(e.name, e.literals) for e in model.enums),
        tuple(CdClass(c.name, c.is_abstract, c.parent,
                      tuple(CdAttribute(a.name, str(a.type)) for a in c.attributes))
              for c in model.classes),
        tuple(CdAssociation(a.name,
                            CdEnd(a.end_a.class_name, a.end_a.multiplicity, a.end_a.role),
                            CdEnd(a.end_b.class_name, a.end_b.multiplicity, a.end_b.role))
              for a in model.associations),
        tuple(CdInvariant(i.context, i.name, i.body) for i in model.invariants),
    )
