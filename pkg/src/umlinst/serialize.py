"""Deterministic JSON documents for class and instance models."""

from __future__ import annotations

import json

from .cd_parser import CdAssociation, CdAttribute, CdClass, CdEnd, CdEnum, CdInvariant, CdModel
from .model import (
    BoolV, ClassModel, EnumV, InstanceModel, IntV, Link, Multiplicity, ObjectSpec,
    RealV, RunProvenance, StringV, UndefinedV, UNDEFINED,
)
from .ocl import format_expr, parse_expression
from .resolve import resolve_model


def dumps(doc) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _mult(m: Multiplicity) -> dict:
    return {"lower": m.lower, "upper": "*" if m.upper is None else m.upper}


def model_to_dict(model: ClassModel) -> dict:
    return {
        "name": model.name,
        "enums": [{"name": e.name, "literals": list(e.literals)} for e in model.enums],
        "classes": [{
            "name": c.name,
            "abstract": c.is_abstract,
            "parent": c.parent,
            "attributes": [{"name": a.name, "type": str(a.type)} for a in c.attributes],
        } for c in model.classes],
        "associations": [{
            "name": a.name,
            "ends": [{"class": e.class_name, "role": e.role, "multiplicity": _mult(e.multiplicity)}
                     for e in a.ends],
        } for a in model.associations],
        "invariants": [{"context": i.context, "name": i.name, "body": format_expr(i.body)}
                       for i in model.invariants],
    }


def model_from_dict(doc: dict) -> ClassModel:
    def end(e):
        upper = e["multiplicity"]["upper"]
        return CdEnd(e["class"], Multiplicity(e["multiplicity"]["lower"],
                                              None if upper == "*" else upper), e["role"])

    tree = CdModel(
        doc["name"],
        tuple(CdEnum(e["name"], tuple(e["literals"])) for e in doc["enums"]),
        tuple(CdClass(c["name"], c["abstract"], c["parent"],
                      tuple(CdAttribute(a["name"], a["type"]) for a in c["attributes"]))
              for c in doc["classes"]),
        tuple(CdAssociation(a["name"], end(a["ends"][0]), end(a["ends"][1]))
              for a in doc["associations"]),
        tuple(CdInvariant(i["context"], i["name"], parse_expression(i["body"]))
              for i in doc["invariants"]),
    )
    return resolve_model(tree)


def value_to_json(v):
    if isinstance(v, IntV):
        return {"Integer": v.value}
    if isinstance(v, RealV):
        return {"Real": v.value}
    if isinstance(v, StringV):
        return {"String": v.value}
    if isinstance(v, BoolV):
        return {"Boolean": v.value}
    if isinstance(v, EnumV):
        return {"Enum": f"{v.enum}::{v.literal}"}
    if isinstance(v, UndefinedV):
        return None
    raise TypeError(v)


def value_from_json(doc):
    if doc is None:
        return UNDEFINED
    (kind, raw), = doc.items()
    if kind == "Integer":
        return IntV(raw)
    if kind == "Real":
        return RealV(float(raw))
    if kind == "String":
        return StringV(raw)
    if kind == "Boolean":
        return BoolV(raw)
    enum, lit = raw.split("::")
    return EnumV(enum, lit)


def instance_to_dict(instance: InstanceModel) -> dict:
    doc = {
        "objects": [{"id": o.object_id, "class": o.class_name,
                     "slots": {k: value_to_json(v) for k, v in o.slots.items()}}
                    for o in instance.objects],
        "links": [{"association": l.assoc, "a": l.object_a, "b": l.object_b}
                  for l in instance.links],
    }
    if instance.provenance is not None:
        p = instance.provenance
        doc["provenance"] = {"strategy": p.strategy, "category": p.category,
                             "repair_rounds_syntax": p.repair_rounds_syntax,
                             "repair_rounds_conformance": p.repair_rounds_conformance}
    return doc


def instance_from_dict(doc: dict) -> InstanceModel:
    prov = doc.get("provenance")
    return InstanceModel(
        tuple(ObjectSpec(o["id"], o["class"], {k: value_from_json(v) for k, v in o["slots"].items()})
              for o in doc["objects"]),
        tuple(Link(l["association"], l["a"], l["b"]) for l in doc["links"]),
        RunProvenance(**prov) if prov else None,
    )
