"""Prompt template catalog with ``{{placeholder}}`` substitution."""

from __future__ import annotations

import re
from enum import Enum
from functools import lru_cache
from importlib.resources import files

from ..errors import MissingBinding

PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")

TEMPLATE_IDS = (
    "il_system", "il_user", "next_instance", "correct",
    "analysis_system", "analysis_user", "scenario_system", "scenario_user",
    "instantiate_system", "instantiate_user",
    "category_base", "category_complex", "category_boundary", "category_edge",
    "category_overconstraint",
)


@lru_cache(maxsize=None)
def load_template(template_id: str) -> str:
    if template_id not in TEMPLATE_IDS:
        raise KeyError(f"unknown template {template_id!r}")
    return (files("umlinst") / "templates" / f"{template_id}.txt").read_text(encoding="utf-8")


def placeholders(template_id: str) -> list[str]:
    return PLACEHOLDER.findall(load_template(template_id))


def render_prompt(template_id: str, bindings: dict[str, str] | None = None) -> str:
    """Substitute every placeholder in one pass; bound text is never re-scanned."""
    bindings = bindings or {}
    text = load_template(template_id)
    for name in PLACEHOLDER.findall(text):
        if name not in bindings:
            raise MissingBinding(name, template_id)
    return PLACEHOLDER.sub(lambda m: bindings[m.group(1)], text)


class Category(str, Enum):
    BASE = "Base"
    COMPLEX = "Complex"
    BOUNDARY = "Boundary"
    EDGE = "Edge"
    OVERCONSTRAINT = "OverConstraint"

    @property
    def template_id(self) -> str:
        return f"category_{self.value.lower()}"

    @property
    def prompt_text(self) -> str:
        return load_template(self.template_id)

    @property
    def expected_nonconforming(self) -> bool:
        return self is Category.OVERCONSTRAINT

    @classmethod
    def parse(cls, name: str) -> "Category":
        for c in cls:
            if name.replace("-", "").replace("_", "").lower() == c.value.lower():
                return c
        raise ValueError(f"unknown category {name!r}; expected one of "
                         + ", ".join(c.value for c in cls))


ALL_CATEGORIES = tuple(Category)
