"""Expert annotation (EM3 -> EM4).

An annotation base is an ordered list of entries, each pairing a selector
with a text snippet (and an optional rule citation).  Snippets are modules
from which an explanation can be retrieved later; they attach to visible
elements only, so revealing hidden content later re-annotates against the
same base.  The first matching entry wins; further matches are reported as
warnings in the coverage report.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .emodel import (Annotation, CauseGroup, ExplanationModel, ObservableNode,
                     ReasonElement)
from .errors import DuplicateSelector, StageMismatch


@dataclass(frozen=True)
class AnnotationEntry:
    selector: dict[str, Any]
    snippet: str
    rule: str | None = None


@dataclass
class AnnotationBase:
    entries: list[AnnotationEntry] = field(default_factory=list)

    @classmethod
    def from_list(cls, items: list[dict[str, Any]]) -> AnnotationBase:
        entries = []
        seen: list[dict[str, Any]] = []
        for item in items:
            selector = dict(item["selector"])
            if selector in seen:
                raise DuplicateSelector(selector)
            seen.append(selector)
            entries.append(AnnotationEntry(selector, item["snippet"],
                                           item.get("rule")))
        return cls(entries)

    @classmethod
    def loads(cls, text: str) -> AnnotationBase:
        return cls.from_list(json.loads(text))

    def to_list(self) -> list[dict[str, Any]]:
        out = []
        for e in self.entries:
            d: dict[str, Any] = {"selector": dict(e.selector), "snippet": e.snippet}
            if e.rule is not None:
                d["rule"] = e.rule
            out.append(d)
        return out


def load_annotations(path: str) -> AnnotationBase:
    with open(path, encoding="utf-8") as fh:
        return AnnotationBase.loads(fh.read())


@dataclass
class CoverageReport:
    annotated: int
    unannotated: list[str]  # visible, annotation-eligible element ids
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"annotated": self.annotated,
                "unannotated": list(self.unannotated),
                "warnings": list(self.warnings)}


def _selector_matches(selector: dict[str, Any], element: Any) -> bool:
    kind = selector.get("kind")
    if kind == "observable":
        if not isinstance(element, ObservableNode):
            return False
        if "obs_kind" in selector and element.kind != selector["obs_kind"]:
            return False
        return element.name == selector["name"]
    if kind == "transition":
        if not isinstance(element, CauseGroup):
            return False
        return element.transition == selector["id"]
    if not isinstance(element, ReasonElement):
        return False
    atom = element.atom
    if kind == "clock":
        if atom.get("kind") != "clock" or atom.get("clock") != selector["clock"]:
            return False
        if "rel" in selector and atom.get("rel") != selector["rel"]:
            return False
        if "bound" in selector and atom.get("bound") != selector["bound"]:
            return False
        return True
    if kind == "env":
        if atom.get("kind") != "env" or atom.get("pred") != selector["pred"]:
            return False
        if "negated" in selector and bool(atom.get("negated")) != selector["negated"]:
            return False
        return True
    if kind == "reception":
        return (element.kind == "reception"
                and element.text == selector["pattern"])
    if kind == "cmp":
        return atom.get("kind") == "cmp" and element.text == selector["pattern"]
    if kind == "constant":
        name = selector["name"]
        if atom.get("bound") == name:
            return True
        return name in atom.get("constants", [])
    return False


def match_element(base: AnnotationBase, element: Any
                  ) -> tuple[Annotation | None, int]:
    """First matching entry (declaration order) and the total match count."""
    found: Annotation | None = None
    count = 0
    for entry in base.entries:
        if _selector_matches(entry.selector, element):
            count += 1
            if found is None:
                found = Annotation(entry.snippet, entry.rule)
    return found, count


def annotate(em: ExplanationModel, base: AnnotationBase
             ) -> tuple[ExplanationModel, CoverageReport]:
    """Attach snippets to every visible matching element.

    Accepts EM3 (the normal pipeline step) and EM4 (re-annotation after
    visibility changed).  Structure, ids and visibility are untouched.
    Coverage counts visible observables and visible reason atoms; cause
    groups can carry annotations too but do not enter the arithmetic.
    """
    if em.stage not in ("EM3", "EM4"):
        raise StageMismatch("EM3", em.stage)
    out = em.copy()
    out.stage = "EM4"
    out.provenance["annotations"] = len(base.entries)
    annotated = 0
    unannotated: list[str] = []
    report_warnings: list[str] = []
    for node in out.roots:
        for element in out.iter_elements(node):
            if element.hidden_at is not None:
                if hasattr(element, "annotation"):
                    element.annotation = None
                continue
            if not hasattr(element, "annotation"):
                continue  # chain links carry no annotation slot
            annotation, count = match_element(base, element)
            element.annotation = annotation
            if count > 1:
                report_warnings.append(
                    f"multiple annotation entries match {element.element_id}")
            if isinstance(element, CauseGroup):
                continue  # outside the coverage arithmetic
            if annotation is not None:
                annotated += 1
            else:
                unannotated.append(element.element_id)
    return out, CoverageReport(annotated, unannotated, report_warnings)
