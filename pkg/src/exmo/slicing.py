"""Purpose slicing (EM1 -> EM2) and explainee tailoring (EM2 -> EM3).

Both steps are a variation of program slicing on the explanation forest:
whole branches of irrelevant observables are hidden, and nothing inside a
retained branch is added, removed or altered.  Hiding is an overlay, so
every step is reversible and the element-id sets of all stages coincide.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Any, Iterable

from .emodel import KIND_RESET, KIND_VAR, ExplanationModel, ObservableNode
from .errors import EmptySliceWarning, SelectorWarning, StageMismatch

SUPPRESSED_KINDS = ("var_update_nodes", "clock_reset_nodes",
                    "internal_comparisons")


@dataclass(frozen=True)
class ObservableSelector:
    name: str          # observable name or "*"
    kind: str | None = None

    def matches(self, node_kind: str, node_name: str) -> bool:
        if self.kind is not None and self.kind != node_kind:
            return False
        return self.name == "*" or self.name == node_name

    @classmethod
    def from_dict(cls, d: dict[str, Any] | str) -> ObservableSelector:
        if isinstance(d, str):
            return cls(name=d)
        return cls(name=d["name"], kind=d.get("kind"))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name}
        if self.kind is not None:
            out["kind"] = self.kind
        return out


@dataclass(frozen=True)
class ExplanationPurpose:
    name: str
    relevant_observables: tuple[ObservableSelector, ...]

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExplanationPurpose:
        return cls(d["name"], tuple(ObservableSelector.from_dict(s)
                                    for s in d["relevant_observables"]))

    @classmethod
    def loads(cls, text: str) -> ExplanationPurpose:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name,
                "relevant_observables": [s.to_dict()
                                         for s in self.relevant_observables]}


@dataclass(frozen=True)
class ExplaineeProfile:
    id: str
    explainee_type: str = "end_user"
    relevant_observables: tuple[ObservableSelector, ...] = (
        ObservableSelector("*"),)
    suppressed_reason_kinds: tuple[str, ...] = ()
    verbosity: str = "brief"  # "brief" | "detailed"

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExplaineeProfile:
        suppressed = tuple(d.get("suppressed_reason_kinds", []))
        for token in suppressed:
            if token not in SUPPRESSED_KINDS:
                raise ValueError(f"unknown suppressed reason kind {token!r}")
        return cls(d["id"], d.get("explainee_type", "end_user"),
                   tuple(ObservableSelector.from_dict(s)
                         for s in d.get("relevant_observables", ["*"])),
                   suppressed, d.get("verbosity", "brief"))

    @classmethod
    def loads(cls, text: str) -> ExplaineeProfile:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "explainee_type": self.explainee_type,
                "relevant_observables": [s.to_dict()
                                         for s in self.relevant_observables],
                "suppressed_reason_kinds": list(self.suppressed_reason_kinds),
                "verbosity": self.verbosity}


def matches_any(selectors: Iterable[ObservableSelector],
                kind: str, name: str) -> bool:
    return any(s.matches(kind, name) for s in selectors)


def _hide_subtree(em: ExplanationModel, node: ObservableNode, stage: str) -> None:
    # Never re-flag something an earlier stage already hid.
    for element in em.iter_elements(node):
        if element.hidden_at is None:
            element.hidden_at = stage


def _warn_unmatched(selectors: Iterable[ObservableSelector],
                    roots: list[ObservableNode], step: str) -> None:
    for sel in selectors:
        if sel.name != "*" and not any(sel.matches(n.kind, n.name) for n in roots):
            warnings.warn(SelectorWarning(
                f"{step} selector {sel.to_dict()!r} matches no observable"))


def slice_by_purpose(em: ExplanationModel,
                     purpose: ExplanationPurpose) -> ExplanationModel:
    """Hide every branch whose observable is not connected to the purpose.

    The back-chains of retained branches keep the causal ancestors of
    relevant behaviour available; they are part of the retained subtree
    and stay untouched.
    """
    if em.stage != "EM1":
        raise StageMismatch("EM1", em.stage)
    out = em.copy()
    out.stage = "EM2"
    out.provenance["purpose"] = purpose.name
    _warn_unmatched(purpose.relevant_observables, out.roots, "purpose")
    for node in out.roots:
        if not matches_any(purpose.relevant_observables, node.kind, node.name):
            _hide_subtree(out, node, "EM2")
    if out.roots and all(n.hidden_at is not None for n in out.roots):
        warnings.warn(EmptySliceWarning(
            f"purpose {purpose.name!r} hides every observable"))
    return out


def _is_internal_comparison(atom: dict[str, Any]) -> bool:
    """Comparisons that relate internal variables to each other without any
    named constant; constants are annotatable domain parameters and stay."""
    if atom.get("kind") not in ("cmp", "recv_guard"):
        return False
    return not atom.get("constants")


def slice_by_profile(em: ExplanationModel,
                     profile: ExplaineeProfile) -> ExplanationModel:
    """Tailor EM2 to one explainee: hide roots the explainee does not care
    about plus reason detail of the suppressed kinds."""
    if em.stage != "EM2":
        raise StageMismatch("EM2", em.stage)
    out = em.copy()
    out.stage = "EM3"
    out.provenance["profile"] = profile.id
    visible = [n for n in out.roots if n.hidden_at is None]
    _warn_unmatched(profile.relevant_observables, visible, "profile")
    suppressed_node_kinds = set()
    if "var_update_nodes" in profile.suppressed_reason_kinds:
        suppressed_node_kinds.add(KIND_VAR)
    if "clock_reset_nodes" in profile.suppressed_reason_kinds:
        suppressed_node_kinds.add(KIND_RESET)
    for node in out.roots:
        if node.hidden_at is not None:
            continue
        if (not matches_any(profile.relevant_observables, node.kind, node.name)
                or node.kind in suppressed_node_kinds):
            _hide_subtree(out, node, "EM3")
    if "internal_comparisons" in profile.suppressed_reason_kinds:
        for element in out.iter_all_elements():
            if (getattr(element, "atom", None) is not None
                    and element.hidden_at is None
                    and _is_internal_comparison(element.atom)):
                element.hidden_at = "EM3"
    if out.roots and all(n.hidden_at is not None for n in out.roots):
        warnings.warn(EmptySliceWarning(
            f"profile {profile.id!r} hides every observable"))
    return out


def visible_view(em: ExplanationModel) -> ExplanationModel:
    """A copy with hidden elements removed and overlay flags cleared."""
    out = em.copy()
    out.roots = [n for n in out.roots if n.hidden_at is None]
    for node in out.roots:
        node.cause_groups = [g for g in node.cause_groups if g.hidden_at is None]
        for group in node.cause_groups:
            _strip_hidden(group)
    return out


def _strip_hidden(item) -> None:
    item.reasons = [r for r in item.reasons if r.hidden_at is None]
    item.back_chain = [l for l in item.back_chain if l.hidden_at is None]
    for link in item.back_chain:
        _strip_hidden(link)


def clear_overlay(em: ExplanationModel) -> ExplanationModel:
    """A copy with every hidden flag removed (stage label kept)."""
    out = em.copy()
    for element in out.iter_all_elements():
        element.hidden_at = None
    return out
