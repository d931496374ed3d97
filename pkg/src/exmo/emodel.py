"""Explanation model data structures and their JSON form.

An explanation model is a forest: one :class:`ObservableNode` per
observable, each holding one :class:`CauseGroup` per transition that can
produce the observable.  A cause group lists the reasons of its transition
(guard atoms, source-location invariants, reception predicate) and a
back-chain of :class:`ChainLink` entries describing the transitions that
can enter the source location, materialized per root up to the extraction
chain depth and loop-free.

Stages share element ids.  Slicing and personalization never remove
elements; they set ``hidden_at`` overlay flags ("EM2", "EM3", or the
session-only "EM5").
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterator

STAGES = ("EM1", "EM2", "EM3", "EM4", "EM5")
FORMAT = "explanation-model/1"

# Observable kinds.
KIND_COMM = "comm"     # channel output, displayed with a trailing "!"
KIND_CTRL = "ctrl"     # controller action
KIND_VAR = "var"       # variable update
KIND_RESET = "reset"   # clock reset (excluded from extraction by default)

# Reason kinds.
R_GUARD = "guard"
R_INVARIANT = "invariant"
R_RECEPTION = "reception"


@dataclass
class Annotation:
    snippet: str
    rule: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"snippet": self.snippet}
        if self.rule is not None:
            out["rule"] = self.rule
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Annotation:
        return cls(d["snippet"], d.get("rule"))


@dataclass
class ReasonElement:
    """One reason atom placement inside a cause group or chain link."""

    element_id: str
    kind: str               # guard | invariant | reception
    origin: str             # transition id (guard/reception) or location id
    text: str               # normalized atom text, e.g. "pc >= pE + s"
    atom: dict[str, Any]    # serialized atom
    hidden_at: str | None = None
    annotation: Annotation | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"element_id": self.element_id, "kind": self.kind,
                "origin": self.origin, "text": self.text, "atom": self.atom,
                "hidden_at": self.hidden_at,
                "annotation": self.annotation.to_dict() if self.annotation else None}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ReasonElement:
        ann = d.get("annotation")
        return cls(d["element_id"], d["kind"], d["origin"], d["text"],
                   dict(d["atom"]), d.get("hidden_at"),
                   Annotation.from_dict(ann) if ann else None)


@dataclass
class ChainLink:
    """Back-chain entry for one predecessor transition."""

    element_id: str
    transition: str
    observables: list[str]  # display names of observables on that transition
    reasons: list[ReasonElement]
    back_chain: list[ChainLink] = field(default_factory=list)
    hidden_at: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"element_id": self.element_id, "transition": self.transition,
                "observables": list(self.observables),
                "reasons": [r.to_dict() for r in self.reasons],
                "back_chain": [l.to_dict() for l in self.back_chain],
                "hidden_at": self.hidden_at}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ChainLink:
        return cls(d["element_id"], d["transition"], list(d["observables"]),
                   [ReasonElement.from_dict(r) for r in d["reasons"]],
                   [ChainLink.from_dict(l) for l in d["back_chain"]],
                   d.get("hidden_at"))


@dataclass
class CauseGroup:
    element_id: str
    transition: str
    reasons: list[ReasonElement]
    back_chain: list[ChainLink] = field(default_factory=list)
    hidden_at: str | None = None
    annotation: Annotation | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"element_id": self.element_id, "transition": self.transition,
                "reasons": [r.to_dict() for r in self.reasons],
                "back_chain": [l.to_dict() for l in self.back_chain],
                "hidden_at": self.hidden_at,
                "annotation": self.annotation.to_dict() if self.annotation else None}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CauseGroup:
        ann = d.get("annotation")
        return cls(d["element_id"], d["transition"],
                   [ReasonElement.from_dict(r) for r in d["reasons"]],
                   [ChainLink.from_dict(l) for l in d["back_chain"]],
                   d.get("hidden_at"), Annotation.from_dict(ann) if ann else None)


def display_name(kind: str, name: str) -> str:
    return f"{name}!" if kind == KIND_COMM else name


@dataclass
class ObservableNode:
    element_id: str
    kind: str
    name: str
    source: str  # automaton element id of the first declaring sync/action
    cause_groups: list[CauseGroup] = field(default_factory=list)
    hidden_at: str | None = None
    annotation: Annotation | None = None

    @property
    def display_name(self) -> str:
        return display_name(self.kind, self.name)

    def to_dict(self) -> dict[str, Any]:
        return {"element_id": self.element_id, "kind": self.kind,
                "name": self.name, "display_name": self.display_name,
                "source": self.source,
                "cause_groups": [g.to_dict() for g in self.cause_groups],
                "hidden_at": self.hidden_at,
                "annotation": self.annotation.to_dict() if self.annotation else None}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ObservableNode:
        ann = d.get("annotation")
        return cls(d["element_id"], d["kind"], d["name"], d["source"],
                   [CauseGroup.from_dict(g) for g in d["cause_groups"]],
                   d.get("hidden_at"), Annotation.from_dict(ann) if ann else None)


@dataclass
class ExplanationModel:
    stage: str
    provenance: dict[str, Any]
    roots: list[ObservableNode]

    def to_dict(self) -> dict[str, Any]:
        return {"format": FORMAT, "stage": self.stage,
                "provenance": dict(self.provenance),
                "roots": [n.to_dict() for n in self.roots]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExplanationModel:
        if d.get("format") != FORMAT:
            raise ValueError(f"unsupported explanation model format: {d.get('format')!r}")
        if d.get("stage") not in STAGES:
            raise ValueError(f"unknown stage {d.get('stage')!r}")
        return cls(d["stage"], dict(d["provenance"]),
                   [ObservableNode.from_dict(n) for n in d["roots"]])

    @classmethod
    def loads(cls, text: str) -> ExplanationModel:
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str) -> ExplanationModel:
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def copy(self) -> ExplanationModel:
        return ExplanationModel.from_dict(self.to_dict())

    # ------------------------------------------------------------ helpers

    def find_node(self, selector: str) -> ObservableNode | None:
        """Resolve a node by element id, ``kind:name``, display name or
        bare name."""
        for node in self.roots:
            if selector in (node.element_id, f"{node.kind}:{node.name}",
                            node.display_name, node.name):
                return node
        return None

    def iter_elements(self, node: ObservableNode) -> Iterator[Any]:
        """All elements of one root subtree, the node itself included,
        in deterministic pre-order."""
        yield node
        stack: list[Any] = list(reversed(node.cause_groups))
        while stack:
            item = stack.pop()
            yield item
            if isinstance(item, (CauseGroup, ChainLink)):
                stack.extend(reversed(item.back_chain))
                stack.extend(reversed(item.reasons))

    def iter_all_elements(self) -> Iterator[Any]:
        for node in self.roots:
            yield from self.iter_elements(node)

    def element_ids(self) -> list[str]:
        return [e.element_id for e in self.iter_all_elements()]

    def visible_element_ids(self) -> list[str]:
        """Ids of elements with no hidden flag on themselves or any ancestor."""
        out: list[str] = []
        for node in self.roots:
            if node.hidden_at is not None:
                continue
            out.append(node.element_id)
            for group in node.cause_groups:
                out.extend(_visible_under(group))
        return out


def _visible_under(item: CauseGroup | ChainLink) -> list[str]:
    if item.hidden_at is not None:
        return []
    out = [item.element_id]
    for reason in item.reasons:
        if reason.hidden_at is None:
            out.append(reason.element_id)
    for link in item.back_chain:
        out.extend(_visible_under(link))
    return out
