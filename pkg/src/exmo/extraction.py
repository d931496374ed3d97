"""Extraction of the full explanation model (EM1) from a timed automaton.

Observables are the externally visible effects of transitions: channel
outputs, controller actions and variable updates.  Clock resets are an
internal concept and excluded unless configured otherwise.  For each
observable, every transition producing it yields a cause group whose
reasons are the transition's guard atoms, the invariant atoms of its
source location, and its reception predicate.  Back-chains materialize
the loop-free predecessor structure up to ``chain_depth``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

from . import emodel
from .emodel import (CauseGroup, ChainLink, ExplanationModel, ObservableNode,
                     ReasonElement)
from .errors import NoObservablesWarning
from .model import (ClockConstraint, ClockReset, ControllerAction, EnvCheck,
                    RecvSync, SendSync, TimedAutomaton, Transition, VarUpdate)


@dataclass(frozen=True)
class ExtractionConfig:
    include_clock_resets: bool = False
    chain_depth: int = 1


@dataclass(frozen=True)
class Observable:
    kind: str
    name: str
    source: str  # automaton element id of the first declaring occurrence

    @property
    def display_name(self) -> str:
        return emodel.display_name(self.kind, self.name)


def _transition_observables(tr: Transition, config: ExtractionConfig
                            ) -> list[tuple[str, str, str]]:
    """(kind, name, element id) of each observable this transition produces,
    sync output first, then actions in order."""
    out: list[tuple[str, str, str]] = []
    if isinstance(tr.sync, SendSync):
        out.append((emodel.KIND_COMM, tr.sync.channel, f"{tr.id}/sync"))
    for i, act in enumerate(tr.actions):
        if isinstance(act, ControllerAction):
            out.append((emodel.KIND_CTRL, act.name, f"{tr.id}/a{i}"))
        elif isinstance(act, VarUpdate):
            out.append((emodel.KIND_VAR, act.var, f"{tr.id}/a{i}"))
        elif isinstance(act, ClockReset) and config.include_clock_resets:
            out.append((emodel.KIND_RESET, act.clock, f"{tr.id}/a{i}"))
    return out


def enumerate_observables(ta: TimedAutomaton,
                          config: ExtractionConfig = ExtractionConfig()
                          ) -> list[Observable]:
    """Distinct observables in first-occurrence order (transitions in
    declaration order, sync before actions)."""
    seen: dict[tuple[str, str], Observable] = {}
    for tr in ta.transitions:
        for kind, name, source in _transition_observables(tr, config):
            if (kind, name) not in seen:
                seen[(kind, name)] = Observable(kind, name, source)
    return list(seen.values())


def backward_paths(ta: TimedAutomaton, from_transition: str, depth: int
                   ) -> list[list[str]]:
    """All loop-free predecessor sequences ending in ``from_transition``.

    A sequence ``[t_k, ..., t_1, from_transition]`` satisfies
    ``target(t_i) == source(t_(i+1))``, has length at most ``depth + 1``,
    and no location appears twice as a source within it.  Results are
    ordered lexicographically by transition declaration indices.
    """
    anchor = ta.transition(from_transition)
    paths: list[list[str]] = []

    def extend(path: list[Transition], sources: set[str]) -> None:
        paths.append([t.id for t in path])
        if len(path) > depth:
            return
        head = path[0]
        for pred in ta.incoming(head.source):
            if pred.source in sources:
                continue
            extend([pred] + path, sources | {pred.source})

    extend([anchor], {anchor.source})
    paths.sort(key=lambda p: [ta.transition_index(t) for t in p])
    return paths


def _reason_elements(ta: TimedAutomaton, tr: Transition, parent_id: str
                     ) -> list[ReasonElement]:
    """Reasons of one transition: guard atoms, then source-location
    invariants, then the reception predicate."""
    consts = {n for n, _ in ta.constants}
    reasons: list[ReasonElement] = []
    for atom in tr.guard:
        if isinstance(atom, ClockConstraint):
            ad = {"kind": "clock", "clock": atom.clock, "rel": atom.rel,
                  "bound": atom.bound}
        elif isinstance(atom, EnvCheck):
            ad = {"kind": "env", "pred": atom.pred, "negated": atom.negated}
        else:
            ad = {"kind": "cmp", "expr": atom.expr.text,
                  "constants": sorted(atom.expr.names & consts)}
        reasons.append(ReasonElement("", emodel.R_GUARD, tr.id, atom.text, ad))
    for atom in ta.location(tr.source).invariant:
        ad = {"kind": "clock", "clock": atom.clock, "rel": atom.rel,
              "bound": atom.bound}
        reasons.append(ReasonElement("", emodel.R_INVARIANT, tr.source,
                                     atom.text, ad))
    if isinstance(tr.sync, RecvSync) and tr.sync.predicate is not None:
        ad = {"kind": "recv_guard", "chan": tr.sync.channel, "var": tr.sync.var,
              "expr": tr.sync.predicate.text,
              "constants": sorted(tr.sync.predicate.names & consts)}
        reasons.append(ReasonElement("", emodel.R_RECEPTION, tr.id,
                                     tr.sync.predicate.text, ad))
    for i, reason in enumerate(reasons):
        reason.element_id = f"{parent_id}/r{i}"
    return reasons


def _build_chain(ta: TimedAutomaton, tr: Transition, parent_id: str,
                 budget: int, sources: set[str], config: ExtractionConfig
                 ) -> list[ChainLink]:
    if budget <= 0:
        return []
    links: list[ChainLink] = []
    for pred in ta.incoming(tr.source):
        if pred.source in sources:
            continue
        link_id = f"{parent_id}/b:{pred.id}"
        link = ChainLink(
            link_id, pred.id,
            [emodel.display_name(k, n)
             for k, n, _ in _transition_observables(pred, config)],
            _reason_elements(ta, pred, link_id),
            _build_chain(ta, pred, link_id, budget - 1,
                         sources | {pred.source}, config))
        links.append(link)
    return links


def extract_em1(ta: TimedAutomaton,
                config: ExtractionConfig = ExtractionConfig()
                ) -> ExplanationModel:
    """Build the complete explanation model for every observable."""
    roots: list[ObservableNode] = []
    for obs in enumerate_observables(ta, config):
        node_id = f"n:{obs.kind}:{obs.name}"
        node = ObservableNode(node_id, obs.kind, obs.name, obs.source)
        for tr in ta.transitions:
            produced = {(k, n) for k, n, _ in _transition_observables(tr, config)}
            if (obs.kind, obs.name) not in produced:
                continue
            group_id = f"{node_id}/g:{tr.id}"
            node.cause_groups.append(CauseGroup(
                group_id, tr.id,
                _reason_elements(ta, tr, group_id),
                _build_chain(ta, tr, group_id, config.chain_depth,
                             {tr.source}, config)))
        roots.append(node)
    if not roots:
        warnings.warn(NoObservablesWarning(
            f"automaton {ta.name!r} declares no observable effects"))
    return ExplanationModel(
        stage="EM1",
        provenance={"automaton": ta.name,
                    "chain_depth": config.chain_depth,
                    "include_clock_resets": config.include_clock_resets},
        roots=roots)
