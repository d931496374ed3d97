"""Timed-automaton model: types, JSON format, validation.

The document format is a single JSON object with the keys ``name``,
``clocks``, ``variables``, ``channels``, ``env_predicates``, ``constants``,
``locations``, ``transitions`` and ``initial_location``.  Guard atoms are
tagged objects::

    {"kind": "clock", "clock": "x", "rel": ">=", "bound": "t_w"}
    {"kind": "env", "pred": "path_coll", "negated": true}
    {"kind": "cmp", "expr": "count_m >= 1"}
    {"kind": "recv_guard", "expr": "pc >= pE + s"}

A ``recv_guard`` atom is the reception predicate of the transition's
guarded input sync and requires ``"sync": {"kind": "recv", ...}`` on the
same transition.  Actions are ``{"kind": "ctrl", "name": ...}``,
``{"kind": "update", "var": ..., "expr": ...}`` and
``{"kind": "reset", "clock": ...}``.  An optional ``engine`` key carries
run-time hints that are not part of the automaton semantics proper, such
as the waiting-priority rule of the crossing controller.

All model types are immutable; operations on them return new values.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import (DuplicateId, MissingInitialLocation, ModelSyntaxError,
                     UndeclaredSymbol)
from .exprs import Expr, parse_expr

RELATIONS = ("<", "<=", "=", ">=", ">")


@dataclass(frozen=True)
class ClockConstraint:
    clock: str
    rel: str
    bound: int | str  # literal or constant name

    @property
    def text(self) -> str:
        return f"{self.clock} {self.rel} {self.bound}"

    def holds(self, value: int, constants: Mapping[str, int]) -> bool:
        bound = self.bound if isinstance(self.bound, int) else constants[self.bound]
        return {"<": value < bound, "<=": value <= bound, "=": value == bound,
                ">=": value >= bound, ">": value > bound}[self.rel]


@dataclass(frozen=True)
class EnvCheck:
    """Boolean environment predicate occurring in a guard."""

    pred: str
    negated: bool = False

    @property
    def text(self) -> str:
        return f"!{self.pred}" if self.negated else self.pred

    def holds(self, env: Mapping[str, bool]) -> bool:
        value = bool(env.get(self.pred, False))
        return not value if self.negated else value


@dataclass(frozen=True)
class VarComparison:
    expr: Expr

    @property
    def text(self) -> str:
        return self.expr.text


GuardAtom = ClockConstraint | EnvCheck | VarComparison


@dataclass(frozen=True)
class SendSync:
    channel: str
    payload: Expr

    @property
    def text(self) -> str:
        return f"{self.channel}!{self.payload.text}"


@dataclass(frozen=True)
class RecvSync:
    channel: str
    var: str
    predicate: Expr | None = None

    @property
    def text(self) -> str:
        base = f"{self.channel}?{self.var}"
        if self.predicate is not None:
            base += f" : {self.predicate.text}"
        return base


Sync = SendSync | RecvSync


@dataclass(frozen=True)
class ControllerAction:
    name: str


@dataclass(frozen=True)
class VarUpdate:
    var: str
    expr: Expr


@dataclass(frozen=True)
class ClockReset:
    clock: str


Action = ControllerAction | VarUpdate | ClockReset


@dataclass(frozen=True)
class VariableDecl:
    name: str
    domain: str = "int"  # "int" or "bool"
    init: int = 0


@dataclass(frozen=True)
class Channel:
    name: str
    arity: int = 1


@dataclass(frozen=True)
class Location:
    id: str
    name: str
    invariant: tuple[ClockConstraint, ...] = ()


@dataclass(frozen=True)
class Transition:
    id: str
    source: str
    target: str
    guard: tuple[GuardAtom, ...] = ()
    sync: Sync | None = None
    actions: tuple[Action, ...] = ()


@dataclass(frozen=True)
class PriorityRule:
    """Engine hint: ``var`` grows by ``increment`` per time unit spent in
    ``location``."""

    location: str
    var: str
    increment: int = 1


@dataclass(frozen=True)
class EngineHints:
    waiting_priority: tuple[PriorityRule, ...] = ()


@dataclass(frozen=True)
class TimedAutomaton:
    name: str
    clocks: tuple[str, ...]
    variables: tuple[VariableDecl, ...]
    channels: tuple[Channel, ...]
    env_predicates: tuple[str, ...]
    constants: tuple[tuple[str, int], ...]
    locations: tuple[Location, ...]
    transitions: tuple[Transition, ...]
    initial_location: str
    engine: EngineHints = field(default=EngineHints())

    @property
    def constant_map(self) -> dict[str, int]:
        return dict(self.constants)

    def location(self, ident: str) -> Location:
        for loc in self.locations:
            if loc.id == ident:
                return loc
        raise KeyError(ident)

    def transition(self, ident: str) -> Transition:
        for tr in self.transitions:
            if tr.id == ident:
                return tr
        raise KeyError(ident)

    def outgoing(self, location_id: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.source == location_id)

    def incoming(self, location_id: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.target == location_id)

    def transition_index(self, ident: str) -> int:
        for i, tr in enumerate(self.transitions):
            if tr.id == ident:
                return i
        raise KeyError(ident)

    @property
    def clock_cap(self) -> int:
        """One past the largest clock bound; clock values saturate here."""
        bounds = [v for _, v in self.constants]
        for loc in self.locations:
            bounds.extend(c.bound for c in loc.invariant if isinstance(c.bound, int))
        for tr in self.transitions:
            bounds.extend(a.bound for a in tr.guard
                          if isinstance(a, ClockConstraint) and isinstance(a.bound, int))
        return max(bounds, default=0) + 1


@dataclass(frozen=True)
class Diagnostic:
    code: str  # "unreachable" | "deadlock"
    location: str
    message: str


# ---------------------------------------------------------------- parsing

def _req(d: Mapping[str, Any], key: str, site: str) -> Any:
    if key not in d:
        raise ModelSyntaxError(f"missing key {key!r} in {site}")
    return d[key]


def _parse_clock_atom(d: Mapping[str, Any], site: str) -> ClockConstraint:
    rel = _req(d, "rel", site)
    if rel == "==":
        rel = "="
    if rel not in RELATIONS:
        raise ModelSyntaxError(f"bad relation {rel!r} in {site}")
    bound = _req(d, "bound", site)
    if not isinstance(bound, (int, str)) or isinstance(bound, bool):
        raise ModelSyntaxError(f"bad bound {bound!r} in {site}")
    return ClockConstraint(_req(d, "clock", site), rel, bound)


def _parse_guard_atom(d: Mapping[str, Any], site: str) -> GuardAtom | Expr:
    kind = _req(d, "kind", site)
    if kind == "clock":
        return _parse_clock_atom(d, site)
    if kind == "env":
        return EnvCheck(_req(d, "pred", site), bool(d.get("negated", False)))
    if kind == "cmp":
        expr = parse_expr(_req(d, "expr", site))
        if not expr.is_comparison:
            raise ModelSyntaxError(f"cmp atom is not a comparison in {site}")
        return VarComparison(expr)
    if kind == "recv_guard":
        expr = parse_expr(_req(d, "expr", site))
        if not expr.is_comparison:
            raise ModelSyntaxError(f"recv_guard atom is not a comparison in {site}")
        return expr  # folded into the transition's RecvSync
    raise ModelSyntaxError(f"unknown guard atom kind {kind!r} in {site}")


def _parse_action(d: Mapping[str, Any], site: str) -> Action:
    kind = _req(d, "kind", site)
    if kind == "ctrl":
        return ControllerAction(_req(d, "name", site))
    if kind == "update":
        return VarUpdate(_req(d, "var", site), parse_expr(_req(d, "expr", site)))
    if kind == "reset":
        return ClockReset(_req(d, "clock", site))
    raise ModelSyntaxError(f"unknown action kind {kind!r} in {site}")


def _parse_transition(d: Mapping[str, Any], index: int) -> Transition:
    site = f"transitions[{index}]"
    ident = d.get("id", f"t{index}")
    guard: list[GuardAtom] = []
    recv_pred: Expr | None = None
    for i, atom in enumerate(_req(d, "guard", site) if "guard" in d else []):
        parsed = _parse_guard_atom(atom, f"{site}.guard[{i}]")
        if isinstance(parsed, Expr):
            if recv_pred is not None:
                raise ModelSyntaxError(f"multiple recv_guard atoms in {site}")
            recv_pred = parsed
        else:
            guard.append(parsed)
    sync: Sync | None = None
    if d.get("sync") is not None:
        s = d["sync"]
        skind = _req(s, "kind", f"{site}.sync")
        if skind == "send":
            sync = SendSync(_req(s, "chan", site), parse_expr(_req(s, "payload", site)))
        elif skind == "recv":
            sync = RecvSync(_req(s, "chan", site), _req(s, "var", site), recv_pred)
        else:
            raise ModelSyntaxError(f"unknown sync kind {skind!r} in {site}")
    if recv_pred is not None and not isinstance(sync, RecvSync):
        raise ModelSyntaxError(f"recv_guard without a recv sync in {site}")
    actions = tuple(_parse_action(a, f"{site}.actions[{i}]")
                    for i, a in enumerate(d.get("actions", [])))
    return Transition(ident, _req(d, "source", site), _req(d, "target", site),
                      tuple(guard), sync, actions)


def model_from_dict(doc: Mapping[str, Any]) -> TimedAutomaton:
    if not isinstance(doc, Mapping):
        raise ModelSyntaxError("model document must be a JSON object")
    name = _req(doc, "name", "model")
    clocks = tuple(_req(doc, "clocks", "model"))
    variables = tuple(
        VariableDecl(_req(v, "name", f"variables[{i}]"),
                     v.get("domain", "int"), int(v.get("init", 0)))
        for i, v in enumerate(_req(doc, "variables", "model")))
    channels = tuple(Channel(_req(c, "name", f"channels[{i}]"), int(c.get("arity", 1)))
                     for i, c in enumerate(doc.get("channels", [])))
    env_predicates = tuple(doc.get("env_predicates", []))
    constants = tuple((_req(c, "name", f"constants[{i}]"), int(_req(c, "value", "constant")))
                      for i, c in enumerate(doc.get("constants", [])))
    locations = tuple(
        Location(_req(l, "id", f"locations[{i}]"), l.get("name", l.get("id", "")),
                 tuple(_parse_clock_atom(a, f"locations[{i}].invariant[{j}]")
                       for j, a in enumerate(l.get("invariant", []))))
        for i, l in enumerate(_req(doc, "locations", "model")))
    transitions = tuple(_parse_transition(t, i)
                        for i, t in enumerate(_req(doc, "transitions", "model")))
    engine = EngineHints()
    if doc.get("engine"):
        rules = tuple(PriorityRule(_req(r, "location", "engine"), _req(r, "var", "engine"),
                                   int(r.get("increment", 1)))
                      for r in doc["engine"].get("waiting_priority", []))
        engine = EngineHints(waiting_priority=rules)
    ta = TimedAutomaton(name, clocks, variables, channels, env_predicates,
                        constants, locations, transitions,
                        _req(doc, "initial_location", "model"), engine)
    _check_declarations(ta)
    return ta


def parse_model(text: str) -> TimedAutomaton:
    """Parse a model document; raises :class:`ModelSyntaxError`,
    :class:`UndeclaredSymbol`, :class:`DuplicateId` or
    :class:`MissingInitialLocation`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, line=exc.lineno) from exc
    return model_from_dict(doc)


def load_model(path: str) -> TimedAutomaton:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def _check_declarations(ta: TimedAutomaton) -> None:
    for kind, idents in (("location", [l.id for l in ta.locations]),
                         ("transition", [t.id for t in ta.transitions]),
                         ("variable", [v.name for v in ta.variables]),
                         ("clock", list(ta.clocks)),
                         ("channel", [c.name for c in ta.channels]),
                         ("constant", [n for n, _ in ta.constants])):
        seen: set[str] = set()
        for ident in idents:
            if ident in seen:
                raise DuplicateId(kind, ident)
            seen.add(ident)
    loc_ids = {l.id for l in ta.locations}
    if ta.initial_location not in loc_ids:
        raise MissingInitialLocation(ta.initial_location)
    var_names = {v.name for v in ta.variables}
    const_names = {n for n, _ in ta.constants}
    chan_names = {c.name for c in ta.channels}
    scope = var_names | const_names

    def check_clock_atom(atom: ClockConstraint, site: str) -> None:
        if atom.clock not in ta.clocks:
            raise UndeclaredSymbol(atom.clock, site)
        if isinstance(atom.bound, str) and atom.bound not in const_names:
            raise UndeclaredSymbol(atom.bound, site)

    def check_expr(expr: Expr, site: str, extra: frozenset[str] = frozenset()) -> None:
        for symbol in sorted(expr.names - scope - extra):
            raise UndeclaredSymbol(symbol, site)

    for loc in ta.locations:
        for atom in loc.invariant:
            check_clock_atom(atom, f"location {loc.id}")
    for tr in ta.transitions:
        site = f"transition {tr.id}"
        if tr.source not in loc_ids:
            raise UndeclaredSymbol(tr.source, site)
        if tr.target not in loc_ids:
            raise UndeclaredSymbol(tr.target, site)
        for atom in tr.guard:
            if isinstance(atom, ClockConstraint):
                check_clock_atom(atom, site)
            elif isinstance(atom, EnvCheck):
                if atom.pred not in ta.env_predicates:
                    raise UndeclaredSymbol(atom.pred, site)
            else:
                check_expr(atom.expr, site)
        if isinstance(tr.sync, SendSync):
            if tr.sync.channel not in chan_names:
                raise UndeclaredSymbol(tr.sync.channel, site)
            check_expr(tr.sync.payload, site)
        elif isinstance(tr.sync, RecvSync):
            if tr.sync.channel not in chan_names:
                raise UndeclaredSymbol(tr.sync.channel, site)
            if tr.sync.var not in var_names:
                raise UndeclaredSymbol(tr.sync.var, site)
            if tr.sync.predicate is not None:
                check_expr(tr.sync.predicate, site, frozenset({tr.sync.var}))
        for act in tr.actions:
            if isinstance(act, VarUpdate):
                if act.var not in var_names:
                    raise UndeclaredSymbol(act.var, site)
                check_expr(act.expr, site)
            elif isinstance(act, ClockReset):
                if act.clock not in ta.clocks:
                    raise UndeclaredSymbol(act.clock, site)


# ------------------------------------------------------------ validation

def validate_model(ta: TimedAutomaton) -> list[Diagnostic]:
    """Structural diagnostics: unreachable locations and deadlock locations
    (upper-bounded invariant with no outgoing transition).  Never mutates."""
    diagnostics: list[Diagnostic] = []
    reachable = {ta.initial_location}
    frontier = [ta.initial_location]
    while frontier:
        loc = frontier.pop()
        for tr in ta.outgoing(loc):
            if tr.target not in reachable:
                reachable.add(tr.target)
                frontier.append(tr.target)
    for loc in ta.locations:
        if loc.id not in reachable:
            diagnostics.append(Diagnostic(
                "unreachable", loc.id,
                f"location {loc.id} is unreachable from {ta.initial_location}"))
        upper = any(c.rel in ("<", "<=", "=") for c in loc.invariant)
        if upper and not ta.outgoing(loc.id):
            diagnostics.append(Diagnostic(
                "deadlock", loc.id,
                f"location {loc.id} has an upper-bounded invariant and no exit"))
    return diagnostics


# --------------------------------------------------------- serialization

def _guard_atom_to_dict(atom: GuardAtom) -> dict[str, Any]:
    if isinstance(atom, ClockConstraint):
        out: dict[str, Any] = {"kind": "clock", "clock": atom.clock,
                               "rel": atom.rel, "bound": atom.bound}
        return out
    if isinstance(atom, EnvCheck):
        out = {"kind": "env", "pred": atom.pred}
        if atom.negated:
            out["negated"] = True
        return out
    return {"kind": "cmp", "expr": atom.expr.text}


def _action_to_dict(act: Action) -> dict[str, Any]:
    if isinstance(act, ControllerAction):
        return {"kind": "ctrl", "name": act.name}
    if isinstance(act, VarUpdate):
        return {"kind": "update", "var": act.var, "expr": act.expr.text}
    return {"kind": "reset", "clock": act.clock}


def model_to_dict(ta: TimedAutomaton) -> dict[str, Any]:
    transitions = []
    for tr in ta.transitions:
        td: dict[str, Any] = {"id": tr.id, "source": tr.source, "target": tr.target,
                              "guard": [_guard_atom_to_dict(a) for a in tr.guard]}
        if isinstance(tr.sync, RecvSync) and tr.sync.predicate is not None:
            td["guard"].append({"kind": "recv_guard", "expr": tr.sync.predicate.text})
        if isinstance(tr.sync, SendSync):
            td["sync"] = {"kind": "send", "chan": tr.sync.channel,
                          "payload": tr.sync.payload.text}
        elif isinstance(tr.sync, RecvSync):
            td["sync"] = {"kind": "recv", "chan": tr.sync.channel, "var": tr.sync.var}
        td["actions"] = [_action_to_dict(a) for a in tr.actions]
        transitions.append(td)
    doc: dict[str, Any] = {
        "name": ta.name,
        "clocks": list(ta.clocks),
        "variables": [{"name": v.name, "domain": v.domain, "init": v.init}
                      for v in ta.variables],
        "channels": [{"name": c.name, "arity": c.arity} for c in ta.channels],
        "env_predicates": list(ta.env_predicates),
        "constants": [{"name": n, "value": v} for n, v in ta.constants],
        "locations": [{"id": l.id, "name": l.name,
                       "invariant": [{"clock": c.clock, "rel": c.rel, "bound": c.bound}
                                     for c in l.invariant]}
                      for l in ta.locations],
        "transitions": transitions,
        "initial_location": ta.initial_location,
    }
    if ta.engine.waiting_priority:
        doc["engine"] = {"waiting_priority": [
            {"location": r.location, "var": r.var, "increment": r.increment}
            for r in ta.engine.waiting_priority]}
    return doc


def serialize_model(ta: TimedAutomaton) -> str:
    """Canonical serialization; ``parse_model(serialize_model(ta)) == ta``."""
    return json.dumps(model_to_dict(ta), indent=2) + "\n"
