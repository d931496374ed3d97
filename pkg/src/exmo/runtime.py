"""Run-time explanation sessions over a belief-state trace replay.

Time is discrete.  The engine keeps a belief set of configurations
(location, clock valuation, variable valuation) consistent with the events
seen so far, under an eager controller semantics:

* transitions fire at time boundaries: each unit step first fires every
  enabled non-reception transition to a fixpoint (simultaneously enabled
  transitions split the belief), then advances clocks by one;
* environment updates change the valuation only; resulting firings happen
  when time next moves;
* a broadcast binds its payload to the reception variable of matching
  guarded inputs; a configuration whose reception predicate holds must
  take the input transition (competing transitions enabled at the same
  instant split the belief);
* a configuration that would violate its location invariant after a unit
  advance is dropped: it must have taken an enabled transition during the
  advance;
* clock values saturate one past the largest bound; configurations that
  fire more than ``MAX_FIRINGS_PER_INSTANT`` transitions within a single
  instant (a zero-time livelock) are pruned.

If no configuration survives an event, or an observed action cannot be
matched, the situation is novel: the belief freezes and the model needs
updating.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from . import emodel
from .annotation import AnnotationBase, match_element
from .emodel import Annotation, CauseGroup, ExplanationModel, ObservableNode
from .errors import (HiddenForExplainee, NotObserved, NothingMoreToReveal,
                     NovelSituationFrozen, ProvenanceMismatch, StageMismatch,
                     TimestampRegression, TraceFormatError, UnknownNode)
from .exprs import Expr
from .model import (ClockConstraint, ClockReset, ControllerAction, EnvCheck,
                    RecvSync, SendSync, TimedAutomaton, Transition, VarUpdate,
                    model_from_dict, model_to_dict)
from .slicing import ExplaineeProfile, ObservableSelector, matches_any

MAX_FIRINGS_PER_INSTANT = 64

EVENT_KINDS = ("env", "broadcast", "advance", "action")


@dataclass(frozen=True)
class Event:
    t: int
    kind: str
    pred: str | None = None
    value: bool | None = None
    chan: str | None = None
    val: int | None = None
    delta: int | None = None
    obs_kind: str | None = None
    name: str | None = None

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Event:
        if "t" not in d or "kind" not in d:
            raise TraceFormatError(f"event needs 't' and 'kind': {d!r}")
        kind = d["kind"]
        if kind not in EVENT_KINDS:
            raise TraceFormatError(f"unknown event kind {kind!r}")
        t = int(d["t"])
        if kind == "env":
            return cls(t, kind, pred=d["pred"], value=bool(d["value"]))
        if kind == "broadcast":
            return cls(t, kind, chan=d["chan"], val=int(d["val"]))
        if kind == "advance":
            delta = int(d["delta"])
            if delta < 1:
                raise TraceFormatError("advance delta must be >= 1")
            return cls(t, kind, delta=delta)
        return cls(t, kind, obs_kind=d.get("obs_kind", "ctrl"), name=d["name"])

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"t": self.t, "kind": self.kind}
        if self.kind == "env":
            d.update(pred=self.pred, value=self.value)
        elif self.kind == "broadcast":
            d.update(chan=self.chan, val=self.val)
        elif self.kind == "advance":
            d.update(delta=self.delta)
        else:
            d.update(obs_kind=self.obs_kind, name=self.name)
        return d


def parse_trace(text: str) -> list[Event]:
    """Parse a JSON-lines trace; events must be time-ordered from 0."""
    events = []
    for i, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line:
            continue
        try:
            events.append(Event.from_dict(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {i + 1}: {exc.msg}") from exc
    if events and events[0].t != 0:
        raise TraceFormatError("first event must carry timestamp 0")
    for a, b in zip(events, events[1:]):
        if b.t < a.t:
            raise TraceFormatError(
                f"timestamps regress from {a.t} to {b.t}")
    return events


def load_trace(path: str) -> list[Event]:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())


@dataclass(frozen=True)
class Config:
    """One configuration: location plus clock and variable valuations
    (tuples follow the automaton's declaration order)."""

    location: str
    clocks: tuple[int, ...]
    vars: tuple[int, ...]


@dataclass
class TakenTransition:
    timestamp: int
    transition: str
    values: dict[str, Any]          # reason symbols at the firing instant
    observables: list[dict[str, Any]]  # {kind, name, value?} in effect order

    def to_dict(self) -> dict[str, Any]:
        return {"timestamp": self.timestamp, "transition": self.transition,
                "values": dict(self.values),
                "observables": [dict(o) for o in self.observables]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> TakenTransition:
        return cls(d["timestamp"], d["transition"], dict(d["values"]),
                   [dict(o) for o in d["observables"]])


class _Tables:
    """Precomputed per-automaton lookup tables."""

    def __init__(self, ta: TimedAutomaton):
        self.ta = ta
        self.var_names = tuple(v.name for v in ta.variables)
        self.var_index = {n: i for i, n in enumerate(self.var_names)}
        self.clock_index = {n: i for i, n in enumerate(ta.clocks)}
        self.consts = ta.constant_map
        self.cap = ta.clock_cap
        self.invariants = {l.id: l.invariant for l in ta.locations}
        self.outgoing = {l.id: ta.outgoing(l.id) for l in ta.locations}
        self.rules = ta.engine.waiting_priority
        self.symbols = {t.id: self._transition_symbols(t) for t in ta.transitions}
        self.declared: set[tuple[str, str]] = set()
        for tr in ta.transitions:
            if isinstance(tr.sync, SendSync):
                self.declared.add((emodel.KIND_COMM, tr.sync.channel))
            for act in tr.actions:
                if isinstance(act, ControllerAction):
                    self.declared.add((emodel.KIND_CTRL, act.name))
                elif isinstance(act, VarUpdate):
                    self.declared.add((emodel.KIND_VAR, act.var))
                elif isinstance(act, ClockReset):
                    self.declared.add((emodel.KIND_RESET, act.clock))

    def _transition_symbols(self, tr: Transition) -> dict[str, str]:
        """Symbols a taken-record must capture: name -> one of
        clock|var|const|env."""
        out: dict[str, str] = {}

        def add_expr(expr: Expr) -> None:
            for n in expr.names:
                if n in self.consts:
                    out[n] = "const"
                elif n in self.clock_index:
                    out[n] = "clock"
                else:
                    out[n] = "var"

        def add_clock_atom(atom: ClockConstraint) -> None:
            out[atom.clock] = "clock"
            if isinstance(atom.bound, str):
                out[atom.bound] = "const"

        for atom in tr.guard:
            if isinstance(atom, ClockConstraint):
                add_clock_atom(atom)
            elif isinstance(atom, EnvCheck):
                out[atom.pred] = "env"
            else:
                add_expr(atom.expr)
        for atom in self.invariants[tr.source]:
            add_clock_atom(atom)
        if isinstance(tr.sync, RecvSync):
            out[tr.sync.var] = "var"
            if tr.sync.predicate is not None:
                add_expr(tr.sync.predicate)
        return out

    def initial_config(self) -> Config:
        return Config(self.ta.initial_location,
                      tuple(0 for _ in self.ta.clocks),
                      tuple(v.init for v in self.ta.variables))

    def scope(self, cfg: Config) -> dict[str, int]:
        scope = dict(self.consts)
        scope.update(zip(self.var_names, cfg.vars))
        scope.update(zip(self.ta.clocks, cfg.clocks))
        return scope

    def guard_holds(self, cfg: Config, tr: Transition,
                    env: Mapping[str, bool]) -> bool:
        for atom in tr.guard:
            if isinstance(atom, ClockConstraint):
                if not atom.holds(cfg.clocks[self.clock_index[atom.clock]],
                                  self.consts):
                    return False
            elif isinstance(atom, EnvCheck):
                if not atom.holds(env):
                    return False
            else:
                if not atom.expr.evaluate(self.scope(cfg)):
                    return False
        return True

    def enabled(self, cfg: Config, env: Mapping[str, bool]) -> list[Transition]:
        return [tr for tr in self.outgoing[cfg.location]
                if not isinstance(tr.sync, RecvSync)
                and self.guard_holds(cfg, tr, env)]

    def invariant_holds(self, cfg: Config) -> bool:
        return all(atom.holds(cfg.clocks[self.clock_index[atom.clock]],
                              self.consts)
                   for atom in self.invariants[cfg.location])

    def record_values(self, cfg: Config, tr: Transition,
                      env: Mapping[str, bool],
                      binding: dict[str, int] | None) -> dict[str, Any]:
        scope = self.scope(cfg)
        if binding:
            scope.update(binding)
        values: dict[str, Any] = {}
        for name, role in sorted(self.symbols[tr.id].items()):
            values[name] = bool(env.get(name, False)) if role == "env" \
                else scope[name]
        return values

    def fire(self, cfg: Config, tr: Transition, env: Mapping[str, bool],
             binding: dict[str, int] | None = None
             ) -> tuple[Config, dict[str, Any], list[dict[str, Any]]]:
        """Apply one transition; returns the successor, the recorded reason
        values and the produced observables."""
        values = self.record_values(cfg, tr, env, binding)
        clocks = list(cfg.clocks)
        vars_ = list(cfg.vars)
        if binding:
            for name, val in binding.items():
                vars_[self.var_index[name]] = val
        observables: list[dict[str, Any]] = []
        if isinstance(tr.sync, SendSync):
            payload = tr.sync.payload.evaluate(self.scope(cfg))
            observables.append({"kind": emodel.KIND_COMM,
                                "name": tr.sync.channel, "value": payload})
        for act in tr.actions:
            if isinstance(act, ControllerAction):
                observables.append({"kind": emodel.KIND_CTRL, "name": act.name})
            elif isinstance(act, VarUpdate):
                scope = dict(self.consts)
                scope.update(zip(self.var_names, vars_))
                scope.update(zip(self.ta.clocks, clocks))
                vars_[self.var_index[act.var]] = int(act.expr.evaluate(scope))
                observables.append({"kind": emodel.KIND_VAR, "name": act.var,
                                    "value": vars_[self.var_index[act.var]]})
            else:
                clocks[self.clock_index[act.clock]] = 0
                observables.append({"kind": emodel.KIND_RESET,
                                    "name": act.clock})
        return (Config(tr.target, tuple(clocks), tuple(vars_)), values,
                observables)


def _sort_key(cfg: Config) -> tuple:
    return (cfg.location, cfg.clocks, cfg.vars)


class BeliefEngine:
    """Belief-state trace replay for one automaton."""

    def __init__(self, ta: TimedAutomaton):
        self.ta = ta
        self.tables = _Tables(ta)
        self.time = 0
        self.env: dict[str, bool] = {p: False for p in ta.env_predicates}
        self.configs: tuple[Config, ...] = (self.tables.initial_config(),)
        self.taken: list[TakenTransition] = []
        self.novel_situation = False
        self.frozen = False

    # ------------------------------------------------------------ stepping

    def _record(self, ts: int, tr: Transition, values: dict[str, Any],
                observables: list[dict[str, Any]],
                out: list[TakenTransition]) -> None:
        for existing in out:
            if (existing.timestamp == ts and existing.transition == tr.id
                    and existing.values == values):
                return
        out.append(TakenTransition(ts, tr.id, values, observables))

    def _closure(self, configs: Iterable[Config], ts: int,
                 taken_out: list[TakenTransition],
                 paths: dict[Config, tuple[str, ...]] | None = None
                 ) -> tuple[Config, ...]:
        tables = self.tables
        work: list[tuple[Config, int]] = [(c, 0) for c in
                                          sorted(configs, key=_sort_key)]
        seen = {c for c, _ in work}
        quiescent: list[Config] = []
        while work:
            cfg, fired = work.pop(0)
            enabled = tables.enabled(cfg, self.env)
            if not enabled:
                quiescent.append(cfg)
                continue
            if fired >= MAX_FIRINGS_PER_INSTANT:
                continue  # zero-time livelock: prune this branch
            for tr in enabled:
                nxt, values, obs = tables.fire(cfg, tr, self.env)
                self._record(ts, tr, values, obs, taken_out)
                if paths is not None and nxt not in paths:
                    paths[nxt] = paths.get(cfg, ()) + (tr.id,)
                if nxt not in seen:
                    seen.add(nxt)
                    work.append((nxt, fired + 1))
        return tuple(sorted(set(quiescent), key=_sort_key))

    def _advance_unit(self, configs: Iterable[Config],
                      paths: dict[Config, tuple[str, ...]] | None = None
                      ) -> tuple[Config, ...]:
        tables = self.tables
        out = []
        for cfg in configs:
            vars_ = list(cfg.vars)
            for rule in tables.rules:
                if cfg.location == rule.location:
                    vars_[tables.var_index[rule.var]] += rule.increment
            clocks = tuple(min(c + 1, tables.cap) for c in cfg.clocks)
            nxt = Config(cfg.location, clocks, tuple(vars_))
            if tables.invariant_holds(nxt):
                out.append(nxt)
                if paths is not None and nxt not in paths:
                    paths[nxt] = paths.get(cfg, ())
        return tuple(sorted(set(out), key=_sort_key))

    def _broadcast(self, chan: str, val: int, ts: int,
                   taken_out: list[TakenTransition]) -> tuple[Config, ...]:
        tables = self.tables
        out: list[Config] = []
        for cfg in self.configs:
            receptions = []
            for tr in tables.outgoing[cfg.location]:
                if not isinstance(tr.sync, RecvSync) or tr.sync.channel != chan:
                    continue
                binding = {tr.sync.var: val}
                predicate = tr.sync.predicate
                if predicate is not None:
                    scope = tables.scope(cfg)
                    scope.update(binding)
                    if not predicate.evaluate(scope):
                        continue
                if self.tables.guard_holds(cfg, tr, self.env):
                    receptions.append((tr, binding))
            if not receptions:
                out.append(cfg)
                continue
            # Forced reception; competitors enabled at this very instant
            # split the belief instead of being discarded.
            competitors = tables.enabled(cfg, self.env)
            for tr, binding in receptions:
                nxt, values, obs = tables.fire(cfg, tr, self.env, binding)
                self._record(ts, tr, values, obs, taken_out)
                out.append(nxt)
            for tr in competitors:
                nxt, values, obs = tables.fire(cfg, tr, self.env)
                self._record(ts, tr, values, obs, taken_out)
                out.append(nxt)
        return tuple(sorted(set(out), key=_sort_key))

    def _freeze(self) -> None:
        self.novel_situation = True
        self.frozen = True

    def apply_event(self, event: Event) -> list[TakenTransition]:
        """Apply one event; returns the transitions newly recorded."""
        if event.t < self.time:
            raise TimestampRegression(event.t, self.time)
        if self.frozen:
            return []
        new_taken: list[TakenTransition] = []

        def advance_to(target: int) -> bool:
            while self.time < target:
                self.configs = self._closure(self.configs, self.time, new_taken)
                self.configs = self._advance_unit(self.configs)
                self.time += 1
                if not self.configs:
                    self._freeze()
                    return False
            return True

        if event.kind == "env" and event.pred not in self.env:
            raise TraceFormatError(
                f"undeclared environment predicate {event.pred!r}")
        alive = advance_to(event.t)
        if alive:
            if event.kind == "env":
                self.env[event.pred] = bool(event.value)
            elif event.kind == "advance":
                advance_to(self.time + event.delta)
            elif event.kind == "broadcast":
                self.configs = self._broadcast(event.chan, event.val,
                                               self.time, new_taken)
                if not self.configs:
                    self._freeze()
            elif event.kind == "action":
                self._observe_action(event, new_taken)
        self.taken.extend(new_taken)
        return new_taken

    def _observe_action(self, event: Event,
                        new_taken: list[TakenTransition]) -> None:
        key = (event.obs_kind, event.name)
        if key not in self.tables.declared:
            self._freeze()
            return
        # Settle pending firings at this instant, then cross-check.
        self.configs = self._closure(self.configs, self.time, new_taken)
        if not self.configs:
            self._freeze()
            return
        for entry in self.taken + new_taken:
            if entry.timestamp == self.time and any(
                    o["kind"] == event.obs_kind and o["name"] == event.name
                    for o in entry.observables):
                return
        self._freeze()

    # ----------------------------------------------------------- lookahead

    def lookahead(self, horizon: int) -> list[dict[str, Any]]:
        """Earliest occurrence per observable within ``horizon`` unit steps,
        holding the environment fixed and assuming no further broadcasts."""
        if self.frozen:
            raise NovelSituationFrozen()
        configs = self.configs
        paths: dict[Config, tuple[str, ...]] = {c: () for c in configs}
        found: dict[tuple[str, str], dict[str, Any]] = {}
        time = self.time
        for _ in range(horizon):
            collected: list[TakenTransition] = []
            configs = self._closure(configs, time, collected, paths)
            for entry in collected:
                witness = self._witness(entry, paths)
                for obs in entry.observables:
                    key = (obs["kind"], obs["name"])
                    if key not in found:
                        found[key] = {
                            "kind": obs["kind"], "name": obs["name"],
                            "observable": emodel.display_name(*key),
                            "earliest": entry.timestamp,
                            "witness": witness}
            configs = self._advance_unit(configs, paths)
            time += 1
            if not configs:
                break
        return sorted(found.values(),
                      key=lambda d: (d["earliest"], d["kind"], d["name"]))

    def _witness(self, entry: TakenTransition,
                 paths: dict[Config, tuple[str, ...]]) -> list[str]:
        # The successor of the recorded firing appears in `paths` with the
        # firing as its last element; fall back to the bare transition.
        for path in paths.values():
            if path and path[-1] == entry.transition:
                return list(path)
        return [entry.transition]

    # ------------------------------------------------------------ exports

    def belief_dict(self) -> list[dict[str, Any]]:
        out = []
        for cfg in self.configs:
            out.append({
                "location": cfg.location,
                "location_name": self.ta.location(cfg.location).name,
                "clocks": dict(zip(self.ta.clocks, cfg.clocks)),
                "vars": dict(zip(self.tables.var_names, cfg.vars))})
        return out

    def state_dict(self) -> dict[str, Any]:
        return {"time": self.time,
                "env": {k: self.env[k] for k in sorted(self.env)},
                "configs": [[c.location, list(c.clocks), list(c.vars)]
                            for c in self.configs],
                "taken": [t.to_dict() for t in self.taken],
                "novel_situation": self.novel_situation,
                "frozen": self.frozen}

    def restore_state(self, d: Mapping[str, Any]) -> None:
        self.time = d["time"]
        self.env = dict(d["env"])
        self.configs = tuple(Config(loc, tuple(cl), tuple(vs))
                             for loc, cl, vs in d["configs"])
        self.taken = [TakenTransition.from_dict(t) for t in d["taken"]]
        self.novel_situation = d["novel_situation"]
        self.frozen = d["frozen"]


# ===================================================================== EM5


@dataclass(frozen=True)
class AnalyseConfig:
    """When the monitor raises the need for an explanation."""

    triggers: tuple[ObservableSelector, ...] = ()
    always_on: bool = False

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> AnalyseConfig:
        return cls(tuple(ObservableSelector.from_dict(s)
                         for s in d.get("triggers", [])),
                   bool(d.get("always_on", False)))

    def to_dict(self) -> dict[str, Any]:
        return {"triggers": [s.to_dict() for s in self.triggers],
                "always_on": self.always_on}


def _values_for_reason(reason, values: Mapping[str, Any]) -> dict[str, Any]:
    atom = reason.atom
    if atom["kind"] == "clock":
        out = {atom["clock"]: values.get(atom["clock"])}
        if isinstance(atom["bound"], str):
            out[atom["bound"]] = values.get(atom["bound"])
        return out
    if atom["kind"] == "env":
        return {atom["pred"]: values.get(atom["pred"])}
    expr = Expr(atom["expr"])
    return {n: values.get(n) for n in sorted(expr.names)}


def _bool_text(value: Any) -> str:
    return str(value).lower() if isinstance(value, bool) else str(value)


def _detailed_text(reason, values: Mapping[str, Any]) -> str:
    """Normalized atom text with the recorded values spliced in, e.g.
    ``pc = 100 >= pE + s = 55``."""
    atom = reason.atom
    if atom["kind"] == "env":
        return f"{atom['pred']} = {_bool_text(values.get(atom['pred']))}"
    if atom["kind"] == "clock":
        clock, rel, bound = atom["clock"], atom["rel"], atom["bound"]
        left = f"{clock} = {values.get(clock)}"
        if isinstance(bound, str):
            return f"{left} {rel} {bound} = {values.get(bound)}"
        return f"{left} {rel} {bound}"
    expr = Expr(atom["expr"])
    sides = expr.sides()
    if sides is None:
        return reason.text
    left, op, right = sides
    scope = {n: int(values.get(n, 0)) for n in expr.names}
    lval = Expr(left).evaluate(scope)
    rval = Expr(right).evaluate(scope)
    return f"{left} = {lval} {op} {right} = {rval}"


_KIND_SUMMARY = {
    "clock": "a timing condition was met",
    "env": "an environment condition held",
    "cmp": "an internal comparison held",
    "recv_guard": "a priority message was received",
}


@dataclass
class ReasonInstance:
    element_id: str
    kind: str             # guard | invariant | reception
    atom: dict[str, Any]  # serialized atom, as in the explanation model
    text: str
    values: dict[str, Any]
    visible: bool
    annotation: Annotation | None = None

    @property
    def atom_kind(self) -> str:
        return self.atom["kind"]

    def to_dict(self) -> dict[str, Any]:
        return {"element_id": self.element_id, "kind": self.kind,
                "text": self.text, "values": dict(self.values),
                "annotation": self.annotation.to_dict() if self.annotation
                else None}


@dataclass
class ChainPair:
    transition: str
    timestamp: int
    observables: list[str]
    reasons: list[ReasonInstance]

    def to_dict(self, include_hidden: bool = False) -> dict[str, Any]:
        reasons = [r for r in self.reasons if r.visible or include_hidden]
        return {"transition": self.transition, "timestamp": self.timestamp,
                "observables": list(self.observables),
                "reasons": [r.to_dict() for r in reasons]}


@dataclass
class ExplanationPath:
    observable: str          # display name
    kind: str
    name: str
    occurrence: dict[str, Any]   # {"timestamp": int, "transition": str}
    reasons: list[ReasonInstance]
    back_chain: list[ChainPair]       # exposed up to the reveal depth
    full_chain: list[ChainPair]       # retained for more-detail extension
    rendered_how: str = ""
    rendered_why: list[str] = field(default_factory=list)

    def rendered(self) -> str:
        if not self.rendered_why:
            return f"{self.rendered_how}."
        return f"{self.rendered_how}, because " + \
            " and ".join(self.rendered_why)

    def to_dict(self, include_hidden: bool = False) -> dict[str, Any]:
        reasons = [r for r in self.reasons if r.visible or include_hidden]
        return {"observable": self.observable, "kind": self.kind,
                "name": self.name, "occurrence": dict(self.occurrence),
                "reasons": [r.to_dict() for r in reasons],
                "back_chain": [p.to_dict(include_hidden)
                               for p in self.back_chain],
                "rendered_how": self.rendered_how,
                "rendered_why": list(self.rendered_why),
                "rendered": self.rendered()}


def render_explanation(path: ExplanationPath, verbosity: str = "brief") -> str:
    """Compose "how, because why" from a built path.  Brief verbosity
    prefers annotated snippets, walking the occurrence's own back-chain for
    the nearest annotated reason before falling back to kind summaries."""
    how = path.rendered_how
    why = _why_clauses(path, verbosity)
    if not why:
        return f"{how}."
    return f"{how}, because " + " and ".join(why)


def _why_clauses(path: ExplanationPath, verbosity: str) -> list[str]:
    direct = [r for r in path.reasons if r.visible]
    if verbosity == "detailed":
        out = []
        for reason in direct:
            detail = _detailed_text(reason, reason.values)
            if reason.annotation is not None:
                out.append(f"{reason.annotation.snippet} ({detail})")
            else:
                out.append(detail)
        return out
    snippets = [r.annotation.snippet for r in direct if r.annotation]
    if snippets:
        return _dedupe(snippets)
    for pair in path.full_chain:
        snippets = [r.annotation.snippet for r in pair.reasons
                    if r.visible and r.annotation]
        if snippets:
            return _dedupe(snippets)
    return _dedupe(_KIND_SUMMARY[r.atom_kind] for r in direct)


def _dedupe(items: Iterable[str]) -> list[str]:
    seen: list[str] = []
    for item in items:
        if item not in seen:
            seen.append(item)
    return seen


class Session:
    """One explainee's personalized explanation model (EM5) plus the live
    belief over the automaton.  The EM5 overlay only ever hides EM4-visible
    elements or reveals elements hidden at EM2/EM3; it never invents
    elements."""

    def __init__(self, em4: ExplanationModel, ta: TimedAutomaton,
                 profile: ExplaineeProfile,
                 analyse: AnalyseConfig | None = None, *,
                 allow_purpose_reveal: bool = False,
                 annotation_base: AnnotationBase | None = None):
        if em4.stage != "EM4":
            raise StageMismatch("EM4", em4.stage)
        if em4.provenance.get("automaton") != ta.name:
            raise ProvenanceMismatch(em4.provenance.get("automaton", "?"),
                                     ta.name)
        self.em = em4.copy()
        self.ta = ta
        self.profile = profile
        self.analyse = analyse if analyse is not None else AnalyseConfig()
        self.allow_purpose_reveal = allow_purpose_reveal
        self.annotation_base = annotation_base
        self.engine = BeliefEngine(ta)
        self.chain_depth = int(self.em.provenance.get("chain_depth", 1))
        self.user_hidden: set[str] = set()
        self.revealed: set[str] = set()
        self.reveal_depth: dict[str, int] = {}
        self.feedback_log: list[dict[str, Any]] = []
        self.events: list[Event] = []

    # ---------------------------------------------------------- monitoring

    def step(self, event: Event | Mapping[str, Any]) -> dict[str, Any]:
        if not isinstance(event, Event):
            event = Event.from_dict(event)
        new_taken = self.engine.apply_event(event)
        self.events.append(event)
        return {"time": self.engine.time,
                "belief": self.engine.belief_dict(),
                "taken": [t.to_dict() for t in new_taken],
                "flags": self.flags(),
                "explanation_need": self.needs_explanation()}

    def flags(self) -> dict[str, Any]:
        return {"novel_situation": self.engine.novel_situation,
                "frozen": self.engine.frozen,
                "pending_explanation": self.needs_explanation() is not None}

    def _node_visible(self, node: ObservableNode) -> bool:
        if node.element_id in self.user_hidden:
            return False
        return node.hidden_at is None or node.element_id in self.revealed

    def _element_visible(self, element: Any, node: ObservableNode) -> bool:
        if node.element_id in self.user_hidden:
            return False
        return element.hidden_at is None or element.element_id in self.revealed

    def needs_explanation(self) -> dict[str, Any] | None:
        """Most recent visible trigger occurrence, if any; hidden content
        never triggers."""
        for entry in reversed(self.engine.taken):
            for obs in entry.observables:
                node = self.em.find_node(f"{obs['kind']}:{obs['name']}")
                if node is None or not self._node_visible(node):
                    continue
                if self.analyse.always_on or matches_any(
                        self.analyse.triggers, obs["kind"], obs["name"]):
                    return {"observable": node.display_name,
                            "kind": node.kind, "name": node.name,
                            "occurrence": {"timestamp": entry.timestamp,
                                           "transition": entry.transition}}
        return None

    # --------------------------------------------------------- explanation

    def build_explanation(self, selector: str, occurrence: int = 0,
                          verbosity: str | None = None) -> ExplanationPath:
        """Explanation path for the (occurrence+1)-latest occurrence of the
        selected observable in this session's trace."""
        node = self.em.find_node(selector)
        if node is None:
            raise UnknownNode(selector)
        if not self._node_visible(node):
            raise HiddenForExplainee(node.display_name)
        entries = [e for e in self.engine.taken
                   if any(o["kind"] == node.kind and o["name"] == node.name
                          for o in e.observables)]
        if not entries:
            raise NotObserved(node.display_name)
        entries.reverse()
        if occurrence >= len(entries):
            raise NotObserved(f"{node.display_name} (occurrence {occurrence})")
        entry = entries[occurrence]
        group = next((g for g in node.cause_groups
                      if g.transition == entry.transition), None)
        if group is None:  # not expected for a well-formed model
            raise NotObserved(node.display_name)
        reasons = [ReasonInstance(r.element_id, r.kind, dict(r.atom), r.text,
                                  _values_for_reason(r, entry.values),
                                  self._element_visible(r, node),
                                  r.annotation)
                   for r in group.reasons]
        full_chain = self._trace_chain(group.back_chain, entry, node)
        depth = self.reveal_depth.get(node.element_id, 0)
        path = ExplanationPath(
            node.display_name, node.kind, node.name,
            {"timestamp": entry.timestamp, "transition": entry.transition},
            reasons, full_chain[:depth], full_chain)
        if node.annotation is not None:
            path.rendered_how = node.annotation.snippet
        else:
            path.rendered_how = f"{node.display_name} occurred"
        path.rendered_why = _why_clauses(path,
                                         verbosity or self.profile.verbosity)
        return path

    def _trace_chain(self, links, entry: TakenTransition,
                     node: ObservableNode) -> list[ChainPair]:
        """Match the structural back-chain against the transitions actually
        taken before the occurrence."""
        taken = self.engine.taken
        pos = taken.index(entry)

        def walk(links, pos: int) -> list[ChainPair]:
            by_transition = {}
            for link in links:
                by_transition.setdefault(link.transition, link)
            for j in range(pos - 1, -1, -1):
                prior = taken[j]
                if prior.transition not in by_transition:
                    continue
                link = by_transition[prior.transition]
                pair = ChainPair(
                    prior.transition, prior.timestamp,
                    list(link.observables),
                    [ReasonInstance(r.element_id, r.kind, dict(r.atom),
                                    r.text,
                                    _values_for_reason(r, prior.values),
                                    self._element_visible(r, node),
                                    r.annotation)
                     for r in link.reasons])
                return [pair] + walk(link.back_chain, j)
            return []

        return walk(links, pos)

    def render(self, path: ExplanationPath) -> str:
        return render_explanation(path, self.profile.verbosity)

    # ------------------------------------------------------------ feedback

    def apply_feedback(self, feedback: Mapping[str, Any]) -> dict[str, Any]:
        kind = feedback.get("kind")
        if kind == "helpful":
            entry = {"kind": "helpful", "value": bool(feedback.get("value", True)),
                     "node": feedback.get("node")}
            self.feedback_log.append(entry)
            return {"kind": "helpful", "recorded": True,
                    "feedback_count": len(self.feedback_log)}
        if kind not in ("hide", "more_detail"):
            raise ValueError(f"unknown feedback kind {kind!r}")
        selector = feedback.get("node", "")
        node = self.em.find_node(selector)
        if node is None:
            raise UnknownNode(selector)
        if kind == "hide":
            self.user_hidden.add(node.element_id)
            self.feedback_log.append({"kind": "hide", "node": node.element_id})
            return self._visibility_summary(node)
        return self._more_detail(node)

    def _more_detail(self, node: ObservableNode) -> dict[str, Any]:
        revealed_now: list[str] = []
        if node.element_id in self.user_hidden:
            # Restores exactly the pre-hide visibility of the branch.
            self.user_hidden.discard(node.element_id)
        else:
            subtree = list(self.em.iter_elements(node))
            em3 = [e for e in subtree
                   if e.hidden_at == "EM3" and e.element_id not in self.revealed]
            em2 = [e for e in subtree
                   if e.hidden_at == "EM2" and e.element_id not in self.revealed]
            depth = self.reveal_depth.get(node.element_id, 0)
            if em3:
                revealed_now = self._reveal(em3)
            elif self.allow_purpose_reveal and em2:
                revealed_now = self._reveal(em2)
            elif depth >= self.chain_depth:
                raise NothingMoreToReveal(node.display_name)
            self.reveal_depth[node.element_id] = depth + 1
        self.feedback_log.append({"kind": "more_detail",
                                  "node": node.element_id,
                                  "revealed": revealed_now})
        return self._visibility_summary(node, revealed_now)

    def _reveal(self, elements: list[Any]) -> list[str]:
        ids = []
        for element in elements:
            self.revealed.add(element.element_id)
            ids.append(element.element_id)
            if (self.annotation_base is not None
                    and hasattr(element, "annotation")
                    and element.annotation is None):
                annotation, _ = match_element(self.annotation_base, element)
                element.annotation = annotation
        return ids

    def _visibility_summary(self, node: ObservableNode,
                            revealed_now: list[str] | None = None
                            ) -> dict[str, Any]:
        if node.element_id in self.user_hidden:
            visible = 0
        else:
            visible = sum(1 for e in self.em.iter_elements(node)
                          if e.hidden_at is None
                          or e.element_id in self.revealed)
        return {"node": node.display_name, "element_id": node.element_id,
                "user_hidden": node.element_id in self.user_hidden,
                "reveal_depth": self.reveal_depth.get(node.element_id, 0),
                "visible_elements": visible,
                "revealed": revealed_now or []}

    # ----------------------------------------------------------- lookahead

    def lookahead(self, horizon: int) -> list[dict[str, Any]]:
        results = self.engine.lookahead(horizon)
        out = []
        for result in results:
            node = self.em.find_node(f"{result['kind']}:{result['name']}")
            if node is not None and self._node_visible(node):
                out.append(result)
        return out

    # ------------------------------------------------------------- exports

    def em5_view(self) -> ExplanationModel:
        """The personalized model: EM4 plus the session overlay."""
        out = self.em.copy()
        out.stage = "EM5"
        for element in out.iter_all_elements():
            if element.element_id in self.revealed:
                element.hidden_at = None
        for node in out.roots:
            if node.element_id in self.user_hidden:
                for element in out.iter_elements(node):
                    if element.hidden_at is None:
                        element.hidden_at = "EM5"
        return out

    def stage_view(self, stage: str) -> ExplanationModel:
        if stage == "EM5":
            return self.em5_view()
        if stage == "EM4":
            return self.em.copy()
        raise ValueError(f"session holds EM4/EM5 only, not {stage}")

    def snapshot(self) -> dict[str, Any]:
        return {"model": model_to_dict(self.ta),
                "em": self.em.to_dict(),
                "profile": self.profile.to_dict(),
                "analyse": self.analyse.to_dict(),
                "allow_purpose_reveal": self.allow_purpose_reveal,
                "annotations": (self.annotation_base.to_list()
                                if self.annotation_base else None),
                "engine": self.engine.state_dict(),
                "overlay": {"user_hidden": sorted(self.user_hidden),
                            "revealed": sorted(self.revealed),
                            "reveal_depth": {k: self.reveal_depth[k]
                                             for k in sorted(self.reveal_depth)}},
                "feedback_log": list(self.feedback_log),
                "events": [e.to_dict() for e in self.events]}

    @classmethod
    def restore(cls, snapshot: Mapping[str, Any]) -> Session:
        ta = model_from_dict(snapshot["model"])
        em = ExplanationModel.from_dict(snapshot["em"])
        profile = ExplaineeProfile.from_dict(snapshot["profile"])
        analyse = AnalyseConfig.from_dict(snapshot["analyse"])
        base = (AnnotationBase.from_list(snapshot["annotations"])
                if snapshot.get("annotations") else None)
        session = cls(em, ta, profile, analyse,
                      allow_purpose_reveal=snapshot["allow_purpose_reveal"],
                      annotation_base=base)
        session.engine.restore_state(snapshot["engine"])
        overlay = snapshot["overlay"]
        session.user_hidden = set(overlay["user_hidden"])
        session.revealed = set(overlay["revealed"])
        session.reveal_depth = dict(overlay["reveal_depth"])
        session.feedback_log = list(snapshot["feedback_log"])
        session.events = [Event.from_dict(e) for e in snapshot["events"]]
        return session


def new_session(em4: ExplanationModel, ta: TimedAutomaton,
                profile: ExplaineeProfile,
                analyse: AnalyseConfig | None = None, *,
                allow_purpose_reveal: bool = False,
                annotation_base: AnnotationBase | None = None) -> Session:
    """Create an independent explanation session; the explanation model must
    stem from the given automaton."""
    return Session(em4, ta, profile, analyse,
                   allow_purpose_reveal=allow_purpose_reveal,
                   annotation_base=annotation_base)
