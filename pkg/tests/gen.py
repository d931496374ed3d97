"""Seeded random generators for property tests.

All functions take a ``random.Random`` so failures reproduce from the
seed printed by the calling test.
"""
from __future__ import annotations

import random

CTRL_NAMES = ("a0", "a1", "a2")
ENV_PREDS = ("e0", "e1")


def _clock_atom(rng: random.Random, clocks: list[str], rel: str) -> dict:
    bound = rng.choice(["c1", "c2", rng.randint(1, 5)])
    return {"kind": "clock", "clock": rng.choice(clocks), "rel": rel,
            "bound": bound}


def _cmp_expr(rng: random.Random) -> str:
    left = rng.choice(["v0", "v1"])
    op = rng.choice([">=", "<=", ">", "<", "=="])
    right = rng.choice(["c1", "c2", str(rng.randint(0, 6)), "v0 + 1",
                        "v1 + c1"])
    return f"{left} {op} {right}"


def gen_model(rng: random.Random, name: str = "gen") -> dict:
    """A random automaton document: at most 6 locations, 8 transitions.

    Every transition carries a clock gate with positive bound so that
    zero-time cycles cannot refire after a reset; livelocks remain
    possible through reset-free cycles and are handled, not avoided.
    """
    nloc = rng.randint(2, 6)
    loc_ids = [f"L{i}" for i in range(nloc)]
    clocks = ["x"] if rng.random() < 0.7 else ["x", "y"]
    locations = []
    for lid in loc_ids:
        inv = []
        if rng.random() < 0.3:
            inv.append(_clock_atom(rng, clocks, "<="))
        locations.append({"id": lid, "name": f"STATE {lid}",
                          "invariant": inv})
    transitions = []
    for i in range(rng.randint(1, 8)):
        tr: dict = {"id": f"t{i}", "source": rng.choice(loc_ids),
                    "target": rng.choice(loc_ids), "guard": [],
                    "actions": []}
        if rng.random() < 0.85:
            atom = _clock_atom(rng, clocks, ">=")
            if isinstance(atom["bound"], int) and atom["bound"] < 1:
                atom["bound"] = 1
            tr["guard"].append(atom)
        if rng.random() < 0.4:
            tr["guard"].append({"kind": "env", "pred": rng.choice(ENV_PREDS),
                                "negated": rng.random() < 0.5})
        if rng.random() < 0.25:
            tr["guard"].append({"kind": "cmp", "expr": _cmp_expr(rng)})
        roll = rng.random()
        if roll < 0.2:
            tr["sync"] = {"kind": "send", "chan": "ch",
                          "payload": rng.choice(["v0", "v1", "v0 + 1", "c1"])}
        elif roll < 0.45:
            tr["sync"] = {"kind": "recv", "chan": "ch", "var": "p"}
            if rng.random() < 0.8:
                pred = rng.choice(["p >= v0 + c1", "p >= c2", "p >= v1",
                                   "p > v0"])
                tr["guard"].append({"kind": "recv_guard", "expr": pred})
        for _ in range(rng.randint(0, 2)):
            kind = rng.random()
            if kind < 0.4:
                tr["actions"].append({"kind": "ctrl",
                                      "name": rng.choice(CTRL_NAMES)})
            elif kind < 0.7:
                var = rng.choice(["v0", "v1"])
                tr["actions"].append({"kind": "update", "var": var,
                                      "expr": f"{var} + 1"})
            else:
                tr["actions"].append({"kind": "reset",
                                      "clock": rng.choice(clocks)})
        transitions.append(tr)
    if not any(transition_produces(tr) for tr in transitions):
        transitions[0]["actions"].append({"kind": "ctrl", "name": "a0"})
    doc = {
        "name": name,
        "clocks": clocks,
        "variables": [{"name": "v0", "init": rng.randint(0, 2)},
                      {"name": "v1", "init": 0},
                      {"name": "p", "init": 0}],
        "channels": [{"name": "ch", "arity": 1}],
        "env_predicates": list(ENV_PREDS),
        "constants": [{"name": "c1", "value": rng.randint(1, 3)},
                      {"name": "c2", "value": rng.randint(3, 7)}],
        "locations": locations,
        "transitions": transitions,
        "initial_location": "L0",
    }
    if rng.random() < 0.3:
        doc["engine"] = {"waiting_priority": [
            {"location": rng.choice(loc_ids),
             "var": rng.choice(["v0", "v1"]), "increment": 1}]}
    return doc


def transition_produces(tr: dict) -> bool:
    sync = tr.get("sync")
    if sync and sync["kind"] == "send":
        return True
    return any(a["kind"] in ("ctrl", "update") for a in tr.get("actions", []))


def gen_schedule(rng: random.Random, doc: dict,
                 max_events: int = 10) -> list[dict]:
    """A time-ordered event list starting at 0: environment flips, unit
    advances and broadcasts on the declared channel."""
    channels = doc.get("channels", [])
    chan = channels[0]["name"] if channels else None
    events: list[dict] = []
    t = 0
    for _ in range(rng.randint(3, max_events)):
        roll = rng.random()
        if chan is None and roll >= 0.75:
            roll = 0.5
        if roll < 0.35:
            events.append({"t": t, "kind": "env",
                           "pred": rng.choice(doc["env_predicates"]),
                           "value": rng.random() < 0.5})
        elif roll < 0.75:
            delta = rng.randint(1, 4)
            events.append({"t": t, "kind": "advance", "delta": delta})
            t += delta
        else:
            events.append({"t": t, "kind": "broadcast", "chan": chan,
                           "val": rng.randint(0, 80)})
        t += rng.randint(0, 3)
    return events


def gen_purpose(rng: random.Random, doc: dict) -> dict:
    """A purpose keeping a random non-empty subset of the observables."""
    from oracle_em import observables

    pairs = observables(doc)
    count = rng.randint(1, len(pairs))
    keep = rng.sample(pairs, count)
    selectors = []
    for kind, obs_name in keep:
        if rng.random() < 0.2:
            selectors.append({"name": obs_name})
        else:
            selectors.append({"kind": kind, "name": obs_name})
    return {"name": f"purpose_{rng.randrange(1000)}",
            "relevant_observables": selectors}


def gen_profile(rng: random.Random, doc: dict) -> dict:
    from oracle_em import observables

    pairs = observables(doc)
    if rng.random() < 0.3:
        selectors: list[dict | str] = ["*"]
    else:
        keep = rng.sample(pairs, rng.randint(1, len(pairs)))
        selectors = [{"kind": k, "name": n} for k, n in keep]
    suppressed = [kind for kind in ("var_update_nodes", "clock_reset_nodes",
                                    "internal_comparisons")
                  if rng.random() < 0.35]
    return {"id": f"profile_{rng.randrange(1000)}",
            "explainee_type": rng.choice(["end_user", "engineer"]),
            "relevant_observables": selectors,
            "suppressed_reason_kinds": suppressed,
            "verbosity": rng.choice(["brief", "detailed"])}
