/**
 * Scenario control: canned event sequences plus one-off injectors.
 *
 * The presets mirror the event traces bundled with the service so a fresh
 * session walks a known timeline.  Injected events serialize to the same
 * JSON the service's trace parser accepts.
 */

import type { TimedEvent } from "./types.js";

const PRESETS: Record<string, TimedEvent[]> = {
  "emergency vehicle arrives": [
    { t: 0, kind: "env", pred: "cr_ahead", value: true },
    { t: 0, kind: "advance", delta: 6 },
    { t: 6, kind: "broadcast", chan: "prio", val: 100 },
  ],
  "path collision": [
    { t: 0, kind: "env", pred: "cr_ahead", value: true },
    { t: 2, kind: "env", pred: "path_coll", value: true },
    { t: 2, kind: "env", pred: "cr_ahead", value: false },
    { t: 2, kind: "advance", delta: 1 },
  ],
  "clear crossing": [
    { t: 0, kind: "env", pred: "cr_ahead", value: true },
    { t: 8, kind: "env", pred: "cr_ahead", value: false },
    { t: 8, kind: "advance", delta: 4 },
  ],
};

export function presetNames(): string[] {
  return Object.keys(PRESETS);
}

/** Events for a named preset, stamped relative to the session's current
 * time so a preset can run after manual injections. */
export function presetEvents(name: string, atTime = 0): TimedEvent[] {
  const base = PRESETS[name];
  if (!base) throw new Error(`unknown preset ${JSON.stringify(name)}`);
  return base.map((e) => ({ ...e, t: e.t + atTime }));
}

export function togglePathColl(current: boolean, atTime: number): TimedEvent {
  return { t: atTime, kind: "env", pred: "path_coll", value: !current };
}

export function prioBroadcast(val: number, atTime: number): TimedEvent {
  return { t: atTime, kind: "broadcast", chan: "prio", val };
}

export function advanceTime(delta: number, atTime: number): TimedEvent {
  return { t: atTime, kind: "advance", delta };
}
