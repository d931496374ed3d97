import { expect, test } from "vitest";

import {
  connectionBanner,
  controlsLine,
  explanationPanel,
  lookaheadLines,
  noticeLine,
  phaseLine,
  stepLines,
  type PanelState,
} from "../src/panel.js";
import type { BeliefConfig, ExplanationPath, StepReport } from "../src/types.js";

function config(name: string): BeliefConfig {
  return { location: "q", location_name: name, clocks: { x: 0 }, vars: {} };
}

const FLAGS = { novel_situation: false, frozen: false, pending_explanation: false };

const PATH: ExplanationPath = {
  observable: "abort",
  kind: "ctrl",
  name: "abort",
  occurrence: { timestamp: 6, transition: "t_emergency_yield" },
  reasons: [
    {
      element_id: "n:ctrl:abort/g:t_emergency_yield/r0",
      kind: "invariant",
      text: "x <= t_p",
      values: { x: 1, t_p: 2 },
      annotation: null,
    },
    {
      element_id: "n:ctrl:abort/g:t_emergency_yield/r1",
      kind: "reception",
      text: "pc >= pE + s",
      values: { pE: 5, pc: 100, s: 50 },
      annotation: { snippet: "an emergency vehicle has the right of way", rule: "right-of-way regulation" },
    },
  ],
  back_chain: [
    {
      transition: "t_prepare",
      timestamp: 5,
      observables: ["prepare"],
      reasons: [
        {
          element_id: "n:ctrl:abort/g:t_yield/r1",
          kind: "guard",
          text: "x >= t_w",
          values: { x: 5, t_w: 5 },
          annotation: null,
        },
      ],
    },
  ],
  rendered_how: "The manoeuvre was aborted",
  rendered_why: ["an emergency vehicle has the right of way"],
  rendered: "The manoeuvre was aborted, because an emergency vehicle has the right of way",
};

test("phase line shows the location names", () => {
  expect(phaseLine(0, [config("FAR AWAY")], FLAGS)).toBe("t=0  phase: FAR AWAY");
});

test("phase line joins distinct names and drops duplicates", () => {
  const belief = [config("FAR AWAY"), config("CROSSING AHEAD"), config("FAR AWAY")];
  expect(phaseLine(3, belief, FLAGS)).toBe("t=3  phase: FAR AWAY / CROSSING AHEAD");
});

test("phase line marks a frozen session", () => {
  const line = phaseLine(2, [config("CROSSING AHEAD")], { ...FLAGS, frozen: true });
  expect(line).toContain("[novel situation: frozen]");
});

test("phase line survives an empty belief", () => {
  expect(phaseLine(4, [], FLAGS)).toBe("t=4  phase: (no consistent state)");
});

test("step lines list taken transitions with observables then the phase", () => {
  const report: StepReport = {
    time: 6,
    belief: [config("MANOEUVRE PENDING")],
    taken: [
      { timestamp: 0, transition: "t_approach", values: {}, observables: [{ kind: "comm", name: "prio" }] },
      { timestamp: 5, transition: "t_prepare", values: {}, observables: [] },
    ],
    flags: FLAGS,
    explanation_need: null,
  };
  expect(stepLines(report)).toEqual([
    "  @0 t_approach  -> prio",
    "  @5 t_prepare",
    "t=6  phase: MANOEUVRE PENDING",
  ]);
});

test("explanation panel shows service strings verbatim", () => {
  const lines = explanationPanel({ path: PATH, moreDetailDisabled: false });
  const text = lines.join("\n");
  expect(text).toContain("| The manoeuvre was aborted, because an emergency vehicle has the right of way");
  expect(text).toContain("[invariant] x <= t_p  (x=1 t_p=2)");
  expect(text).toContain("[reception] pc >= pE + s  (pE=5 pc=100 s=50)");
  expect(text).toContain("note: an emergency vehicle has the right of way");
  expect(text).toContain("earlier: t_prepare @ t=5");
  expect(text).toContain("[guard] x >= t_w  (x=5 t_w=5)");
});

test("panel content lines carry only panel chrome", () => {
  const lines = explanationPanel({ path: PATH, moreDetailDisabled: false });
  for (const line of lines) {
    expect(line.startsWith("+--") || line.startsWith("|")).toBe(true);
  }
});

test("controls expose the three feedback actions", () => {
  const state: PanelState = { path: PATH, moreDetailDisabled: false };
  expect(controlsLine(state)).toBe("[h] Helpful?  [d] More detail  [x] Hide this kind");
});

test("more detail control renders disabled after exhaustion", () => {
  const state: PanelState = { path: PATH, moreDetailDisabled: true };
  expect(controlsLine(state)).toContain("[d] More detail (exhausted)");
  const panel = explanationPanel(state).join("\n");
  expect(panel).toContain("More detail (exhausted)");
});

test("lookahead panel lists earliest occurrences with witnesses", () => {
  const entry = {
    kind: "ctrl",
    name: "start",
    observable: "start",
    earliest: 7,
    witness: ["t_approach", "t_prepare", "t_start"],
  };
  const lines = lookaheadLines(0, 15, [entry]);
  expect(lines[0]).toBe("what if? next 15 time units:");
  expect(lines[1]).toBe("  +7 start (t=7)  via t_approach > t_prepare > t_start");
});

test("lookahead offsets are relative to the current time", () => {
  const entry = { kind: "ctrl", name: "start", observable: "start", earliest: 13, witness: ["t_start"] };
  expect(lookaheadLines(6, 15, [entry])[1]).toBe("  +7 start (t=13)  via t_start");
});

test("empty lookahead says so", () => {
  expect(lookaheadLines(2, 3, [])).toEqual([
    "what if? next 3 time units:",
    "  (nothing within the horizon)",
  ]);
});

test("notices carry status and error code in context", () => {
  const line = noticeLine(422, { code: "not_observed", message: "'start' has not occurred" });
  expect(line).toBe("  ! 422 not_observed: 'start' has not occurred");
});

test("connection banner offers a retry", () => {
  const banner = connectionBanner().join("\n");
  expect(banner).toContain("connection lost");
  expect(banner).toContain("retry");
});
