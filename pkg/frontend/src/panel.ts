/**
 * Pure text rendering for the console.
 *
 * Explanation content (the "how, because why" sentence, reason texts,
 * annotation snippets) is shown verbatim as the service sent it; this
 * module only adds layout and control labels around those strings.
 */

import type {
  ApiErrorBody,
  BeliefConfig,
  ExplanationPath,
  LookaheadEntry,
  ReasonInstance,
  SessionFlags,
  StepReport,
  TakenTransition,
} from "./types.js";

export interface PanelState {
  path: ExplanationPath;
  /** Set once the service answered 409 nothing_more_to_reveal. */
  moreDetailDisabled: boolean;
}

export function phaseLine(time: number, belief: BeliefConfig[], flags: SessionFlags): string {
  const names = [...new Set(belief.map((c) => c.location_name))];
  const phase = names.length > 0 ? names.join(" / ") : "(no consistent state)";
  let line = `t=${time}  phase: ${phase}`;
  if (flags.frozen) line += "  [novel situation: frozen]";
  return line;
}

function takenLine(taken: TakenTransition): string {
  let line = `  @${taken.timestamp} ${taken.transition}`;
  if (taken.observables.length > 0) {
    line += "  -> " + taken.observables.map((o) => o.name).join(", ");
  }
  return line;
}

export function stepLines(report: StepReport): string[] {
  const lines = report.taken.map(takenLine);
  lines.push(phaseLine(report.time, report.belief, report.flags));
  return lines;
}

function reasonLines(reason: ReasonInstance, indent: string): string[] {
  const values = Object.entries(reason.values)
    .map(([name, value]) => `${name}=${String(value)}`)
    .join(" ");
  const head = `${indent}- [${reason.kind}] ${reason.text}` + (values ? `  (${values})` : "");
  const lines = [head];
  if (reason.annotation) {
    lines.push(`${indent}  note: ${reason.annotation.snippet}`);
  }
  return lines;
}

export function controlsLine(state: PanelState): string {
  const more = state.moreDetailDisabled ? "[d] More detail (exhausted)" : "[d] More detail";
  return `[h] Helpful?  ${more}  [x] Hide this kind`;
}

export function explanationPanel(state: PanelState): string[] {
  const path = state.path;
  const lines = [
    `+-- explanation: ${path.observable} @ t=${path.occurrence.timestamp} (${path.occurrence.transition})`,
    `| ${path.rendered}`,
  ];
  for (const reason of path.reasons) lines.push(...reasonLines(reason, "| "));
  for (const pair of path.back_chain) {
    lines.push(`| earlier: ${pair.transition} @ t=${pair.timestamp}`);
    for (const reason of pair.reasons) lines.push(...reasonLines(reason, "|   "));
  }
  lines.push(`+-- ${controlsLine(state)}`);
  return lines;
}

/** Earliest stamps arrive as absolute times; show them relative to now. */
export function lookaheadLines(now: number, horizon: number, results: LookaheadEntry[]): string[] {
  const lines = [`what if? next ${horizon} time units:`];
  if (results.length === 0) {
    lines.push("  (nothing within the horizon)");
    return lines;
  }
  for (const entry of results) {
    lines.push(
      `  +${entry.earliest - now} ${entry.observable} (t=${entry.earliest})  via ${entry.witness.join(" > ")}`,
    );
  }
  return lines;
}

export function noticeLine(status: number, body: ApiErrorBody): string {
  return `  ! ${status} ${body.code}: ${body.message}`;
}

export function connectionBanner(): string[] {
  return [
    "!--------------------------------------------!",
    "! connection lost: the service is unreachable !",
    "! type 'retry' to attempt the call again      !",
    "!--------------------------------------------!",
  ];
}
