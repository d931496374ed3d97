/**
 * Interactive terminal client: one explainee, one session.
 *
 * The console creates a session for the bundled crossing scenario, posts
 * events (presets or manual injections), shows the current phase from the
 * service's belief, and surfaces explanation panels whenever the service
 * reports an explanation need.  Feedback controls map one-to-one onto the
 * feedback endpoint.  Commands are processed strictly in order, so event
 * posts for the session never overtake each other.
 */

import * as readline from "node:readline";

import { ConnectionLost, NetworkLog, ServiceClient, type SessionSpec } from "./api.js";
import {
  connectionBanner,
  explanationPanel,
  lookaheadLines,
  noticeLine,
  phaseLine,
  stepLines,
  type PanelState,
} from "./panel.js";
import { advanceTime, presetEvents, presetNames, prioBroadcast, togglePathColl } from "./presets.js";
import {
  isApiError,
  type BeliefConfig,
  type ExplanationNeed,
  type HelpfulAck,
  type SessionFlags,
  type SessionInfo,
  type StepReport,
  type TimedEvent,
  type VisibilitySummary,
} from "./types.js";

const SESSION_SPEC: SessionSpec = {
  model: "crossing",
  purpose: "driving",
  profile: "end_user",
  annotations: "crossing",
  explainee: "end_user",
};

const HELP = [
  "commands:",
  "  preset <name>        run a scenario preset",
  "  toggle               flip the path_coll predicate",
  "  prio <value>         broadcast an emergency priority value",
  "  advance <units>      let time pass",
  "  explain <observable> [occurrence]   ask for an explanation",
  "  helpful | more | hide               feedback on the open panel",
  "  lookahead <units>    what could happen next",
  "  status               session id and current phase",
  "  retry                repeat the call that lost the connection",
  "  quit                 leave",
  "presets: " + presetNames().map((n) => `'${n}'`).join(", "),
];

export interface ConsoleOptions {
  server: string;
  input?: NodeJS.ReadableStream;
  output?: NodeJS.WritableStream;
  log?: NetworkLog;
}

/** Server address from --server, then EXMO_SERVER, then the local default. */
export function serverAddress(argv: string[], env: NodeJS.ProcessEnv): string {
  const flag = argv.indexOf("--server");
  if (flag >= 0 && argv[flag + 1]) return argv[flag + 1];
  return env.EXMO_SERVER ?? "http://127.0.0.1:8000";
}

class ExplaineeConsole {
  private client: ServiceClient;
  private output: NodeJS.WritableStream;
  private sid: string | null = null;
  private time = 0;
  private belief: BeliefConfig[] = [];
  private flags: SessionFlags = { novel_situation: false, frozen: false, pending_explanation: false };
  private pathColl = false;
  private panel: PanelState | null = null;
  private panelOccurrence = 0;
  private pendingRetry: (() => Promise<void>) | null = null;
  private surfacedNeed: string | null = null;

  constructor(options: ConsoleOptions) {
    this.client = new ServiceClient(options.server, options.log);
    this.output = options.output ?? process.stdout;
  }

  private print(line: string): void {
    this.output.write(line + "\n");
  }

  /** Network failures show a retriable banner instead of ending the run. */
  private async guarded(action: () => Promise<void>): Promise<void> {
    try {
      await action();
    } catch (err) {
      if (err instanceof ConnectionLost) {
        this.pendingRetry = action;
        for (const line of connectionBanner()) this.print(line);
        return;
      }
      throw err;
    }
  }

  async start(server: string): Promise<void> {
    this.print(`explanation console: ${server}`);
    this.print("type 'help' for commands");
    await this.guarded(() => this.openSession());
  }

  private async openSession(): Promise<void> {
    const res = await this.client.createSession(SESSION_SPEC);
    if (isApiError(res.body)) {
      this.print(noticeLine(res.status, res.body));
      return;
    }
    const info = res.body as SessionInfo;
    this.sid = info.id;
    this.time = info.time;
    this.belief = info.belief;
    this.flags = info.flags;
    this.print(`session ${info.id} (explainee: ${info.explainee})`);
    for (const warning of info.warnings) this.print(`  warning: ${warning}`);
    this.print(phaseLine(this.time, this.belief, this.flags));
  }

  private requireSession(): string | null {
    if (this.sid === null) {
      this.print("  no session yet; type 'retry' to reconnect");
      return null;
    }
    return this.sid;
  }

  private async sendEvents(events: TimedEvent[]): Promise<boolean> {
    const sid = this.requireSession();
    if (sid === null) return false;
    const res = await this.client.postEvents(sid, events);
    if (isApiError(res.body)) {
      this.print(noticeLine(res.status, res.body));
      return false;
    }
    const report = res.body as StepReport;
    this.time = report.time;
    this.belief = report.belief;
    this.flags = report.flags;
    for (const line of stepLines(report)) this.print(line);
    if (report.explanation_need !== null) {
      await this.surfaceExplanation(report.explanation_need);
    }
    return true;
  }

  private async surfaceExplanation(need: ExplanationNeed): Promise<void> {
    // The need reports the latest trigger occurrence and stays set on
    // later posts; only surface each occurrence once.
    const key = `${need.kind}:${need.name}@${need.occurrence.timestamp}/${need.occurrence.transition}`;
    if (key === this.surfacedNeed) return;
    this.surfacedNeed = key;
    this.print(`explanation need: ${need.observable} @ t=${need.occurrence.timestamp}`);
    await this.showExplanation(`${need.kind}:${need.name}`, 0);
  }

  private async showExplanation(selector: string, occurrence: number): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    const res = await this.client.getExplanation(sid, selector, { occurrence });
    if (isApiError(res.body)) {
      this.print(noticeLine(res.status, res.body));
      return;
    }
    this.panel = { path: res.body, moreDetailDisabled: false };
    this.panelOccurrence = occurrence;
    this.renderPanel();
  }

  private renderPanel(): void {
    if (this.panel === null) return;
    for (const line of explanationPanel(this.panel)) this.print(line);
  }

  private panelNode(): string | null {
    if (this.panel === null) {
      this.print("  no explanation panel is open");
      return null;
    }
    return `${this.panel.path.kind}:${this.panel.path.name}`;
  }

  private async markHelpful(): Promise<void> {
    const node = this.panelNode();
    const sid = this.requireSession();
    if (node === null || sid === null) return;
    const res = await this.client.postFeedback(sid, { kind: "helpful", node, value: true });
    if (isApiError(res.body)) {
      this.print(noticeLine(res.status, res.body));
      return;
    }
    const ack = res.body as HelpfulAck;
    this.print(`  feedback recorded (#${ack.feedback_count})`);
  }

  private async moreDetail(): Promise<void> {
    const node = this.panelNode();
    const sid = this.requireSession();
    if (node === null || sid === null) return;
    const panel = this.panel as PanelState;
    if (panel.moreDetailDisabled) {
      this.print("  More detail is exhausted for this explanation");
      return;
    }
    const res = await this.client.postFeedback(sid, { kind: "more_detail", node });
    if (res.status === 409 && isApiError(res.body)) {
      panel.moreDetailDisabled = true;
      this.print(noticeLine(res.status, res.body));
      this.renderPanel();
      return;
    }
    if (isApiError(res.body)) {
      this.print(noticeLine(res.status, res.body));
      return;
    }
    const summary = res.body as VisibilitySummary;
    if (summary.revealed.length > 0) {
      this.print(`  revealed: ${summary.revealed.join(", ")}`);
    }
    await this.showExplanation(node, this.panelOccurrence);
  }

  private async hideKind(): Promise<void> {
    const node = this.panelNode();
    const sid = this.requireSession();
    if (node === null || sid === null) return;
    const res = await this.client.postFeedback(sid, { kind: "hide", node });
    if (isApiError(res.body)) {
      this.print(noticeLine(res.status, res.body));
      return;
    }
    const summary = res.body as VisibilitySummary;
    this.panel = null;
    this.print(`  hidden: ${summary.node} will not be shown again`);
  }

  private async lookahead(horizon: number): Promise<void> {
    const sid = this.requireSession();
    if (sid === null) return;
    const res = await this.client.getLookahead(sid, horizon);
    if (isApiError(res.body)) {
      this.print(noticeLine(res.status, res.body));
      return;
    }
    const report = res.body;
    for (const line of lookaheadLines(this.time, report.horizon, report.results)) this.print(line);
  }

  /** Advance one unit per post so every phase boundary gets its own step
   * report.  Frozen sessions ignore events, so stop if time stands still. */
  private async advanceTo(target: number): Promise<boolean> {
    while (this.time < target) {
      const before = this.time;
      if (!(await this.sendEvents([advanceTime(1, this.time)]))) return false;
      if (this.time === before) break;
    }
    return true;
  }

  private async runPreset(name: string): Promise<void> {
    let events: TimedEvent[];
    try {
      events = presetEvents(name, this.time);
    } catch {
      this.print(`  unknown preset; choose one of: ${presetNames().join(", ")}`);
      return;
    }
    this.print(`preset '${name}' (${events.length} events)`);
    for (const event of events) {
      if (event.kind === "advance") {
        if (!(await this.advanceTo(event.t + event.delta))) return;
        continue;
      }
      // Walk up to a future stamp first so the phases in between show.
      if (event.t > this.time && !(await this.advanceTo(event.t))) return;
      if (!(await this.sendEvents([event]))) return;
    }
  }

  private async toggle(): Promise<void> {
    const next = !this.pathColl;
    if (await this.sendEvents([togglePathColl(this.pathColl, this.time)])) {
      this.pathColl = next;
    }
  }

  private status(): void {
    this.print(`session ${this.sid ?? "(none)"}`);
    this.print(phaseLine(this.time, this.belief, this.flags));
  }

  private async retry(): Promise<void> {
    const action = this.pendingRetry;
    if (action === null) {
      this.print("  nothing to retry");
      return;
    }
    this.pendingRetry = null;
    await this.guarded(action);
  }

  /** Returns false when the console should stop reading input. */
  async handle(line: string): Promise<boolean> {
    const trimmed = line.trim();
    if (trimmed === "") return true;
    const [command, ...rest] = trimmed.split(/\s+/);
    const arg = rest.join(" ");
    switch (command) {
      case "help":
        for (const text of HELP) this.print(text);
        return true;
      case "quit":
      case "exit":
        return false;
      case "status":
        this.status();
        return true;
      case "retry":
        await this.retry();
        return true;
      case "preset":
        await this.guarded(() => this.runPreset(arg));
        return true;
      case "toggle":
        await this.guarded(() => this.toggle());
        return true;
      case "prio": {
        const value = Number(arg);
        if (!Number.isFinite(value)) {
          this.print("  usage: prio <value>");
          return true;
        }
        await this.guarded(async () => {
          await this.sendEvents([prioBroadcast(value, this.time)]);
        });
        return true;
      }
      case "advance": {
        const delta = Number(arg);
        if (!Number.isInteger(delta) || delta < 1) {
          this.print("  usage: advance <units>");
          return true;
        }
        await this.guarded(async () => {
          await this.advanceTo(this.time + delta);
        });
        return true;
      }
      case "explain": {
        if (rest.length === 0) {
          this.print("  usage: explain <observable> [occurrence]");
          return true;
        }
        let selector = arg;
        let occurrence = 0;
        if (rest.length > 1 && /^\d+$/.test(rest[rest.length - 1])) {
          occurrence = Number(rest[rest.length - 1]);
          selector = rest.slice(0, -1).join(" ");
        }
        await this.guarded(() => this.showExplanation(selector, occurrence));
        return true;
      }
      case "helpful":
        await this.guarded(() => this.markHelpful());
        return true;
      case "more":
        await this.guarded(() => this.moreDetail());
        return true;
      case "hide":
        await this.guarded(() => this.hideKind());
        return true;
      case "lookahead": {
        const horizon = Number(arg);
        if (!Number.isInteger(horizon)) {
          this.print("  usage: lookahead <units>");
          return true;
        }
        await this.guarded(() => this.lookahead(horizon));
        return true;
      }
      default:
        this.print(`  unknown command '${command}'; type 'help'`);
        return true;
    }
  }

  exitCode(): number {
    return this.sid === null ? 1 : 0;
  }
}

export async function runConsole(options: ConsoleOptions): Promise<number> {
  const ui = new ExplaineeConsole(options);
  await ui.start(options.server);
  const rl = readline.createInterface({
    input: options.input ?? process.stdin,
    terminal: false,
  });
  for await (const line of rl) {
    const keep = await ui.handle(line);
    if (!keep) break;
  }
  rl.close();
  return ui.exitCode();
}
