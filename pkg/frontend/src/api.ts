/**
 * HTTP client for the explanation service.
 *
 * Only the documented endpoints are wrapped here; the console has no other
 * way to reach the service.  Every request/response pair can be captured in
 * a NetworkLog, and a captured log can later be replayed against a live
 * service: after masking session ids and creation timestamps the replayed
 * responses must be identical to the recorded ones.
 */

import type {
  ApiErrorBody,
  ExplanationPath,
  FeedbackResult,
  LookaheadReport,
  SessionInfo,
  StepReport,
  TimedEvent,
} from "./types.js";

/** Network-level failure (refused, reset, DNS).  HTTP error statuses are
 * returned as ordinary responses, not thrown. */
export class ConnectionLost extends Error {
  constructor(cause: unknown) {
    super("connection to the explanation service failed");
    this.name = "ConnectionLost";
    this.cause = cause;
  }
}

export interface ApiResponse<T> {
  status: number;
  body: T | ApiErrorBody;
}

export interface LogEntry {
  method: "GET" | "POST";
  path: string;
  request: unknown;
  status: number;
  response: unknown;
}

export class NetworkLog {
  entries: LogEntry[] = [];

  record(entry: LogEntry): void {
    this.entries.push(entry);
  }
}

export interface SessionSpec {
  model: string;
  purpose?: string;
  profile?: string;
  annotations?: string;
  explainee?: string;
  analyse?: unknown;
  options?: Record<string, unknown>;
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    readonly log?: NetworkLog,
  ) {}

  async request<T>(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
  ): Promise<ApiResponse<T>> {
    let res: Response;
    try {
      res = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ConnectionLost(err);
    }
    const parsed: unknown = await res.json();
    this.log?.record({
      method,
      path,
      request: body === undefined ? null : body,
      status: res.status,
      response: parsed,
    });
    return { status: res.status, body: parsed as T | ApiErrorBody };
  }

  createSession(spec: SessionSpec): Promise<ApiResponse<SessionInfo>> {
    return this.request("POST", "/sessions", spec);
  }

  postEvents(sid: string, events: TimedEvent[]): Promise<ApiResponse<StepReport>> {
    return this.request("POST", `/sessions/${sid}/events`, { events });
  }

  getExplanation(
    sid: string,
    observable: string,
    opts?: { occurrence?: number; verbosity?: "brief" | "detailed" },
  ): Promise<ApiResponse<ExplanationPath>> {
    const params = new URLSearchParams({ observable });
    if (opts?.occurrence !== undefined) params.set("occurrence", String(opts.occurrence));
    if (opts?.verbosity !== undefined) params.set("verbosity", opts.verbosity);
    return this.request("GET", `/sessions/${sid}/explanations?${params}`);
  }

  postFeedback(
    sid: string,
    payload: { kind: string; node?: string; value?: boolean },
  ): Promise<ApiResponse<FeedbackResult>> {
    return this.request("POST", `/sessions/${sid}/feedback`, payload);
  }

  getModel(sid: string, stage: string): Promise<ApiResponse<unknown>> {
    return this.request("GET", `/sessions/${sid}/model?stage=${encodeURIComponent(stage)}`);
  }

  getLookahead(sid: string, horizon: number): Promise<ApiResponse<LookaheadReport>> {
    return this.request("GET", `/sessions/${sid}/lookahead?horizon=${horizon}`);
  }

  listArtifacts(): Promise<ApiResponse<Record<string, string[]>>> {
    return this.request("GET", "/artifacts");
  }
}

/** Replace session ids and creation timestamps so two runs of the same
 * scripted session compare equal. */
export function maskVolatile(value: unknown, sids: string[]): unknown {
  if (typeof value === "string") {
    let out = value;
    for (const sid of sids) out = out.split(sid).join("<session>");
    return out;
  }
  if (Array.isArray(value)) return value.map((v) => maskVolatile(v, sids));
  if (typeof value === "object" && value !== null) {
    const out: Record<string, unknown> = {};
    for (const [key, v] of Object.entries(value)) {
      out[key] = key === "created_at" ? "<created_at>" : maskVolatile(v, sids);
    }
    return out;
  }
  return value;
}

function canonical(value: unknown): string {
  return JSON.stringify(value, (_key, v: unknown) => {
    if (typeof v === "object" && v !== null && !Array.isArray(v)) {
      const sorted: Record<string, unknown> = {};
      for (const k of Object.keys(v).sort()) sorted[k] = (v as Record<string, unknown>)[k];
      return sorted;
    }
    return v;
  });
}

export interface ReplayMismatch {
  index: number;
  path: string;
  recorded: string;
  replayed: string;
}

export interface ReplayResult {
  ok: boolean;
  compared: number;
  mismatches: ReplayMismatch[];
}

/** Re-issue a recorded log against a live service.  Fresh session ids are
 * learned from replayed session creations and substituted into later
 * request paths; everything else must come back identical. */
export async function replayLog(log: NetworkLog, baseUrl: string): Promise<ReplayResult> {
  const client = new ServiceClient(baseUrl);
  const sidMap = new Map<string, string>();
  const mismatches: ReplayMismatch[] = [];
  for (const [index, entry] of log.entries.entries()) {
    let path = entry.path;
    for (const [oldSid, newSid] of sidMap) path = path.split(oldSid).join(newSid);
    const res = await client.request(entry.method, path, entry.request ?? undefined);
    if (entry.method === "POST" && entry.path === "/sessions" && res.status === 201) {
      const oldSid = (entry.response as SessionInfo).id;
      const newSid = (res.body as SessionInfo).id;
      sidMap.set(oldSid, newSid);
    }
    const recorded = canonical(maskVolatile(entry.response, [...sidMap.keys()]));
    const replayed = canonical(maskVolatile(res.body, [...sidMap.values()]));
    if (entry.status !== res.status || recorded !== replayed) {
      mismatches.push({ index, path: entry.path, recorded, replayed });
    }
  }
  return { ok: mismatches.length === 0, compared: log.entries.length, mismatches };
}
