import { Readable, Writable } from "node:stream";

import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { NetworkLog, replayLog } from "../src/api.js";
import { runConsole, serverAddress } from "../src/console.js";
import { startService, type LiveService } from "./service.js";

function scripted(lines: string[]): Readable {
  return Readable.from(lines.map((line) => line + "\n"));
}

class Sink extends Writable {
  private chunks: Buffer[] = [];

  override _write(chunk: unknown, _enc: string, done: () => void): void {
    this.chunks.push(Buffer.from(chunk as Uint8Array));
    done();
  }

  text(): string {
    return Buffer.concat(this.chunks).toString();
  }
}

const DOCUMENTED = [
  /^\/sessions$/,
  /^\/sessions\/[^/]+\/(events|explanations|feedback|model|lookahead)(\?.*)?$/,
  /^\/artifacts$/,
];

test("server address prefers the flag, then the environment, then the default", () => {
  expect(serverAddress(["--server", "http://flag:1"], { EXMO_SERVER: "http://env:2" })).toBe(
    "http://flag:1",
  );
  expect(serverAddress([], { EXMO_SERVER: "http://env:2" })).toBe("http://env:2");
  expect(serverAddress([], {})).toBe("http://127.0.0.1:8000");
});

test("connection loss shows a retriable banner and retry repeats the call", async () => {
  const output = new Sink();
  const code = await runConsole({
    server: "http://127.0.0.1:9",
    input: scripted(["retry", "quit"]),
    output,
  });
  const out = output.text();
  const banners = out.split("connection lost").length - 1;
  expect(banners).toBe(2);
  expect(out).toContain("type 'retry' to attempt the call again");
  expect(code).toBe(1);
});

describe("console against a live service", () => {
  let service: LiveService;

  beforeAll(async () => {
    service = await startService();
  }, 45_000);

  afterAll(async () => {
    await service.stop();
  });

  test(
    "scripted emergency run: abort panel, detail to exhaustion, log replay",
    async () => {
      const started = Date.now();
      const log = new NetworkLog();
      const output = new Sink();
      const code = await runConsole({
        server: service.url,
        input: scripted(["preset emergency vehicle arrives", "more", "more", "quit"]),
        output,
        log,
      });
      const out = output.text();
      expect(code).toBe(0);

      expect(out).toMatch(/session s-[0-9a-f]{12}/);
      expect(out).toContain("t=0  phase: FAR AWAY");
      expect(out).toContain("phase: CROSSING AHEAD");
      expect(out).toContain("phase: MANOEUVRE PENDING");

      expect(out).toContain("explanation need: abort @ t=6");
      expect(out).toContain("+-- explanation: abort @ t=6 (t_emergency_yield)");
      expect(out).toContain(
        "The manoeuvre was aborted, because an emergency vehicle has the right of way",
      );

      expect(out).toContain("revealed: n:ctrl:abort/g:t_yield/r1");
      expect(out).toContain("| earlier: t_prepare @ t=5");

      expect(out).toContain("! 409 nothing_more_to_reveal");
      expect(out).toContain("[d] More detail (exhausted)");

      const replay = await replayLog(log, service.url);
      expect(replay.mismatches).toEqual([]);
      expect(replay.ok).toBe(true);
      expect(replay.compared).toBe(log.entries.length);
      expect(replay.compared).toBeGreaterThanOrEqual(7);

      for (const entry of log.entries) {
        expect(DOCUMENTED.some((pattern) => pattern.test(entry.path))).toBe(true);
      }

      expect(Date.now() - started).toBeLessThan(30_000);
    },
    35_000,
  );

  test(
    "clear crossing streams phases and feedback controls round-trip",
    async () => {
      const output = new Sink();
      const code = await runConsole({
        server: service.url,
        input: scripted([
          "preset clear crossing",
          "explain start",
          "helpful",
          "hide",
          "explain start",
          "quit",
        ]),
        output,
      });
      const out = output.text();
      expect(code).toBe(0);
      expect(out).toContain("phase: CROSSING AHEAD");
      expect(out).toContain("phase: ON CROSSING");
      expect(out).toContain("The manoeuvre was started, because manoeuvre time exceeded");
      expect(out).toContain("feedback recorded (#1)");
      expect(out).toContain("hidden: start will not be shown again");
      expect(out).toContain("! 403 hidden_for_explainee");
    },
    35_000,
  );

  test(
    "manual injectors post valid events and notices stay in context",
    async () => {
      const output = new Sink();
      const code = await runConsole({
        server: service.url,
        input: scripted([
          "toggle",
          "toggle",
          "prio 60",
          "advance 2",
          "explain abort",
          "lookahead 5",
          "status",
          "quit",
        ]),
        output,
      });
      const out = output.text();
      expect(code).toBe(0);
      expect(out).toContain("! 422 not_observed");
      expect(out).toContain("what if? next 5 time units:");
      expect(out).toContain("(nothing within the horizon)");
      expect(out).toMatch(/session s-/);
      expect(out).not.toContain("! 400");
    },
    35_000,
  );
});
