/** Spawns the real explanation service for integration tests. */

import { spawn, type ChildProcess } from "node:child_process";
import * as net from "node:net";

export interface LiveService {
  url: string;
  stop(): Promise<void>;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const { port } = probe.address() as net.AddressInfo;
      probe.close(() => resolve(port));
    });
  });
}

async function waitReady(url: string, proc: ChildProcess, stderr: () => string): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited with ${proc.exitCode}:\n${stderr()}`);
    }
    try {
      const res = await fetch(`${url}/artifacts`);
      if (res.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      proc.kill();
      throw new Error(`service not reachable at ${url}:\n${stderr()}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
}

export async function startService(): Promise<LiveService> {
  const port = await freePort();
  const url = `http://127.0.0.1:${port}`;
  const proc = spawn(
    "python3",
    ["-m", "exmo.cli", "serve", "--host", "127.0.0.1", "--port", String(port)],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  let errText = "";
  proc.stderr?.on("data", (chunk: Buffer) => {
    errText += chunk.toString();
  });
  await waitReady(url, proc, () => errText);
  return {
    url,
    stop: () =>
      new Promise((resolve) => {
        if (proc.exitCode !== null) {
          resolve();
          return;
        }
        proc.once("exit", () => resolve());
        proc.kill("SIGTERM");
      }),
  };
}
