// Headless end-to-end test against the real simulation server: a scripted
// pointer session steers the swarm through the wire protocol alone.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { PointerBridge } from "../src/pointer.js";
import { StateMessage } from "../src/protocol.js";
import { makeTransform, toScreen } from "../src/transform.js";
import { TcpTransport } from "../src/transport.js";
import { ViewModel } from "../src/viewmodel.js";

const CANVAS = 720;
const BOUNDS: [number, number, number, number] = [-0.6, 0.6, -0.6, 0.6];

let server: ChildProcess;
let port = 0;
let transport: TcpTransport;
const vm = new ViewModel();

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor<T>(
  probe: () => T | null,
  timeoutMs: number,
  what: string,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    const value = probe();
    if (value !== null) {
      return value;
    }
    await sleep(20);
  }
  throw new Error(`timed out waiting for ${what}`);
}

function freshState(minT: number): StateMessage | null {
  const s = vm.take() ?? vm.latest;
  return s !== null && s.t >= minT ? s : null;
}

function meanDistTo(state: StateMessage, x: number, y: number): number {
  const d = state.robots.map((r) => Math.hypot(r.x - x, r.y - y));
  return d.reduce((a, b) => a + b, 0) / d.length;
}

beforeAll(async () => {
  server = spawn(
    "python3",
    [
      "-m", "swarmsim.cli", "serve",
      "--port", "0",
      "--robots", "6",
      "--seed", "21",
      "--rate", "20",
      "--time-scale", "10",
    ],
    { stdio: ["ignore", "pipe", "inherit"] },
  );
  let banner = "";
  server.stdout!.on("data", (chunk: Buffer) => {
    banner += chunk.toString();
  });
  await waitFor(
    () => {
      const m = banner.match(/serving on [\d.]+:(\d+)/);
      return m ? parseInt(m[1], 10) : null;
    },
    30_000,
    "server banner",
  );
  port = parseInt(banner.match(/serving on [\d.]+:(\d+)/)![1], 10);
  transport = await TcpTransport.connect("127.0.0.1", port);
  transport.onMessage((msg) => vm.offer(msg));
  transport.onStatus((status) => vm.setConnection(status));
  await waitFor(
    () => (transport.status() === "connected" ? true : null),
    10_000,
    "tcp connect",
  );
}, 60_000);

afterAll(() => {
  transport?.close();
  server?.kill("SIGTERM");
});

describe("live steering session", () => {
  it("drag moves the density reference and pulls the swarm toward it", async () => {
    const transform = makeTransform(BOUNDS, CANVAS, CANVAS);
    const bridge = new PointerBridge(transport, { periodMs: 50, weight: 20 });

    await waitFor(() => vm.take(), 15_000, "first state broadcast");

    // press near one corner, then drag to the target in a few strokes
    const target: [number, number] = [0.35, 0.35];
    const [downX, downY] = toScreen(transform, -0.35, -0.35);
    bridge.down(1, downX, downY, transform);
    for (const frac of [0.25, 0.5, 0.75, 1.0]) {
      await sleep(60); // real pointer cadence, beyond the throttle window
      const wx = -0.35 + frac * (target[0] + 0.35);
      const wy = -0.35 + frac * (target[1] + 0.35);
      bridge.move(1, ...toScreen(transform, wx, wy), transform);
    }

    // the dragged reference must land at the final pointer position
    const settled = await waitFor(
      () => {
        const s = vm.take();
        if (s === null || s.density_refs.length === 0) {
          return null;
        }
        const ref = s.density_refs[0];
        return Math.hypot(ref.x - target[0], ref.y - target[1]) < 1e-6 ? s : null;
      },
      15_000,
      "dragged density reference in broadcast",
    );
    expect(settled.density_refs[0].id).toBe(1);

    // over the next 5 simulated seconds the swarm closes in on the cursor
    const before = meanDistTo(settled, ...target);
    const after = await waitFor(
      () => freshState(settled.t + 5.0),
      60_000,
      "5 simulated seconds",
    );
    const distAfter = meanDistTo(after, ...target);
    const ok = distAfter < before;
    console.log(
      `[acceptance] criterion 12 UI steering: ${ok ? "PASS" : "FAIL"}  ` +
        `(mean distance to cursor ${before.toFixed(3)} -> ${distAfter.toFixed(3)} m ` +
        `over ${(after.t - settled.t).toFixed(1)} sim s)`,
    );
    expect(ok).toBe(true);
  }, 120_000);
});
