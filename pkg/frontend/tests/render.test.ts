import { describe, expect, it } from "vitest";

import { Canvas2D, render } from "../src/render.js";
import { StateMessage } from "../src/protocol.js";

/** Recording fake of the 2D context. */
class FakeContext implements Canvas2D {
  fillStyle = "";
  strokeStyle = "";
  lineWidth = 0;
  font = "";
  globalAlpha = 1;
  ops: { op: string; args: unknown[] }[] = [];

  private log(op: string, ...args: unknown[]): void {
    this.ops.push({ op, args });
  }
  beginPath(): void {
    this.log("beginPath");
  }
  arc(...args: number[]): void {
    this.log("arc", ...args);
  }
  moveTo(...args: number[]): void {
    this.log("moveTo", ...args);
  }
  lineTo(...args: number[]): void {
    this.log("lineTo", ...args);
  }
  stroke(): void {
    this.log("stroke");
  }
  fill(): void {
    this.log("fill");
  }
  clearRect(...args: number[]): void {
    this.log("clearRect", ...args);
  }
  strokeRect(...args: number[]): void {
    this.log("strokeRect", ...args);
  }
  fillRect(...args: number[]): void {
    this.log("fillRect", ...args);
  }
  fillText(text: string, x: number, y: number): void {
    this.log("fillText", text, x, y);
  }

  count(op: string): number {
    return this.ops.filter((o) => o.op === op).length;
  }
  texts(): string[] {
    return this.ops
      .filter((o) => o.op === "fillText")
      .map((o) => o.args[0] as string);
  }
}

function state(nRobots: number, nRefs = 0, status: "running" | "paused" = "running"): StateMessage {
  return {
    type: "state",
    v: 1,
    t: 3.25,
    robots: Array.from({ length: nRobots }, (_, i) => ({
      id: i,
      x: -0.5 + i * 0.08,
      y: 0.1,
      theta: 0.3 * i,
    })),
    density_refs: Array.from({ length: nRefs }, (_, i) => ({
      id: i,
      x: 0.2,
      y: -0.2,
      w: 2,
    })),
    params: {
      d_s: 0.08,
      gamma: 1,
      alpha: 0.1,
      kappa: 1,
      bounds: [-0.6, 0.6, -0.6, 0.6],
      status,
    },
    score: 0.987,
  };
}

describe("render", () => {
  it("draws one glyph per robot inside the bounds", () => {
    const ctx = new FakeContext();
    const result = render(ctx, state(12), 720, 720);
    expect(result.drawn).toBe(true);
    // each robot: body arc + heading stroke; no halos
    expect(ctx.count("arc")).toBe(12);
    expect(ctx.count("strokeRect")).toBe(1);
    const t = result.transform!;
    for (const op of ctx.ops.filter((o) => o.op === "arc")) {
      const [sx, sy] = op.args as number[];
      expect(sx).toBeGreaterThan(t.offsetX);
      expect(sx).toBeLessThan(720 - t.offsetX);
      expect(sy).toBeGreaterThan(t.offsetY);
      expect(sy).toBeLessThan(720 - t.offsetY);
    }
  });

  it("draws no halos when density_refs is empty", () => {
    const ctx = new FakeContext();
    render(ctx, state(3, 0), 720, 720);
    expect(ctx.count("arc")).toBe(3);
  });

  it("draws two halo rings per density reference", () => {
    const ctx = new FakeContext();
    render(ctx, state(3, 2), 720, 720);
    expect(ctx.count("arc")).toBe(3 + 2 * 2);
  });

  it("shows the score/parameter readout", () => {
    const ctx = new FakeContext();
    render(ctx, state(1), 720, 720);
    const readout = ctx.texts().find((s) => s.includes("score="));
    expect(readout).toContain("score=0.987");
    expect(readout).toContain("d_s=0.08");
  });

  it("shows a paused badge when paused", () => {
    const ctx = new FakeContext();
    render(ctx, state(1, 0, "paused"), 720, 720);
    expect(ctx.texts()).toContain("PAUSED");
  });

  it("skips malformed states and shows an error badge", () => {
    const ctx = new FakeContext();
    const result = render(ctx, { type: "state", v: 1 } as never, 720, 720);
    expect(result.drawn).toBe(false);
    expect(ctx.count("arc")).toBe(0);
    expect(ctx.texts()).toContain("no valid state");
  });
});
