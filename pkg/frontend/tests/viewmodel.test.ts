import { describe, expect, it } from "vitest";

import { StateMessage } from "../src/protocol.js";
import { ViewModel } from "../src/viewmodel.js";

function state(t: number): StateMessage {
  return {
    type: "state",
    v: 1,
    t,
    robots: [],
    density_refs: [],
    params: {
      d_s: 0.08,
      gamma: 1,
      alpha: 0.1,
      kappa: 1,
      bounds: [-0.6, 0.6, -0.6, 0.6],
      status: "running",
    },
    score: 1,
  };
}

describe("view model", () => {
  it("keeps only the latest state, counting drops", () => {
    const vm = new ViewModel();
    vm.offer(state(0.1));
    vm.offer(state(0.2));
    vm.offer(state(0.3));
    expect(vm.take()?.t).toBe(0.3);
    expect(vm.dropped).toBe(2);
  });

  it("take returns null until something new arrives", () => {
    const vm = new ViewModel();
    expect(vm.take()).toBeNull();
    vm.offer(state(1));
    expect(vm.take()?.t).toBe(1);
    expect(vm.take()).toBeNull();
    vm.offer(state(2));
    expect(vm.take()?.t).toBe(2);
  });

  it("records error messages without touching the state slot", () => {
    const vm = new ViewModel();
    vm.offer(state(1));
    vm.offer({ type: "error", v: 1, reason: "nope" });
    expect(vm.lastError).toBe("nope");
    expect(vm.take()?.t).toBe(1);
  });

  it("flags malformed state messages", () => {
    const vm = new ViewModel();
    vm.offer({ type: "state", v: 1 } as never);
    expect(vm.lastError).toBe("malformed state message");
    expect(vm.take()).toBeNull();
  });
});
