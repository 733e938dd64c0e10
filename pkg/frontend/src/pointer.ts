// Pointer gestures -> cursor messages.  Down adds a density reference, move
// updates it (throttled to the server broadcast rate, intermediate positions
// collapsed latest-wins), up removes it.  While disconnected, messages are
// buffered for up to one second and replayed on reconnect, oldest dropped.

import { ClientMessage, PROTOCOL_VERSION } from "./protocol.js";
import { Transform, clampToBounds, toWorkspace } from "./transform.js";
import { Transport } from "./transport.js";

const BUFFER_MS = 1000;

interface PendingMove {
  x: number;
  y: number;
}

export class PointerBridge {
  private transport: Transport;
  private periodMs: number;
  private weight: number;
  private now: () => number;
  private lastSent = new Map<number, number>();
  private pending = new Map<number, PendingMove>();
  private timers = new Map<number, ReturnType<typeof setTimeout>>();
  private buffer: { msg: ClientMessage; t: number }[] = [];

  constructor(
    transport: Transport,
    opts: { periodMs?: number; weight?: number; now?: () => number } = {},
  ) {
    this.transport = transport;
    this.periodMs = opts.periodMs ?? 50;
    this.weight = opts.weight ?? 5.0;
    this.now = opts.now ?? Date.now;
    transport.onStatus((status) => {
      if (status === "connected") {
        this.flushBuffer();
      }
    });
  }

  down(pointerId: number, sx: number, sy: number, transform: Transform): void {
    const [x, y] = clampToBounds(transform, ...toWorkspace(transform, sx, sy));
    this.emit({
      type: "cursor_add",
      v: PROTOCOL_VERSION,
      id: pointerId,
      x,
      y,
      w: this.weight,
    });
    this.lastSent.set(pointerId, this.now());
  }

  move(pointerId: number, sx: number, sy: number, transform: Transform): void {
    const [x, y] = clampToBounds(transform, ...toWorkspace(transform, sx, sy));
    const last = this.lastSent.get(pointerId) ?? 0;
    const elapsed = this.now() - last;
    if (elapsed >= this.periodMs) {
      this.sendUpdate(pointerId, { x, y });
      return;
    }
    // within the throttle window: remember only the freshest position and
    // arm one trailing flush so the move still goes out within a period
    this.pending.set(pointerId, { x, y });
    if (!this.timers.has(pointerId)) {
      this.timers.set(
        pointerId,
        setTimeout(() => this.flushPending(pointerId), this.periodMs - elapsed),
      );
    }
  }

  up(pointerId: number): void {
    this.cancelPending(pointerId);
    this.emit({ type: "cursor_remove", v: PROTOCOL_VERSION, id: pointerId });
    this.lastSent.delete(pointerId);
  }

  private sendUpdate(pointerId: number, p: PendingMove): void {
    this.cancelPending(pointerId);
    this.emit({
      type: "cursor_update",
      v: PROTOCOL_VERSION,
      id: pointerId,
      x: p.x,
      y: p.y,
    });
    this.lastSent.set(pointerId, this.now());
  }

  private flushPending(pointerId: number): void {
    const p = this.pending.get(pointerId);
    this.timers.delete(pointerId);
    if (p) {
      this.pending.delete(pointerId);
      this.sendUpdate(pointerId, p);
    }
  }

  private cancelPending(pointerId: number): void {
    const timer = this.timers.get(pointerId);
    if (timer !== undefined) {
      clearTimeout(timer);
      this.timers.delete(pointerId);
    }
    this.pending.delete(pointerId);
  }

  private emit(msg: ClientMessage): void {
    if (this.transport.status() === "connected") {
      this.transport.send(msg);
      return;
    }
    this.buffer.push({ msg, t: this.now() });
  }

  private flushBuffer(): void {
    const cutoff = this.now() - BUFFER_MS;
    const fresh = this.buffer.filter((entry) => entry.t >= cutoff);
    this.buffer = [];
    for (const entry of fresh) {
      this.transport.send(entry.msg);
    }
  }
}
