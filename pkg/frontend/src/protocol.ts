// Wire protocol shared with the simulation server: length-delimited frames,
// each the ASCII decimal byte length of a UTF-8 JSON payload, a newline,
// then the payload.  See ../../docs/protocol.md for the message schema.

export const PROTOCOL_VERSION = 1;

export interface RobotState {
  id: number;
  x: number;
  y: number;
  theta: number;
}

export interface DensityRefState {
  id: number;
  x: number;
  y: number;
  w: number;
}

export interface StateMessage {
  type: "state";
  v: number;
  t: number;
  robots: RobotState[];
  density_refs: DensityRefState[];
  params: {
    d_s: number;
    gamma: number;
    alpha: number;
    kappa: number;
    bounds: [number, number, number, number];
    status: "running" | "paused";
  };
  score: number;
}

export interface ErrorMessage {
  type: "error";
  v: number;
  reason: string;
}

export interface HelloMessage {
  type: "hello";
  v: number;
  role: string;
}

export type CursorMessage =
  | { type: "cursor_add"; v: number; id: number; x: number; y: number; w: number }
  | { type: "cursor_update"; v: number; id: number; x: number; y: number }
  | { type: "cursor_remove"; v: number; id: number };

export type ClientMessage =
  | HelloMessage
  | CursorMessage
  | { type: "set_param"; v: number; name: string; value: number }
  | { type: "pause"; v: number }
  | { type: "resume"; v: number };

export type ServerMessage = StateMessage | ErrorMessage | HelloMessage;

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function encodeFrame(msg: ClientMessage): Uint8Array {
  const payload = encoder.encode(JSON.stringify(msg));
  const header = encoder.encode(`${payload.byteLength}\n`);
  const out = new Uint8Array(header.byteLength + payload.byteLength);
  out.set(header, 0);
  out.set(payload, header.byteLength);
  return out;
}

/** Incremental frame parser: feed raw socket bytes, get parsed messages. */
export class FrameParser {
  private buf = new Uint8Array(0);

  feed(chunk: Uint8Array): ServerMessage[] {
    const joined = new Uint8Array(this.buf.byteLength + chunk.byteLength);
    joined.set(this.buf, 0);
    joined.set(chunk, this.buf.byteLength);
    this.buf = joined;

    const messages: ServerMessage[] = [];
    for (;;) {
      const nl = this.buf.indexOf(0x0a);
      if (nl < 0) {
        if (this.buf.byteLength > 32) {
          throw new Error("bad frame header: no length line");
        }
        return messages;
      }
      const header = decoder.decode(this.buf.subarray(0, nl));
      if (!/^\d+$/.test(header)) {
        throw new Error(`bad frame header: ${header.slice(0, 32)}`);
      }
      const length = parseInt(header, 10);
      if (this.buf.byteLength < nl + 1 + length) {
        return messages;
      }
      const payload = this.buf.subarray(nl + 1, nl + 1 + length);
      this.buf = this.buf.slice(nl + 1 + length);
      messages.push(JSON.parse(decoder.decode(payload)) as ServerMessage);
    }
  }
}

export function isStateMessage(msg: ServerMessage): msg is StateMessage {
  return (
    msg.type === "state" &&
    Array.isArray((msg as StateMessage).robots) &&
    Array.isArray((msg as StateMessage).density_refs) &&
    typeof (msg as StateMessage).t === "number" &&
    (msg as StateMessage).params != null &&
    Array.isArray((msg as StateMessage).params.bounds)
  );
}
