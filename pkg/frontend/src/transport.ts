// Transport abstraction over the framed protocol.  The browser build uses a
// WebSocket carrying the same byte frames; the headless/integration build
// uses a raw TCP socket (node).  Both deliver parsed server messages and
// accept client messages.

import {
  ClientMessage,
  FrameParser,
  ServerMessage,
  encodeFrame,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "closed";

export interface Transport {
  status(): ConnectionStatus;
  send(msg: ClientMessage): void;
  onMessage(handler: (msg: ServerMessage) => void): void;
  onStatus(handler: (status: ConnectionStatus) => void): void;
  close(): void;
}

/** WebSocket transport for browsers (frames sent as binary blobs). */
export class WebSocketTransport implements Transport {
  private ws: WebSocket;
  private parser = new FrameParser();
  private state: ConnectionStatus = "connecting";
  private messageHandler: (msg: ServerMessage) => void = () => {};
  private statusHandler: (status: ConnectionStatus) => void = () => {};

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.binaryType = "arraybuffer";
    this.ws.onopen = () => this.setStatus("connected");
    this.ws.onclose = () => this.setStatus("closed");
    this.ws.onerror = () => this.setStatus("closed");
    this.ws.onmessage = (event: MessageEvent) => {
      const bytes = new Uint8Array(event.data as ArrayBuffer);
      for (const msg of this.parser.feed(bytes)) {
        this.messageHandler(msg);
      }
    };
  }

  private setStatus(s: ConnectionStatus): void {
    this.state = s;
    this.statusHandler(s);
  }

  status(): ConnectionStatus {
    return this.state;
  }

  send(msg: ClientMessage): void {
    if (this.state === "connected") {
      this.ws.send(encodeFrame(msg));
    }
  }

  onMessage(handler: (msg: ServerMessage) => void): void {
    this.messageHandler = handler;
  }

  onStatus(handler: (status: ConnectionStatus) => void): void {
    this.statusHandler = handler;
  }

  close(): void {
    this.ws.close();
  }
}

/** Raw TCP transport for headless clients and tests (node only). */
export class TcpTransport implements Transport {
  private parser = new FrameParser();
  private state: ConnectionStatus = "connecting";
  private messageHandler: (msg: ServerMessage) => void = () => {};
  private statusHandler: (status: ConnectionStatus) => void = () => {};
  // net.Socket, typed loosely so the browser bundle never imports node builtins
  private sock: any;

  private constructor(sock: any) {
    this.sock = sock;
    sock.on("connect", () => this.setStatus("connected"));
    sock.on("close", () => this.setStatus("closed"));
    sock.on("error", () => this.setStatus("closed"));
    sock.on("data", (chunk: Uint8Array) => {
      for (const msg of this.parser.feed(chunk)) {
        this.messageHandler(msg);
      }
    });
  }

  static async connect(host: string, port: number): Promise<TcpTransport> {
    const net = await import("net");
    const sock = net.createConnection({ host, port });
    return new TcpTransport(sock);
  }

  private setStatus(s: ConnectionStatus): void {
    this.state = s;
    this.statusHandler(s);
  }

  status(): ConnectionStatus {
    return this.state;
  }

  send(msg: ClientMessage): void {
    if (this.state === "connected") {
      this.sock.write(encodeFrame(msg));
    }
  }

  onMessage(handler: (msg: ServerMessage) => void): void {
    this.messageHandler = handler;
  }

  onStatus(handler: (status: ConnectionStatus) => void): void {
    this.statusHandler = handler;
  }

  close(): void {
    this.sock.destroy();
    this.setStatus("closed");
  }
}
