// Latest-state slot plus local UI state.  Network receipt and rendering are
// decoupled: the socket handler stores the newest state message here and the
// animation loop reads it; intermediate frames are simply overwritten.

import { StateMessage, isStateMessage, ServerMessage } from "./protocol.js";
import { ConnectionStatus } from "./transport.js";

export interface LocalCursor {
  id: number;
  x: number; // workspace meters
  y: number;
}

export class ViewModel {
  latest: StateMessage | null = null;
  cursors = new Map<number, LocalCursor>();
  connection: ConnectionStatus = "connecting";
  lastError: string | null = null;
  /** count of state frames dropped because a newer one replaced them unread */
  dropped = 0;
  private unread = false;

  offer(msg: ServerMessage): void {
    if (msg.type === "error") {
      this.lastError = msg.reason;
      return;
    }
    if (msg.type === "hello") {
      return;
    }
    if (!isStateMessage(msg)) {
      this.lastError = "malformed state message";
      return;
    }
    if (this.unread) {
      this.dropped += 1;
    }
    this.latest = msg;
    this.unread = true;
  }

  /** The freshest state, marking it consumed; null when nothing new. */
  take(): StateMessage | null {
    if (!this.unread) {
      return null;
    }
    this.unread = false;
    return this.latest;
  }

  setConnection(status: ConnectionStatus): void {
    this.connection = status;
  }
}
