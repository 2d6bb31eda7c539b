/**
 * Connection management: folds deltas into the mirror, resyncs with a fresh
 * snapshot after a sequence gap or reconnect, and reports link state for the
 * disconnect banner.
 */

import { SceneMirror, SeqGapError } from "./mirror.js";
import type { ClientMessage, EventDict, ServerMessage } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientEvents {
  onState?: (mirror: SceneMirror) => void;
  onDelta?: (events: EventDict[]) => void;
  onError?: (code: string, detail: string) => void;
  onLink?: (connected: boolean) => void;
}

export class SessionClient {
  mirror: SceneMirror | null = null;
  private socket: SocketLike | null = null;
  private open = false;

  constructor(
    private url: string,
    private factory: SocketFactory,
    private events: ClientEvents = {},
  ) {}

  connect(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.open = true;
      this.events.onLink?.(true);
    };
    socket.onclose = () => {
      this.open = false;
      this.events.onLink?.(false);
    };
    socket.onmessage = (event) => this.handleFrame(String(event.data));
  }

  connected(): boolean {
    return this.open;
  }

  send(message: ClientMessage): void {
    this.socket?.send(JSON.stringify(message));
  }

  requestResync(): void {
    this.send({ type: "get_snapshot", msg_id: "resync" });
  }

  private handleFrame(raw: string): void {
    const frame = JSON.parse(raw) as ServerMessage;
    switch (frame.type) {
      case "scene_snapshot": {
        if (this.mirror === null) this.mirror = new SceneMirror(frame.state);
        else if (frame.seq >= this.mirror.seq) this.mirror.loadSnapshot(frame.state);
        this.events.onState?.(this.mirror);
        break;
      }
      case "scene_delta": {
        if (this.mirror === null) break; // snapshot not seen yet
        try {
          const fresh = frame.events.filter((e) => e.seq > this.mirror!.seq);
          this.mirror.applyDelta(fresh);
          this.events.onDelta?.(fresh);
          this.events.onState?.(this.mirror);
        } catch (error) {
          if (error instanceof SeqGapError) this.requestResync();
          else throw error;
        }
        break;
      }
      case "error":
        this.events.onError?.(frame.code, frame.detail);
        break;
      case "ack":
      case "metrics":
        break;
    }
  }
}
