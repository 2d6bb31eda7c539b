/**
 * Input controller: turns keys, clicks, and typed text into client
 * messages. Pure of DOM concerns so it can be tested headlessly; main.ts
 * wires browser events into it.
 *
 * While disconnected up to ten messages are queued, then new ones are
 * dropped with a notice.
 */

import type { ClientMessage, SceneStateDict } from "./protocol.js";

export const POSE_SEND_INTERVAL_MS = 100;
export const OFFLINE_QUEUE_LIMIT = 10;
export const WALK_SPEED = 1.2; // metres per second of held arrow key

export interface InputSink {
  send(message: ClientMessage): void;
  connected(): boolean;
}

export class InputController {
  private queue: ClientMessage[] = [];
  private lastPoseSent = -Infinity;
  room: [number, number] = [0, 0];
  heading = 0;
  /** Last user-facing notice (hints, drop warnings); render shows it. */
  notice = "";

  constructor(
    private sink: InputSink,
    private orbActivationRadius = 0.5,
  ) {}

  private dispatch(message: ClientMessage): void {
    if (this.sink.connected()) {
      this.flushQueue();
      this.sink.send(message);
      return;
    }
    if (this.queue.length >= OFFLINE_QUEUE_LIMIT) {
      this.notice = "offline: message dropped";
      return;
    }
    this.queue.push(message);
    this.notice = `offline: ${this.queue.length} message(s) queued`;
  }

  flushQueue(): void {
    while (this.queue.length > 0 && this.sink.connected()) {
      const queued = this.queue.shift();
      if (queued) this.sink.send(queued);
    }
  }

  get queuedCount(): number {
    return this.queue.length;
  }

  /** Typed idea submitted with enter. */
  submitText(text: string): void {
    const transcript = text.trim();
    if (!transcript) return;
    this.dispatch({ type: "submit_utterance", transcript });
  }

  /** Held movement keys; dt in seconds. Emits a throttled pose message. */
  move(dxKeys: number, dyKeys: number, turn: number, dt: number, nowMs: number): void {
    this.heading += turn * dt;
    const step = WALK_SPEED * dt;
    this.room = [
      this.room[0] + (Math.cos(this.heading) * dyKeys + Math.cos(this.heading + Math.PI / 2) * dxKeys) * step,
      this.room[1] + (Math.sin(this.heading) * dyKeys + Math.sin(this.heading + Math.PI / 2) * dxKeys) * step,
    ];
    if (nowMs - this.lastPoseSent >= POSE_SEND_INTERVAL_MS) {
      this.dispatch({ type: "pose", room: this.room, heading: this.heading });
      this.lastPoseSent = nowMs;
    }
  }

  /** Click on an island glyph in the overview. */
  clickIsland(islandId: string, state: SceneStateDict): void {
    if (state.mode.kind !== "overview") return;
    this.dispatch({ type: "dive_in", island_id: islandId });
  }

  diveOut(state: SceneStateDict): void {
    if (state.mode.kind !== "immersed") return;
    this.dispatch({ type: "dive_out" });
  }

  /**
   * Click near an orb while immersed. Out-of-range clicks produce a local
   * hint and no message, mirroring the server guard.
   */
  clickOrb(orbId: string, state: SceneStateDict): void {
    if (state.mode.kind !== "immersed") return;
    const orb = state.orbs.find((o) => o.target_island_id === orbId);
    if (!orb) return;
    const dx = orb.pose[0] - state.user.world[0];
    const dy = orb.pose[1] - state.user.world[1];
    if (Math.sqrt(dx * dx + dy * dy) > this.orbActivationRadius) {
      this.notice = "move closer to the orb to travel";
      return;
    }
    this.dispatch({ type: "trigger", orb_id: orbId });
  }
}
