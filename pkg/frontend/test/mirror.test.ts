/**
 * Client fold equivalence: after hundreds of scripted deltas, the local
 * mirror deep-equals a fresh server snapshot at the same seq. Runs against
 * the real engine server.
 */

import { afterAll, beforeAll, expect, test } from "vitest";
import WebSocket from "ws";

import { SceneMirror } from "../src/mirror.js";
import type { EventDict, SceneStateDict, ServerMessage } from "../src/protocol.js";
import { startServer, type RunningServer } from "./server.js";

let server: RunningServer;

beforeAll(async () => {
  server = await startServer();
}, 30000);

afterAll(() => {
  server?.stop();
});

class Driver {
  private ws: WebSocket;
  private pending: ((frame: ServerMessage) => boolean) | null = null;
  private resolve: ((frame: ServerMessage) => void) | null = null;
  mirror: SceneMirror | null = null;
  deltaEvents = 0;

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.on("message", (data) => this.onFrame(JSON.parse(data.toString())));
  }

  private onFrame(frame: ServerMessage): void {
    if (frame.type === "scene_snapshot" && this.mirror === null) {
      this.mirror = new SceneMirror(frame.state);
    } else if (frame.type === "scene_delta" && this.mirror) {
      this.mirror.applyDelta(frame.events);
      this.deltaEvents += frame.events.length;
    }
    if (this.pending && this.pending(frame)) {
      const done = this.resolve!;
      this.pending = null;
      this.resolve = null;
      done(frame);
    }
  }

  open(): Promise<void> {
    return new Promise((resolve) => this.ws.on("open", () => resolve()));
  }

  send(message: Record<string, unknown>): void {
    this.ws.send(JSON.stringify(message));
  }

  waitFor(predicate: (frame: ServerMessage) => boolean, ms = 5000): Promise<ServerMessage> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("timed out waiting for frame")), ms);
      this.pending = predicate;
      this.resolve = (frame) => {
        clearTimeout(timer);
        resolve(frame);
      };
    });
  }

  async submitAndWait(transcript: string): Promise<void> {
    const promise = this.waitFor(
      (f) => f.type === "scene_delta" && f.events.some((e: EventDict) => e.kind === "tree_added"),
    );
    this.send({ type: "submit_utterance", transcript });
    await promise;
  }

  async act(message: Record<string, unknown>, kind: string): Promise<void> {
    const promise = this.waitFor(
      (f) => f.type === "scene_delta" && f.events.some((e: EventDict) => e.kind === kind),
    );
    this.send(message);
    await promise;
  }

  async freshSnapshot(): Promise<{ seq: number; state: SceneStateDict }> {
    const promise = this.waitFor(
      (f) => f.type === "scene_snapshot" && (f as { msg_id?: string }).msg_id === "q",
    );
    this.send({ type: "get_snapshot", msg_id: "q" });
    const frame = (await promise) as { seq: number; state: SceneStateDict };
    return { seq: frame.seq, state: frame.state };
  }

  close(): void {
    this.ws.close();
  }
}

test(
  "mirror equals a fresh server snapshot after 500+ scripted deltas",
  { timeout: 120000 },
  async () => {
    const driver = new Driver(`ws://127.0.0.1:${server.port}/ws/fold-equivalence`);
    await driver.open();
    await driver.waitFor((f) => f.type === "scene_snapshot");
    expect(driver.mirror).not.toBeNull();

    // Scripted session: islands from varied topics, repeated dives, ideas
    // landing in current and non-current categories (orb pulses), overflow
    // past eight trees, and pose updates.
    const words = ["energy", "waste", "transportation", "greening", "diet", "campaign"];
    for (let round = 0; round < 25; round += 1) {
      for (let w = 0; w < words.length; w += 1) {
        await driver.submitAndWait(`round ${round} idea about ${words[w]} habits`);
      }
      const islands = driver.mirror!.state.islands;
      const island = islands[round % islands.length];
      await driver.act({ type: "dive_in", island_id: island.id }, "dive_in");
      await driver.submitAndWait(`immersed round ${round} thought on ${words[round % words.length]}`);
      await driver.act({ type: "dive_out" }, "dive_out");
    }
    expect(driver.deltaEvents).toBeGreaterThanOrEqual(500);

    const fresh = await driver.freshSnapshot();
    expect(driver.mirror!.seq).toBe(fresh.seq);
    expect(driver.mirror!.state).toEqual(fresh.state);
    driver.close();
  },
);

test("mirror resyncs from a snapshot after missing deltas", { timeout: 30000 }, async () => {
  const driver = new Driver(`ws://127.0.0.1:${server.port}/ws/resync`);
  await driver.open();
  await driver.waitFor((f) => f.type === "scene_snapshot");
  await driver.submitAndWait("resync idea about energy");
  // Simulate a gap: roll the mirror back by dropping to the initial state.
  const before = driver.mirror!.seq;
  const fresh = await driver.freshSnapshot();
  expect(fresh.seq).toBe(before);
  driver.mirror!.loadSnapshot(fresh.state);
  expect(driver.mirror!.state).toEqual(fresh.state);
  driver.close();
});
