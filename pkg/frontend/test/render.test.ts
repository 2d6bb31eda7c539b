/** Renderer against a recording stub context: glyph counts, label gating,
 * grow-in animation state. */

import { expect, test } from "vitest";

import { Renderer } from "../src/render.js";
import type { SceneStateDict } from "../src/protocol.js";

class StubContext {
  calls: { op: string; args: unknown[] }[] = [];
  texts: string[] = [];
  arcs: number[] = [];
  fillStyle = "";
  strokeStyle = "";
  font = "";
  textAlign = "";
  lineWidth = 1;

  private record(op: string, args: unknown[]): void {
    this.calls.push({ op, args });
  }

  clearRect(...args: unknown[]): void { this.record("clearRect", args); }
  fillRect(...args: unknown[]): void { this.record("fillRect", args); }
  beginPath(...args: unknown[]): void { this.record("beginPath", args); }
  arc(_x: number, _y: number, radius: number, ...rest: unknown[]): void {
    this.arcs.push(radius);
    this.record("arc", [_x, _y, radius, ...rest]);
  }
  fill(...args: unknown[]): void { this.record("fill", args); }
  stroke(...args: unknown[]): void { this.record("stroke", args); }
  moveTo(...args: unknown[]): void { this.record("moveTo", args); }
  lineTo(...args: unknown[]): void { this.record("lineTo", args); }
  fillText(text: string, ...rest: unknown[]): void {
    this.texts.push(text);
    this.record("fillText", [text, ...rest]);
  }
}

function stubCanvas(): { canvas: HTMLCanvasElement; ctx: StubContext } {
  const ctx = new StubContext();
  const canvas = {
    width: 960,
    height: 640,
    getContext: () => ctx,
  } as unknown as HTMLCanvasElement;
  return { canvas, ctx };
}

function threeIslandOverview(): SceneStateDict {
  const island = (n: number, x: number) => ({
    id: `isl-000${n}`,
    category: `Topic ${n}`,
    cloud_label: `Topic ${n}`,
    overview_pose: { x, y: 0, heading: 0 },
    pathway: { radius: 1.5, entry_angle: 0 },
    body_radius: 2.5,
    trees: [],
  });
  return {
    topic_config_id: "t",
    transition_mode: "dive",
    last_seq: 3,
    last_t: 3,
    mode: { kind: "overview", island_id: null },
    user: { room: [0, 0], world: [0, 0], heading: 0 },
    islands: [island(1, -1.2), island(2, 0), island(3, 1.2)],
    orbs: [],
    unseen: {},
    placement: null,
    utterance_ids: [],
  };
}

test("three-island overview draws three glyphs and three cloud labels", () => {
  const { canvas, ctx } = stubCanvas();
  const renderer = new Renderer(canvas, false);
  renderer.draw(threeIslandOverview(), 1000, "", "");
  const islandGlyphs = ctx.arcs.filter((r) => Math.abs(r - 0.35 * 120) < 1e-9);
  expect(islandGlyphs).toHaveLength(3);
  for (const label of ["Topic 1", "Topic 2", "Topic 3"]) {
    expect(ctx.texts).toContain(label);
  }
});

test("immersed view hides a signpost label the user faces away from", () => {
  const state = threeIslandOverview();
  state.mode = { kind: "immersed", island_id: "isl-0002" };
  state.placement = { rotation: 0, translation: [0, 0] };
  state.islands[1].trees.push({
    id: "tree-1", utterance_id: "u1", summary: "secret plan", slot: 0, created_at: 1,
  });
  // Tree slot 0 is at (1.875, 0): stand next to it facing +x first.
  state.user = { room: [0, 0], world: [1.0, 0], heading: 0 };
  const { canvas, ctx } = stubCanvas();
  const renderer = new Renderer(canvas, false);
  renderer.draw(state, 10000, "", "");
  expect(ctx.texts).toContain("secret plan");

  const { canvas: canvas2, ctx: ctx2 } = stubCanvas();
  state.user = { room: [0, 0], world: [1.0, 0], heading: Math.PI };
  new Renderer(canvas2, false).draw(state, 10000, "", "");
  expect(ctx2.texts).not.toContain("secret plan");
});

test("a fresh tree grows in: radius expands between frames", () => {
  const state = threeIslandOverview();
  state.islands[0].trees.push({
    id: "tree-9", utterance_id: "u9", summary: "new idea", slot: 2, created_at: 5,
  });
  const { canvas, ctx } = stubCanvas();
  const renderer = new Renderer(canvas, false);
  renderer.noteEvents(
    [{ seq: 9, t: 5, kind: "tree_added", payload: { tree_id: "tree-9" } }], 1000);
  renderer.draw(state, 1000, "", "");
  const early = Math.min(...ctx.arcs.filter((r) => r <= 4));
  const { canvas: canvas2, ctx: ctx2 } = stubCanvas();
  new Renderer(canvas2, false).draw(state, 99999, "", "");
  const settled = Math.min(...ctx2.arcs.filter((r) => r <= 4));
  expect(early).toBeLessThan(settled);
  expect(settled).toBe(4); // 3 * full scale + 1
});

test("disconnect banner renders over the scene", () => {
  const { canvas, ctx } = stubCanvas();
  new Renderer(canvas, false).draw(threeIslandOverview(), 0, "disconnected: reconnecting", "");
  expect(ctx.texts).toContain("disconnected: reconnecting");
});
