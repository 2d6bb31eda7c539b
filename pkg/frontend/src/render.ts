/**
 * Canvas renderer. Overview: every island with its cloud label and
 * always-visible idea pop-ups. Immersed: one island at ground level with its
 * pathway loop, tree signposts gated by the visibility rule, and peripheral
 * orbs with pulse counts. New trees grow in with a chime.
 */

import { cameraFor, worldToCanvas } from "./camera.js";
import type { EventDict, IslandDict, SceneStateDict } from "./protocol.js";
import { slotPosition, visibleTreeLabels } from "./visibility.js";

const ISLAND_FILL = "#8fce91";
const ISLAND_EDGE = "#4d7d50";
const PATHWAY = "#d9c9a3";
const TREE = "#2f6b33";
const ORB = "#7fb3ff";
const CLOUD = "#ffffff";
const GROW_MS = 700;

export class Renderer {
  private growing = new Map<string, number>(); // tree id -> start ms
  private audio: AudioContext | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private chimeEnabled = true,
  ) {}

  /** Call with each delta so instantiations animate and chime. */
  noteEvents(events: EventDict[], nowMs: number): void {
    for (const event of events) {
      if (event.kind === "tree_added") {
        this.growing.set(String(event.payload["tree_id"]), nowMs);
        this.chime();
      } else if (event.kind === "island_created") {
        this.chime(520);
      }
    }
  }

  private chime(freq = 740): void {
    if (!this.chimeEnabled || typeof AudioContext === "undefined") return;
    this.audio ??= new AudioContext();
    const osc = this.audio.createOscillator();
    const gain = this.audio.createGain();
    osc.frequency.value = freq;
    gain.gain.setValueAtTime(0.08, this.audio.currentTime);
    gain.gain.exponentialRampToValueAtTime(1e-4, this.audio.currentTime + 0.4);
    osc.connect(gain).connect(this.audio.destination);
    osc.start();
    osc.stop(this.audio.currentTime + 0.4);
  }

  private growScale(treeId: string, nowMs: number): number {
    const started = this.growing.get(treeId);
    if (started === undefined) return 1;
    const progress = (nowMs - started) / GROW_MS;
    if (progress >= 1) {
      this.growing.delete(treeId);
      return 1;
    }
    return progress;
  }

  draw(state: SceneStateDict, nowMs: number, banner: string, hint: string): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#0d2b45";
    ctx.fillRect(0, 0, width, height);
    const camera = cameraFor(state);

    if (state.mode.kind === "overview") {
      for (const island of state.islands) this.drawOverviewIsland(ctx, state, island, nowMs);
    } else {
      this.drawImmersed(ctx, state, nowMs);
    }

    ctx.fillStyle = "#ffffff";
    ctx.font = "13px sans-serif";
    ctx.textAlign = "left";
    ctx.fillText(
      state.mode.kind === "overview"
        ? "overview: click an island to dive in"
        : "immersed: walk with arrows, click an orb to travel, button to dive out",
      12,
      height - 12,
    );
    if (hint) ctx.fillText(hint, 12, height - 30);
    if (banner) {
      ctx.fillStyle = "#b33939";
      ctx.fillRect(0, 0, width, 28);
      ctx.fillStyle = "#ffffff";
      ctx.textAlign = "center";
      ctx.fillText(banner, width / 2, 18);
    }
    // Cursor avatar.
    const user = worldToCanvas(camera, state.user.world, width, height);
    ctx.fillStyle = "#ffd166";
    ctx.beginPath();
    ctx.arc(user[0], user[1], 6, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#ffd166";
    ctx.beginPath();
    ctx.moveTo(user[0], user[1]);
    const headingScreen = state.user.heading + camera.rotation;
    ctx.lineTo(
      user[0] + 14 * Math.cos(headingScreen),
      user[1] - 14 * Math.sin(headingScreen),
    );
    ctx.stroke();
  }

  private drawOverviewIsland(
    ctx: CanvasRenderingContext2D,
    state: SceneStateDict,
    island: IslandDict,
    nowMs: number,
  ): void {
    const camera = cameraFor(state);
    const { width, height } = this.canvas;
    const center = worldToCanvas(
      camera, [island.overview_pose.x, island.overview_pose.y], width, height);
    const radius = 0.35 * camera.scale;
    ctx.fillStyle = ISLAND_FILL;
    ctx.strokeStyle = ISLAND_EDGE;
    ctx.beginPath();
    ctx.arc(center[0], center[1], radius, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
    // Miniature trees around the rim.
    const placed = island.trees.filter((t) => t.slot >= 0);
    for (const tree of placed) {
      const angle = tree.slot * (Math.PI / 4);
      const scale = this.growScale(tree.id, nowMs);
      ctx.fillStyle = TREE;
      ctx.beginPath();
      ctx.arc(
        center[0] + Math.cos(angle) * radius * 0.7,
        center[1] - Math.sin(angle) * radius * 0.7,
        3 * scale + 1,
        0,
        2 * Math.PI,
      );
      ctx.fill();
    }
    // Cloud label above, plus an always-visible pop-up of the latest ideas.
    ctx.fillStyle = CLOUD;
    ctx.font = "bold 14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(island.cloud_label, center[0], center[1] - radius - 18);
    ctx.font = "11px sans-serif";
    const latest = island.trees.slice(-3);
    latest.forEach((tree, index) => {
      ctx.fillText(tree.summary, center[0], center[1] + radius + 14 + index * 13);
    });
  }

  private drawImmersed(
    ctx: CanvasRenderingContext2D, state: SceneStateDict, nowMs: number,
  ): void {
    const island = state.islands.find((i) => i.id === state.mode.island_id);
    if (!island) return;
    const camera = cameraFor(state);
    const { width, height } = this.canvas;
    const placement = state.placement ?? { rotation: 0, translation: [0, 0] as [number, number] };
    const c = Math.cos(placement.rotation);
    const s = Math.sin(placement.rotation);
    const toWorld = (local: [number, number]): [number, number] => [
      c * local[0] - s * local[1] + placement.translation[0],
      s * local[0] + c * local[1] + placement.translation[1],
    ];

    // Island ground disc.
    const centerPx = worldToCanvas(camera, toWorld([0, 0]), width, height);
    ctx.fillStyle = ISLAND_FILL;
    ctx.beginPath();
    ctx.arc(centerPx[0], centerPx[1], island.body_radius * camera.scale, 0, 2 * Math.PI);
    ctx.fill();

    // Pathway loop.
    ctx.strokeStyle = PATHWAY;
    ctx.lineWidth = 10;
    ctx.beginPath();
    ctx.arc(centerPx[0], centerPx[1], island.pathway.radius * camera.scale, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.lineWidth = 1;

    // Trees with signposts; labels only inside the reveal window.
    const readable = visibleTreeLabels(state);
    for (const tree of island.trees) {
      if (tree.slot < 0) continue;
      const local = slotPosition(tree.slot, island.pathway.radius, island.body_radius);
      const pos = worldToCanvas(camera, toWorld(local), width, height);
      const scale = this.growScale(tree.id, nowMs);
      ctx.fillStyle = TREE;
      ctx.beginPath();
      ctx.arc(pos[0], pos[1], 12 * scale + 2, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillStyle = "#c9a66b";
      ctx.fillRect(pos[0] - 3, pos[1], 6, 14);
      if (readable.has(tree.id)) {
        ctx.fillStyle = "#ffffff";
        ctx.font = "12px sans-serif";
        ctx.textAlign = "center";
        ctx.fillText(tree.summary, pos[0], pos[1] + 30);
      }
    }

    // Peripheral orbs with pulse counts.
    for (const orb of state.orbs) {
      const pos = worldToCanvas(camera, orb.pose, width, height);
      const pulse = orb.pulse_count > 0 ? 1 + 0.2 * Math.sin(nowMs / 150) : 1;
      ctx.fillStyle = ORB;
      ctx.beginPath();
      ctx.arc(pos[0], pos[1], 9 * pulse, 0, 2 * Math.PI);
      ctx.fill();
      const target = state.islands.find((i) => i.id === orb.target_island_id);
      ctx.fillStyle = "#ffffff";
      ctx.font = "11px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(target ? target.cloud_label : orb.target_island_id, pos[0], pos[1] - 14);
      if (orb.pulse_count > 0) {
        ctx.fillText(`+${orb.pulse_count}`, pos[0], pos[1] + 22);
      }
    }

    // Cloud label of the current island.
    ctx.fillStyle = CLOUD;
    ctx.font = "bold 16px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(island.cloud_label, width / 2, 48);
  }
}
