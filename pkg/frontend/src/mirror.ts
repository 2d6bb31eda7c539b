/**
 * Local scene mirror: folds server deltas into a snapshot-shaped state.
 *
 * The fold reproduces the server's reducer exactly, arithmetic included
 * (same operation order, sqrt instead of hypot), so a mirror that folded
 * every delta deep-equals a freshly fetched snapshot at the same seq. The
 * mirror holds no client-authoritative state: every mutation starts from a
 * server event.
 */

import type { EventDict, IslandDict, OrbDict, SceneStateDict } from "./protocol.js";

export class SeqGapError extends Error {
  constructor(expected: number, got: number) {
    super(`expected seq ${expected}, got ${got}`);
    this.name = "SeqGapError";
  }
}

const TWO_PI = 2 * Math.PI;

export function wrapAngle(a: number): number {
  // Matches the server: fmod into (-pi, pi].
  let r = a % TWO_PI;
  if (r <= -Math.PI) r += TWO_PI;
  else if (r > Math.PI) r -= TWO_PI;
  return r;
}

function unit(x: number, y: number): [number, number] {
  const n = Math.sqrt(x * x + y * y);
  if (n === 0) return [1, 0];
  return [x / n, y / n];
}

function applyPlacement(
  placement: { rotation: number; translation: [number, number] },
  p: [number, number],
): [number, number] {
  const c = Math.cos(placement.rotation);
  const s = Math.sin(placement.rotation);
  return [
    c * p[0] - s * p[1] + placement.translation[0],
    s * p[0] + c * p[1] + placement.translation[1],
  ];
}

export function entryPoint(island: IslandDict): [number, number] {
  const { radius, entry_angle } = island.pathway;
  return [Math.cos(entry_angle) * radius, Math.sin(entry_angle) * radius];
}

export function entryTangent(island: IslandDict): number {
  return wrapAngle(island.pathway.entry_angle + Math.PI / 2);
}

/** Orbs for every non-current island, same rule as the server. */
export function deriveOrbs(state: SceneStateDict): OrbDict[] {
  if (state.mode.kind !== "immersed" || state.mode.island_id === null) return [];
  const current = state.islands.find((i) => i.id === state.mode.island_id);
  if (!current) return [];
  const placement = state.placement ?? { rotation: 0, translation: [0, 0] as [number, number] };
  const orbs: OrbDict[] = [];
  for (const island of state.islands) {
    if (island.id === current.id) continue;
    const [dx, dy] = unit(
      island.overview_pose.x - current.overview_pose.x,
      island.overview_pose.y - current.overview_pose.y,
    );
    const radius =
      state.transition_mode === "walk" ? current.pathway.radius : current.body_radius;
    const local: [number, number] = [dx * radius, dy * radius];
    orbs.push({
      target_island_id: island.id,
      pose: applyPlacement(placement, local),
      pulse_count: state.unseen[island.id] ?? 0,
    });
  }
  return orbs;
}

function requireField<T>(payload: Record<string, unknown>, key: string): T {
  if (!(key in payload)) throw new Error(`event payload missing '${key}'`);
  return payload[key] as T;
}

export class SceneMirror {
  state: SceneStateDict;

  constructor(snapshot: SceneStateDict) {
    this.state = structuredClone(snapshot);
  }

  loadSnapshot(snapshot: SceneStateDict): void {
    this.state = structuredClone(snapshot);
  }

  get seq(): number {
    return this.state.last_seq;
  }

  applyDelta(events: EventDict[]): void {
    for (const event of events) this.applyEvent(event);
  }

  applyEvent(event: EventDict): void {
    const s = this.state;
    if (event.seq !== s.last_seq + 1) throw new SeqGapError(s.last_seq + 1, event.seq);
    const p = event.payload;
    switch (event.kind) {
      case "utterance_submitted": {
        s.utterance_ids.push(requireField<string>(p, "utterance_id"));
        s.utterance_ids.sort();
        break;
      }
      case "categorized":
      case "inference_error":
        break;
      case "island_created": {
        const pose = requireField<{ x: number; y: number; heading?: number }>(p, "overview_pose");
        const pathway = requireField<{ radius: number; entry_angle?: number }>(p, "pathway");
        const island: IslandDict = {
          id: requireField<string>(p, "island_id"),
          category: requireField<string>(p, "category"),
          cloud_label: (p["cloud_label"] as string) ?? requireField<string>(p, "category"),
          overview_pose: { x: pose.x, y: pose.y, heading: pose.heading ?? 0 },
          pathway: { radius: pathway.radius, entry_angle: pathway.entry_angle ?? 0 },
          body_radius: requireField<number>(p, "body_radius"),
          trees: [],
        };
        s.islands.push(island);
        s.unseen[island.id] = 0;
        s.orbs = deriveOrbs(s);
        break;
      }
      case "tree_added": {
        const islandId = requireField<string>(p, "island_id");
        const island = s.islands.find((i) => i.id === islandId);
        if (!island) throw new Error(`tree added to unknown island ${islandId}`);
        island.trees.push({
          id: requireField<string>(p, "tree_id"),
          utterance_id: requireField<string>(p, "utterance_id"),
          summary: requireField<string>(p, "summary"),
          slot: requireField<number>(p, "slot"),
          created_at: event.t,
        });
        const standingHere = s.mode.kind === "immersed" && s.mode.island_id === islandId;
        if (!standingHere) s.unseen[islandId] = (s.unseen[islandId] ?? 0) + 1;
        s.orbs = deriveOrbs(s);
        break;
      }
      case "dive_in": {
        const islandId = requireField<string>(p, "island_id");
        const island = s.islands.find((i) => i.id === islandId);
        if (!island) throw new Error(`dive into unknown island ${islandId}`);
        s.unseen[islandId] = 0;
        s.user.world = entryPoint(island);
        s.user.heading = entryTangent(island);
        s.mode = { kind: "immersed", island_id: islandId };
        s.placement = { rotation: 0, translation: [0, 0] };
        s.orbs = deriveOrbs(s);
        break;
      }
      case "dive_out": {
        s.user.world = [0, 0];
        s.mode = { kind: "overview", island_id: null };
        s.placement = null;
        s.orbs = [];
        break;
      }
      case "walk_teleport": {
        const targetId = requireField<string>(p, "target_island_id");
        if (!s.islands.some((i) => i.id === targetId)) {
          throw new Error(`teleport to unknown island ${targetId}`);
        }
        s.placement = {
          rotation: requireField<number>(p, "rotation"),
          translation: requireField<[number, number]>(p, "translation"),
        };
        s.unseen[targetId] = 0;
        s.mode = { kind: "immersed", island_id: targetId };
        s.orbs = deriveOrbs(s);
        break;
      }
      case "pose_update": {
        const room = requireField<[number, number]>(p, "room");
        const world = requireField<[number, number]>(p, "world");
        s.user.room = [room[0], room[1]];
        s.user.world = [world[0], world[1]];
        s.user.heading = requireField<number>(p, "heading");
        break;
      }
      default:
        throw new Error(`unknown event kind '${event.kind}'`);
    }
    s.last_seq = event.seq;
    s.last_t = Math.max(s.last_t, event.t);
  }
}
