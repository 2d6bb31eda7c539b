/**
 * Wire protocol types, mirroring the server's message catalog and the
 * snapshot schema field for field. Every landscape mutation originates from
 * a server delta; the client never invents state.
 */

export interface PoseDict {
  x: number;
  y: number;
  heading: number;
}

export interface TreeDict {
  id: string;
  utterance_id: string;
  summary: string;
  slot: number; // 0..7, or -1 for overflow (not placed)
  created_at: number;
}

export interface IslandDict {
  id: string;
  category: string;
  cloud_label: string;
  overview_pose: PoseDict;
  pathway: { radius: number; entry_angle: number };
  body_radius: number;
  trees: TreeDict[];
}

export interface OrbDict {
  target_island_id: string;
  pose: [number, number];
  pulse_count: number;
}

export interface SceneStateDict {
  topic_config_id: string;
  transition_mode: "walk" | "dive";
  last_seq: number;
  last_t: number;
  mode: { kind: "overview" | "immersed"; island_id: string | null };
  user: { room: [number, number]; world: [number, number]; heading: number };
  islands: IslandDict[];
  orbs: OrbDict[];
  unseen: Record<string, number>;
  placement: { rotation: number; translation: [number, number] } | null;
  utterance_ids: string[];
}

export interface EventDict {
  seq: number;
  t: number;
  kind: string;
  payload: Record<string, unknown>;
}

export type ServerMessage =
  | { type: "scene_snapshot"; seq: number; state: SceneStateDict; msg_id?: string | null }
  | { type: "scene_delta"; events: EventDict[] }
  | { type: "ack"; msg_id: string | null; seq: number; utterance_id?: string }
  | { type: "error"; code: string; detail: string; msg_id: string | null }
  | { type: "metrics"; report: Record<string, unknown>; msg_id?: string | null };

export type ClientMessage =
  | { type: "submit_utterance"; transcript: string; msg_id?: string }
  | { type: "pose"; room: [number, number]; heading: number; msg_id?: string }
  | { type: "dive_in"; island_id: string; msg_id?: string }
  | { type: "dive_out"; msg_id?: string }
  | { type: "trigger"; orb_id: string; msg_id?: string }
  | { type: "get_snapshot"; msg_id?: string }
  | { type: "get_metrics"; msg_id?: string }
  | { type: "end_session"; msg_id?: string };
