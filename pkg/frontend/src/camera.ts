/**
 * Camera framing per mode: a fixed top-down overview of the whole landscape,
 * or a ground-level follow view inside one island. Dive-out restores the
 * identical overview framing it left from.
 */

import type { SceneStateDict } from "./protocol.js";

export interface CameraState {
  kind: "overview" | "immersed";
  /** World point at the canvas centre. */
  center: [number, number];
  /** Pixels per metre. */
  scale: number;
  /** View rotation, radians (immersed view turns with the user). */
  rotation: number;
}

export const OVERVIEW_CAMERA: CameraState = {
  kind: "overview",
  center: [0, 0],
  scale: 120,
  rotation: 0,
};

const IMMERSED_SCALE = 90;

export function cameraFor(state: SceneStateDict): CameraState {
  if (state.mode.kind === "overview") {
    // Constant framing: diving out lands exactly where the user left.
    return { ...OVERVIEW_CAMERA };
  }
  return {
    kind: "immersed",
    center: [state.user.world[0], state.user.world[1]],
    scale: IMMERSED_SCALE,
    rotation: -state.user.heading + Math.PI / 2, // heading points up the screen
  };
}

export function worldToCanvas(
  camera: CameraState,
  world: [number, number],
  width: number,
  height: number,
): [number, number] {
  const dx = world[0] - camera.center[0];
  const dy = world[1] - camera.center[1];
  const c = Math.cos(camera.rotation);
  const s = Math.sin(camera.rotation);
  const x = c * dx - s * dy;
  const y = s * dx + c * dy;
  // Canvas y grows downward.
  return [width / 2 + x * camera.scale, height / 2 - y * camera.scale];
}
