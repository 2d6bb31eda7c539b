/**
 * Perspective-dependent reveal rule for idea labels: signposts in the
 * immersed view show their text only when the user stands close enough and
 * faces them; overview pop-ups are always readable.
 */

import { wrapAngle } from "./mirror.js";
import type { SceneStateDict } from "./protocol.js";

export interface VisibilityRule {
  maxDistance: number; // metres
  maxFacingAngle: number; // radians
}

export const DEFAULT_RULE: VisibilityRule = {
  maxDistance: 1.5,
  maxFacingAngle: (30 * Math.PI) / 180,
};

export function signpostVisible(
  userWorld: [number, number],
  userHeading: number,
  overview: boolean,
  signpost: [number, number],
  rule: VisibilityRule = DEFAULT_RULE,
): boolean {
  if (overview) return true;
  const dx = signpost[0] - userWorld[0];
  const dy = signpost[1] - userWorld[1];
  const gap = Math.sqrt(dx * dx + dy * dy);
  if (gap > rule.maxDistance) return false;
  if (gap === 0) return true;
  const toward = Math.atan2(dy, dx);
  return Math.abs(wrapAngle(userHeading - toward)) <= rule.maxFacingAngle;
}

/** Tree slot position in the immersed island frame, same ring the server uses. */
export function slotPosition(
  slot: number,
  pathwayRadius: number,
  bodyRadius: number,
): [number, number] {
  const radius = pathwayRadius + 0.15 * bodyRadius;
  const angle = slot * (Math.PI / 4);
  return [radius * Math.cos(angle), radius * Math.sin(angle)];
}

/** Ids of trees whose signpost text should currently be readable. */
export function visibleTreeLabels(
  state: SceneStateDict,
  rule: VisibilityRule = DEFAULT_RULE,
): Set<string> {
  const visible = new Set<string>();
  if (state.mode.kind === "overview") {
    for (const island of state.islands) {
      for (const tree of island.trees) visible.add(tree.id);
    }
    return visible;
  }
  const island = state.islands.find((i) => i.id === state.mode.island_id);
  if (!island) return visible;
  const placement = state.placement ?? { rotation: 0, translation: [0, 0] as [number, number] };
  const c = Math.cos(placement.rotation);
  const s = Math.sin(placement.rotation);
  for (const tree of island.trees) {
    if (tree.slot < 0) continue; // overflow trees are not placed
    const [lx, ly] = slotPosition(tree.slot, island.pathway.radius, island.body_radius);
    const world: [number, number] = [
      c * lx - s * ly + placement.translation[0],
      s * lx + c * ly + placement.translation[1],
    ];
    if (signpostVisible(state.user.world, state.user.heading, false, world, rule)) {
      visible.add(tree.id);
    }
  }
  return visible;
}
