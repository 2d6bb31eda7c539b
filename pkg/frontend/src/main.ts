/**
 * Browser entry point: wires the socket, mirror, renderer, and inputs.
 * Server URL comes from the page query (?server=ws://...&session=name);
 * defaults to the host that served the page.
 */

import { cameraFor, worldToCanvas } from "./camera.js";
import { InputController } from "./input.js";
import { SessionClient, type SocketLike } from "./net.js";
import type { SceneStateDict } from "./protocol.js";
import { Renderer } from "./render.js";

interface MinimalSpeechRecognition {
  onresult: ((event: { results: { [i: number]: { [j: number]: { transcript: string } } } }) => void) | null;
  start(): void;
}

function browserSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const shim: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onmessage: null,
    onclose: null,
    onopen: null,
  };
  ws.onmessage = (event) => shim.onmessage?.({ data: event.data });
  ws.onclose = () => shim.onclose?.();
  ws.onopen = () => shim.onopen?.();
  return shim;
}

function sessionUrl(): string {
  const params = new URLSearchParams(location.search);
  const base =
    params.get("server") ?? location.origin.replace(/^http/, "ws");
  const session = params.get("session") ?? `web-${Math.random().toString(36).slice(2, 8)}`;
  return `${base}/ws/${session}`;
}

function start(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const textBox = document.getElementById("idea") as HTMLInputElement;
  const diveOutButton = document.getElementById("dive-out") as HTMLButtonElement;
  const speechButton = document.getElementById("speech") as HTMLButtonElement;

  const renderer = new Renderer(canvas);
  let banner = "";
  const client = new SessionClient(sessionUrl(), browserSocket, {
    onDelta: (events) => renderer.noteEvents(events, performance.now()),
    onLink: (up) => {
      banner = up ? "" : "disconnected: reconnect to resume";
      if (up) {
        client.requestResync();
        input.flushQueue();
      }
    },
    onError: (code, detail) => {
      input.notice = `${code}: ${detail}`;
    },
  });
  const input = new InputController({
    send: (message) => client.send(message),
    connected: () => client.connected(),
  });
  client.connect();

  const held = new Set<string>();
  window.addEventListener("keydown", (event) => {
    if (event.target === textBox) return;
    held.add(event.key);
  });
  window.addEventListener("keyup", (event) => held.delete(event.key));

  textBox.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      input.submitText(textBox.value);
      textBox.value = "";
    }
  });
  diveOutButton.addEventListener("click", () => {
    if (client.mirror) input.diveOut(client.mirror.state);
  });

  // Optional browser speech capture; transcripts follow the typed-text path.
  const speechGlobals = window as unknown as Record<
    string, { new (): MinimalSpeechRecognition } | undefined
  >;
  const SpeechRecognitionImpl =
    speechGlobals["SpeechRecognition"] ?? speechGlobals["webkitSpeechRecognition"];
  if (SpeechRecognitionImpl) {
    speechButton.addEventListener("click", () => {
      const recognition = new SpeechRecognitionImpl();
      recognition.onresult = (event) => {
        const transcript = event.results[0]?.[0]?.transcript ?? "";
        input.submitText(transcript);
      };
      recognition.start();
    });
  } else {
    speechButton.disabled = true;
    speechButton.title = "speech recognition not available in this browser";
  }

  canvas.addEventListener("click", (event) => {
    const state = client.mirror?.state;
    if (!state) return;
    const rect = canvas.getBoundingClientRect();
    const px: [number, number] = [event.clientX - rect.left, event.clientY - rect.top];
    if (state.mode.kind === "overview") {
      const island = hitTestIsland(state, px, canvas.width, canvas.height);
      if (island) input.clickIsland(island, state);
    } else {
      const orb = hitTestOrb(state, px, canvas.width, canvas.height);
      if (orb) input.clickOrb(orb, state);
    }
  });

  let lastFrame = performance.now();
  function frame(now: number): void {
    const dt = Math.min((now - lastFrame) / 1000, 0.1);
    lastFrame = now;
    const forward = (held.has("ArrowUp") ? 1 : 0) - (held.has("ArrowDown") ? 1 : 0);
    const strafe = (held.has("a") ? 1 : 0) - (held.has("d") ? 1 : 0);
    const turn = (held.has("ArrowLeft") ? 1.8 : 0) - (held.has("ArrowRight") ? 1.8 : 0);
    if (forward || strafe || turn) input.move(strafe, forward, turn, dt, now);
    const state = client.mirror?.state;
    if (state) renderer.draw(state, now, banner, input.notice);
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

function hitTestIsland(
  state: SceneStateDict, px: [number, number], width: number, height: number,
): string | null {
  const camera = cameraFor(state);
  for (const island of state.islands) {
    const center = worldToCanvas(
      camera, [island.overview_pose.x, island.overview_pose.y], width, height);
    const radius = 0.35 * camera.scale;
    if (Math.hypot(px[0] - center[0], px[1] - center[1]) <= radius) return island.id;
  }
  return null;
}

function hitTestOrb(
  state: SceneStateDict, px: [number, number], width: number, height: number,
): string | null {
  const camera = cameraFor(state);
  for (const orb of state.orbs) {
    const pos = worldToCanvas(camera, orb.pose, width, height);
    if (Math.hypot(px[0] - pos[0], px[1] - pos[1]) <= 18) return orb.target_island_id;
  }
  return null;
}

start();
