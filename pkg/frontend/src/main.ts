/**
 * Browser entry point: wires the manifest/plan endpoints, the frame
 * socket, mouse-drag orientation, and the trial state machine to the DOM.
 */

import { FrameClient } from "./client.js";
import { Orientation } from "./orientation.js";
import type { Manifest, PlanDoc } from "./protocol.js";
import { frameToRgba } from "./render.js";
import { TrialMachine } from "./trial.js";

function mustGet<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const serverInput = mustGet<HTMLInputElement>("server");
const seedInput = mustGet<HTMLInputElement>("seed");
const connectBtn = mustGet<HTMLButtonElement>("connect");
const startBtn = mustGet<HTMLButtonElement>("start");
const doneBtn = mustGet<HTMLButtonElement>("done");
const downloadBtn = mustGet<HTMLButtonElement>("download");
const canvas = mustGet<HTMLCanvasElement>("view");
const statusLine = mustGet<HTMLElement>("status");
const countdownLine = mustGet<HTMLElement>("countdown");
const buttonBox = mustGet<HTMLElement>("classes");

const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("2d canvas unavailable");

let manifest: Manifest | null = null;
let client: FrameClient | null = null;
let machine: TrialMachine | null = null;
let orientation = new Orientation(canvas.clientWidth || canvas.width);
let httpBase = "";
let drawnStep = -1;
let frameCount = 0;
let frameWindowStart = 0;

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function drawFixation(): void {
  ctx!.fillStyle = "black";
  ctx!.fillRect(0, 0, canvas.width, canvas.height);
  ctx!.fillStyle = "white";
  ctx!.beginPath();
  ctx!.arc(canvas.width / 2, canvas.height / 2, 8, 0, 2 * Math.PI);
  ctx!.fill();
}

function drawBlank(): void {
  ctx!.fillStyle = "black";
  ctx!.fillRect(0, 0, canvas.width, canvas.height);
}

function buildClassButtons(classes: string[]): void {
  buttonBox.replaceChildren();
  for (const cls of classes) {
    const b = document.createElement("button");
    b.textContent = cls;
    b.addEventListener("click", () => {
      if (machine?.submitResponse(cls)) setStatus(`recorded ${cls}`);
    });
    buttonBox.appendChild(b);
  }
}

async function connect(): Promise<void> {
  httpBase = serverInput.value.replace(/\/$/, "");
  const res = await fetch(`${httpBase}/manifest`);
  if (!res.ok) throw new Error(`manifest: HTTP ${res.status}`);
  manifest = (await res.json()) as Manifest;
  buildClassButtons(manifest.object_classes);

  const wsUrl = httpBase.replace(/^http/, "ws") + "/frames";
  client?.close();
  client = new FrameClient(new WebSocket(wsUrl));
  setStatus(`connected: ${manifest.scenes.length} scenes`);
  startBtn.disabled = false;
}

async function start(): Promise<void> {
  const seed = Number.parseInt(seedInput.value, 10);
  const res = await fetch(`${httpBase}/plan`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ seed }),
  });
  if (!res.ok) throw new Error(`plan: HTTP ${res.status}`);
  const plan = (await res.json()) as PlanDoc;
  machine = new TrialMachine(plan, { now: () => performance.now() / 1000 });
  machine.start();
  drawnStep = -1;
  frameCount = 0;
  frameWindowStart = performance.now();
  downloadBtn.disabled = true;
  requestAnimationFrame(loop);
}

function pumpFrames(): void {
  if (!machine || !client || machine.phase !== "scanning" || client.busy) return;
  const step = machine.currentStep();
  if (!step) return;
  client
    .request({
      quat: orientation.quaternion(),
      fov_deg: step.fov_deg,
      phosphenes: step.phosphenes,
      scene: step.scene,
    })
    .then(({ envelope, pixels }) => {
      const w = envelope.width ?? canvas.width;
      const h = envelope.height ?? canvas.height;
      if (canvas.width !== w || canvas.height !== h) {
        canvas.width = w;
        canvas.height = h;
      }
      const image = new ImageData(frameToRgba(pixels, w, h), w, h);
      ctx!.putImageData(image, 0, 0);
      frameCount += 1;
      const dt = (performance.now() - frameWindowStart) / 1000;
      if (dt >= 1) {
        setStatus(`${(frameCount / dt).toFixed(1)} fps, ${envelope.render_ms?.toFixed(1)} ms render`);
        frameCount = 0;
        frameWindowStart = performance.now();
      }
    })
    .catch((err: unknown) => setStatus(String(err)));
}

function loop(): void {
  if (!machine) return;
  machine.tick();
  const step = machine.currentStep();
  if (step && step.step !== drawnStep) {
    drawnStep = step.step;
    orientation.reset();
  }
  switch (machine.phase) {
    case "fixation":
      drawFixation();
      countdownLine.textContent = `fixate: ${machine.countdown().toFixed(1)} s`;
      break;
    case "scanning":
      pumpFrames();
      countdownLine.textContent = `step ${step?.step}: ${machine.countdown().toFixed(0)} s left`;
      break;
    case "break":
      drawBlank();
      countdownLine.textContent = `break: ${machine.countdown().toFixed(0)} s`;
      break;
    case "finished":
      drawBlank();
      countdownLine.textContent = "session complete";
      downloadBtn.disabled = false;
      return;
  }
  requestAnimationFrame(loop);
}

function download(): void {
  if (!machine) return;
  const blob = new Blob([machine.logJsonl()], { type: "application/jsonl" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `session_seed${machine.plan.seed}.jsonl`;
  a.click();
  URL.revokeObjectURL(a.href);
}

let dragging = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("pointerdown", (ev) => {
  dragging = true;
  lastX = ev.clientX;
  lastY = ev.clientY;
  canvas.setPointerCapture(ev.pointerId);
});
canvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  orientation.applyDrag(ev.clientX - lastX, ev.clientY - lastY);
  lastX = ev.clientX;
  lastY = ev.clientY;
});
canvas.addEventListener("pointerup", () => {
  dragging = false;
});

connectBtn.addEventListener("click", () => {
  connect().catch((err: unknown) => setStatus(String(err)));
});
startBtn.addEventListener("click", () => {
  start().catch((err: unknown) => setStatus(String(err)));
});
doneBtn.addEventListener("click", () => {
  machine?.pressDone();
});
downloadBtn.addEventListener("click", download);

orientation = new Orientation(canvas.width);
drawBlank();
setStatus("enter the service address and connect");
