// Browser entry point: connect, render the latest state each animation
// frame, and forward pointer gestures as cursor messages.

import { PROTOCOL_VERSION } from "./protocol.js";
import { PointerBridge } from "./pointer.js";
import { render } from "./render.js";
import { Transform } from "./transform.js";
import { WebSocketTransport } from "./transport.js";
import { ViewModel } from "./viewmodel.js";

const params = new URLSearchParams(window.location.search);
const url = params.get("server") ?? `ws://${window.location.hostname}:9871`;

const canvas = document.getElementById("view") as HTMLCanvasElement;
const statusLine = document.getElementById("status") as HTMLElement;
const ctx = canvas.getContext("2d")!;

const vm = new ViewModel();
const transport = new WebSocketTransport(url);
transport.onMessage((msg) => vm.offer(msg));
transport.onStatus((status) => vm.setConnection(status));
transport.send({ type: "hello", v: PROTOCOL_VERSION, role: "ui" });

const pointers = new PointerBridge(transport);
let lastTransform: Transform | null = null;

canvas.addEventListener("pointerdown", (e) => {
  if (lastTransform) {
    canvas.setPointerCapture(e.pointerId);
    pointers.down(e.pointerId, e.offsetX, e.offsetY, lastTransform);
  }
});
canvas.addEventListener("pointermove", (e) => {
  if (lastTransform && e.buttons !== 0) {
    pointers.move(e.pointerId, e.offsetX, e.offsetY, lastTransform);
  }
});
for (const name of ["pointerup", "pointercancel"] as const) {
  canvas.addEventListener(name, (e) => pointers.up(e.pointerId));
}

function frame(): void {
  const state = vm.take();
  if (state !== null) {
    const result = render(ctx, state, canvas.width, canvas.height);
    lastTransform = result.transform;
  }
  statusLine.textContent =
    `${vm.connection}` + (vm.lastError ? ` — ${vm.lastError}` : "");
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
