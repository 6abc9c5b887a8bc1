// DOM wiring: renders the store into the transcript list, object table and
// top-down canvas, and forwards user input to the controller.

import { ApiClient } from "./api.js";
import { StudioController } from "./controller.js";
import { UiStore } from "./state.js";
import { buildDrawCommands, computeViewport, hitTest, pixelToWorld, renderToCanvas } from "./topdown.js";

const CANVAS_WIDTH = 640;
const CANVAS_HEIGHT = 480;

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

export function mountStudio(root: Document, baseUrl: string): StudioController {
  const store = new UiStore();
  const controller = new StudioController(new ApiClient(baseUrl), store);

  const input = element<HTMLInputElement>("command-input");
  const sendButton = element<HTMLButtonElement>("send-button");
  const transcript = element<HTMLUListElement>("transcript");
  const objectTable = element<HTMLTableSectionElement>("object-rows");
  const statusBanner = element<HTMLDivElement>("status-banner");
  const versionLabel = element<HTMLSpanElement>("version-label");
  const exportButton = element<HTMLButtonElement>("export-button");
  const exportResult = element<HTMLSpanElement>("export-result");
  const placementToggle = element<HTMLInputElement>("placement-toggle");
  const canvas = element<HTMLCanvasElement>("topdown-canvas");
  canvas.width = CANVAS_WIDTH;
  canvas.height = CANVAS_HEIGHT;
  const context = canvas.getContext("2d");

  const render = () => {
    sendButton.disabled = input.value.trim() === "";
    statusBanner.textContent =
      store.connection === "disconnected" ? "server unreachable - retrying" : "";
    statusBanner.style.display = store.connection === "disconnected" ? "block" : "none";
    versionLabel.textContent = String(store.displayedVersion);
    if (store.pendingCommand && input.value === "") {
      input.value = store.pendingCommand;
    }

    transcript.replaceChildren(
      ...store.transcript.map((entry) => {
        const item = root.createElement("li");
        const command = root.createElement("div");
        command.className = "command";
        command.textContent = `> ${entry.command}`;
        item.appendChild(command);
        const reply = root.createElement("div");
        reply.className = entry.error === null ? "reply" : "reply error";
        reply.textContent = entry.error ?? entry.replyText ?? "";
        item.appendChild(reply);
        return item;
      }),
    );

    objectTable.replaceChildren(
      ...store.objectRows().map((row) => {
        const tr = root.createElement("tr");
        if (row.name === store.selected) tr.className = "selected";
        for (const value of [row.name, row.objectType, row.material, row.size, row.center]) {
          const td = root.createElement("td");
          td.textContent = value;
          tr.appendChild(td);
        }
        tr.addEventListener("click", () => store.select(row.name));
        return tr;
      }),
    );

    if (context !== null && store.snapshot !== null) {
      const commands = buildDrawCommands(store.snapshot, store.selected, CANVAS_WIDTH, CANVAS_HEIGHT);
      renderToCanvas(context, [...commands, ...controller.markers], CANVAS_WIDTH, CANVAS_HEIGHT);
    }
  };

  store.subscribe(render);
  input.addEventListener("input", render);

  const submit = async () => {
    const command = input.value;
    if (!command.trim()) return;
    input.value = "";
    await controller.sendCommand(command);
  };
  sendButton.addEventListener("click", () => void submit());
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") void submit();
  });

  exportButton.addEventListener("click", () => {
    void controller.exportScene("export").then((message) => {
      exportResult.textContent = message;
    });
  });

  canvas.addEventListener("click", (event) => {
    if (store.snapshot === null) return;
    const bounds = canvas.getBoundingClientRect();
    const px = event.clientX - bounds.left;
    const py = event.clientY - bounds.top;
    const viewport = computeViewport(store.snapshot, CANVAS_WIDTH, CANVAS_HEIGHT);
    if (placementToggle.checked) {
      const [wx, wy] = pixelToWorld(viewport, px, py);
      const height = store.snapshot.room === null ? 1.0 : store.snapshot.room.size.z / 2;
      void controller
        .checkPlacement({ x: wx, y: wy, z: height }, 0.1, [px, py])
        .then(() => render());
    } else {
      store.select(hitTest(store.snapshot, viewport, px, py));
    }
  });

  void controller.refresh();
  controller.startPolling();
  render();
  return controller;
}
