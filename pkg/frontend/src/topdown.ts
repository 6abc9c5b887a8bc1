// Top-down (x-y plane) bounding-box projection of a scene snapshot.
// buildDrawCommands is a pure function of the snapshot, so the same
// snapshot always yields the same drawing; the canvas layer just executes
// the commands.

import type { SceneSnapshot, Vec3 } from "./types.js";

export interface Viewport {
  scale: number; // pixels per meter
  offsetX: number;
  offsetY: number;
}

export interface RectCommand {
  kind: "rect";
  name: string | null; // null = room outline
  x: number;
  y: number;
  width: number;
  height: number;
  filled: boolean;
  highlighted: boolean;
}

export interface LabelCommand {
  kind: "label";
  text: string;
  x: number;
  y: number;
}

export interface MarkerCommand {
  kind: "marker";
  x: number;
  y: number;
  free: boolean;
}

export type DrawCommand = RectCommand | LabelCommand | MarkerCommand;

interface Bounds {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

function worldBounds(snapshot: SceneSnapshot): Bounds {
  if (snapshot.room !== null) {
    const hx = snapshot.room.size.x / 2;
    const hy = snapshot.room.size.y / 2;
    const t = snapshot.room.wall_thickness;
    return { minX: -hx - t, minY: -hy - t, maxX: hx + t, maxY: hy + t };
  }
  if (snapshot.objects.length === 0) {
    return { minX: -1, minY: -1, maxX: 1, maxY: 1 };
  }
  const bounds: Bounds = { minX: Infinity, minY: Infinity, maxX: -Infinity, maxY: -Infinity };
  for (const obj of snapshot.objects) {
    bounds.minX = Math.min(bounds.minX, obj.aabb_min.x);
    bounds.minY = Math.min(bounds.minY, obj.aabb_min.y);
    bounds.maxX = Math.max(bounds.maxX, obj.aabb_max.x);
    bounds.maxY = Math.max(bounds.maxY, obj.aabb_max.y);
  }
  return bounds;
}

/** World -> pixel transform fitting the scene bounds into the canvas.
 * World +y (north) maps to the top of the canvas. */
export function computeViewport(
  snapshot: SceneSnapshot,
  canvasWidth: number,
  canvasHeight: number,
  margin = 16,
): Viewport {
  const bounds = worldBounds(snapshot);
  const spanX = Math.max(bounds.maxX - bounds.minX, 1e-6);
  const spanY = Math.max(bounds.maxY - bounds.minY, 1e-6);
  const scale = Math.min(
    (canvasWidth - 2 * margin) / spanX,
    (canvasHeight - 2 * margin) / spanY,
  );
  const centerX = (bounds.minX + bounds.maxX) / 2;
  const centerY = (bounds.minY + bounds.maxY) / 2;
  return {
    scale,
    offsetX: canvasWidth / 2 - centerX * scale,
    offsetY: canvasHeight / 2 + centerY * scale,
  };
}

export function worldToPixel(viewport: Viewport, x: number, y: number): [number, number] {
  return [viewport.offsetX + x * viewport.scale, viewport.offsetY - y * viewport.scale];
}

export function pixelToWorld(viewport: Viewport, px: number, py: number): [number, number] {
  return [(px - viewport.offsetX) / viewport.scale, (viewport.offsetY - py) / viewport.scale];
}

function rectFor(
  viewport: Viewport,
  min: Vec3,
  max: Vec3,
  name: string | null,
  filled: boolean,
  highlighted: boolean,
): RectCommand {
  const [left, top] = worldToPixel(viewport, min.x, max.y);
  return {
    kind: "rect",
    name,
    x: left,
    y: top,
    width: (max.x - min.x) * viewport.scale,
    height: (max.y - min.y) * viewport.scale,
    filled,
    highlighted,
  };
}

/** One rect per visible object (plus the room outline), labels on the
 * selected object. */
export function buildDrawCommands(
  snapshot: SceneSnapshot,
  selected: string | null,
  canvasWidth: number,
  canvasHeight: number,
): DrawCommand[] {
  const viewport = computeViewport(snapshot, canvasWidth, canvasHeight);
  const commands: DrawCommand[] = [];
  if (snapshot.room !== null) {
    const hx = snapshot.room.size.x / 2;
    const hy = snapshot.room.size.y / 2;
    commands.push(
      rectFor(
        viewport,
        { x: -hx, y: -hy, z: 0 },
        { x: hx, y: hy, z: 0 },
        null,
        false,
        false,
      ),
    );
  }
  for (const obj of snapshot.objects) {
    if (!obj.visible) continue;
    const highlighted = obj.name === selected;
    commands.push(rectFor(viewport, obj.aabb_min, obj.aabb_max, obj.name, true, highlighted));
    if (highlighted) {
      const [lx, ly] = worldToPixel(viewport, obj.geometric_center.x, obj.geometric_center.y);
      commands.push({ kind: "label", text: obj.name, x: lx, y: ly - 6 });
    }
  }
  return commands;
}

/** The object whose footprint contains the pixel, topmost (latest) first. */
export function hitTest(
  snapshot: SceneSnapshot,
  viewport: Viewport,
  px: number,
  py: number,
): string | null {
  const [wx, wy] = pixelToWorld(viewport, px, py);
  for (let index = snapshot.objects.length - 1; index >= 0; index -= 1) {
    const obj = snapshot.objects[index];
    if (!obj.visible) continue;
    if (
      wx >= obj.aabb_min.x &&
      wx <= obj.aabb_max.x &&
      wy >= obj.aabb_min.y &&
      wy <= obj.aabb_max.y
    ) {
      return obj.name;
    }
  }
  return null;
}

export function renderToCanvas(
  context: CanvasRenderingContext2D,
  commands: DrawCommand[],
  width: number,
  height: number,
): void {
  context.clearRect(0, 0, width, height);
  for (const command of commands) {
    if (command.kind === "rect") {
      if (command.filled) {
        context.fillStyle = command.highlighted ? "#f9b44d66" : "#5b8dbf44";
        context.fillRect(command.x, command.y, command.width, command.height);
      }
      context.strokeStyle = command.name === null ? "#333" : command.highlighted ? "#f9b44d" : "#5b8dbf";
      context.lineWidth = command.name === null ? 2 : 1;
      context.strokeRect(command.x, command.y, command.width, command.height);
    } else if (command.kind === "label") {
      context.fillStyle = "#222";
      context.font = "12px sans-serif";
      context.textAlign = "center";
      context.fillText(command.text, command.x, command.y);
    } else {
      context.beginPath();
      context.arc(command.x, command.y, 5, 0, 2 * Math.PI);
      context.fillStyle = command.free ? "#2e9e4f" : "#c43c3c";
      context.fill();
    }
  }
}
