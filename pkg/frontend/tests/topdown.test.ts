import { describe, expect, it } from "vitest";

import {
  buildDrawCommands,
  computeViewport,
  hitTest,
  pixelToWorld,
  worldToPixel,
} from "../src/topdown.js";
import type { SceneSnapshot } from "../src/types.js";

function roomSnapshot(objects: Array<[string, number, number, number, number]>): SceneSnapshot {
  return {
    version: 1,
    room: { size: { x: 8, y: 6, z: 3 }, wall_thickness: 0.1 },
    materials: [],
    directions: ["north", "south", "east", "west"],
    objects: objects.map(([name, minX, minY, maxX, maxY]) => ({
      name,
      object_type: name.split(".")[0],
      location: { x: (minX + maxX) / 2, y: (minY + maxY) / 2, z: 0 },
      rotation_deg: { x: 0, y: 0, z: 0 },
      size: { x: maxX - minX, y: maxY - minY, z: 1 },
      geometric_center: { x: (minX + maxX) / 2, y: (minY + maxY) / 2, z: 0.5 },
      aabb_min: { x: minX, y: minY, z: 0 },
      aabb_max: { x: maxX, y: maxY, z: 1 },
      material: "itu_wood",
      visible: true,
    })),
  };
}

describe("viewport transform", () => {
  it("is a linear map that round-trips", () => {
    const snapshot = roomSnapshot([]);
    const viewport = computeViewport(snapshot, 640, 480);
    const [px, py] = worldToPixel(viewport, 1.25, -2.5);
    const [wx, wy] = pixelToWorld(viewport, px, py);
    expect(wx).toBeCloseTo(1.25, 9);
    expect(wy).toBeCloseTo(-2.5, 9);
  });

  it("maps world +y (north) to the top of the canvas", () => {
    const snapshot = roomSnapshot([]);
    const viewport = computeViewport(snapshot, 640, 480);
    const [, northY] = worldToPixel(viewport, 0, 3);
    const [, southY] = worldToPixel(viewport, 0, -3);
    expect(northY).toBeLessThan(southY);
  });

  it("fits the whole room inside the canvas", () => {
    const snapshot = roomSnapshot([]);
    const viewport = computeViewport(snapshot, 640, 480, 16);
    for (const [x, y] of [
      [-4.1, -3.1],
      [4.1, 3.1],
    ] as Array<[number, number]>) {
      const [px, py] = worldToPixel(viewport, x, y);
      expect(px).toBeGreaterThanOrEqual(0);
      expect(px).toBeLessThanOrEqual(640);
      expect(py).toBeGreaterThanOrEqual(0);
      expect(py).toBeLessThanOrEqual(480);
    }
  });
});

describe("buildDrawCommands", () => {
  it("empty scene with room renders the room outline only", () => {
    const commands = buildDrawCommands(roomSnapshot([]), null, 640, 480);
    expect(commands).toHaveLength(1);
    expect(commands[0]).toMatchObject({ kind: "rect", name: null, filled: false });
  });

  it("renders one rectangle per visible object", () => {
    const snapshot = roomSnapshot([
      ["table.001", -1, -0.5, 1, 0.5],
      ["chair.001", 2, 1, 2.5, 1.5],
    ]);
    const commands = buildDrawCommands(snapshot, null, 640, 480);
    const rects = commands.filter((c) => c.kind === "rect" && c.name !== null);
    expect(rects).toHaveLength(2);
  });

  it("skips hidden objects", () => {
    const snapshot = roomSnapshot([["table.001", -1, -0.5, 1, 0.5]]);
    snapshot.objects[0].visible = false;
    const commands = buildDrawCommands(snapshot, null, 640, 480);
    expect(commands.filter((c) => c.kind === "rect" && c.name !== null)).toHaveLength(0);
  });

  it("maps world AABB to the expected pixel rectangle", () => {
    const snapshot = roomSnapshot([["box.001", 1, 0, 2, 1]]);
    const viewport = computeViewport(snapshot, 640, 480);
    const command = buildDrawCommands(snapshot, null, 640, 480).find(
      (c) => c.kind === "rect" && c.name === "box.001",
    );
    expect(command).toBeDefined();
    if (command === undefined || command.kind !== "rect") throw new Error("unreachable");
    const [left, top] = worldToPixel(viewport, 1, 1);
    expect(command.x).toBeCloseTo(left, 9);
    expect(command.y).toBeCloseTo(top, 9);
    expect(command.width).toBeCloseTo(viewport.scale, 9);
    expect(command.height).toBeCloseTo(viewport.scale, 9);
  });

  it("is a pure function of the snapshot", () => {
    const snapshot = roomSnapshot([["table.001", -1, -0.5, 1, 0.5]]);
    const first = buildDrawCommands(snapshot, "table.001", 640, 480);
    const second = buildDrawCommands(snapshot, "table.001", 640, 480);
    expect(second).toEqual(first);
  });

  it("labels and highlights the selected object", () => {
    const snapshot = roomSnapshot([["table.001", -1, -0.5, 1, 0.5]]);
    const commands = buildDrawCommands(snapshot, "table.001", 640, 480);
    expect(commands.some((c) => c.kind === "label" && c.text === "table.001")).toBe(true);
    const rect = commands.find((c) => c.kind === "rect" && c.name === "table.001");
    expect(rect && rect.kind === "rect" && rect.highlighted).toBe(true);
  });
});

describe("hitTest", () => {
  it("returns the topmost object containing the pixel", () => {
    const snapshot = roomSnapshot([
      ["rug.001", -2, -2, 2, 2],
      ["table.001", -1, -0.5, 1, 0.5],
    ]);
    const viewport = computeViewport(snapshot, 640, 480);
    const [px, py] = worldToPixel(viewport, 0, 0);
    expect(hitTest(snapshot, viewport, px, py)).toBe("table.001");
    const [farX, farY] = worldToPixel(viewport, 3.5, 2.5);
    expect(hitTest(snapshot, viewport, farX, farY)).toBeNull();
  });
});
