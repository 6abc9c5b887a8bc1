// The two-command session, replayed against exchanges recorded from the
// real service (scripts/record_ui_fixtures.py regenerates the fixture).
// With SCENESMITH_URL set, the same flow also runs against a live server.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { StudioController } from "../src/controller.js";
import { UiStore } from "../src/state.js";
import { buildDrawCommands } from "../src/topdown.js";

interface Exchange {
  method: string;
  path: string;
  request: unknown;
  status: number;
  response: unknown;
}

const fixturePath = join(dirname(fileURLToPath(import.meta.url)), "fixtures", "session.json");
const exchanges: Exchange[] = JSON.parse(readFileSync(fixturePath, "utf-8")).exchanges;

function replayFetch(): (url: string, init?: RequestInit) => Promise<Response> {
  let cursor = 0;
  return async (url, init) => {
    const expected = exchanges[cursor];
    if (expected === undefined) throw new Error(`unexpected extra request ${url}`);
    cursor += 1;
    const method = init?.method ?? "GET";
    const path = new URL(url).pathname;
    expect(`${method} ${path}`).toBe(`${expected.method} ${expected.path}`);
    if (expected.request !== null && init?.body !== undefined) {
      expect(JSON.parse(String(init.body))).toEqual(expected.request);
    }
    return new Response(JSON.stringify(expected.response), {
      status: expected.status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

describe("two-command session (recorded fixtures)", () => {
  it("grows the transcript and object table from 7 to 11 and reports export counts", async () => {
    const store = new UiStore();
    const api = new ApiClient("http://fixtures", replayFetch());
    const controller = new StudioController(api, store);

    // Room is set up first (session precondition), giving the 6 slabs.
    expect(await controller.sendCommand("setup a 5 x 4 x 3 room")).toBe(true);
    expect(store.objectRows()).toHaveLength(6);

    expect(
      await controller.sendCommand("Create a wood table in the center of the room", "fallback"),
    ).toBe(true);
    expect(store.transcript).toHaveLength(2);
    expect(store.transcript[1].replyText).toContain("table.001");
    expect(store.objectRows()).toHaveLength(7);

    expect(await controller.sendCommand("Create 4 bowls on the table", "fallback")).toBe(true);
    expect(store.transcript).toHaveLength(3);
    expect(store.objectRows()).toHaveLength(11);
    const bowls = store.objectRows().filter((row) => row.objectType === "bowl");
    expect(bowls).toHaveLength(4);

    // one rectangle per visible object, plus the room outline
    const snapshot = store.snapshot;
    expect(snapshot).not.toBeNull();
    if (snapshot === null) throw new Error("unreachable");
    const commands = buildDrawCommands(snapshot, null, 640, 480);
    const objectRects = commands.filter((c) => c.kind === "rect" && c.name !== null);
    const outline = commands.filter((c) => c.kind === "rect" && c.name === null);
    expect(objectRects).toHaveLength(11);
    expect(outline).toHaveLength(1);

    // export counts come straight from the server response
    const message = await controller.exportScene("/tmp/studio-export");
    expect(message).toBe("11 meshes, 3 materials");
    expect(controller.lastExport).toEqual({ meshCount: 11, materialCount: 3 });

    // placement overlay: room center free, inside the table blocked
    const placement = await api.placementCheck(
      [
        { x: 0.0, y: 0.0, z: 1.5 },
        { x: 0.0, y: 0.0, z: 0.4 },
      ],
      0.1,
    );
    expect(placement.free).toEqual([true, false]);

    // version only ever moved forward
    expect(store.displayedVersion).toBe(snapshot.version);
  });

  it("keeps failed commands in the input when the server is unreachable", async () => {
    const store = new UiStore();
    const api = new ApiClient("http://down", async () => {
      throw new TypeError("fetch failed");
    });
    const controller = new StudioController(api, store);
    expect(await controller.sendCommand("add a chair")).toBe(false);
    expect(store.pendingCommand).toBe("add a chair");
    expect(store.connection).toBe("disconnected");
  });

  it("surfaces parse failures inline with their stage", async () => {
    const store = new UiStore();
    const api = new ApiClient("http://s", async () =>
      new Response(
        JSON.stringify({
          http_status: 422,
          code: "parse_failure",
          message: "cannot parse clause: 'frobnicate'",
          stage: "grammar",
        }),
        { status: 422 },
      ),
    );
    const controller = new StudioController(api, store);
    expect(await controller.sendCommand("frobnicate")).toBe(false);
    expect(store.transcript[0].error).toContain("grammar");
    expect(store.transcript[0].error).toContain("frobnicate");
  });
});

const liveUrl = process.env.SCENESMITH_URL;

describe.skipIf(!liveUrl)("two-command session (live server)", () => {
  it("runs the same flow against a running server", async () => {
    const store = new UiStore();
    const controller = new StudioController(new ApiClient(liveUrl!), store);
    await controller.sendCommand("clear the scene");
    await controller.sendCommand("setup a 5 x 4 x 3 room");
    await controller.sendCommand("Create a wood table in the center of the room", "fallback");
    expect(store.objectRows()).toHaveLength(7);
    await controller.sendCommand("Create 4 bowls on the table", "fallback");
    expect(store.objectRows()).toHaveLength(11);
  });
});
