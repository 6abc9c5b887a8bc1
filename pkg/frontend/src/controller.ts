// Orchestration between the API client and the UI store: send commands,
// refresh snapshots (after each mutation plus a 2 s idle poll), export,
// placement checks. No DOM access, so the whole flow is unit-testable.

import { ApiClient, ApiRequestError } from "./api.js";
import { UiStore } from "./state.js";
import type { MarkerCommand } from "./topdown.js";
import type { Vec3 } from "./types.js";

export const IDLE_POLL_MS = 2000;

export class StudioController {
  readonly api: ApiClient;
  readonly store: UiStore;
  lastExport: { meshCount: number; materialCount: number } | null = null;
  markers: MarkerCommand[] = [];
  private refreshInFlight = false;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(api: ApiClient, store: UiStore) {
    this.api = api;
    this.store = store;
  }

  /** Fetch the snapshot; stale responses are dropped by the store. */
  async refresh(): Promise<void> {
    if (this.refreshInFlight) return;
    this.refreshInFlight = true;
    try {
      const snapshot = await this.api.getScene();
      this.store.applySnapshot(snapshot);
    } catch {
      this.store.connection = "disconnected";
    } finally {
      this.refreshInFlight = false;
    }
  }

  async sendCommand(command: string, backend?: string): Promise<boolean> {
    const text = command.trim();
    if (!text) return false;
    try {
      const reply = await this.api.chat(text, backend);
      this.store.addExchange(text, reply.reply_text, reply.results);
      await this.refresh();
      return true;
    } catch (error) {
      if (error instanceof ApiRequestError) {
        const stage = error.body?.stage;
        const message = error.body?.message ?? error.message;
        this.store.addFailure(text, stage ? `${stage}: ${message}` : message);
        return false;
      }
      this.store.markDisconnected(text);
      return false;
    }
  }

  async exportScene(outDir: string): Promise<string> {
    try {
      const result = await this.api.exportScene(outDir);
      this.lastExport = {
        meshCount: result.mesh_count,
        materialCount: result.material_count,
      };
      return `${result.mesh_count} meshes, ${result.material_count} materials`;
    } catch (error) {
      if (error instanceof ApiRequestError) {
        return `export failed: ${error.body?.message ?? error.message}`;
      }
      this.store.connection = "disconnected";
      return "export failed: server unreachable";
    }
  }

  /** Query one point and keep a green/red marker for the overlay. */
  async checkPlacement(point: Vec3, clearance: number, pixel: [number, number]): Promise<boolean | null> {
    try {
      const result = await this.api.placementCheck([point], clearance);
      const free = result.free[0];
      this.markers.push({ kind: "marker", x: pixel[0], y: pixel[1], free });
      return free;
    } catch {
      return null;
    }
  }

  startPolling(intervalMs = IDLE_POLL_MS): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => void this.refresh(), intervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
