// UI state: chat transcript, the latest snapshot (guarded by a version
// cursor so stale fetches never overwrite newer state), selection, and the
// server connection status.

import type { ActionResult, SceneObjectInfo, SceneSnapshot } from "./types.js";

export interface TranscriptEntry {
  command: string;
  replyText: string | null;
  results: ActionResult[];
  error: string | null;
}

export type ConnectionStatus = "unknown" | "connected" | "disconnected";

export interface ObjectRow {
  name: string;
  objectType: string;
  material: string;
  size: string;
  center: string;
}

const fmt = (value: number): string => value.toFixed(2);

export class UiStore {
  transcript: TranscriptEntry[] = [];
  snapshot: SceneSnapshot | null = null;
  versionCursor = -1;
  selected: string | null = null;
  connection: ConnectionStatus = "unknown";
  pendingCommand = "";

  private listeners: Array<() => void> = [];

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((entry) => entry !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Adopt a snapshot unless it is staler than what is already shown. */
  applySnapshot(snapshot: SceneSnapshot): boolean {
    if (snapshot.version < this.versionCursor) return false;
    this.snapshot = snapshot;
    this.versionCursor = snapshot.version;
    if (this.selected !== null && !snapshot.objects.some((o) => o.name === this.selected)) {
      this.selected = null;
    }
    this.connection = "connected";
    this.notify();
    return true;
  }

  get displayedVersion(): number {
    return this.versionCursor < 0 ? 0 : this.versionCursor;
  }

  addExchange(command: string, replyText: string, results: ActionResult[]): void {
    this.transcript.push({ command, replyText, results, error: null });
    this.pendingCommand = "";
    this.connection = "connected";
    this.notify();
  }

  addFailure(command: string, error: string): void {
    this.transcript.push({ command, replyText: null, results: [], error });
    this.notify();
  }

  /** Transport failure: keep the command in the input box, flag the server. */
  markDisconnected(command: string): void {
    this.pendingCommand = command;
    this.connection = "disconnected";
    this.notify();
  }

  select(name: string | null): void {
    this.selected = name;
    this.notify();
  }

  objectRows(): ObjectRow[] {
    if (this.snapshot === null) return [];
    return this.snapshot.objects.map((obj: SceneObjectInfo) => ({
      name: obj.name,
      objectType: obj.object_type,
      material: obj.material,
      size: `${fmt(obj.size.x)} x ${fmt(obj.size.y)} x ${fmt(obj.size.z)}`,
      center: `(${fmt(obj.geometric_center.x)}, ${fmt(obj.geometric_center.y)}, ${fmt(obj.geometric_center.z)})`,
    }));
  }
}
