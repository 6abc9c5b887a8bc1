// Thin typed client for the scenesmith endpoints. The fetch implementation
// is injectable so tests can replay recorded sessions.

import type {
  ApiErrorBody,
  ChatResponse,
  ExportResponse,
  LibrarySearchResult,
  PlacementResponse,
  SceneSnapshot,
  Vec3,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  readonly body: ApiErrorBody | null;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody | null) {
    super(body?.message ?? `request failed with status ${status}`);
    this.status = status;
    this.body = body;
  }
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let parsed: ApiErrorBody | null = null;
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        parsed = null;
      }
      throw new ApiRequestError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  getScene(): Promise<SceneSnapshot> {
    return this.request<SceneSnapshot>("GET", "/scene");
  }

  chat(command: string, backend?: string): Promise<ChatResponse> {
    const payload: Record<string, unknown> = { command };
    if (backend !== undefined) payload.backend = backend;
    return this.request<ChatResponse>("POST", "/chat", payload);
  }

  exportScene(outDir: string): Promise<ExportResponse> {
    return this.request<ExportResponse>("POST", "/export", { out_dir: outDir });
  }

  placementCheck(points: Vec3[], clearance: number): Promise<PlacementResponse> {
    return this.request<PlacementResponse>("POST", "/placement/check", {
      points,
      clearance,
    });
  }

  librarySearch(query: string, k: number): Promise<{ results: LibrarySearchResult[] }> {
    return this.request("POST", "/library/search", { query, k });
  }
}
