// Wire types mirrored from the scenesmith HTTP API.

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export interface SceneObjectInfo {
  name: string;
  object_type: string;
  location: Vec3;
  rotation_deg: Vec3;
  size: Vec3;
  geometric_center: Vec3;
  aabb_min: Vec3;
  aabb_max: Vec3;
  material: string;
  visible: boolean;
}

export interface RoomInfo {
  size: Vec3;
  wall_thickness: number;
}

export interface SceneSnapshot {
  version: number;
  room: RoomInfo | null;
  objects: SceneObjectInfo[];
  materials: string[];
  directions: string[];
}

export interface ActionResult {
  index: number;
  source_index: number;
  status: "ok" | "error";
  created_names?: string[];
  error_code?: string;
  message?: string;
}

export interface ChatResponse {
  actions: unknown[];
  results: ActionResult[];
  reply_text: string;
  version: number;
}

export interface ExportResponse {
  xml_path: string;
  mesh_count: number;
  material_count: number;
}

export interface PlacementResponse {
  free: boolean[];
}

export interface LibrarySearchResult {
  asset_id: string;
  object_type: string;
  score: number;
}

export interface ApiErrorBody {
  http_status: number;
  code: string;
  message: string;
  stage?: string;
  detail?: unknown;
}
