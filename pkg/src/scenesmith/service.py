"""HTTP boundary: scene endpoints, the chat pipeline, export, placement
checks and library search.

Scene mutation is single-writer (one lock); reads go through a published
immutable snapshot so GET /scene never waits on a mutation. Every non-2xx
response body carries {http_status, code, message, stage?, detail?}.
"""

from __future__ import annotations

import threading
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import exporter, geometry, resolver, scene as scene_mod
from .actions import (
    SchemaError,
    ValidationError,
    action_to_jsonable,
    parse_action_object,
    validate_reference_closure,
)
from .clients import BackendUnavailableError, ClientError, RecordReplayClient
from .config import ServiceConfig
from .errors import ScenesmithError
from .library import AssetLibrary, EmptyIndexError, LibraryError
from .pipeline import ChatBackend, GrammarBackend, ParseFailure, parse_command
from .types import Vec3


class ApiError(Exception):
    def __init__(
        self,
        http_status: int,
        code: str,
        message: str,
        stage: str | None = None,
        detail: Any = None,
    ):
        super().__init__(message)
        self.http_status = http_status
        self.code = code
        self.message = message
        self.stage = stage
        self.detail = detail

    def body(self) -> dict:
        payload: dict[str, Any] = {
            "http_status": self.http_status,
            "code": self.code,
            "message": self.message,
        }
        if self.stage is not None:
            payload["stage"] = self.stage
        if self.detail is not None:
            payload["detail"] = self.detail
        return payload


class SceneService:
    """Owns the scene, its lock, the parser backends and the BVH cache."""

    def __init__(self, config: ServiceConfig, library: AssetLibrary | None = None):
        self.config = config
        self.scene = scene_mod.Scene()
        self.lock = threading.Lock()
        self.library = library if library is not None else self._load_library(config)
        self.latest_snapshot = scene_mod.snapshot(self.scene)
        self._bvh: geometry.Bvh | None = None
        self._bvh_version = -1
        self.grammar_backend = GrammarBackend()
        self.chat_backend = self._make_chat_backend(config)

    @staticmethod
    def _load_library(config: ServiceConfig) -> AssetLibrary | None:
        if config.assets_dir is None:
            return None
        return AssetLibrary.load_manifest(config.assets_dir)

    @staticmethod
    def _make_chat_backend(config: ServiceConfig) -> ChatBackend | None:
        if config.mode in ("live", "record") and not config.chat_url:
            return None
        if config.mode == "replay" and not config.fixtures_dir:
            return None
        client = RecordReplayClient(
            kind="chat",
            url=config.chat_url,
            mode=config.mode,
            fixtures_dir=config.fixtures_dir,
            timeout=config.timeout,
            model=config.chat_model,
        )
        return ChatBackend(client)

    def backend_for(self, name: str | None):
        choice = name or self.config.default_backend
        if choice is None:
            choice = "external" if self.chat_backend is not None else "fallback"
        if choice in ("fallback", "fallback_grammar", "grammar"):
            return self.grammar_backend
        if choice in ("external", "external_chat_service", "chat"):
            if self.chat_backend is None:
                raise ApiError(
                    502,
                    "backend_unavailable",
                    "no external chat backend is configured",
                    stage="backend",
                )
            return self.chat_backend
        raise ApiError(400, "unknown_backend", f"unknown backend '{choice}'")

    def publish(self) -> None:
        self.latest_snapshot = scene_mod.snapshot(self.scene)

    def bvh(self) -> geometry.Bvh:
        if self._bvh is None or self._bvh_version != self.scene.version:
            objects = [(o.name, o.world_mesh) for o in self.scene.objects.values()]
            if not objects:
                raise ApiError(409, "empty_scene", "the scene has no geometry")
            self._bvh = geometry.build_bvh(objects)
            self._bvh_version = self.scene.version
        return self._bvh


def _error_status(exc: ScenesmithError) -> tuple[int, str | None]:
    if isinstance(exc, ParseFailure):
        return 422, exc.stage
    if isinstance(exc, SchemaError):
        return 400, "schema"
    if isinstance(exc, ValidationError):
        return 400, "closure"
    if isinstance(exc, resolver.ResolveError):
        return 400, "resolve"
    if isinstance(exc, exporter.NothingToExportError):
        return 409, None
    if isinstance(exc, exporter.IoFailureError):
        return 500, None
    if isinstance(exc, EmptyIndexError):
        return 409, None
    if isinstance(exc, (BackendUnavailableError, ClientError)):
        return 502, "backend"
    if isinstance(exc, LibraryError):
        return 400, None
    return 400, None


def _reply_text(results, resolved_actions) -> str:
    created = [name for result in results for name in result.created_names]
    moved = sorted(
        {
            action.name
            for action, result in zip(resolved_actions, results)
            if result.ok and action.kind.value in ("move_to", "move_by", "rotate", "resize", "scale")
            and action.name
        }
    )
    parts = []
    if any(r.ok and resolved_actions[r.index].kind.value == "setup_room" for r in results):
        parts.append("Set up the room.")
    if any(r.ok and resolved_actions[r.index].kind.value == "clear_scene" for r in results):
        parts.append("Cleared the scene.")
    if created:
        parts.append("Created " + ", ".join(created) + ".")
    if moved:
        parts.append("Updated " + ", ".join(moved) + ".")
    deleted = [
        resolved_actions[r.index].name
        for r in results
        if r.ok and resolved_actions[r.index].kind.value == "delete"
    ]
    if deleted:
        parts.append("Deleted " + ", ".join(n for n in deleted if n) + ".")
    failures = [r for r in results if not r.ok]
    if failures:
        failure = failures[0]
        parts.append(
            f"Action {failure.source_index + 1} failed: {failure.message}"
            " (earlier actions were applied)."
        )
    if not parts:
        parts.append("No changes were made.")
    return " ".join(parts)


def _parse_vec3_json(value: Any, field_name: str) -> Vec3:
    if not isinstance(value, dict):
        raise ApiError(400, "bad_request", f"'{field_name}' must be an object with x, y, z")
    try:
        return Vec3(float(value["x"]), float(value["y"]), float(value["z"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(400, "bad_request", f"bad '{field_name}': {exc}") from None


def create_app(
    config: ServiceConfig | None = None, library: AssetLibrary | None = None
) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="scenesmith", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    service = SceneService(config, library=library)
    app.state.service = service

    @app.exception_handler(ApiError)
    async def on_api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.http_status, content=exc.body())

    @app.exception_handler(ScenesmithError)
    async def on_domain_error(_request: Request, exc: ScenesmithError):
        status, stage = _error_status(exc)
        return JSONResponse(
            status_code=status,
            content=ApiError(status, exc.code, str(exc), stage=stage).body(),
        )

    @app.get("/scene")
    def get_scene():
        return service.latest_snapshot.to_jsonable()

    @app.post("/actions")
    async def post_actions(request: Request):
        body = await _json_body(request)
        raw_actions = body.get("actions")
        if not isinstance(raw_actions, list):
            raise ApiError(400, "bad_request", "'actions' must be an array", stage="schema")
        actions = [parse_action_object(element, index=i) for i, element in enumerate(raw_actions)]
        expected_version = body.get("expected_version")
        with service.lock:
            if expected_version is not None and expected_version != service.scene.version:
                raise ApiError(
                    409,
                    "version_mismatch",
                    f"expected version {expected_version}, scene is at {service.scene.version}",
                )
            snapshot = scene_mod.snapshot(service.scene)
            validate_reference_closure(actions, snapshot.names())
            resolved = resolver.resolve(snapshot, actions, service.library)
            results = scene_mod.apply_actions(service.scene, resolved)
            service.publish()
            return {
                "results": [r.to_jsonable() for r in results],
                "resolved": [r.to_jsonable() for r in resolved],
                "version": service.scene.version,
            }

    @app.post("/chat")
    async def post_chat(request: Request):
        body = await _json_body(request)
        command = body.get("command")
        if not isinstance(command, str) or not command.strip():
            raise ApiError(400, "bad_request", "'command' must be a non-empty string")
        backend = service.backend_for(body.get("backend"))
        with service.lock:
            snapshot = scene_mod.snapshot(service.scene)
            actions = parse_command(backend, snapshot, command)
            resolved = resolver.resolve(snapshot, actions, service.library)
            results = scene_mod.apply_actions(service.scene, resolved)
            service.publish()
            return {
                "actions": [action_to_jsonable(a) for a in actions],
                "results": [r.to_jsonable() for r in results],
                "reply_text": _reply_text(results, resolved),
                "version": service.scene.version,
            }

    @app.post("/export")
    async def post_export(request: Request):
        body = await _json_body(request)
        out_dir = body.get("out_dir")
        if not isinstance(out_dir, str) or not out_dir:
            raise ApiError(400, "bad_request", "'out_dir' must be a non-empty string")
        with service.lock:
            bundle = exporter.export_scene(service.scene, out_dir)
        materials = {material for _, _, material in _shapes_of(bundle)}
        return {
            "xml_path": f"{out_dir.rstrip('/')}/scene.xml",
            "mesh_count": len(bundle.mesh_files),
            "material_count": len(materials),
        }

    @app.post("/placement/check")
    async def post_placement_check(request: Request):
        body = await _json_body(request)
        clearance = body.get("clearance", 0.0)
        if not isinstance(clearance, (int, float)) or isinstance(clearance, bool):
            raise ApiError(400, "bad_request", "'clearance' must be a number")
        if clearance < 0:
            raise ApiError(400, "bad_request", "'clearance' must be >= 0")
        points_json = body.get("points")
        if not isinstance(points_json, list):
            raise ApiError(400, "bad_request", "'points' must be an array")
        points = [_parse_vec3_json(p, f"points[{i}]") for i, p in enumerate(points_json)]
        with service.lock:
            bvh = service.bvh()
        free = [bvh.is_free_space(p.to_tuple(), float(clearance)) for p in points]
        return {"free": free}

    @app.post("/library/search")
    async def post_library_search(request: Request):
        body = await _json_body(request)
        query = body.get("query")
        k = body.get("k", 1)
        if not isinstance(query, str) or not query:
            raise ApiError(400, "bad_request", "'query' must be a non-empty string")
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ApiError(400, "bad_request", "'k' must be an integer >= 1")
        if service.library is None or len(service.library) == 0:
            raise ApiError(409, "empty_index", "no asset library is configured")
        ranked = service.library.search(query, k)
        return {
            "results": [
                {
                    "asset_id": asset_id,
                    "object_type": service.library.get(asset_id).object_type,
                    "score": score,
                }
                for asset_id, score in ranked
            ]
        }

    return app


def _shapes_of(bundle: exporter.ExportBundle):
    # Recover (name, path, material) triples from the XML for count reporting.
    import xml.etree.ElementTree as ElementTree

    root = ElementTree.fromstring(bundle.xml_text)
    shapes = []
    for shape in root.findall("shape"):
        name = shape.get("name")
        filename = shape.find("string").get("value")  # type: ignore[union-attr]
        material = shape.find("ref").get("id")  # type: ignore[union-attr]
        shapes.append((name, filename, material))
    return shapes


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ApiError(400, "bad_request", "request body must be JSON", stage="schema") from None
    if not isinstance(body, dict):
        raise ApiError(400, "bad_request", "request body must be a JSON object", stage="schema")
    return body


def run_server(config: ServiceConfig) -> None:  # pragma: no cover - thin wrapper
    import uvicorn

    uvicorn.run(create_app(config), host="127.0.0.1", port=config.port)
