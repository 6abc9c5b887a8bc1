#!/usr/bin/env python3
"""Record the two-command demo session against the real service and store
the exchanges as fixtures for the frontend test suite.

Usage: python3 scripts/record_ui_fixtures.py [output.json]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from scenesmith.config import ServiceConfig
from scenesmith.service import create_app

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures" / "session.json"


def main() -> None:
    out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_OUT
    exchanges: list[dict] = []

    app = create_app(ServiceConfig(default_backend="fallback"))
    with TestClient(app) as client:

        def record(method: str, path: str, body: dict | None = None) -> dict:
            if method == "GET":
                response = client.get(path)
            else:
                response = client.post(path, json=body)
            payload = response.json()
            exchanges.append(
                {
                    "method": method,
                    "path": path,
                    "request": body,
                    "status": response.status_code,
                    "response": payload,
                }
            )
            return payload

        # The session starts with the room already in place.
        record("POST", "/chat", {"command": "setup a 5 x 4 x 3 room"})
        record("GET", "/scene")
        record(
            "POST",
            "/chat",
            {"command": "Create a wood table in the center of the room", "backend": "fallback"},
        )
        record("GET", "/scene")
        record(
            "POST", "/chat", {"command": "Create 4 bowls on the table", "backend": "fallback"}
        )
        record("GET", "/scene")
        record("POST", "/export", {"out_dir": "/tmp/studio-export"})
        record(
            "POST",
            "/placement/check",
            {
                "points": [
                    {"x": 0.0, "y": 0.0, "z": 1.5},
                    {"x": 0.0, "y": 0.0, "z": 0.4},
                ],
                "clearance": 0.1,
            },
        )

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps({"exchanges": exchanges}, indent=2), encoding="utf-8")
    print(f"recorded {len(exchanges)} exchanges -> {out_path}")


if __name__ == "__main__":
    main()
