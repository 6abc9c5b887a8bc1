from __future__ import annotations

import json
from pathlib import Path

import pytest

from scenesmith.materials import MaterialTable
from scenesmith.scene import DIRECTION_NAMES, ObjectSnapshot, RoomSpec, SceneSnapshot
from scenesmith.types import Vec3

DATA_DIR = Path(__file__).parent / "data"


def make_snapshot(entries=(), room: RoomSpec | None = None, version: int = 0) -> SceneSnapshot:
    """Snapshot with placeholder geometry, for parser-level tests."""
    objects = []
    for index, entry in enumerate(entries):
        name = entry["name"]
        object_type = entry.get("object_type", name.split(".")[0])
        center = Vec3(float(index), 0.0, 0.5)
        objects.append(
            ObjectSnapshot(
                name=name,
                object_type=object_type,
                location=Vec3(center.x, center.y, 0.0),
                rotation_deg=Vec3(0, 0, 0),
                size=Vec3(1, 1, 1),
                geometric_center=center,
                aabb_min=Vec3(center.x - 0.5, -0.5, 0.0),
                aabb_max=Vec3(center.x + 0.5, 0.5, 1.0),
                material="itu_wood",
                visible=True,
            )
        )
    return SceneSnapshot(
        room=room,
        objects=tuple(objects),
        materials=tuple(MaterialTable().names()),
        directions=DIRECTION_NAMES,
        version=version,
    )


@pytest.fixture(scope="session")
def golden_cases() -> list[dict]:
    return json.loads((DATA_DIR / "golden_commands.json").read_text(encoding="utf-8"))["cases"]
