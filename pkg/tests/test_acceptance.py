"""Acceptance suite: one test per release criterion, offline only.

Each test prints an `ACCEPTANCE <name>: PASS/FAIL` line (run pytest with -s
or check the captured output) and enforces its runtime budget.
"""

from __future__ import annotations

import functools
import json
import random
import time
import xml.etree.ElementTree as ElementTree
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from scenesmith import geometry, resolver, scene as scene_mod
from scenesmith.actions import Action, ActionType, SpatialRelation, resequence_local_ids
from scenesmith.cli import main as cli_main
from scenesmith.config import ServiceConfig
from scenesmith.dataset import MetricsReport, RawSample, eval_accuracy, run_validation
from scenesmith.exporter import write_ply
from scenesmith.library import AssetLibrary, DeterministicEmbedder, make_primitive, read_ascii_ply
from scenesmith.service import create_app
from scenesmith.types import Vec3

from .oracles import brute_force_ray, brute_min_distance, icosphere, triangle_soup, winding_number


def criterion(name: str, budget_seconds: float):
    def decorator(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.monotonic()
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {name}: FAIL")
                raise
            elapsed = time.monotonic() - start
            if elapsed > budget_seconds:
                print(f"ACCEPTANCE {name}: FAIL (runtime {elapsed:.1f}s > {budget_seconds}s)")
                pytest.fail(f"{name} exceeded runtime budget: {elapsed:.1f}s")
            print(f"ACCEPTANCE {name}: PASS ({elapsed:.2f}s)")
            return result

        return wrapper

    return decorator


# --------------------------------------------------------------------------
# 1. Metrics arithmetic reproduction
# --------------------------------------------------------------------------


@criterion("table-rate-arithmetic", 1.0)
def test_recorded_stage_rates_reproduce_overall_usability():
    rows = {
        "gpt5_nano": ((0.960, 0.904, 1.000, 0.839), 72.8),
        "qwen3_8b": ((0.960, 0.821, 0.638, 0.820), 41.2),
        "phi4_14b": ((0.810, 0.780, 0.902, 0.804), 45.8),
    }
    for label, (rates, expected_percent) in rows.items():
        report = MetricsReport.from_rates(*rates)
        actual = report.overall_usability_rate * 100.0
        assert abs(actual - expected_percent) <= 0.05, (
            f"{label}: {actual:.3f}% vs {expected_percent}%"
        )


# --------------------------------------------------------------------------
# 2. Validation-pipeline property suite
# --------------------------------------------------------------------------


def _synthetic_raw_corpus(n: int, seed: int) -> list[RawSample]:
    rng = random.Random(seed)
    corpus: list[RawSample] = []
    for index in range(n):
        roll = rng.random()
        if roll < 0.12:
            text = "{this is not json" + "!" * rng.randrange(5)
        elif roll < 0.22:
            payload = {
                "command": f"add a chair {index}",
                "existing_objects": [],
                "actions": [
                    {
                        "action_type": "create_object_absolute",
                        "object_type": "chair",
                        "quantity": rng.choice([1.5, 2.0, 0, -3]),  # non-integer / bad
                        "local_id": "1",
                    }
                ],
            }
            text = json.dumps(payload)
        elif roll < 0.40:
            payload = {
                "command": f"add a lamp {index % 17}",  # forced duplicates
                "existing_objects": [],
                "actions": [
                    {
                        "action_type": "create_object_absolute",
                        "object_type": "lamp",
                        "quantity": 1,
                        "local_id": str(rng.randrange(1, 9)),  # bad sequencing, fixable
                    }
                ],
            }
            text = json.dumps(payload)
        elif roll < 0.5:
            payload = {
                "command": f"move the ghost {index}",
                "existing_objects": [],
                "actions": [
                    {
                        "action_type": "move_object_offset",
                        "object_name": "ghost",
                        "offset": {"x": 1, "y": 0, "z": 0},
                    }
                ],
            }
            text = json.dumps(payload)
        else:
            payload = {
                "command": f"add variant {index}",
                "existing_objects": [],
                "actions": [
                    {
                        "action_type": "create_object_absolute",
                        "object_type": "chair",
                        "quantity": 1,
                        "local_id": "1",
                        "position": {"x": float(index % 5), "y": 0.0, "z": 0.0},
                    }
                ],
            }
            text = json.dumps(payload)
        corpus.append(RawSample(raw_text=text, provenance={"index": index}))
    return corpus


@criterion("validation-pipeline-properties", 10.0)
def test_validation_pipeline_properties():
    raw = _synthetic_raw_corpus(1000, seed=2024)
    accepted, report = run_validation(raw)

    assert report.n_raw == 1000
    assert report.n_raw >= report.n_json >= report.n_format >= report.n_unique >= report.n_matched
    assert 0 < report.n_matched < report.n_raw  # corruption actually bit

    product = (
        report.json_validity_rate
        * report.format_validity_rate
        * report.unique_sample_rate
        * report.meaning_matched_rate
    )
    assert abs(product - report.overall_usability_rate) < 5e-4

    for sample in accepted:  # resequencing idempotence on every survivor
        again, changed = resequence_local_ids(sample.gold_actions)
        assert not changed and again == sample.gold_actions


# --------------------------------------------------------------------------
# 3. Parser golden corpus
# --------------------------------------------------------------------------


@criterion("parser-golden-corpus", 5.0)
def test_parser_golden_corpus(golden_cases):
    from scenesmith.actions import canonicalize, parse_action_list
    from scenesmith.grammar import fallback_parse

    from .conftest import make_snapshot

    assert len(golden_cases) >= 40
    quoted = {
        "create a wood table in the center of the room",
        "put 4 bowls on the table",
        "add a nightstand, then put a lamp on it",
    }
    assert quoted <= {case["command"].lower() for case in golden_cases}

    golden_serialized = []
    for case in golden_cases:
        snapshot = make_snapshot(case.get("scene", ()))
        actions = fallback_parse(snapshot, case["command"])
        expected = parse_action_list(json.dumps(case["actions"]), strict_local_ids=False)
        assert canonicalize(actions) == canonicalize(expected), case["command"]
        golden_serialized.append(json.dumps(case["actions"]))

    report = eval_accuracy(golden_serialized, golden_serialized)
    assert f"{report.accuracy * 100:.2f}" == "100.00"
    assert report.json_rate == 1.0


# --------------------------------------------------------------------------
# 4. Resolver placement invariants
# --------------------------------------------------------------------------


@criterion("resolver-placement-invariants", 30.0)
def test_resolver_placement_invariants():
    rng = random.Random(777)
    lateral = {
        SpatialRelation.LEFT_OF: "x",
        SpatialRelation.RIGHT_OF: "x",
        SpatialRelation.IN_FRONT_OF: "y",
        SpatialRelation.BEHIND: "y",
    }
    scenarios = 0
    for trial in range(500):
        world = scene_mod.Scene()
        scene_mod.setup_room(world, Vec3(14, 14, 6))
        ref_extents = Vec3(
            rng.uniform(0.6, 2.4), rng.uniform(0.6, 2.4), rng.uniform(0.3, 1.5)
        )
        position = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), 0)
        base = [
            Action(
                action_type=ActionType.CREATE_OBJECT_ABSOLUTE,
                object_type="base",
                quantity=1,
                local_id="1",
                position=position,
                size=ref_extents,
            )
        ]
        mode = trial % 3
        if mode == 0:
            relation = SpatialRelation.ON_TOP_OF
            quantity = 1
        elif mode == 1:
            relation = rng.choice(list(lateral))
            quantity = 1
        else:
            relation = SpatialRelation.ON_TOP_OF
            quantity = 4
        sub_extents = Vec3(
            rng.uniform(0.1, ref_extents.x / 3),
            rng.uniform(0.1, ref_extents.y / 3),
            rng.uniform(0.1, 0.6),
        )
        base.append(
            Action(
                action_type=ActionType.CREATE_OBJECT_RELATIVE,
                object_type="thing",
                quantity=quantity,
                local_id="2",
                relation=relation,
                reference_name="#1",
                size=sub_extents,
            )
        )
        resolved = resolver.resolve(scene_mod.snapshot(world), base)
        results = scene_mod.apply_actions(world, resolved)
        assert all(r.ok for r in results), results
        ref = world.objects["base.001"]
        subjects = [o for o in world.objects.values() if o.object_type == "thing"]
        if mode in (0, 2):
            for subject in subjects:
                assert abs(subject.aabb_min.z - ref.aabb_max.z) < 1e-6
        if mode == 1:
            subject = subjects[0]
            axis = lateral[relation]
            gap = max(
                getattr(subject.aabb_min, axis) - getattr(ref.aabb_max, axis),
                getattr(ref.aabb_min, axis) - getattr(subject.aabb_max, axis),
            )
            assert abs(gap - 0.10) < 1e-6
            disjoint = (
                subject.aabb_min.x >= ref.aabb_max.x - 1e-9
                or subject.aabb_max.x <= ref.aabb_min.x + 1e-9
                or subject.aabb_min.y >= ref.aabb_max.y - 1e-9
                or subject.aabb_max.y <= ref.aabb_min.y + 1e-9
            )
            assert disjoint
        if mode == 2:
            assert len(subjects) == 4
            for i, a in enumerate(subjects):
                assert a.aabb_min.x >= ref.aabb_min.x - 1e-9
                assert a.aabb_max.x <= ref.aabb_max.x + 1e-9
                assert a.aabb_min.y >= ref.aabb_min.y - 1e-9
                assert a.aabb_max.y <= ref.aabb_max.y + 1e-9
                for b in subjects[i + 1 :]:
                    disjoint_x = (
                        a.aabb_max.x <= b.aabb_min.x + 1e-9
                        or b.aabb_max.x <= a.aabb_min.x + 1e-9
                    )
                    disjoint_y = (
                        a.aabb_max.y <= b.aabb_min.y + 1e-9
                        or b.aabb_max.y <= a.aabb_min.y + 1e-9
                    )
                    assert disjoint_x or disjoint_y
        scenarios += 1
    assert scenarios == 500


# --------------------------------------------------------------------------
# 5. Geometry oracle equivalence
# --------------------------------------------------------------------------


@criterion("geometry-oracle-equivalence", 60.0)
def test_geometry_oracle_equivalence():
    rng = random.Random(90125)
    objects = []
    for index in range(16):
        kind = rng.choice(["box", "box", "sphere", "cylinder", "wedge"])
        extents = Vec3(rng.uniform(0.3, 2.2), rng.uniform(0.3, 2.2), rng.uniform(0.3, 2.2))
        mesh = make_primitive(kind, extents, segments=12)
        offset = np.array([rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-6, 6)])
        objects.append(
            (f"obj.{index:03d}", geometry.Mesh(mesh.vertices + offset, mesh.normals, mesh.faces))
        )
    bvh = geometry.build_bvh(objects)
    v0, v1, v2, owners = triangle_soup(objects)

    # 10^4 random rays: BVH nearest hit == brute-force nearest hit
    mismatches = 0
    for _ in range(10_000):
        origin = np.array([rng.uniform(-9, 9) for _ in range(3)])
        direction = np.array([rng.gauss(0, 1) for _ in range(3)])
        norm = np.linalg.norm(direction)
        if norm < 1e-12:
            continue
        direction /= norm
        expected = brute_force_ray(v0, v1, v2, owners, origin, direction)
        actual = bvh.ray_cast(origin, direction)
        if expected is None:
            ok = actual is None
        else:
            ok = actual is not None and abs(actual.t - expected[0]) < 1e-6
        mismatches += 0 if ok else 1
    assert mismatches == 0

    # 10^3 containment queries against the winding-number oracle
    sphere = icosphere(subdivisions=2, radius=0.5)
    sphere_bvh = geometry.build_bvh([("sphere", sphere)])
    checked = 0
    attempts = 0
    while checked < 1000 and attempts < 5000:
        attempts += 1
        point = np.array([rng.uniform(-0.8, 0.8) for _ in range(3)])
        if abs(np.linalg.norm(point) - 0.5) <= 1e-4:
            continue
        expected_inside = abs(winding_number(sphere, point)) > 0.5
        assert sphere_bvh.contains_point(point) == expected_inside
        checked += 1
    assert checked == 1000

    # free-space vs brute-force min-distance + containment oracle (100 points)
    for _ in range(100):
        point = np.array([rng.uniform(-7, 7) for _ in range(3)])
        clearance = rng.uniform(0.0, 0.5)
        distance = brute_min_distance(v0, v1, v2, point)
        inside = any(
            mesh.is_closed() and abs(winding_number(mesh, point)) > 0.5 for _, mesh in objects
        )
        expected = (not inside) and (clearance == 0.0 or distance >= clearance)
        if abs(distance - clearance) < 1e-9:
            continue  # boundary ties are out of contract
        assert bvh.is_free_space(point, clearance) == expected


# --------------------------------------------------------------------------
# 6. Export golden files
# --------------------------------------------------------------------------


def _collect_files(root: Path) -> dict[str, bytes]:
    return {
        str(path.relative_to(root)): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


@criterion("export-golden-files", 10.0)
def test_export_golden_files(tmp_path):
    from scenesmith.materials import normalize_material_name

    runner = CliRunner()
    for demo in ("nist-lobby", "wireless-lab"):
        out_a = tmp_path / demo / "a"
        out_b = tmp_path / demo / "b"
        save = tmp_path / demo / "scene.json"
        result = runner.invoke(
            cli_main, ["demo", demo, "--out", str(out_a), "--save", str(save)]
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(cli_main, ["demo", demo, "--out", str(out_b)])
        assert result.exit_code == 0, result.output
        files_a = _collect_files(out_a)
        files_b = _collect_files(out_b)
        assert files_a == files_b  # byte identical across runs

        # XML well-formed; every ref declared; every filename present
        root = ElementTree.fromstring((out_a / "scene.xml").read_text())
        declared = {b.get("id") for b in root.findall("bsdf")}
        shapes = root.findall("shape")
        assert shapes
        for shape in shapes:
            assert shape.find("ref").get("id") in declared
            filename = shape.find("string").get("value")
            assert (out_a / filename).exists()

        # re-imported PLY AABBs match the saved scene's AABBs within 1e-5
        world = scene_mod.load_scene_text(save.read_text())
        snapshot = scene_mod.snapshot(world)
        for shape in shapes:
            name = shape.get("name")
            obj = snapshot.find(name)
            assert obj is not None
            mesh = read_ascii_ply((out_a / shape.find("string").get("value")).read_text())
            lo = mesh.vertices.min(axis=0)
            hi = mesh.vertices.max(axis=0)
            assert np.allclose(lo, obj.aabb_min.to_tuple(), atol=1e-5)
            assert np.allclose(hi, obj.aabb_max.to_tuple(), atol=1e-5)

    # material normalization and bsdf dedup
    assert normalize_material_name("itu_wood.001") == "itu_wood"
    world = scene_mod.Scene()
    from scenesmith.resolved import ResolvedAction, ResolvedKind

    scene_mod.apply_actions(
        world,
        [
            ResolvedAction(
                kind=ResolvedKind.CREATE,
                source_index=0,
                name=f"t.{i:03d}",
                object_type="t",
                mesh_source="primitive:box",
                position=Vec3(i * 2.0, 0, 0),
                extents=Vec3(1, 1, 1),
            )
            for i in range(2)
        ],
    )
    world.objects["t.000"].material = "itu_wood.001"
    world.objects["t.001"].material = "itu_wood.002"
    from scenesmith.exporter import export_scene

    bundle = export_scene(world, None)
    root = ElementTree.fromstring(bundle.xml_text)
    assert [b.get("id") for b in root.findall("bsdf")] == ["itu_wood"]


# --------------------------------------------------------------------------
# 7. End-to-end service flow
# --------------------------------------------------------------------------


@criterion("service-end-to-end", 10.0)
def test_service_end_to_end(tmp_path):
    app = create_app(ServiceConfig(default_backend="fallback"))
    with TestClient(app) as client:
        assert (
            client.post("/chat", json={"command": "setup a 5 x 4 x 3 room"}).status_code == 200
        )
        first = client.post(
            "/chat",
            json={
                "command": "Create a wood table in the center of the room",
                "backend": "fallback",
            },
        )
        assert first.status_code == 200
        second = client.post(
            "/chat", json={"command": "Create 4 bowls on the table", "backend": "fallback"}
        )
        assert second.status_code == 200

        snapshot = client.get("/scene").json()
        tables = [o for o in snapshot["objects"] if o["object_type"] == "table"]
        bowls = [o for o in snapshot["objects"] if o["object_type"] == "bowl"]
        assert len(tables) == 1 and len(bowls) == 4
        table = tables[0]
        for bowl in bowls:
            assert abs(bowl["aabb_min"]["z"] - table["aabb_max"]["z"]) < 1e-6

        export = client.post("/export", json={"out_dir": str(tmp_path / "export")})
        assert export.status_code == 200
        body = export.json()
        assert body["mesh_count"] == len(snapshot["objects"]) == 11
        assert body["material_count"] == 3  # concrete, floorboard, wood

        inside_table = {
            "x": table["geometric_center"]["x"],
            "y": table["geometric_center"]["y"],
            "z": table["geometric_center"]["z"],
        }
        check = client.post(
            "/placement/check",
            json={"points": [inside_table, {"x": 0, "y": 0, "z": 1.5}], "clearance": 0.1},
        )
        assert check.status_code == 200
        assert check.json()["free"] == [False, True]


# --------------------------------------------------------------------------
# 8. Library search recall
# --------------------------------------------------------------------------


def _fifty_asset_manifest(root: Path) -> Path:
    rng = random.Random(4242)
    nouns = ["vase", "chair", "table", "lamp", "shelf", "stool", "plant", "bowl", "crate", "bench"]
    adjectives = [
        "wide", "narrow", "tall", "short", "ornate", "plain", "modern", "antique",
        "wooden", "metal", "ceramic", "glass", "curved", "angular", "heavy", "light",
    ]
    records = []
    for index in range(50):
        noun = nouns[index % len(nouns)]
        asset_id = f"{noun}_{index:04d}"
        mesh_file = f"{asset_id}.ply"
        (root / mesh_file).write_bytes(write_ply(make_primitive("box", Vec3(0.4, 0.4, 0.4))))
        n_descriptions = rng.randrange(3, 7)
        descriptions = []
        for ordinal in range(n_descriptions):
            adjective_pair = rng.sample(adjectives, 2)
            descriptions.append(
                f"a {adjective_pair[0]} {adjective_pair[1]} {noun} style {index} look {ordinal}"
            )
        records.append(
            {
                "asset_id": asset_id,
                "object_type": noun,
                "mesh_file": mesh_file,
                "descriptions": descriptions,
                "default_extents": {"x": 0.4, "y": 0.4, "z": 0.4},
            }
        )
    (root / "manifest.json").write_text(json.dumps({"assets": records}))
    return root


@criterion("library-search-recall", 5.0)
def test_library_search_recall(tmp_path):
    library = AssetLibrary.load_manifest(_fifty_asset_manifest(tmp_path))
    assert len(library) == 50

    # recall@1 == 1.0 for every stored description
    for asset in library.assets.values():
        for description in asset.descriptions:
            top = library.search(description, 1)[0]
            assert top[0] == asset.asset_id, description
            assert top[1] == pytest.approx(1.0, abs=1e-6)

    # top-1 equals brute-force argmax over all (vector, entry) pairs
    embedder: DeterministicEmbedder = library.embedder
    rng = random.Random(11)
    vocabulary = [
        "vase", "chair", "wide", "tall", "wooden", "style", "ornate", "modern",
        "look", "narrow", "plain", "metal", "bench", "lamp",
    ]
    for _ in range(200):
        query = " ".join(rng.choice(vocabulary) for _ in range(rng.randrange(1, 6)))
        query_vector = embedder.embed(query)
        best_asset, best_score = None, -2.0
        for asset_id in sorted(library.assets):
            for description in library.assets[asset_id].descriptions:
                score = float(embedder.embed(description) @ query_vector)
                if score > best_score + 1e-12:
                    best_asset, best_score = asset_id, score
        ranked = library.search(query, 1)[0]
        assert ranked[0] == best_asset
        assert ranked[1] == pytest.approx(best_score, abs=1e-9)
