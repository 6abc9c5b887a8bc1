"""Ray-tracer-ready scene export: one ASCII PLY per visible mesh object plus
a single XML scene file declaring twosided diffuse BSDF materials.

Output is byte-deterministic: fixed 6-decimal vertex formatting, LF line
endings, materials in lexicographic order, shapes in scene insertion
order, transforms baked into world-space vertices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING
from xml.sax.saxutils import quoteattr

from .errors import ScenesmithError
from .geometry import Mesh
from .materials import MaterialTable, normalize_material_name

if TYPE_CHECKING:  # pragma: no cover
    from .scene import Scene

_NAME_SANITIZER = re.compile(r"[^A-Za-z0-9._-]")


class ExportError(ScenesmithError):
    code = "export"


class NothingToExportError(ExportError):
    code = "nothing_to_export"


class IoFailureError(ExportError):
    code = "io_failure"

    def __init__(self, path: str, message: str):
        super().__init__(f"failed writing {path}: {message}", path=path)
        self.path = path


@dataclass
class ExportBundle:
    xml_text: str
    mesh_files: dict[str, bytes]  # relative path -> PLY bytes


def write_ply(mesh: Mesh) -> bytes:
    """Serialize a mesh as ASCII PLY (positions + normals + face indices)."""
    lines = [
        "ply",
        "format ascii 1.0",
        "comment scenesmith export",
        f"element vertex {len(mesh.vertices)}",
        "property float x",
        "property float y",
        "property float z",
        "property float nx",
        "property float ny",
        "property float nz",
        f"element face {len(mesh.faces)}",
        "property list uchar uint vertex_indices",
        "end_header",
    ]
    for vertex, normal in zip(mesh.vertices, mesh.normals):
        lines.append(
            "%.6f %.6f %.6f %.6f %.6f %.6f"
            % (vertex[0], vertex[1], vertex[2], normal[0], normal[1], normal[2])
        )
    for face in mesh.faces:
        lines.append("3 %d %d %d" % (face[0], face[1], face[2]))
    return ("\n".join(lines) + "\n").encode("ascii")


def sanitize_name(name: str) -> str:
    return _NAME_SANITIZER.sub("_", name)


def build_scene_xml(shapes: list[tuple[str, str, str]], material_table: MaterialTable) -> str:
    """Assemble the scene XML.

    ``shapes`` is a list of (object_name, ply_relative_path, canonical_material)
    in scene insertion order; BSDF declarations are emitted once per distinct
    canonical material, lexicographically sorted.
    """
    used_materials = sorted({material for _, _, material in shapes})
    lines = ['<scene version="2.1.0">']
    for material in used_materials:
        r, g, b = material_table.rgb(material)
        lines.append(f'    <bsdf type="twosided" id={quoteattr(material)}>')
        lines.append('        <bsdf type="diffuse">')
        lines.append(f'            <rgb name="reflectance" value="{r:.3f} {g:.3f} {b:.3f}"/>')
        lines.append("        </bsdf>")
        lines.append("    </bsdf>")
    for name, ply_path, material in shapes:
        lines.append(f'    <shape type="ply" id={quoteattr("mesh-" + name)} name={quoteattr(name)}>')
        lines.append(f'        <string name="filename" value={quoteattr(ply_path)}/>')
        lines.append(f'        <ref id={quoteattr(material)} name="bsdf"/>')
        lines.append("    </shape>")
    lines.append("</scene>")
    return "\n".join(lines) + "\n"


def export_scene(scene: "Scene", out_dir: str | Path | None = None) -> ExportBundle:
    """Export visible mesh objects to PLY files plus one scene XML.

    Files land in ``<out_dir>/scene.xml`` and ``<out_dir>/meshes/<name>.ply``
    when ``out_dir`` is given; the returned bundle always carries the exact
    bytes. Object names are sanitized to [A-Za-z0-9._-] for filenames.
    """
    exportable = [obj for obj in scene.objects.values() if obj.visible]
    if not exportable:
        raise NothingToExportError("the scene has no visible mesh objects")

    mesh_files: dict[str, bytes] = {}
    shapes: list[tuple[str, str, str]] = []
    used_filenames: set[str] = set()
    for obj in exportable:
        canonical = normalize_material_name(obj.material, scene.material_table)
        safe = sanitize_name(obj.name)
        candidate = safe
        suffix = 2
        while candidate in used_filenames:
            candidate = f"{safe}_{suffix}"
            suffix += 1
        used_filenames.add(candidate)
        rel_path = f"meshes/{candidate}.ply"
        mesh_files[rel_path] = write_ply(obj.world_mesh)
        shapes.append((candidate, rel_path, canonical))

    xml_text = build_scene_xml(shapes, scene.material_table)
    bundle = ExportBundle(xml_text=xml_text, mesh_files=mesh_files)

    if out_dir is not None:
        out = Path(out_dir)
        try:
            (out / "meshes").mkdir(parents=True, exist_ok=True)
            (out / "scene.xml").write_text(xml_text, encoding="utf-8", newline="\n")
            for rel_path, payload in mesh_files.items():
                (out / rel_path).write_bytes(payload)
        except OSError as exc:
            raise IoFailureError(str(out), str(exc)) from exc
    return bundle
