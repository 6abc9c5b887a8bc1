"""Radio-material table and material-name normalization.

Canonical material names carry the ``itu_`` prefix understood by the
ray-tracing consumer. Scene objects may reference materials loosely
("wood", "ITU_Wood.001"); :func:`normalize_material_name` maps those onto
the canonical table.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .errors import ScenesmithError

#: Built-in material colors (diffuse RGB, 0-1 decimals). Override per
#: deployment with a JSON file via MaterialTable.with_overrides().
DEFAULT_MATERIALS: dict[str, tuple[float, float, float]] = {
    "itu_concrete": (0.539, 0.539, 0.539),
    "itu_brick": (0.402, 0.112, 0.087),
    "itu_wood": (0.430, 0.226, 0.079),
    "itu_metal": (0.122, 0.135, 0.165),
    "itu_glass": (0.247, 0.431, 0.527),
    "itu_plasterboard": (0.704, 0.700, 0.675),
    "itu_floorboard": (0.539, 0.316, 0.141),
    "itu_ceiling_board": (0.730, 0.730, 0.700),
    "itu_chipboard": (0.509, 0.335, 0.159),
    "itu_marble": (0.800, 0.793, 0.755),
}

_COPY_SUFFIX = re.compile(r"\.\d{1,3}$")


class MaterialError(ScenesmithError):
    code = "material"


class UnknownMaterialError(MaterialError):
    code = "unknown_material"

    def __init__(self, name: str):
        super().__init__(f"unknown material '{name}'", name=name)
        self.name = name


class MaterialTable:
    """Canonical material name -> diffuse RGB, all names itu_-prefixed."""

    def __init__(self, colors: dict[str, tuple[float, float, float]] | None = None):
        self.colors: dict[str, tuple[float, float, float]] = {}
        for name, rgb in (colors or DEFAULT_MATERIALS).items():
            self._put(name, rgb)

    def _put(self, name: str, rgb) -> None:
        if not name.startswith("itu_"):
            raise MaterialError(f"material name '{name}' must start with 'itu_'")
        r, g, b = (float(c) for c in rgb)
        for component in (r, g, b):
            if not 0.0 <= component <= 1.0:
                raise MaterialError(f"rgb component {component} of '{name}' outside [0, 1]")
        self.colors[name] = (r, g, b)

    @classmethod
    def with_overrides(cls, path: str | Path) -> "MaterialTable":
        """Built-ins merged with a {name: [r, g, b]} JSON override file."""
        table = cls()
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise MaterialError("material override file must be a JSON object")
        for name, rgb in data.items():
            table._put(name, rgb)
        return table

    def names(self) -> list[str]:
        return sorted(self.colors)

    def __contains__(self, name: str) -> bool:
        return name in self.colors

    def rgb(self, canonical: str) -> tuple[float, float, float]:
        try:
            return self.colors[canonical]
        except KeyError:
            raise UnknownMaterialError(canonical) from None


def normalize_material_name(raw: str, table: MaterialTable | None = None) -> str:
    """Map a loose material name to its canonical table entry.

    Strips one trailing ".NNN" copy suffix, lowercases, and prepends the
    "itu_" prefix when absent. Raises UnknownMaterialError when the result
    is not in the table.
    """
    if not raw:
        raise MaterialError("material name must be non-empty")
    table = table or MaterialTable()
    name = _COPY_SUFFIX.sub("", raw, count=1).lower()
    if not name.startswith("itu_"):
        name = "itu_" + name
    if name not in table:
        raise UnknownMaterialError(name)
    return name
