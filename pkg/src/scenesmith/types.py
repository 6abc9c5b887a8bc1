"""Small shared value types."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Vec3:
    """Immutable 3-component vector (meters or degrees depending on context).

    Components are coerced to ``float`` and must be finite.
    """

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            # +0.0 folds -0.0 onto 0.0 so equal vectors serialize identically.
            value = float(getattr(self, name)) + 0.0
            if not math.isfinite(value):
                raise ValueError(f"Vec3.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def zero(cls) -> "Vec3":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_iterable(cls, values) -> "Vec3":
        x, y, z = values
        return cls(x, y, z)

    def to_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def to_json(self) -> dict[str, float]:
        return {"x": self.x, "y": self.y, "z": self.z}

    def add(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def sub(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, factor: float) -> "Vec3":
        return Vec3(self.x * factor, self.y * factor, self.z * factor)
