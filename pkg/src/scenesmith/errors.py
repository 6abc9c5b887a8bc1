"""Shared exception base for scenesmith.

Every package error derives from :class:`ScenesmithError` and carries a
stable machine-readable ``code`` used by the HTTP layer and the CLI exit
mapping.
"""

from __future__ import annotations

from typing import Any


class ScenesmithError(Exception):
    code = "error"

    def __init__(self, message: str = "", **detail: Any):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.message or self.code
