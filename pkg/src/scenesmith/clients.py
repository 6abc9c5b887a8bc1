"""Outbound HTTP clients (chat completion, embedding, mesh generation) with
record/replay.

Every exchange is a string in, string out. In ``record`` mode the live
response is persisted as one fixture file per exchange, keyed by the
sha256 of the request text; ``replay`` mode reads only fixtures, so test
suites never touch the network.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import httpx

from .errors import ScenesmithError

DEFAULT_TIMEOUT = 60.0

MODES = ("live", "record", "replay")


class ClientError(ScenesmithError):
    code = "client"


class BackendUnavailableError(ClientError):
    code = "backend_unavailable"


class FixtureMissError(ClientError):
    code = "fixture_miss"

    def __init__(self, request_hash: str):
        super().__init__(f"no fixture recorded for request {request_hash}", request_hash=request_hash)
        self.request_hash = request_hash


def request_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def fixture_path(fixtures_dir: str | Path, prompt: str) -> Path:
    return Path(fixtures_dir) / f"{request_hash(prompt)}.json"


def save_fixture(fixtures_dir: str | Path, prompt: str, reply: str) -> Path:
    """Persist one exchange; used by record mode and by test setup."""
    path = fixture_path(fixtures_dir, prompt)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "request_hash": request_hash(prompt),
        "prompt": prompt,
        "reply": reply,
        "timestamp": time.time(),
    }
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return path


def load_fixture(fixtures_dir: str | Path, prompt: str) -> str:
    path = fixture_path(fixtures_dir, prompt)
    if not path.exists():
        raise FixtureMissError(request_hash(prompt))
    data = json.loads(path.read_text(encoding="utf-8"))
    return data["reply"]


class RecordReplayClient:
    """One outbound endpoint with live/record/replay modes.

    ``kind`` shapes the HTTP payload: "chat" speaks a chat-completion style
    exchange (messages in, message content out), "embed" returns a JSON
    float array as text, "meshgen" returns mesh file text.
    """

    def __init__(
        self,
        kind: str,
        url: str | None = None,
        mode: str = "replay",
        fixtures_dir: str | Path | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        model: str = "default",
        transport: httpx.BaseTransport | None = None,
    ):
        if mode not in MODES:
            raise ClientError(f"mode must be one of {MODES}, got '{mode}'")
        if mode in ("record", "replay") and fixtures_dir is None:
            raise ClientError(f"mode '{mode}' requires a fixtures directory")
        if mode in ("live", "record") and not url:
            raise ClientError(f"mode '{mode}' requires an endpoint URL")
        self.kind = kind
        self.url = url
        self.mode = mode
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None
        self.timeout = timeout
        self.model = model
        self._transport = transport

    def exchange(self, prompt: str) -> str:
        if self.mode == "replay":
            assert self.fixtures_dir is not None
            return load_fixture(self.fixtures_dir, prompt)
        reply = self._live_exchange(prompt)
        if self.mode == "record":
            assert self.fixtures_dir is not None
            save_fixture(self.fixtures_dir, prompt, reply)
        return reply

    def _payload(self, prompt: str) -> dict:
        if self.kind == "chat":
            return {
                "model": self.model,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": 0,
            }
        if self.kind == "embed":
            return {"text": prompt}
        return {"prompt": prompt}

    def _extract_reply(self, body: dict) -> str:
        try:
            if self.kind == "chat":
                return body["choices"][0]["message"]["content"]
            if self.kind == "embed":
                return json.dumps(body["embedding"])
            return body["mesh_ply"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailableError(f"malformed {self.kind} response: {exc}") from None

    def _live_exchange(self, prompt: str) -> str:
        assert self.url is not None
        payload = self._payload(prompt)
        last_error: Exception | None = None
        for attempt in range(2):  # single retry on transport errors
            try:
                with httpx.Client(timeout=self.timeout, transport=self._transport) as client:
                    response = client.post(self.url, json=payload)
                response.raise_for_status()
                return self._extract_reply(response.json())
            except (httpx.TransportError, httpx.TimeoutException) as exc:
                last_error = exc
            except (httpx.HTTPStatusError, ValueError) as exc:
                raise BackendUnavailableError(f"{self.kind} backend error: {exc}") from exc
        raise BackendUnavailableError(
            f"{self.kind} backend unreachable after retry: {last_error}"
        ) from last_error
