"""Chat-completion client with mock backend, file cache, and retries.

Offline by default: with no cache hit and no usable backend the client
fails fast instead of touching the network.  Responses are cached one
file per exchange, content-addressed by a digest of (model, temperature,
messages), so identical requests are free and reproducible.
"""

from __future__ import annotations

import difflib
import hashlib
import json
import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping

logger = logging.getLogger(__name__)

Message = dict  # {"role": "system"|"user"|"assistant", "content": str}

_ROLES = ("system", "user", "assistant")
_TRANSIENT_STATUSES = frozenset({429, 500, 502, 503, 504})


class OfflineMiss(Exception):
    """Offline mode with no cached response for this request."""


class AuthMissing(Exception):
    """The configured auth env var is not set."""

    def __init__(self, env_var: str):
        super().__init__(f"environment variable {env_var} is not set")
        self.env_var = env_var


class BackendError(Exception):
    """The backend failed after all retries."""

    def __init__(self, status: int | None, body: str):
        super().__init__(f"backend error (status={status}): {body[:200]}")
        self.status = status
        self.body = body

    @property
    def transient(self) -> bool:
        return self.status is None or self.status in _TRANSIENT_STATUSES


class FixtureMiss(Exception):
    """Mock backend queried with a prompt that has no fixture."""

    def __init__(self, prompt: str, nearest: str | None):
        hint = f"; nearest fixture: {nearest[:80]!r}" if nearest else ""
        super().__init__(f"no fixture for prompt {prompt[:80]!r}{hint}")
        self.prompt = prompt
        self.nearest = nearest


@dataclass(frozen=True)
class BackendConfig:
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model_id: str = "gpt-3.5-turbo"
    auth_token_source: str = "LLM_API_KEY"
    temperature: float = 0.0
    timeout_ms: int = 30_000
    max_retries: int = 3
    offline: bool = True
    backoff_base_s: float = 0.25

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")


def _validate_messages(messages: list[Message]) -> None:
    if not messages:
        raise ValueError("messages must be non-empty")
    for message in messages:
        if message.get("role") not in _ROLES:
            raise ValueError(f"bad role in message: {message!r}")
        if not isinstance(message.get("content"), str):
            raise ValueError(f"bad content in message: {message!r}")
    if messages[-1]["role"] != "user":
        raise ValueError("last message must have role 'user'")


def cache_key(model_id: str, temperature: float, messages: list[Message]) -> str:
    """64-hex digest; a pure function of the request."""
    canonical = json.dumps(
        {
            "model": model_id,
            "temperature": temperature,
            "messages": [
                {"role": m["role"], "content": m["content"]} for m in messages
            ],
        },
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatExchange:
    """One request/response pair, as stored in the cache."""

    model_id: str
    temperature: float
    request_messages: tuple[Message, ...]
    response_text: str

    @property
    def cache_key(self) -> str:
        return cache_key(self.model_id, self.temperature, list(self.request_messages))

    def to_json(self) -> dict:
        return {
            "model_id": self.model_id,
            "temperature": self.temperature,
            "request_messages": list(self.request_messages),
            "response_text": self.response_text,
            "cache_key": self.cache_key,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ChatExchange":
        return cls(
            model_id=obj["model_id"],
            temperature=obj["temperature"],
            request_messages=tuple(obj["request_messages"]),
            response_text=obj["response_text"],
        )


class ResponseCache:
    """One file per exchange, named by cache key, written atomically."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def load(self, key: str) -> ChatExchange | None:
        path = self._path(key)
        if not path.exists():
            return None
        with path.open("r", encoding="utf-8") as fh:
            return ChatExchange.from_json(json.load(fh))

    def store(self, exchange: ChatExchange) -> Path:
        path = self._path(exchange.cache_key)
        tmp = path.with_suffix(f".{uuid.uuid4().hex}.tmp")
        tmp.write_text(
            json.dumps(exchange.to_json(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        os.replace(tmp, path)  # concurrent writers: last replace wins, never torn
        return path


class MockBackend:
    """Lookup-only backend keyed by the exact rendered prompt."""

    def __init__(self, fixtures: Mapping[str, str]):
        self._fixtures = dict(fixtures)

    def complete(self, messages: list[Message]) -> str:
        prompt = messages[-1]["content"]
        try:
            return self._fixtures[prompt]
        except KeyError:
            nearest = difflib.get_close_matches(
                prompt, self._fixtures.keys(), n=1, cutoff=0.0
            )
            raise FixtureMiss(prompt, nearest[0] if nearest else None) from None


def mock_backend(fixtures: Mapping[str, str]) -> MockBackend:
    """Build the deterministic mock; duplicate keys are last-write-wins."""
    return MockBackend(fixtures)


def load_chat_fixtures(path: str | Path | None = None) -> dict[str, str]:
    """Read prompt/response pairs from JSON Lines (bundled set by default)."""
    if path is None:
        source = resources.files("rentai").joinpath("data/chat_fixtures.jsonl")
        text = source.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    fixtures: dict[str, str] = {}
    for line in text.splitlines():
        if line.strip():
            obj = json.loads(line)
            fixtures[obj["prompt"]] = obj["response"]
    return fixtures


class HttpBackend:
    """Chat-completions JSON over HTTP (messages in, choices[0] out)."""

    def __init__(self, config: BackendConfig):
        self.config = config

    def complete(self, messages: list[Message]) -> str:
        import requests

        token = os.environ.get(self.config.auth_token_source)
        if not token:
            raise AuthMissing(self.config.auth_token_source)
        try:
            response = requests.post(
                self.config.endpoint_url,
                headers={"Authorization": f"Bearer {token}"},
                json={
                    "model": self.config.model_id,
                    "temperature": self.config.temperature,
                    "messages": messages,
                },
                timeout=self.config.timeout_ms / 1000.0,
            )
        except requests.RequestException as exc:
            raise BackendError(None, str(exc)) from exc
        if response.status_code != 200:
            raise BackendError(response.status_code, response.text)
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise BackendError(response.status_code, response.text) from exc


class LlmClient:
    """Cache-first completion with bounded exponential-backoff retries."""

    def __init__(
        self,
        config: BackendConfig,
        *,
        backend=None,
        cache_dir: str | Path | None = None,
        sleeper: Callable[[float], None] = time.sleep,
        max_parallel: int = 4,
    ):
        if max_parallel < 1:
            raise ValueError("max_parallel must be at least 1")
        self.config = config
        self.backend = backend
        self.cache = ResponseCache(cache_dir) if cache_dir else None
        self._sleeper = sleeper
        self.max_parallel = max_parallel
        self._slots = threading.BoundedSemaphore(max_parallel)

    def complete(self, messages: list[Message]) -> str:
        _validate_messages(messages)
        key = cache_key(self.config.model_id, self.config.temperature, messages)
        if self.cache is not None:
            hit = self.cache.load(key)
            if hit is not None:
                return hit.response_text

        if self.backend is None:
            raise OfflineMiss(f"no backend and no cached response (key {key})")
        if self.config.offline and isinstance(self.backend, HttpBackend):
            raise OfflineMiss("offline mode forbids network backends")

        with self._slots:
            response = self._complete_with_retries(messages)
        if self.cache is not None:
            self.cache.store(
                ChatExchange(
                    model_id=self.config.model_id,
                    temperature=self.config.temperature,
                    request_messages=tuple(messages),
                    response_text=response,
                )
            )
        return response

    def _complete_with_retries(self, messages: list[Message]) -> str:
        last: BackendError | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                delay = self.config.backoff_base_s * (2 ** (attempt - 1))
                logger.info("retry %d after %.2fs", attempt, delay)
                self._sleeper(delay)
            try:
                return self.backend.complete(messages)
            except BackendError as exc:
                if not exc.transient:
                    raise
                last = exc
        assert last is not None
        raise last
