"""Chat sessions and the two provider kinds: live chat-completions over HTTP and transcript replay."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import httpx

from ..errors import ProviderError

Message = dict[str, str]


@dataclass
class Exchange:
    request_messages: list[Message]
    response: str

    def to_json(self) -> str:
        return json.dumps({"request_messages": self.request_messages, "response": self.response},
                          ensure_ascii=False, sort_keys=True)


@dataclass
class ChatSession:
    """Append-only conversation; the system prompt, if any, is the first message."""
    system_prompt: str | None = None
    messages: list[Message] = field(default_factory=list)
    exchanges: list[Exchange] = field(default_factory=list)

    def __post_init__(self):
        if self.messages:
            raise ValueError("a session starts empty apart from its system prompt")
        if self.system_prompt is not None:
            self.messages.append({"role": "system", "content": self.system_prompt})

    def add_user(self, content: str) -> int:
        """Append a user message and return its index."""
        self.messages.append({"role": "user", "content": content})
        return len(self.messages) - 1

    def add_assistant(self, content: str) -> int:
        self.messages.append({"role": "assistant", "content": content})
        return len(self.messages) - 1

    def snapshot(self) -> list[Message]:
        return [dict(m) for m in self.messages]


class Provider(Protocol):
    def complete(self, messages: list[Message]) -> str: ...


def provider_send(provider: Provider, session: ChatSession) -> str:
    """Send the whole session, append the reply and record the exchange."""
    if not session.messages:
        raise ValueError("cannot send an empty session")
    request = session.snapshot()
    reply = provider.complete(request)
    session.add_assistant(reply)
    session.exchanges.append(Exchange(request, reply))
    return reply


PROVIDER_KINDS = ("http-chat", "replay")


@dataclass(frozen=True)
class ProviderConfig:
    kind: str
    endpoint: str | None = None
    model_name: str | None = None
    auth_env: str | None = None
    transcript_path: str | None = None
    request_timeout: float = 60.0
    max_retries: int = 2
    parallelism: int = 1

    def validate(self) -> None:
        if self.kind not in PROVIDER_KINDS:
            raise ProviderError("config", f"unknown provider kind {self.kind!r}")
        required = {"http-chat": ("endpoint", "model_name"), "replay": ("transcript_path",)}[self.kind]
        missing = [name for name in required if not getattr(self, name)]
        if missing:
            raise ProviderError("config", f"provider kind {self.kind!r} requires: {', '.join(missing)}")
        if self.max_retries < 0 or self.request_timeout <= 0 or self.parallelism < 1:
            raise ProviderError("config", "max_retries must be >= 0, request_timeout > 0, parallelism >= 1")


def make_provider(config: ProviderConfig, *, content_match: bool = False) -> Provider:
    config.validate()
    if config.kind == "replay":
        return ReplayProvider.from_file(config.transcript_path, content_match=content_match)
    return HttpChatProvider(config)


_TRANSIENT_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


class HttpChatProvider:
    """Chat-completions client with bounded retries.

    The bearer token is read from the environment variable named by
    ``config.auth_env`` at construction, so a missing key fails before any
    request is made.
    """

    def __init__(self, config: ProviderConfig, *, client: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep, backoff: float = 0.5):
        config.validate()
        headers = {"Content-Type": "application/json"}
        if config.auth_env:
            token = os.environ.get(config.auth_env)
            if not token:
                raise ProviderError("config", f"environment variable {config.auth_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        self.config = config
        self._client = client or httpx.Client(timeout=config.request_timeout)
        self._headers = headers
        self._sleep = sleep
        self._backoff = backoff

    def complete(self, messages: list[Message]) -> str:
        body = {"model": self.config.model_name, "messages": messages}
        last: ProviderError | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self._sleep(self._backoff * 2 ** (attempt - 1))
            try:
                response = self._client.post(self.config.endpoint, json=body, headers=self._headers,
                                             timeout=self.config.request_timeout)
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last = ProviderError("timeout", f"{self.config.endpoint}: {exc.__class__.__name__}: {exc}")
                continue
            if response.status_code in _TRANSIENT_STATUS:
                last = ProviderError("http-status", f"{self.config.endpoint} answered {response.status_code}")
                continue
            if response.status_code >= 400:
                raise ProviderError("http-status", f"{self.config.endpoint} answered {response.status_code}: "
                                    f"{response.text[:200]}")
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderError("http-status", f"malformed completion body: {exc!r}") from None
        assert last is not None
        raise last

    def close(self) -> None:
        self._client.close()


def _first_difference(sent: list[Message], recorded: list[Message]) -> int:
    for i, (a, b) in enumerate(zip(sent, recorded)):
        if a != b:
            return i
    return min(len(sent), len(recorded))


class ReplayProvider:
    """Answers from a recorded transcript and refuses requests that differ from it.

    In ordered mode requests must arrive in recording order. With
    ``content_match`` the first unused record with an identical request is
    used, which tolerates concurrent sessions.
    """

    def __init__(self, exchanges: list[Exchange], *, content_match: bool = False):
        self._records = list(exchanges)
        self._used = [False] * len(self._records)
        self._next = 0
        self._content_match = content_match
        self._lock = threading.Lock()
        self.calls = 0

    @classmethod
    def from_file(cls, path: str | os.PathLike, *, content_match: bool = False) -> "ReplayProvider":
        try:
            return cls(read_transcript(path), content_match=content_match)
        except OSError as exc:
            raise ProviderError("config", f"cannot read transcript {path}: {exc}") from None

    @property
    def remaining(self) -> int:
        return self._used.count(False)

    def complete(self, messages: list[Message]) -> str:
        with self._lock:
            self.calls += 1
            if self._content_match:
                for i, record in enumerate(self._records):
                    if not self._used[i] and record.request_messages == messages:
                        self._used[i] = True
                        return record.response
                candidates = [i for i, used in enumerate(self._used) if not used]
                if not candidates:
                    raise ProviderError("transcript-exhausted", f"no recorded exchange left for call {self.calls}")
                index = candidates[0]
            else:
                if self._next >= len(self._records):
                    raise ProviderError("transcript-exhausted",
                                        f"transcript has {len(self._records)} exchanges, call {self.calls} has none")
                index = self._next
                if self._records[index].request_messages == messages:
                    self._used[index] = True
                    self._next += 1
                    return self._records[index].response
            recorded = self._records[index].request_messages
            at = _first_difference(messages, recorded)
            raise ProviderError("transcript-mismatch",
                                f"request {self.calls} differs from recorded exchange {index + 1} "
                                f"at message index {at}")


def read_transcript(path: str | os.PathLike) -> list[Exchange]:
    exchanges = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                exchanges.append(Exchange(list(doc["request_messages"]), doc["response"]))
            except (ValueError, KeyError, TypeError) as exc:
                raise ProviderError("config", f"{path}:{number}: malformed transcript record ({exc})") from None
    return exchanges


def write_transcript(path: str | os.PathLike, sessions: list[ChatSession]) -> None:
    """JSONL in session order, then exchange order within each session."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for session in sessions:
            for exchange in session.exchanges:
                fh.write(exchange.to_json() + "\n")
