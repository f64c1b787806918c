"""Chat-completion access: request/response values, retry and budget handling, providers."""

from __future__ import annotations

import logging
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol

import httpx

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-3.5-turbo"
DEFAULT_MAX_OUTPUT_TOKENS = 512
DEFAULT_CALL_BUDGET = 64


class LLMError(Exception):
    pass


class TransportError(LLMError):
    """Network-level failure; retried."""


class ProviderRejection(LLMError):
    """The provider refused the request (4xx semantics)."""


class AuthenticationError(ProviderRejection):
    pass


class RateLimited(ProviderRejection):
    pass


class BudgetExceeded(LLMError):
    pass


@dataclass(frozen=True)
class PromptRequest:
    user_text: str
    system_text: str = ""
    temperature: float = 0.0
    model_id: str = DEFAULT_MODEL
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS

    def __post_init__(self) -> None:
        if not self.user_text or not self.user_text.strip():
            raise ValueError("user_text must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    provider_latency: float = 0.0
    truncated: bool = False

    def __post_init__(self) -> None:
        if not self.text and not self.truncated:
            raise ValueError("empty completion text is only valid when truncated")


def _default_retryable(exc: BaseException) -> bool:
    return isinstance(exc, (TransportError, RateLimited))


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 0.5
    retryable: Callable[[BaseException], bool] = _default_retryable

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.backoff_base < 0:
            raise ValueError("backoff_base must be >= 0")

    def delay(self, attempt: int) -> float:
        """Sleep before retry number ``attempt`` (1-based): exponential in the attempt."""
        return self.backoff_base * (2 ** (attempt - 1))


class Provider(Protocol):
    def complete(self, request: PromptRequest) -> CompletionResult: ...


class ScriptedProvider:
    """Replays canned responses in FIFO order and records every request it receives."""

    def __init__(self, responses: Iterable[str] = ()):
        self._queue = deque(responses)
        self._lock = threading.Lock()
        self.transcript: list[PromptRequest] = []
        self.replies: list[str] = []

    def complete(self, request: PromptRequest) -> CompletionResult:
        with self._lock:
            self.transcript.append(request)
            if not self._queue:
                raise ProviderRejection("script exhausted")
            text = self._queue.popleft()
            self.replies.append(text)
        return CompletionResult(text=text, truncated=not text)

    @property
    def remaining(self) -> int:
        return len(self._queue)


def scripted_provider(responses: Iterable[str]) -> ScriptedProvider:
    return ScriptedProvider(responses)


def _unescape(line: str) -> str:
    out = []
    it = iter(line)
    for ch in it:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(it, "")
        out.append({"n": "\n", "\\": "\\", "t": "\t"}.get(nxt, "\\" + nxt))
    return "".join(out)


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n").replace("\t", "\\t")


def load_script(path: "str | os.PathLike[str]") -> list[str]:
    """Read a script file: one response per line, ``\\n`` escapes embedded newlines."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [_unescape(line.rstrip("\r")) for line in lines]


def dump_script(responses: Iterable[str], path: "str | os.PathLike[str]") -> None:
    body = "".join(_escape(r) + "\n" for r in responses)
    Path(path).write_text(body, encoding="utf-8")


class HTTPChatProvider:
    """OpenAI-compatible ``/chat/completions`` endpoint, single-shot, no streaming."""

    def __init__(
        self,
        endpoint: str,
        api_key: Optional[str] = None,
        timeout: float = 60.0,
        record: bool = False,
        client: Optional[httpx.Client] = None,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout
        self.record = record
        self.transcript: list[PromptRequest] = []
        self._client = client or httpx.Client(timeout=timeout)
        self._lock = threading.Lock()

    @classmethod
    def from_env(cls, endpoint: str, env_var: str = "FACTAGENT_LLM_API_KEY", **kwargs) -> "HTTPChatProvider":
        key = os.environ.get(env_var) or os.environ.get("OPENAI_API_KEY")
        return cls(endpoint, api_key=key, **kwargs)

    def complete(self, request: PromptRequest) -> CompletionResult:
        if self.record:
            with self._lock:
                self.transcript.append(request)
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        messages.append({"role": "user", "content": request.user_text})
        payload = {
            "model": request.model_id,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        start = time.monotonic()
        try:
            resp = self._client.post(self.endpoint, json=payload, headers=headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"{type(exc).__name__}: {exc}") from exc
        latency = time.monotonic() - start

        if resp.status_code in (401, 403):
            raise AuthenticationError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code == 429:
            raise RateLimited(f"HTTP 429: {resp.text[:200]}")
        if resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 400:
            raise ProviderRejection(f"HTTP {resp.status_code}: {resp.text[:200]}")

        try:
            choice = resp.json()["choices"][0]
            text = choice["message"].get("content") or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderRejection(f"malformed completion payload: {exc}") from exc
        truncated = choice.get("finish_reason") == "length" or not text
        return CompletionResult(text=text, provider_latency=latency, truncated=truncated)


@dataclass
class Gateway:
    """Provider front end applying request defaults, retries and a per-claim call budget.

    ``fork()`` gives a gateway over the same provider with a fresh budget, which
    is how a batch run scopes the budget to one claim.
    """

    provider: Provider
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    max_calls: Optional[int] = DEFAULT_CALL_BUDGET
    model_id: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    sleep: Callable[[float], None] = time.sleep

    def __post_init__(self) -> None:
        self._calls = 0
        self._lock = threading.Lock()
        self.retry_delays: list[float] = []

    @property
    def calls(self) -> int:
        return self._calls

    def fork(self) -> "Gateway":
        return Gateway(
            provider=self.provider,
            retry=self.retry,
            max_calls=self.max_calls,
            model_id=self.model_id,
            temperature=self.temperature,
            max_output_tokens=self.max_output_tokens,
            sleep=self.sleep,
        )

    def request(self, user_text: str, system_text: str = "") -> PromptRequest:
        return PromptRequest(
            user_text=user_text,
            system_text=system_text,
            temperature=self.temperature,
            model_id=self.model_id,
            max_output_tokens=self.max_output_tokens,
        )

    def ask(self, user_text: str, system_text: str = "") -> str:
        return self.complete(self.request(user_text, system_text)).text

    def complete(self, request: PromptRequest) -> CompletionResult:
        with self._lock:
            if self.max_calls is not None and self._calls >= self.max_calls:
                raise BudgetExceeded(f"call budget of {self.max_calls} exhausted")
            self._calls += 1

        attempt = 1
        while True:
            try:
                return self.provider.complete(request)
            except LLMError as exc:
                if attempt >= self.retry.max_attempts or not self.retry.retryable(exc):
                    raise
                delay = self.retry.delay(attempt)
                log.warning("LLM call failed (%s), retry %d in %.2fs", exc, attempt, delay)
                self.retry_delays.append(delay)
                self.sleep(delay)
                attempt += 1
