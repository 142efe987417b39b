"""Planner backends: deterministic mocks and a generic chat-completion client."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import httpx

from ..gridworld import parse_scene_text
from .designs import MockDesign, lookup_design, mock_design_library
from .plan import PlanParseError, parse_plan, serialize_plan
from .prompt import PromptParts

log = logging.getLogger(__name__)


class BackendError(RuntimeError):
    pass


class KeyMissing(BackendError):
    pass


class Timeout(BackendError):
    pass


class HttpStatus(BackendError):
    def __init__(self, code: int, body: str = ""):
        super().__init__(f"HTTP {code}: {body[:200]}")
        self.code = code


class RetriesExhausted(BackendError):
    pass


class UnknownDesign(BackendError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else "unknown design"


@dataclass(frozen=True)
class Completion:
    text: str
    latency_ms: float | None = None
    tokens: int | None = None


def scene_cells(prompt: PromptParts):
    """Occupied cells encoded in a prompt's current scene (the grid follows the last blank line)."""
    return parse_scene_text(prompt.current_scene.rsplit("\n\n", 1)[-1])


class MockBackend:
    """Answers from a design library; pure function of (request, scene)."""

    kind = "mock"
    label = "mock"

    def __init__(self, library: dict[str, MockDesign] | None = None, fence: bool = True):
        self.library = mock_design_library() if library is None else dict(library)
        self.fence = fence

    def design_for(self, request: str) -> MockDesign:
        try:
            return lookup_design(self.library, request)
        except KeyError as exc:
            raise UnknownDesign(str(exc.args[0])) from None

    def complete(self, prompt: PromptParts, trial_id: int = 0) -> Completion:
        design = self.design_for(prompt.design_request)
        plan = design.plan_for(scene_cells(prompt))
        body = serialize_plan(plan)
        text = f"Here is the plan.\n```json\n{body}\n```" if self.fence else body
        return Completion(text, latency_ms=0.0, tokens=None)


class ScriptedBackend:
    """Replays canned responses chosen by ``respond(request, trial_id)``."""

    kind = "mock"

    def __init__(self, respond: Callable[[str, int], str], label: str = "scripted"):
        self.respond = respond
        self.label = label

    def complete(self, prompt: PromptParts, trial_id: int = 0) -> Completion:
        out = self.respond(prompt.design_request, trial_id)
        if isinstance(out, BaseException):
            raise out
        return Completion(out, latency_ms=0.0, tokens=None)


@dataclass
class LiveBackend:
    """Chat-completion client over HTTPS with timeout and exponential backoff.

    ``provider`` selects the payload adapter: ``openai`` (any OpenAI-compatible
    ``/chat/completions`` endpoint) or ``anthropic`` (``/v1/messages``).
    """

    endpoint: str
    model: str
    api_key_env: str
    provider: str = "openai"
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_s: float = 1.0
    temperature: float = 0.0
    max_tokens: int = 1024
    transport: httpx.BaseTransport | None = field(default=None, repr=False)
    sleep: Callable[[float], None] = field(default=time.sleep, repr=False)

    kind = "live"

    def __post_init__(self):
        if self.provider not in ("openai", "anthropic"):
            raise ValueError(f"unknown provider {self.provider!r}")
        self._local = threading.local()

    @property
    def label(self) -> str:
        return f"{self.provider}:{self.model}"

    def api_key(self) -> str:
        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise KeyMissing(f"environment variable {self.api_key_env} is not set")
        return key

    def _client(self) -> httpx.Client:
        client = getattr(self._local, "client", None)
        if client is None:
            client = httpx.Client(timeout=self.timeout_s, transport=self.transport)
            self._local.client = client
        return client

    def _request(self, prompt: PromptParts, key: str):
        if self.provider == "anthropic":
            url = self.endpoint.rstrip("/") + "/v1/messages"
            headers = {"x-api-key": key, "anthropic-version": "2023-06-01"}
            payload = {"model": self.model, "max_tokens": self.max_tokens,
                       "temperature": self.temperature, "system": prompt.system_text(),
                       "messages": [{"role": "user", "content": prompt.user_text()}]}
        else:
            url = self.endpoint.rstrip("/") + "/chat/completions"
            headers = {"Authorization": f"Bearer {key}"}
            payload = {"model": self.model, "messages": prompt.messages(),
                       "max_tokens": self.max_tokens, "temperature": self.temperature}
        return url, headers, payload

    def _read(self, data: dict) -> tuple[str, int | None]:
        if self.provider == "anthropic":
            text = "".join(b.get("text", "") for b in data.get("content", []))
            usage = data.get("usage") or {}
            tokens = None
            if usage:
                tokens = int(usage.get("input_tokens", 0)) + int(usage.get("output_tokens", 0))
            return text, tokens
        text = data["choices"][0]["message"].get("content") or ""
        tokens = (data.get("usage") or {}).get("total_tokens")
        return text, tokens

    def complete(self, prompt: PromptParts, trial_id: int = 0) -> Completion:
        key = self.api_key()
        url, headers, payload = self._request(prompt, key)
        delay = self.backoff_s
        last: Exception | None = None
        for attempt in range(self.max_retries + 1):
            start = time.perf_counter()
            try:
                resp = self._client().post(url, headers=headers, json=payload)
            except httpx.TimeoutException as exc:
                last = Timeout(f"request timed out after {self.timeout_s}s: {exc}")
            except httpx.TransportError as exc:
                last = BackendError(f"transport error: {exc}")
            else:
                if resp.status_code == 200:
                    text, tokens = self._read(resp.json())
                    return Completion(text, (time.perf_counter() - start) * 1000.0, tokens)
                last = HttpStatus(resp.status_code, resp.text)
                if resp.status_code != 429 and resp.status_code < 500:
                    raise last
            if attempt < self.max_retries:
                log.warning("planner request failed (%s); retry %d in %.1fs", last, attempt + 1,
                            delay)
                self.sleep(delay)
                delay *= 2.0
        if self.max_retries == 0 and isinstance(last, BackendError):
            raise last
        raise RetriesExhausted(f"gave up after {self.max_retries + 1} attempts: {last}")


class RunLedger:
    """Append-only JSON-lines log of planner requests and responses."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.records: list[dict] = []
        self._lock = threading.Lock()

    def log(self, prompt: PromptParts, raw_response: str | None, parse_result: str) -> dict:
        rec = {"timestamp": datetime.now(timezone.utc).isoformat(),
               "prompt": prompt.text(), "raw_response": raw_response,
               "parse_result": parse_result}
        with self._lock:
            self.records.append(rec)
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
        return rec


def request_plan(backend, prompt: PromptParts, ledger: RunLedger | None = None,
                 pad_size: int | None = None, trial_id: int = 0) -> Completion:
    """Send ``prompt`` to ``backend`` and log the exchange.

    When ``pad_size`` is given the ledger entry records whether the response parses.
    """
    try:
        completion = backend.complete(prompt, trial_id=trial_id)
    except BackendError as exc:
        if ledger is not None:
            ledger.log(prompt, None, f"backend_error: {exc}")
        raise
    if ledger is not None:
        result = "unparsed"
        if pad_size is not None:
            try:
                parse_plan(completion.text, pad_size, allow_empty=True)
                result = "ok"
            except PlanParseError as exc:
                result = f"{exc.kind}: {exc}"
        ledger.log(prompt, completion.text, result)
    return completion
