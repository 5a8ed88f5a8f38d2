"""Single abstraction over LLM providers for the two call sites.

The pipeline talks to a gateway twice at most: once to generate search
queries, once to synthesize the answer.  Each call is tagged with its
call site and measured, because the latency split between the two calls
is a first-class observable of this system.

``MockGateway`` is a pure function of (request, mock config) apart from
its artificial delay; it exists so end-to-end tests can assert evidence
plumbing, not prose quality, with zero network.  ``HttpGateway`` speaks
chat-completions JSON against a configured endpoint with bounded retries
and an in-flight cap.
"""

from __future__ import annotations

import os
import re
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import httpx

from .errors import GatewayTimeoutError, ProviderError, RetryExhaustedError

CALL_QUERY_GENERATION = "query_generation"
CALL_ANSWER_SYNTHESIS = "answer_synthesis"
CALL_SITES = (CALL_QUERY_GENERATION, CALL_ANSWER_SYNTHESIS)

DEFAULT_TOKEN_ENV = "FUSIONRAG_LLM_TOKEN"

NO_EVIDENCE_MARKER = "NO_EVIDENCE"

# Filler words dropped when the mock rephrases a query.
_STOPWORDS = frozenset(
    "a an the of to in on for with about tell me is are was were what how "
    "does do did i my your it its".split())

_WORD = re.compile(r"[A-Za-z0-9]+")
_FIRST_INT = re.compile(r"\d+")
_DOC_BLOCK = re.compile(r"^Document \d+ \([^)]*\): ", re.MULTILINE)
_SENTENCE = re.compile(r"^(.*?[.!?])(?:\s|$)", re.DOTALL)


@dataclass(frozen=True)
class LlmRequest:
    system_prompt: str
    user_prompt: str
    max_output_tokens: int = 1024
    temperature: float = 0.0
    call_site: str = CALL_ANSWER_SYNTHESIS

    def __post_init__(self):
        if not self.system_prompt or not self.user_prompt:
            raise ValueError("prompts must be non-empty")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.call_site not in CALL_SITES:
            raise ValueError(f"call_site must be one of {CALL_SITES}")


@dataclass(frozen=True)
class LlmResponse:
    text: str
    latency_ms: int
    provider: str
    token_counts: tuple[int, int] | None = None


class LlmGateway(ABC):
    """One ``complete`` call per provider request; implementations must be
    safe for concurrent calls."""

    @abstractmethod
    def complete(self, request: LlmRequest) -> LlmResponse:
        raise NotImplementedError


@dataclass(frozen=True)
class MockConfig:
    """Deterministic mock behavior: optional artificial per-call delay,
    overridable per call site."""

    artificial_delay_ms: float = 0.0
    delays_by_call_site: dict = field(default_factory=dict)

    def delay_ms(self, call_site: str) -> float:
        return float(self.delays_by_call_site.get(call_site,
                                                  self.artificial_delay_ms))


def _content_words(query: str) -> str:
    words = [w for w in _WORD.findall(query) if w.lower() not in _STOPWORDS]
    if not words:
        words = _WORD.findall(query)
    return " ".join(words)


def _mock_generated_queries(user_prompt: str) -> str:
    """Numbered rephrasings from fixed templates over the query's content
    words.  n is the first integer in the prompt; the query is whatever
    follows the final ': ' (matching the default generation template)."""
    match = _FIRST_INT.search(user_prompt)
    n = int(match.group()) if match else 4
    _, _, tail = user_prompt.rpartition(": ")
    original = (tail or user_prompt).strip()
    subject = _content_words(original) or original

    verb = "are" if subject.split()[-1].lower().endswith("s") else "is"
    templates = (
        f"What {verb} {subject}?",
        f"{subject} explained.",
        f"Advantages and limitations of {subject}.",
        f"How does {subject} work in practice?",
    )
    lines = [f"{i + 1}. {templates[i % len(templates)]}" for i in range(n)]
    return "\n".join(lines)


def _first_sentence(block: str) -> str:
    block = block.strip()
    match = _SENTENCE.match(block)
    if match:
        return match.group(1)
    return block.splitlines()[0] if block else ""


def _mock_answer(user_prompt: str) -> str:
    """ANSWER(<block count>): <first sentence of each document block>, or
    the bare NO_EVIDENCE marker when the prompt carries no documents."""
    headers = list(_DOC_BLOCK.finditer(user_prompt))
    if not headers:
        return NO_EVIDENCE_MARKER
    sentences = []
    for i, header in enumerate(headers):
        start = header.end()
        end = headers[i + 1].start() if i + 1 < len(headers) else len(user_prompt)
        sentences.append(_first_sentence(user_prompt[start:end]))
    return f"ANSWER({len(headers)}): " + " ".join(sentences)


class MockGateway(LlmGateway):
    """Offline deterministic provider; see module docstring."""

    def __init__(self, config: MockConfig | None = None):
        self.config = config or MockConfig()

    def complete(self, request: LlmRequest) -> LlmResponse:
        started = time.perf_counter()
        delay_ms = self.config.delay_ms(request.call_site)
        if delay_ms > 0:
            time.sleep(delay_ms / 1000.0)
        if request.call_site == CALL_QUERY_GENERATION:
            text = _mock_generated_queries(request.user_prompt)
        else:
            text = _mock_answer(request.user_prompt)
        latency_ms = int(round((time.perf_counter() - started) * 1000))
        return LlmResponse(text=text, latency_ms=latency_ms, provider="mock")


@dataclass(frozen=True)
class ProviderConfig:
    """Real-provider settings; endpoint, model, and auth all come from
    configuration, never code."""

    endpoint_url: str
    model: str
    timeout_s: float = 60.0
    max_retries: int = 2
    max_in_flight: int = 4
    auth_token_env: str = DEFAULT_TOKEN_ENV
    backoff_base_s: float = 0.5

    def to_dict(self) -> dict:
        return {"endpoint_url": self.endpoint_url, "model": self.model,
                "timeout_s": self.timeout_s, "max_retries": self.max_retries,
                "max_in_flight": self.max_in_flight,
                "auth_token_env": self.auth_token_env}


_RETRYABLE = frozenset({429} | set(range(500, 600)))


class HttpGateway(LlmGateway):
    """Chat-completions client with bounded retries and an in-flight cap.

    Transient failures (HTTP 429/5xx) are retried up to max_retries times
    with exponential backoff; other failures surface on the first attempt.
    A transport can be injected for tests.
    """

    def __init__(self, config: ProviderConfig,
                 transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(timeout=config.timeout_s,
                                    transport=transport)
        self._in_flight = threading.BoundedSemaphore(config.max_in_flight)

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.config.auth_token_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, request: LlmRequest) -> LlmResponse:
        payload = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        started = time.perf_counter()
        attempts = self.config.max_retries + 1
        with self._in_flight:
            for attempt in range(attempts):
                try:
                    response = self._client.post(self.config.endpoint_url,
                                                 json=payload,
                                                 headers=self._headers())
                except httpx.TimeoutException as exc:
                    raise GatewayTimeoutError(
                        f"provider call exceeded {self.config.timeout_s}s",
                        call_site=request.call_site) from exc
                except httpx.HTTPError as exc:
                    raise ProviderError(f"provider unreachable: {exc}",
                                        call_site=request.call_site) from exc
                if response.status_code == 200:
                    return self._parse(response, request, started)
                if response.status_code not in _RETRYABLE:
                    raise ProviderError(
                        f"provider returned HTTP {response.status_code}",
                        status=response.status_code,
                        body_excerpt=response.text[:200],
                        call_site=request.call_site)
                if attempt + 1 < attempts and self.config.backoff_base_s > 0:
                    time.sleep(self.config.backoff_base_s * (2 ** attempt))
        raise RetryExhaustedError(
            f"provider still failing after {attempts} attempts",
            status=response.status_code,
            body_excerpt=response.text[:200],
            call_site=request.call_site)

    def _parse(self, response: httpx.Response, request: LlmRequest,
               started: float) -> LlmResponse:
        try:
            data = response.json()
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderError(
                f"malformed provider response: {exc}",
                status=response.status_code,
                body_excerpt=response.text[:200],
                call_site=request.call_site) from exc
        usage = data.get("usage") or {}
        token_counts = None
        if "prompt_tokens" in usage and "completion_tokens" in usage:
            token_counts = (int(usage["prompt_tokens"]),
                            int(usage["completion_tokens"]))
        latency_ms = int(round((time.perf_counter() - started) * 1000))
        return LlmResponse(text=text, latency_ms=latency_ms,
                           provider=self.config.model or "http",
                           token_counts=token_counts)
