"""Test doubles and helpers shared across test modules."""

from __future__ import annotations

from dataclasses import replace

from fusionrag.gateway import (LlmGateway, LlmRequest, LlmResponse,
                               MockConfig, MockGateway)
from fusionrag.models import ChatExchange, StageTimings

FIXED_EXCHANGE_ID = "00000000000000000000000000"
FIXED_CREATED_AT = "2026-01-01T00:00:00+00:00"


class CountingGateway(LlmGateway):
    """Delegates to a real gateway while recording every request."""

    def __init__(self, inner: LlmGateway | None = None):
        self.inner = inner or MockGateway(MockConfig())
        self.requests: list[LlmRequest] = []

    def complete(self, request: LlmRequest) -> LlmResponse:
        self.requests.append(request)
        return self.inner.complete(request)

    def calls(self, call_site: str | None = None) -> int:
        if call_site is None:
            return len(self.requests)
        return sum(1 for r in self.requests if r.call_site == call_site)


class FailingGateway(LlmGateway):
    """Fails at the chosen call site; otherwise delegates to the mock."""

    def __init__(self, fail_at: str, error: Exception):
        self.fail_at = fail_at
        self.error = error
        self.inner = MockGateway(MockConfig())

    def complete(self, request: LlmRequest) -> LlmResponse:
        if request.call_site == self.fail_at:
            raise self.error
        return self.inner.complete(request)


class ScriptedGateway(LlmGateway):
    """Returns canned texts in order, for parse-edge-case tests."""

    def __init__(self, texts: list[str]):
        self.texts = list(texts)
        self.requests: list[LlmRequest] = []

    def complete(self, request: LlmRequest) -> LlmResponse:
        self.requests.append(request)
        return LlmResponse(text=self.texts.pop(0), latency_ms=0,
                           provider="scripted")


def normalize_exchange(exchange: ChatExchange) -> ChatExchange:
    """Zero out the run-specific fields (id, clock readings) so two runs
    can be compared structurally."""
    return replace(exchange,
                   exchange_id=FIXED_EXCHANGE_ID,
                   created_at=FIXED_CREATED_AT,
                   timings=StageTimings())
