"""Shared fixtures.

Every test runs with outbound sockets disabled, so the whole suite
doubles as proof that nothing here needs a network.  HTTP behavior is
exercised through in-process transports instead.
"""

from __future__ import annotations

import socket
from pathlib import Path

import pytest

from fusionrag.gateway import MockConfig, MockGateway
from fusionrag.ingestion import build_corpus
from fusionrag.pipeline import CorpusHandles

DATA_DIR = Path(__file__).parent / "data"
CORPUS_DIR = DATA_DIR / "corpus"


@pytest.fixture(autouse=True)
def _no_network(monkeypatch):
    def refuse(*args, **kwargs):
        raise RuntimeError("test attempted network access")

    monkeypatch.setattr(socket.socket, "connect", refuse)
    monkeypatch.setattr(socket, "create_connection", refuse)


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture(scope="session")
def fixture_corpus():
    """(manifest, chunks, failures) for the committed corpus."""
    return build_corpus(CORPUS_DIR)


@pytest.fixture(scope="session")
def fixture_chunks(fixture_corpus):
    return fixture_corpus[1]


@pytest.fixture(scope="session")
def fixture_handles(fixture_chunks) -> CorpusHandles:
    return CorpusHandles.from_chunks(list(fixture_chunks))


@pytest.fixture()
def mock_gateway() -> MockGateway:
    return MockGateway(MockConfig())


_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance_outcomes[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _acceptance_outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_outcomes.items():
        label = name.removeprefix("test_").replace("_", " ")
        if outcome == "passed":
            status = "PASS"
        elif outcome == "failed":
            status = "FAIL"
        else:
            status = outcome.upper()
        terminalreporter.write_line(f"{status}  {label}")
