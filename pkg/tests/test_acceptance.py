"""Acceptance gate: one test per release criterion.

Each test here pins a user-visible contract of the engine; the terminal
summary lists one PASS/FAIL line per criterion.  Tolerances are fixed:
1e-12 for fused scores, exact equality for orders and rendered strings,
[1.6, 2.4] for the delayed-mock latency ratio.
"""

from __future__ import annotations

import json
import random
import socket
import time

import numpy as np
import pytest

from fusionrag.bench import load_reference_report, render_report_table, run_benchmark
from fusionrag.cli import main as cli_main
from fusionrag.fusion import fuse, rrf_score
from fusionrag.gateway import NO_EVIDENCE_MARKER, MockConfig, MockGateway
from fusionrag.index import METRIC_COSINE, METRIC_EUCLIDEAN, VectorIndex, search
from fusionrag.models import (
    MODE_RAG,
    EmbeddingVector,
    RankedRetrieval,
    RetrievalHit,
    dump_json,
    validate_exchange,
)
from fusionrag.pipeline import (
    CorpusHandles,
    PipelineConfig,
    parse_generated_queries,
    run_rag,
    run_rag_fusion,
)

from oracles import full_scan_oracle, rrf_float_oracle, rrf_oracle
from support import CountingGateway, normalize_exchange

pytestmark = pytest.mark.acceptance


def ranked(query_text: str, chunk_ids: list[str]) -> RankedRetrieval:
    return RankedRetrieval(
        query_text=query_text,
        entries=tuple(RetrievalHit(chunk_id=cid, distance=0.1 + 0.01 * i)
                      for i, cid in enumerate(chunk_ids)))


def random_fusion_instance(rng: random.Random):
    pool = [f"c{i:02d}" for i in range(rng.randint(1, 20))]
    lists = []
    for q in range(rng.randint(1, 5)):
        lists.append(ranked(f"query {q}",
                            rng.sample(pool, rng.randint(1, len(pool)))))
    return lists, rng.choice([0, 1, 60])


def test_reciprocal_rank_point_values():
    assert rrf_score(1, 0) == 1.0
    assert abs(rrf_score(1, 60) - 1 / 61) <= 1e-12
    assert abs(rrf_score(3, 1) - 0.25) <= 1e-12


def test_fusion_matches_bruteforce_oracle_on_500_instances():
    rng = random.Random(500)
    started = time.perf_counter()
    for _ in range(500):
        retrievals, k = random_fusion_instance(rng)
        result = fuse(retrievals, k)
        # order and bitwise values against the double-precision oracle
        float_expected = rrf_float_oracle(
            [(r.query_text, [h.chunk_id for h in r.entries])
             for r in retrievals], k)
        assert [(e.chunk_id, e.rrf_score)
                for e in result.entries] == float_expected
        # values against exact rational accumulation
        exact = dict(rrf_oracle(
            [[h.chunk_id for h in r.entries] for r in retrievals], k))
        for entry in result.entries:
            assert abs(entry.rrf_score - float(exact[entry.chunk_id])) \
                <= 1e-12
    assert time.perf_counter() - started < 5.0


def test_fusion_property_suites_hold():
    rng = random.Random(200)

    # input-list order never matters, bit for bit
    for _ in range(200):
        retrievals, k = random_fusion_instance(rng)
        shuffled = retrievals[:]
        rng.shuffle(shuffled)
        assert fuse(shuffled, k).entries == fuse(retrievals, k).entries

    # fusing one list preserves its order with strictly decreasing scores
    for _ in range(200):
        pool = [f"c{i:02d}" for i in range(rng.randint(1, 20))]
        ids = rng.sample(pool, rng.randint(1, len(pool)))
        k = rng.choice([0, 1, 60])
        result = fuse([ranked("solo", ids)], k)
        assert [e.chunk_id for e in result.entries] == ids
        scores = [e.rrf_score for e in result.entries]
        assert all(a > b for a, b in zip(scores, scores[1:]))

    # an extra list never hurts its own members relative to non-members
    for _ in range(200):
        retrievals, k = random_fusion_instance(rng)
        pool = sorted({h.chunk_id for r in retrievals for h in r.entries})
        added_ids = rng.sample(pool, rng.randint(1, len(pool)))
        before = {e.chunk_id: e.rrf_score
                  for e in fuse(retrievals, k).entries}
        after_entries = fuse(retrievals + [ranked("added", added_ids)],
                             k).entries
        after = {e.chunk_id: e.rrf_score for e in after_entries}
        position = {e.chunk_id: i for i, e in enumerate(after_entries)}
        for x in added_ids:
            assert after[x] >= before[x]
            for y in before:
                if y in added_ids:
                    continue
                if before[x] >= before[y]:
                    assert position[x] < position[y]


def test_hand_fixture_via_library_and_cli(tmp_path, capsys):
    result = fuse([ranked("q1", ["A", "B"]), ranked("q2", ["A", "C"])], k=60)
    assert [(e.chunk_id, e.rrf_score) for e in result.entries] == [
        ("A", 2 / 61), ("B", 1 / 62), ("C", 1 / 62)]

    for name, ids in (("first.json", ["A", "B"]), ("second.json", ["A", "C"])):
        (tmp_path / name).write_text(json.dumps(
            ranked("q-" + name, ids).to_dict()), encoding="utf-8")
    assert cli_main(["fuse", "--lists", str(tmp_path / "first.json"),
                     str(tmp_path / "second.json"), "--k", "60"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert [(e["chunk_id"], e["rrf_score"]) for e in printed["entries"]] == [
        ("A", 2 / 61), ("B", 1 / 62), ("C", 1 / 62)]


def test_retrieval_matches_full_scan_oracle_on_200_indexes():
    rng = np.random.default_rng(200)
    for trial in range(200):
        metric = METRIC_COSINE if trial % 2 == 0 else METRIC_EUCLIDEAN
        size = int(rng.integers(1, 101))
        matrix = rng.normal(size=(size, 16))
        if metric == METRIC_COSINE:
            matrix = matrix / np.linalg.norm(matrix, axis=1, keepdims=True)
        index = VectorIndex(dimension=16, metric=metric,
                            chunk_ids=tuple(f"c{i:03d}" for i in range(size)),
                            matrix=matrix)
        raw = rng.normal(size=16)
        if metric == METRIC_COSINE:
            raw = raw / np.linalg.norm(raw)
            query = EmbeddingVector(values=tuple(raw), normalized=True)
        else:
            query = EmbeddingVector(values=tuple(raw))
        top_n = int(rng.integers(1, size + 1))
        got = search(index, query, top_n)
        expected = full_scan_oracle(index.chunk_ids, index.matrix, metric,
                                    query, top_n)
        assert [(h.chunk_id, h.distance) for h in got.entries] == expected


def test_pipeline_call_counts_over_50_random_configs(fixture_handles):
    rng = random.Random(50)
    for _ in range(50):
        config = PipelineConfig(
            num_generated_queries=rng.randint(1, 6),
            per_query_top_n=rng.randint(1, 5),
            evidence_top_m=rng.randint(1, 8),
            include_original_query_retrieval=rng.random() < 0.5,
            k=rng.choice([0.0, 1.0, 60.0]),
            retrieval_parallelism=rng.choice([1, 2, 4]),
        )
        rag_gateway = CountingGateway()
        run_rag("call count probe", fixture_handles, rag_gateway,
                PipelineConfig(mode=MODE_RAG))
        assert rag_gateway.calls() == 1

        fusion_gateway = CountingGateway()
        run_rag_fusion("call count probe", fixture_handles, fusion_gateway,
                       config)
        assert fusion_gateway.calls() == 2


def test_latency_methodology_and_reference_table(fixture_handles):
    gateway = MockGateway(MockConfig(artificial_delay_ms=200))
    report = run_benchmark("IM72D128 IP Rating", 10, fixture_handles,
                           gateway, PipelineConfig(mode=MODE_RAG),
                           PipelineConfig())
    assert report.rag_failures == 0 and report.fusion_failures == 0
    assert 1.6 <= report.ratio <= 2.4

    reference = load_reference_report()
    assert f"{reference.fusion_avg_ms / 1000:.2f}" == "34.62"
    assert f"{reference.rag_avg_ms / 1000:.2f}" == "19.52"
    table = render_report_table(reference)
    assert table.splitlines()[-2] == "Average  34.62                19.52"
    assert table.splitlines()[-1] == \
        "Observation: RAG-Fusion takes 1.77 times longer."


def test_end_to_end_determinism_and_golden_file(fixture_handles, corpus_dir):
    config = PipelineConfig()
    first = run_rag_fusion("IP rating of mounted IM72D128", fixture_handles,
                           MockGateway(), config)
    second = run_rag_fusion("IP rating of mounted IM72D128", fixture_handles,
                            MockGateway(), config)
    assert normalize_exchange(first) == normalize_exchange(second)
    golden = (corpus_dir.parent / "golden_fusion_exchange.json"
              ).read_text(encoding="utf-8")
    assert dump_json(normalize_exchange(first)) == golden


def test_generated_query_contract(fixture_handles):
    exchange = run_rag_fusion("IP rating of mounted IM72D128",
                              fixture_handles, MockGateway(),
                              PipelineConfig(num_generated_queries=4))
    assert len(exchange.generated_queries) == 4

    block = ("['1. What is the IP rating of the mounted IM72D128?', "
             "'2. IP rating explained for mounted IM72D128.', "
             "'3. Waterproofing capabilities of the IM72D128 with its IP "
             "rating.', "
             "'4. How does the IP rating of the IM72D128 affect its "
             "durability when mounted?']")
    assert parse_generated_queries(block, 4) == [
        "What is the IP rating of the mounted IM72D128?",
        "IP rating explained for mounted IM72D128.",
        "Waterproofing capabilities of the IM72D128 with its IP rating.",
        "How does the IP rating of the IM72D128 affect its durability when "
        "mounted?",
    ]


def test_empty_corpus_degenerates_cleanly():
    handles = CorpusHandles.from_chunks([])
    rag = run_rag("any question", handles, MockGateway(),
                  PipelineConfig(mode=MODE_RAG))
    fusion = run_rag_fusion("any question", handles, MockGateway(),
                            PipelineConfig())
    for exchange in (rag, fusion):
        assert exchange.evidence == ()
        assert NO_EVIDENCE_MARKER in exchange.answer
        assert validate_exchange(exchange) == []


def test_suite_runs_with_network_disabled():
    # the autouse guard applies to every test in this suite; proving it
    # trips here proves the rest ran offline too
    with pytest.raises(RuntimeError, match="network"):
        socket.create_connection(("127.0.0.1", 9))
    sock = socket.socket()
    try:
        with pytest.raises(RuntimeError, match="network"):
            sock.connect(("127.0.0.1", 9))
    finally:
        sock.close()
