import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  formatScore,
  renderAnswer,
  renderEvidence,
  renderError,
  renderGeneratedQueries,
  renderHistory,
  renderTimings,
} from "../src/render.js";
import type { ChatExchange, ExchangeSummary } from "../src/types.js";
import fusionFixture from "./fixtures/fusion_exchange.json";
import ragFixture from "./fixtures/rag_exchange.json";
import { makeExchange, summaryOf } from "./helpers.js";

const fusion = fusionFixture as unknown as ChatExchange;
const rag = ragFixture as unknown as ChatExchange;

function countOf(html: string, marker: string): number {
  return html.split(marker).length - 1;
}

describe("formatScore", () => {
  it("renders four decimals", () => {
    expect(formatScore(0.06530936012691697)).toBe("0.0653");
    expect(formatScore(1)).toBe("1.0000");
    expect(formatScore(4 / 61)).toBe("0.0656");
  });
});

describe("generated queries panel", () => {
  it("lists one row per generated query in fused mode", () => {
    const html = renderGeneratedQueries(fusion);
    expect(countOf(html, 'class="generated-query"')).toBe(4);
    for (const query of fusion.generated_queries) {
      expect(html).toContain(escapeHtml(query));
    }
  });

  it("is absent in classic mode", () => {
    expect(renderGeneratedQueries(rag)).toBe("");
  });
});

describe("evidence panel", () => {
  it("shows one row per evidence chunk with its fused score", () => {
    const html = renderEvidence(fusion);
    expect(countOf(html, 'class="evidence-row"')).toBe(fusion.evidence.length);
    for (const entry of fusion.fusion!.entries) {
      expect(html).toContain(formatScore(entry.rrf_score));
    }
  });

  it("keeps rows in the order the synthesis call saw", () => {
    const html = renderEvidence(fusion);
    let cursor = -1;
    for (const chunkId of fusion.evidence) {
      const at = html.indexOf(escapeHtml(chunkId), cursor + 1);
      expect(at).toBeGreaterThan(cursor);
      cursor = at;
    }
  });

  it("lists each contributing query with its rank on the top chunk", () => {
    const html = renderEvidence(fusion);
    const top = fusion.fusion!.entries[0]!;
    for (const contributor of top.contributors) {
      expect(html).toContain(`rank ${contributor.rank}`);
      expect(html).toContain(escapeHtml(contributor.query_text));
    }
  });

  it("falls back to retrieval distances in classic mode", () => {
    const html = renderEvidence(rag);
    expect(html).toContain("distance 0.8245");
    expect(html).not.toContain("evidence-score");
    expect(countOf(html, 'class="evidence-row"')).toBe(rag.evidence.length);
  });

  it("respects the expanded flag", () => {
    expect(renderEvidence(fusion, true)).toContain("<details");
    expect(renderEvidence(fusion, true)).toContain(" open");
    expect(renderEvidence(fusion, false)).not.toContain(" open>");
  });
});

describe("timings panel", () => {
  it("shows both llm calls side by side in fused mode", () => {
    const exchange = makeExchange("rag_fusion", "sealed microphones");
    const html = renderTimings(exchange);
    expect(html).toContain("LLM call 1 (query generation)");
    expect(html).toContain("LLM call 2 (answer synthesis)");
    expect(html).toContain("12 ms");
    expect(html).toContain("15 ms");
    expect(html).toContain("31 ms");
  });

  it("marks the generation call n/a in classic mode", () => {
    const html = renderTimings(makeExchange("rag", "sealed microphones"));
    expect(html).toContain("n/a");
    expect(html).toContain("LLM call 2 (answer synthesis)");
  });
});

describe("answer rendering", () => {
  it("escapes server strings", () => {
    const hostile = makeExchange("rag", "q");
    hostile.answer = '<script>alert("x")</script>';
    hostile.original_query = "<b>bold</b>";
    const html = renderAnswer(hostile);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
    expect(html).toContain("&lt;b&gt;bold&lt;/b&gt;");
  });
});

describe("history rendering", () => {
  it("renders rows in the given order", () => {
    const summaries: ExchangeSummary[] = [
      summaryOf(makeExchange("rag_fusion", "third", "c")),
      summaryOf(makeExchange("rag", "second", "b")),
      summaryOf(makeExchange("rag_fusion", "first", "a")),
    ];
    const html = renderHistory(summaries);
    expect(countOf(html, 'class="history-row"')).toBe(3);
    expect(html.indexOf("third")).toBeLessThan(html.indexOf("second"));
    expect(html.indexOf("second")).toBeLessThan(html.indexOf("first"));
  });

  it("shows an empty state without rows", () => {
    const html = renderHistory([]);
    expect(html).toContain("No exchanges yet.");
    expect(html).not.toContain("history-row");
  });
});

describe("error rendering", () => {
  it("offers retry for retryable failures only", () => {
    expect(renderError("boom", true)).toContain("retry-button");
    expect(renderError("bad input", false)).not.toContain("retry-button");
    expect(renderError("bad input", false)).toContain("validation-error");
  });
});
