/** Shared test scaffolding: canned exchanges and a scriptable service
 * double that records every call. */

import type { ServiceClient } from "../src/api.js";
import type {
  ChatExchange,
  ExchangeSummary,
  HealthStatus,
  Mode,
  RubricReceipt,
  RubricSubmission,
} from "../src/types.js";

export function makeExchange(
  mode: Mode,
  query: string,
  exchangeId = "20260823T000000000000aaaaaa",
): ChatExchange {
  const fused = mode === "rag_fusion";
  const generated = fused
    ? [
        `What is ${query}?`,
        `${query} explained.`,
        `Advantages and limitations of ${query}.`,
        `How does ${query} work in practice?`,
      ]
    : [];
  const retrievals = (fused ? generated : [query]).map((text) => ({
    query_text: text,
    entries: [
      { chunk_id: "a.md#0", distance: 0.81 },
      { chunk_id: "b.md#0", distance: 0.92 },
    ],
  }));
  return {
    exchange_id: exchangeId,
    created_at: "2026-08-23T00:00:00+00:00",
    mode,
    original_query: query,
    generated_queries: generated,
    retrievals,
    fusion: fused
      ? {
          k_used: 60,
          entries: [
            {
              chunk_id: "a.md#0",
              rrf_score: 4 / 61,
              contributors: generated.map((text) => ({
                query_text: text,
                rank: 1,
              })),
            },
            {
              chunk_id: "b.md#0",
              rrf_score: 4 / 62,
              contributors: generated.map((text) => ({
                query_text: text,
                rank: 2,
              })),
            },
          ],
        }
      : null,
    evidence: ["a.md#0", "b.md#0"],
    answer: `ANSWER(2): About ${query}. More about ${query}.`,
    timings: {
      query_generation_ms: fused ? 12 : 0,
      retrieval_ms: 3,
      fusion_ms: fused ? 1 : 0,
      synthesis_ms: 15,
      total_ms: fused ? 31 : 18,
    },
    warnings: [],
  };
}

export function summaryOf(exchange: ChatExchange): ExchangeSummary {
  return {
    exchange_id: exchange.exchange_id,
    mode: exchange.mode,
    original_query: exchange.original_query,
    created_at: exchange.created_at,
    answer: exchange.answer,
  };
}

export const HEALTHY: HealthStatus = {
  status: "ok",
  version: "test",
  index_ready: true,
  chunk_count: 5,
};

/** Service double: every method is replaceable, every call is logged. */
export class FakeService implements ServiceClient {
  chatCalls: Array<{ query: string; mode: Mode }> = [];
  rubricCalls: RubricSubmission[] = [];
  getCalls: string[] = [];

  healthImpl: () => Promise<HealthStatus> = async () => HEALTHY;
  chatImpl: (query: string, mode: Mode) => Promise<ChatExchange> = async (
    query,
    mode,
  ) => makeExchange(mode, query);
  rubricImpl: (score: RubricSubmission) => Promise<RubricReceipt> =
    async () => ({ stored_id: "s1", revision: 1 });
  listImpl: () => Promise<ExchangeSummary[]> = async () => [];
  getImpl: (id: string) => Promise<ChatExchange> = async () => {
    throw new Error("getExchange not scripted");
  };

  health(): Promise<HealthStatus> {
    return this.healthImpl();
  }

  chat(query: string, mode: Mode): Promise<ChatExchange> {
    this.chatCalls.push({ query, mode });
    return this.chatImpl(query, mode);
  }

  submitRubric(score: RubricSubmission): Promise<RubricReceipt> {
    this.rubricCalls.push(score);
    return this.rubricImpl(score);
  }

  listExchanges(): Promise<ExchangeSummary[]> {
    return this.listImpl();
  }

  getExchange(exchangeId: string): Promise<ChatExchange> {
    this.getCalls.push(exchangeId);
    return this.getImpl(exchangeId);
  }
}

/** Lets queued microtasks and zero-delay timers run. */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
