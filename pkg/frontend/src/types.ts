/** Wire types for the fusionrag HTTP service.
 *
 * These mirror the JSON the service emits; the UI renders only what is
 * present here and never recomputes scores client-side.
 */

export type Mode = "rag" | "rag_fusion";

export interface RetrievalHit {
  chunk_id: string;
  distance: number;
}

export interface RankedRetrieval {
  query_text: string;
  entries: RetrievalHit[];
}

export interface FusionContributor {
  query_text: string;
  rank: number;
}

export interface FusionEntry {
  chunk_id: string;
  rrf_score: number;
  contributors: FusionContributor[];
}

export interface FusionResult {
  k_used: number;
  entries: FusionEntry[];
}

export interface StageTimings {
  query_generation_ms: number;
  retrieval_ms: number;
  fusion_ms: number;
  synthesis_ms: number;
  total_ms: number;
}

export interface ChatExchange {
  exchange_id: string;
  created_at: string;
  mode: Mode;
  original_query: string;
  generated_queries: string[];
  retrievals: RankedRetrieval[];
  fusion: FusionResult | null;
  evidence: string[];
  answer: string;
  timings: StageTimings;
  warnings: string[];
}

export interface ExchangeSummary {
  exchange_id: string;
  mode: Mode;
  original_query: string;
  created_at: string;
  answer: string;
}

export interface HealthStatus {
  status: string;
  version: string;
  index_ready: boolean;
  chunk_count: number;
}

export type RubricDimension = "accuracy" | "relevance" | "comprehensiveness";

export const RUBRIC_DIMENSIONS: readonly RubricDimension[] = [
  "accuracy",
  "relevance",
  "comprehensiveness",
];

export interface RubricSubmission {
  exchange_id: string;
  rater: string;
  accuracy: number;
  relevance: number;
  comprehensiveness: number;
  notes?: string;
}

export interface RubricReceipt {
  stored_id: string;
  revision: number;
}

/** One rendered exchange plus its client-side display state. */
export interface UiExchangeView {
  exchange: ChatExchange;
  evidenceExpanded: boolean;
  pendingRubric: Partial<Record<RubricDimension, number>>;
}
