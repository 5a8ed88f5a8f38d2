/** HTML renderers for the chat view.
 *
 * All functions are pure string builders so they can be tested without a
 * browser. Scores come straight from the server and are only formatted
 * for display, never recomputed.
 */

import type {
  ChatExchange,
  ExchangeSummary,
  FusionEntry,
  UiExchangeView,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Display form of a server-side rrf score: four decimals, nothing else. */
export function formatScore(score: number): string {
  return score.toFixed(4);
}

function formatMs(ms: number): string {
  return `${ms} ms`;
}

const MODE_LABELS: Record<string, string> = {
  rag: "classic retrieval",
  rag_fusion: "fused multi-query",
};

export function renderAnswer(exchange: ChatExchange): string {
  const label = MODE_LABELS[exchange.mode] ?? exchange.mode;
  return `
    <article class="answer-panel">
      <div class="answer-meta">
        <span class="answer-mode">${escapeHtml(label)}</span>
        <span class="answer-query">${escapeHtml(exchange.original_query)}</span>
      </div>
      <p class="answer-text">${escapeHtml(exchange.answer)}</p>
    </article>`;
}

export function renderWarnings(warnings: string[]): string {
  if (warnings.length === 0) {
    return "";
  }
  const rows = warnings
    .map((warning) => `<p class="warning-row">${escapeHtml(warning)}</p>`)
    .join("\n");
  return `<div class="warnings">${rows}</div>`;
}

/** Panel listing the queries the model generated; fused mode only. */
export function renderGeneratedQueries(exchange: ChatExchange): string {
  if (exchange.mode !== "rag_fusion") {
    return "";
  }
  const rows = exchange.generated_queries
    .map((query) => `<li class="generated-query">${escapeHtml(query)}</li>`)
    .join("\n");
  return `
    <section class="generated-queries-panel">
      <h3>Generated queries</h3>
      <ol class="generated-query-list">${rows}</ol>
    </section>`;
}

function fusionEntryRow(entry: FusionEntry): string {
  const contributors = entry.contributors
    .map(
      (c) =>
        `<li class="contributor">rank ${c.rank}: ${escapeHtml(c.query_text)}</li>`,
    )
    .join("\n");
  return `
    <li class="evidence-row">
      <span class="evidence-chunk">${escapeHtml(entry.chunk_id)}</span>
      <span class="evidence-score">${formatScore(entry.rrf_score)}</span>
      <ul class="contributors">${contributors}</ul>
    </li>`;
}

function retrievalRow(chunkId: string, distance: number | undefined): string {
  const shown = distance === undefined ? "n/a" : distance.toFixed(4);
  return `
    <li class="evidence-row">
      <span class="evidence-chunk">${escapeHtml(chunkId)}</span>
      <span class="evidence-distance">distance ${shown}</span>
    </li>`;
}

/** Evidence panel: fused chunks with scores and contributing queries, or
 * plain retrieval distances in classic mode. Rows follow the order the
 * synthesis call saw. */
export function renderEvidence(exchange: ChatExchange, expanded = false): string {
  let rows: string;
  if (exchange.fusion !== null) {
    const byId = new Map(exchange.fusion.entries.map((e) => [e.chunk_id, e]));
    rows = exchange.evidence
      .map((chunkId) => {
        const entry = byId.get(chunkId);
        return entry === undefined
          ? retrievalRow(chunkId, undefined)
          : fusionEntryRow(entry);
      })
      .join("\n");
  } else {
    const distances = new Map(
      (exchange.retrievals[0]?.entries ?? []).map((h) => [h.chunk_id, h.distance]),
    );
    rows = exchange.evidence
      .map((chunkId) => retrievalRow(chunkId, distances.get(chunkId)))
      .join("\n");
  }
  const open = expanded ? " open" : "";
  return `
    <details class="evidence-panel"${open}>
      <summary>Evidence (${exchange.evidence.length} chunks)</summary>
      <ol class="evidence-list">${rows}</ol>
    </details>`;
}

/** Stage timings, with the two LLM calls side by side. */
export function renderTimings(exchange: ChatExchange): string {
  const t = exchange.timings;
  const call1 =
    exchange.mode === "rag_fusion" ? formatMs(t.query_generation_ms) : "n/a";
  return `
    <section class="timings-panel">
      <h3>Timings</h3>
      <div class="llm-calls">
        <div class="llm-call">
          <span>LLM call 1 (query generation)</span>
          <strong>${call1}</strong>
        </div>
        <div class="llm-call">
          <span>LLM call 2 (answer synthesis)</span>
          <strong>${formatMs(t.synthesis_ms)}</strong>
        </div>
      </div>
      <dl class="stage-times">
        <dt>retrieval</dt><dd>${formatMs(t.retrieval_ms)}</dd>
        <dt>fusion</dt><dd>${formatMs(t.fusion_ms)}</dd>
        <dt>total</dt><dd>${formatMs(t.total_ms)}</dd>
      </dl>
    </section>`;
}

const SCORE_OPTIONS = [1, 2, 3, 4, 5]
  .map((n) => `<option value="${n}">${n}</option>`)
  .join("");

function rubricSelect(name: string): string {
  return `
    <label class="rubric-field">${name}
      <select name="${name}" class="rubric-select">
        <option value="">-</option>${SCORE_OPTIONS}
      </select>
    </label>`;
}

/** Grading form for one answer: three 1 to 5 selectors, submit disabled
 * until all three are chosen. */
export function renderRubricForm(exchangeId: string): string {
  return `
    <form class="rubric-form" data-exchange-id="${escapeHtml(exchangeId)}">
      <h3>Grade this answer</h3>
      ${rubricSelect("accuracy")}
      ${rubricSelect("relevance")}
      ${rubricSelect("comprehensiveness")}
      <label class="rubric-field">rater
        <input name="rater" class="rubric-rater" value="ui" />
      </label>
      <label class="rubric-field">notes
        <input name="notes" class="rubric-notes" value="" />
      </label>
      <button type="submit" class="rubric-submit" disabled>Save grades</button>
      <span class="rubric-status" role="status"></span>
    </form>`;
}

export function renderExchangeView(view: UiExchangeView): string {
  const exchange = view.exchange;
  return [
    renderAnswer(exchange),
    renderWarnings(exchange.warnings),
    renderGeneratedQueries(exchange),
    renderEvidence(exchange, view.evidenceExpanded),
    renderTimings(exchange),
    renderRubricForm(exchange.exchange_id),
  ]
    .filter((part) => part !== "")
    .join("\n");
}

function truncate(text: string, limit: number): string {
  return text.length <= limit ? text : `${text.slice(0, limit - 1)}…`;
}

export function renderHistory(summaries: ExchangeSummary[]): string {
  if (summaries.length === 0) {
    return `<p class="history-empty">No exchanges yet.</p>`;
  }
  const rows = summaries
    .map(
      (s) => `
    <li class="history-row" data-exchange-id="${escapeHtml(s.exchange_id)}">
      <span class="history-mode">${escapeHtml(s.mode)}</span>
      <span class="history-query">${escapeHtml(s.original_query)}</span>
      <span class="history-answer">${escapeHtml(truncate(s.answer, 90))}</span>
    </li>`,
    )
    .join("\n");
  return `<ul class="history-list">${rows}</ul>`;
}

/** Error banner. Retryable failures (network, upstream) get a retry
 * button; validation problems just show the message. */
export function renderError(message: string, retryable: boolean): string {
  const cls = retryable ? "error-banner" : "error-banner validation-error";
  const retry = retryable
    ? `<button type="button" class="retry-button">Retry</button>`
    : "";
  return `
    <div class="${cls}" role="alert">
      <span class="error-message">${escapeHtml(message)}</span>
      ${retry}
    </div>`;
}
