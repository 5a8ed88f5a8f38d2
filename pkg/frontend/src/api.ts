/** Thin client for the fusionrag HTTP service.
 *
 * The fetch function is injectable so tests can capture requests or
 * replay canned responses without a network.
 */

import type {
  ChatExchange,
  ExchangeSummary,
  HealthStatus,
  Mode,
  RubricReceipt,
  RubricSubmission,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx service response, carrying the parsed error detail. */
export class ApiError extends Error {
  readonly status: number;
  readonly callSite?: string;

  constructor(status: number, message: string, callSite?: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.callSite = callSite;
  }
}

interface ErrorDetail {
  message: string;
  callSite?: string;
}

async function parseErrorDetail(response: Response): Promise<ErrorDetail> {
  let body: unknown;
  try {
    body = await response.json();
  } catch {
    return { message: `service error ${response.status}` };
  }
  const detail = (body as { detail?: unknown }).detail;
  if (typeof detail === "string") {
    return { message: detail };
  }
  if (detail && typeof detail === "object") {
    const shaped = detail as { error?: string; call_site?: string };
    return {
      message: shaped.error ?? JSON.stringify(detail),
      callSite: shaped.call_site,
    };
  }
  return { message: `service error ${response.status}` };
}

/** The surface the UI controller depends on; ApiClient is the real one. */
export interface ServiceClient {
  health(): Promise<HealthStatus>;
  chat(
    query: string,
    mode: Mode,
    overrides?: Record<string, unknown>,
  ): Promise<ChatExchange>;
  submitRubric(score: RubricSubmission): Promise<RubricReceipt>;
  listExchanges(limit?: number): Promise<ExchangeSummary[]>;
  getExchange(exchangeId: string): Promise<ChatExchange>;
}

export class ApiClient implements ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      const { message, callSite } = await parseErrorDetail(response);
      throw new ApiError(response.status, message, callSite);
    }
    return response.json() as Promise<T>;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<HealthStatus> {
    return this.request("/api/health");
  }

  chat(
    query: string,
    mode: Mode,
    overrides?: Record<string, unknown>,
  ): Promise<ChatExchange> {
    const payload: Record<string, unknown> = { query, mode };
    if (overrides && Object.keys(overrides).length > 0) {
      payload.config = overrides;
    }
    return this.post("/api/chat", payload);
  }

  submitRubric(score: RubricSubmission): Promise<RubricReceipt> {
    return this.post("/api/rubric", score);
  }

  async listExchanges(limit?: number): Promise<ExchangeSummary[]> {
    const suffix = limit === undefined ? "" : `?limit=${limit}`;
    const body = await this.request<{ exchanges: ExchangeSummary[] }>(
      `/api/exchanges${suffix}`,
    );
    return body.exchanges;
  }

  getExchange(exchangeId: string): Promise<ChatExchange> {
    return this.request(`/api/exchanges/${encodeURIComponent(exchangeId)}`);
  }
}
