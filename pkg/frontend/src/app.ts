/** UI controller: wires the chat form, exchange panel, rubric form, and
 * history list to the service client.
 *
 * One chat request is in flight at a time; the submit button is disabled
 * while a request is pending. Failed submissions keep the typed query so
 * retry just resubmits it.
 */

import { ApiError, type ServiceClient } from "./api.js";
import {
  renderError,
  renderExchangeView,
  renderHistory,
} from "./render.js";
import {
  RUBRIC_DIMENSIONS,
  type Mode,
  type RubricDimension,
  type UiExchangeView,
} from "./types.js";

const SHELL = `
  <header class="app-header">
    <h1>fusionrag</h1>
    <span id="service-status" role="status"></span>
  </header>
  <form id="chat-form">
    <input id="query-input" name="query" autocomplete="off"
           placeholder="Ask about the indexed corpus" />
    <fieldset id="mode-toggle">
      <legend>Mode</legend>
      <label>
        <input type="radio" name="mode" value="rag_fusion" checked />
        fused multi-query
      </label>
      <label>
        <input type="radio" name="mode" value="rag" />
        classic single-query
      </label>
    </fieldset>
    <button id="submit-button" type="submit">Ask</button>
  </form>
  <div id="error-slot"></div>
  <section id="exchange-panel"></section>
  <aside id="history-panel">
    <h3>History</h3>
    <div id="history-slot"></div>
  </aside>`;

export class App {
  private pending = false;
  private view: UiExchangeView | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ServiceClient,
  ) {}

  mount(): void {
    this.root.innerHTML = SHELL;
    this.find<HTMLFormElement>("#chat-form").addEventListener(
      "submit",
      (event) => {
        event.preventDefault();
        void this.submit();
      },
    );
    void this.refreshStatus();
    void this.refreshHistory();
  }

  currentMode(): Mode {
    const checked = this.find<HTMLInputElement>(
      "#mode-toggle input[name=mode]:checked",
    );
    return checked.value as Mode;
  }

  async submit(): Promise<void> {
    if (this.pending) {
      return;
    }
    const input = this.find<HTMLInputElement>("#query-input");
    const query = input.value.trim();
    if (!query) {
      this.showBanner(renderError("enter a query first", false));
      return;
    }
    this.setPending(true);
    try {
      const exchange = await this.api.chat(query, this.currentMode());
      this.clearBanner();
      input.value = "";
      this.showExchange({
        exchange,
        evidenceExpanded: false,
        pendingRubric: {},
      });
      await this.refreshHistory();
    } catch (error) {
      this.showError(error);
    } finally {
      this.setPending(false);
    }
  }

  private showError(error: unknown): void {
    if (error instanceof ApiError) {
      const suffix = error.callSite ? ` (during ${error.callSite})` : "";
      this.showBanner(
        renderError(`${error.message}${suffix}`, error.status !== 400),
      );
      return;
    }
    const message = error instanceof Error ? error.message : String(error);
    this.showBanner(renderError(`service unreachable: ${message}`, true));
  }

  private showBanner(html: string): void {
    const slot = this.find<HTMLElement>("#error-slot");
    slot.innerHTML = html;
    slot
      .querySelector<HTMLButtonElement>(".retry-button")
      ?.addEventListener("click", () => void this.submit());
  }

  private clearBanner(): void {
    this.find<HTMLElement>("#error-slot").innerHTML = "";
  }

  private showExchange(view: UiExchangeView): void {
    this.view = view;
    const panel = this.find<HTMLElement>("#exchange-panel");
    panel.innerHTML = renderExchangeView(view);
    this.wireEvidenceToggle(panel);
    this.wireRubricForm(panel);
  }

  private wireEvidenceToggle(panel: HTMLElement): void {
    const details = panel.querySelector<HTMLDetailsElement>(".evidence-panel");
    details?.addEventListener("toggle", () => {
      if (this.view) {
        this.view.evidenceExpanded = details.open;
      }
    });
  }

  private wireRubricForm(panel: HTMLElement): void {
    const form = panel.querySelector<HTMLFormElement>(".rubric-form");
    if (!form) {
      return;
    }
    const selects = Array.from(
      form.querySelectorAll<HTMLSelectElement>(".rubric-select"),
    );
    const submit = this.child<HTMLButtonElement>(form, ".rubric-submit");
    const sync = () => {
      const view = this.view;
      if (!view) {
        return;
      }
      for (const select of selects) {
        const name = select.name as RubricDimension;
        if (select.value === "") {
          delete view.pendingRubric[name];
        } else {
          view.pendingRubric[name] = Number(select.value);
        }
      }
      submit.disabled = RUBRIC_DIMENSIONS.some(
        (dim) => view.pendingRubric[dim] === undefined,
      );
    };
    for (const select of selects) {
      select.addEventListener("change", sync);
    }
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitRubric(form);
    });
  }

  private async submitRubric(form: HTMLFormElement): Promise<void> {
    const view = this.view;
    if (!view) {
      return;
    }
    const status = this.child<HTMLElement>(form, ".rubric-status");
    const grades = view.pendingRubric;
    const [accuracy, relevance, comprehensiveness] = RUBRIC_DIMENSIONS.map(
      (dim) => grades[dim],
    );
    if (
      accuracy === undefined ||
      relevance === undefined ||
      comprehensiveness === undefined
    ) {
      return;
    }
    const rater =
      this.child<HTMLInputElement>(form, ".rubric-rater").value.trim() || "ui";
    const notes = this.child<HTMLInputElement>(form, ".rubric-notes").value;
    try {
      const receipt = await this.api.submitRubric({
        exchange_id: view.exchange.exchange_id,
        rater,
        accuracy,
        relevance,
        comprehensiveness,
        notes,
      });
      status.textContent =
        receipt.revision === 1
          ? `grades stored (revision ${receipt.revision})`
          : `grades updated (revision ${receipt.revision})`;
      status.classList.remove("rubric-error");
    } catch (error) {
      status.textContent =
        error instanceof Error ? error.message : String(error);
      status.classList.add("rubric-error");
    }
  }

  private async refreshStatus(): Promise<void> {
    const slot = this.find<HTMLElement>("#service-status");
    try {
      const health = await this.api.health();
      slot.textContent = health.index_ready
        ? `ready (${health.chunk_count} chunks indexed)`
        : "index not ready; ingest a corpus first";
    } catch {
      slot.textContent = "service unreachable";
    }
  }

  private async refreshHistory(): Promise<void> {
    const slot = this.find<HTMLElement>("#history-slot");
    try {
      const summaries = await this.api.listExchanges();
      slot.innerHTML = renderHistory(summaries);
      for (const row of slot.querySelectorAll<HTMLElement>(".history-row")) {
        row.addEventListener("click", () => {
          const id = row.dataset.exchangeId;
          if (id) {
            void this.selectExchange(id);
          }
        });
      }
    } catch {
      slot.innerHTML = `<p class="history-empty">history unavailable</p>`;
    }
  }

  private async selectExchange(exchangeId: string): Promise<void> {
    try {
      const exchange = await this.api.getExchange(exchangeId);
      this.clearBanner();
      this.showExchange({
        exchange,
        evidenceExpanded: true,
        pendingRubric: {},
      });
    } catch (error) {
      this.showError(error);
    }
  }

  private setPending(flag: boolean): void {
    this.pending = flag;
    this.find<HTMLButtonElement>("#submit-button").disabled = flag;
  }

  private find<T extends Element>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) {
      throw new Error(`missing element ${selector}`);
    }
    return node;
  }

  private child<T extends Element>(parent: Element, selector: string): T {
    const node = parent.querySelector<T>(selector);
    if (!node) {
      throw new Error(`missing element ${selector}`);
    }
    return node;
  }
}
