/** Console wiring: configuration, token handling, the browse panel with
 * URL-backed facet state, and the try-out panel with a single in-flight
 * request at a time.
 */

import { GatewayClient, GatewayRequestError } from "./api.js";
import {
  renderError,
  renderHits,
  renderResponse,
  renderSidebar,
} from "./render.js";
import {
  Selection,
  selectionFromUrl,
  queryString,
  toggleFacet,
  withPage,
  withQuery,
} from "./state.js";
import { ConsoleConfig, RequestEnvelope, ResponseEnvelope, ServiceSummary } from "./types.js";
import {
  TryOutInput,
  bytesToBase64,
  pcm16Payload,
  requestKindFor,
  validateTryOut,
} from "./validate.js";

const TOKEN_KEY = "ltgrid.console.token";

function must<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

interface HistoryEntry {
  service: string;
  input: string;
  response: ResponseEnvelope;
}

class ConsoleApp {
  private client: GatewayClient;
  private selection: Selection;
  private services: ServiceSummary[] = [];
  private pending = false;
  private history: HistoryEntry[] = [];

  constructor(config: ConsoleConfig) {
    this.client = new GatewayClient(
      config.gateway_base_url,
      window.localStorage.getItem(TOKEN_KEY),
    );
    this.selection = selectionFromUrl(window.location.href);
  }

  start(): void {
    const tokenInput = must<HTMLInputElement>("token");
    tokenInput.value = this.client.token ?? "";
    tokenInput.addEventListener("change", () => {
      this.setToken(tokenInput.value.trim() || null);
    });
    must<HTMLButtonElement>("fetch-token").addEventListener("click", () => {
      void this.fetchDevToken(tokenInput);
    });

    const searchBox = must<HTMLInputElement>("search-box");
    searchBox.value = this.selection.q;
    must<HTMLFormElement>("search-form").addEventListener("submit", (event) => {
      event.preventDefault();
      this.apply(withQuery(this.selection, searchBox.value.trim()));
    });

    window.addEventListener("popstate", () => {
      this.selection = selectionFromUrl(window.location.href);
      searchBox.value = this.selection.q;
      void this.refreshBrowse(false);
    });

    must<HTMLSelectElement>("service-select").addEventListener("change", () => {
      this.renderTryOutControls();
    });
    must<HTMLFormElement>("tryout-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitTryOut();
    });

    void this.refreshBrowse(false);
    void this.refreshServices();
  }

  private setToken(token: string | null): void {
    this.client.token = token;
    if (token === null) {
      window.localStorage.removeItem(TOKEN_KEY);
    } else {
      window.localStorage.setItem(TOKEN_KEY, token);
    }
    void this.refreshServices();
  }

  private async fetchDevToken(tokenInput: HTMLInputElement): Promise<void> {
    try {
      const grant = await this.client.issueToken("console", ["consumer"]);
      tokenInput.value = grant.token;
      this.setToken(grant.token);
      this.banner(null);
    } catch (e) {
      this.banner(e);
    }
  }

  // ---------------------------------------------------------------- browse

  private apply(selection: Selection): void {
    this.selection = selection;
    const qs = queryString(selection);
    const url = qs ? `${window.location.pathname}?${qs}` : window.location.pathname;
    window.history.pushState(null, "", url);
    void this.refreshBrowse(false);
  }

  private async refreshBrowse(_push: boolean): Promise<void> {
    try {
      const result = await this.client.search(this.selection);
      this.banner(null);
      must("total").textContent = `${result.total} records`;
      const results = must("results");
      results.replaceChildren(renderHits(result.hits));
      const sidebar = must("sidebar");
      sidebar.replaceChildren(
        renderSidebar(result.facet_counts, this.selection, (name, value) => {
          this.apply(toggleFacet(this.selection, name, value));
        }),
      );
      this.renderPager(result.total, result.offset, result.limit);
    } catch (e) {
      this.banner(e);
    }
  }

  private renderPager(total: number, offset: number, limit: number): void {
    const pager = must("pager");
    pager.replaceChildren();
    const prev = document.createElement("button");
    prev.textContent = "previous";
    prev.disabled = offset <= 0;
    prev.addEventListener("click", () =>
      this.apply(withPage(this.selection, Math.max(offset - limit, 0))),
    );
    const next = document.createElement("button");
    next.textContent = "next";
    next.disabled = offset + limit >= total;
    next.addEventListener("click", () => this.apply(withPage(this.selection, offset + limit)));
    const where = document.createElement("span");
    where.textContent = total === 0 ? "" : `${offset + 1}-${Math.min(offset + limit, total)}`;
    pager.append(prev, where, next);
  }

  // --------------------------------------------------------------- try-out

  private async refreshServices(): Promise<void> {
    const select = must<HTMLSelectElement>("service-select");
    if (this.client.token === null) {
      select.replaceChildren(new Option("paste a token to list services", ""));
      return;
    }
    try {
      this.services = await this.client.listServices();
      select.replaceChildren(
        ...this.services.map(
          (s) => new Option(`${s.service_id} (${s.service_class})`, s.service_id),
        ),
      );
      this.renderTryOutControls();
    } catch (e) {
      this.banner(e);
    }
  }

  private selectedService(): ServiceSummary | undefined {
    const id = must<HTMLSelectElement>("service-select").value;
    return this.services.find((s) => s.service_id === id);
  }

  private renderTryOutControls(): void {
    const service = this.selectedService();
    const wantsAudio = service !== undefined && requestKindFor(service.service_class) === "audio";
    must("text-input-row").hidden = wantsAudio;
    must("audio-input-row").hidden = !wantsAudio;
    must("params-row").hidden = service === undefined || service.service_class !== "MT";
  }

  private async gatherInput(service: ServiceSummary): Promise<TryOutInput> {
    const params: Record<string, string> = {};
    const target = must<HTMLInputElement>("param-target-lang").value.trim();
    if (service.service_class === "MT" && target !== "") {
      params["target_lang"] = target;
    }
    if (requestKindFor(service.service_class) === "audio") {
      const file = must<HTMLInputElement>("audio-file").files?.[0];
      const bytes = file ? new Uint8Array(await file.arrayBuffer()) : undefined;
      return { kind: "audio", audioBytes: bytes, params };
    }
    return { kind: "text", text: must<HTMLTextAreaElement>("text-input").value, params };
  }

  private async submitTryOut(): Promise<void> {
    if (this.pending) {
      return;
    }
    const service = this.selectedService();
    const output = must("tryout-output");
    if (service === undefined) {
      output.replaceChildren(
        renderError({ code: "console.no_service", message: "pick a service first" }),
      );
      return;
    }
    const input = await this.gatherInput(service);
    const issues = validateTryOut(service.service_class, input);
    if (issues.length > 0) {
      output.replaceChildren(
        renderError({
          code: "console.invalid_input",
          message: "fix the input before sending",
          issues: issues.map((i) => ({ severity: "error", field_path: i.field, message: i.message })),
        }),
      );
      return;
    }
    const envelope: RequestEnvelope =
      input.kind === "text"
        ? { kind: "text", content: input.text ?? "", params: input.params }
        : {
            kind: "audio",
            audio: {
              format: { encoding: "pcm16", sample_rate: 16000, channels: 1 },
              payload: bytesToBase64(pcm16Payload(input.audioBytes ?? new Uint8Array())),
            },
            params: input.params,
          };

    this.pending = true;
    const submit = must<HTMLButtonElement>("tryout-submit");
    submit.disabled = true;
    try {
      const response = await this.client.process(service.service_id, envelope);
      const label = input.kind === "text" ? (input.text ?? "") : "(audio upload)";
      this.history.unshift({ service: service.service_id, input: label, response });
      output.replaceChildren(renderResponse(response, input.text));
      this.renderHistory();
    } catch (e) {
      output.replaceChildren(
        e instanceof GatewayRequestError
          ? renderError(e.detail)
          : renderError({ code: "console.internal", message: String(e) }),
      );
    } finally {
      this.pending = false;
      submit.disabled = false;
    }
  }

  private renderHistory(): void {
    const list = must("history");
    list.replaceChildren(
      ...this.history.slice(0, 20).map((entry) => {
        const item = document.createElement("li");
        item.textContent = `${entry.service}: ${entry.input.slice(0, 60)} -> ${entry.response.kind}`;
        return item;
      }),
    );
  }

  // ---------------------------------------------------------------- shared

  private banner(error: unknown | null): void {
    const box = must("banner");
    if (error === null) {
      box.replaceChildren();
      return;
    }
    box.replaceChildren(
      error instanceof GatewayRequestError
        ? renderError(error.detail)
        : renderError({ code: "console.internal", message: String(error) }),
    );
  }
}

async function main(): Promise<void> {
  const response = await fetch("./config.json");
  const config = (await response.json()) as ConsoleConfig;
  new ConsoleApp(config).start();
}

void main();
