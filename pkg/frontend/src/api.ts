/** Thin typed client for the gateway's JSON API.
 *
 * Every non-2xx answer carries a structured error document; it is surfaced
 * as a GatewayRequestError so the UI can show the code. In-band service
 * failures (kind=failure envelopes) arrive with status 200 and are returned
 * as ordinary responses, not thrown.
 */

import {
  GatewayErrorDoc,
  RequestEnvelope,
  ResponseEnvelope,
  SearchResponse,
  ServiceSummary,
  TokenGrant,
} from "./types.js";
import { Selection, queryString } from "./state.js";

export class GatewayRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: GatewayErrorDoc,
  ) {
    super(`${detail.code}: ${detail.message}`);
    this.name = "GatewayRequestError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    public token: string | null = null,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const headers: Record<string, string> = {};
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    let payload: string | undefined;
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, { method, headers, body: payload });
    } catch (e) {
      throw new GatewayRequestError(0, {
        code: "console.network",
        message: `gateway unreachable: ${e instanceof Error ? e.message : String(e)}`,
      });
    }
    let doc: unknown = null;
    const text = await response.text();
    if (text !== "") {
      try {
        doc = JSON.parse(text);
      } catch {
        throw new GatewayRequestError(response.status, {
          code: "console.bad_payload",
          message: `gateway sent non-JSON (status ${response.status})`,
        });
      }
    }
    if (!response.ok) {
      const detail =
        doc !== null && typeof doc === "object" && "code" in (doc as object)
          ? (doc as GatewayErrorDoc)
          : { code: "console.bad_payload", message: `status ${response.status}` };
      throw new GatewayRequestError(response.status, detail);
    }
    return doc;
  }

  async health(): Promise<{ status: string; records: number; services: number }> {
    return (await this.request("GET", "/health")) as {
      status: string;
      records: number;
      services: number;
    };
  }

  async search(selection: Selection): Promise<SearchResponse> {
    const qs = queryString(selection);
    const path = "/api/catalogue/search" + (qs ? `?${qs}` : "");
    return (await this.request("GET", path)) as SearchResponse;
  }

  async listServices(): Promise<ServiceSummary[]> {
    const doc = (await this.request("GET", "/api/services")) as { services: ServiceSummary[] };
    return doc.services;
  }

  async process(serviceId: string, envelope: RequestEnvelope): Promise<ResponseEnvelope> {
    return (await this.request(
      "POST",
      `/api/process/${encodeURIComponent(serviceId)}`,
      envelope,
    )) as ResponseEnvelope;
  }

  async issueToken(subject: string, roles: string[]): Promise<TokenGrant> {
    return (await this.request("POST", "/api/auth/token", { subject, roles })) as TokenGrant;
  }
}
