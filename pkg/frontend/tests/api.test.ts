import { describe, expect, it } from "vitest";

import { GatewayClient, GatewayRequestError } from "../src/api";
import { Selection } from "../src/state";
import fixtureDoc from "./fixtures/facet_selections.json";

const fixture = fixtureDoc as unknown as {
  cases: { selection: { q: string; facets: Record<string, string[]> }; query_string: string }[];
};

interface Call {
  url: string;
  init?: RequestInit;
}

function fakeFetch(status: number, doc: unknown, calls: Call[]) {
  return async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    return new Response(JSON.stringify(doc), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

const BASE = "http://gateway.test:1";

describe("GatewayClient", () => {
  it("builds search URLs from the selection's canonical query string", async () => {
    const calls: Call[] = [];
    const client = new GatewayClient(
      BASE,
      null,
      fakeFetch(200, { total: 0, offset: 0, limit: 20, hits: [], facet_counts: {} }, calls),
    );
    const sample = fixture.cases.find((c) => c.query_string !== "")!;
    const selection: Selection = { q: sample.selection.q, facets: sample.selection.facets };
    await client.search(selection);
    expect(calls[0].url).toBe(`${BASE}/api/catalogue/search?${sample.query_string}`);
    expect(calls[0].init?.method).toBe("GET");
  });

  it("omits the question mark for an empty selection", async () => {
    const calls: Call[] = [];
    const client = new GatewayClient(
      BASE,
      null,
      fakeFetch(200, { total: 0, offset: 0, limit: 20, hits: [], facet_counts: {} }, calls),
    );
    await client.search({ q: "", facets: {} });
    expect(calls[0].url).toBe(`${BASE}/api/catalogue/search`);
  });

  it("sends a bearer header exactly when a token is set", async () => {
    const calls: Call[] = [];
    const client = new GatewayClient(BASE, null, fakeFetch(200, { status: "ok" }, calls));
    await client.health();
    client.token = "tok-123";
    await client.health();
    const first = calls[0].init?.headers as Record<string, string>;
    const second = calls[1].init?.headers as Record<string, string>;
    expect(first.Authorization).toBeUndefined();
    expect(second.Authorization).toBe("Bearer tok-123");
  });

  it("posts process envelopes with a JSON content type and escaped id", async () => {
    const calls: Call[] = [];
    const client = new GatewayClient(
      BASE,
      "tok",
      fakeFetch(200, { kind: "texts", texts: [] }, calls),
    );
    await client.process("sample.mt en/de", { kind: "text", content: "hi", params: {} });
    expect(calls[0].url).toBe(`${BASE}/api/process/sample.mt%20en%2Fde`);
    expect(calls[0].init?.method).toBe("POST");
    const headers = calls[0].init?.headers as Record<string, string>;
    expect(headers["Content-Type"]).toBe("application/json");
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({
      kind: "text",
      content: "hi",
      params: {},
    });
  });

  it("returns failure envelopes instead of throwing", async () => {
    const failure = {
      kind: "failure",
      failure: [{ code: "lt.internal", message: "synthetic fault" }],
    };
    const client = new GatewayClient(BASE, "tok", fakeFetch(200, failure, []));
    const response = await client.process("svc", { kind: "text", content: "x", params: {} });
    expect(response.kind).toBe("failure");
    expect(response.failure?.[0].code).toBe("lt.internal");
  });

  it("surfaces gateway error documents with their status", async () => {
    const detail = { code: "grid.unauthenticated", message: "missing bearer token" };
    const client = new GatewayClient(BASE, null, fakeFetch(401, detail, []));
    const error = await client.health().catch((e) => e);
    expect(error).toBeInstanceOf(GatewayRequestError);
    expect(error.status).toBe(401);
    expect(error.detail.code).toBe("grid.unauthenticated");
  });

  it("wraps network failures as status 0", async () => {
    const client = new GatewayClient(BASE, null, async () => {
      throw new TypeError("fetch failed");
    });
    const error = await client.health().catch((e) => e);
    expect(error).toBeInstanceOf(GatewayRequestError);
    expect(error.status).toBe(0);
    expect(error.detail.code).toBe("console.network");
    expect(error.detail.message).toContain("fetch failed");
  });

  it("flags non-JSON bodies", async () => {
    const client = new GatewayClient(BASE, null, async () => new Response("<html>boom</html>", {
      status: 502,
    }));
    const error = await client.health().catch((e) => e);
    expect(error).toBeInstanceOf(GatewayRequestError);
    expect(error.status).toBe(502);
    expect(error.detail.code).toBe("console.bad_payload");
  });

  it("requests dev tokens with subject and roles", async () => {
    const calls: Call[] = [];
    const grant = { token: "t", subject: "console", roles: ["consumer"], expires_at: 1 };
    const client = new GatewayClient(BASE, null, fakeFetch(201, grant, calls));
    const issued = await client.issueToken("console", ["consumer"]);
    expect(issued.token).toBe("t");
    expect(calls[0].url).toBe(`${BASE}/api/auth/token`);
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({
      subject: "console",
      roles: ["consumer"],
    });
  });

  it("unpacks the services listing", async () => {
    const services = [
      {
        service_id: "sample.ner",
        service_class: "IE",
        record_id: "r1",
        conformance: "passed",
        restricted: false,
      },
    ];
    const client = new GatewayClient(BASE, "tok", fakeFetch(200, { services }, []));
    expect(await client.listServices()).toEqual(services);
  });
});
