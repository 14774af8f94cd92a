// @vitest-environment jsdom
import { describe, expect, it, vi } from "vitest";

import {
  renderAnnotations,
  renderClassification,
  renderError,
  renderFailure,
  renderHits,
  renderResponse,
  renderSidebar,
  renderTexts,
} from "../src/render";
import { AnnotationDoc } from "../src/types";
import goldensDoc from "./fixtures/ner_goldens.json";

interface GoldenCase {
  content: string;
  response: { kind: "annotations"; annotations: Record<string, AnnotationDoc[]> };
  expected: { layer: string; start: number; end: number; text: string }[];
}

const goldens = goldensDoc as unknown as { cases: GoldenCase[] };

describe("renderAnnotations", () => {
  it.each(goldens.cases.map((c) => [c.content, c] as const))(
    "marks %s exactly like the oracle slices",
    (_content, goldenCase) => {
      const box = renderAnnotations(goldenCase.content, goldenCase.response.annotations);
      expect(box.textContent).toBe(goldenCase.content);
      const marks = Array.from(box.querySelectorAll("mark"));
      const wanted = [...goldenCase.expected].sort((a, b) => a.start - b.start);
      expect(marks.map((m) => m.textContent)).toEqual(wanted.map((s) => s.text));
      marks.forEach((mark, i) => {
        expect(mark.dataset.layer).toBe(wanted[i].layer);
        expect(mark.className).toBe(`layer-${wanted[i].layer}`);
        expect(mark.title.startsWith(wanted[i].layer)).toBe(true);
      });
    },
  );

  it("shows features in the tooltip", () => {
    const box = renderAnnotations("call 7", {
      numbers: [{ start: 5, end: 6, features: { value: 7 } }],
    });
    const mark = box.querySelector("mark")!;
    expect(mark.title).toBe("numbers value=7");
  });

  it("renders unannotated text without any mark", () => {
    const box = renderAnnotations("nothing here", {});
    expect(box.querySelector("mark")).toBeNull();
    expect(box.textContent).toBe("nothing here");
  });
});

describe("renderHits", () => {
  it("lists hits with record ids and badges", () => {
    const list = renderHits([
      {
        id: "rec-1",
        kind: "ToolService",
        resource_name: "Tiny tagger",
        description: "tags things",
        languages: ["en", "de"],
        status: "published",
        service_class: "IE",
      },
      {
        id: "rec-2",
        kind: "Corpus",
        resource_name: "Small corpus",
        languages: ["lv"],
        status: "curated",
      },
    ]);
    const items = Array.from(list.querySelectorAll("li"));
    expect(items).toHaveLength(2);
    expect(items[0].dataset.recordId).toBe("rec-1");
    expect(items[0].querySelector(".hit-title")!.textContent).toBe("Tiny tagger");
    const badges = Array.from(items[0].querySelectorAll(".badge")).map((b) => b.textContent);
    expect(badges).toEqual(["ToolService", "IE", "published", "en", "de"]);
    expect(items[1].querySelector(".hit-description")).toBeNull();
    expect(items[1].querySelector(".badge.class")).toBeNull();
  });
});

describe("renderSidebar", () => {
  it("fires the toggle callback with group and value", () => {
    const onToggle = vi.fn();
    const aside = renderSidebar(
      { language: { en: 3, de: 1 }, kind: { Corpus: 4 } },
      { q: "", facets: { language: ["de"] } },
      onToggle,
    );
    const groups = Array.from(aside.querySelectorAll(".facet-group h3")).map(
      (h) => h.textContent,
    );
    expect(groups).toEqual(["kind", "language"]);
    const deRow = Array.from(aside.querySelectorAll(".facet")).find(
      (row) => row.querySelector("button")!.textContent === "de",
    )!;
    expect(deRow.classList.contains("selected")).toBe(true);
    expect(deRow.querySelector(".count")!.textContent).toBe("1");
    deRow.querySelector("button")!.click();
    expect(onToggle).toHaveBeenCalledWith("language", "de");
  });

  it("spells multi-word facet names with spaces", () => {
    const aside = renderSidebar({ language_category: { official: 2 } }, { q: "", facets: {} }, () => {});
    expect(aside.querySelector("h3")!.textContent).toBe("language category");
  });
});

describe("renderClassification", () => {
  it("ranks classes and sizes the bars", () => {
    const box = renderClassification([
      { label: "nob", score: 0.25 },
      { label: "eng", score: 0.7 },
      { label: "dan", score: 0.25 },
    ]);
    const labels = Array.from(box.querySelectorAll(".label")).map((n) => n.textContent);
    expect(labels).toEqual(["eng", "dan", "nob"]);
    const widths = Array.from(box.querySelectorAll<HTMLElement>(".bar")).map(
      (b) => b.style.width,
    );
    expect(widths).toEqual(["70%", "25%", "25%"]);
    const scores = Array.from(box.querySelectorAll(".score")).map((n) => n.textContent);
    expect(scores).toEqual(["0.700", "0.250", "0.250"]);
  });
});

describe("renderTexts", () => {
  it("shows the source next to translations", () => {
    const box = renderTexts(
      [{ content: "hallo welt", role: "translation", score: 0.9 }],
      "hello world",
    );
    const panes = Array.from(box.querySelectorAll(".pane"));
    expect(panes).toHaveLength(2);
    expect(panes[0].querySelector("h4")!.textContent).toBe("source");
    expect(panes[0].querySelector("p")!.textContent).toBe("hello world");
    expect(panes[1].querySelector("h4")!.textContent).toBe("translation");
    expect(panes[1].querySelector("p")!.textContent).toBe("hallo welt");
    expect(panes[1].querySelector(".score")!.textContent).toBe("0.900");
  });
});

describe("banners", () => {
  it("lists failure items with their codes", () => {
    const box = renderFailure([{ code: "lt.timeout", message: "deadline exceeded" }]);
    expect(box.className).toBe("banner failure");
    expect(box.querySelector("code")!.textContent).toBe("lt.timeout");
    expect(box.textContent).toContain("deadline exceeded");
  });

  it("shows validation issues under the error head", () => {
    const box = renderError({
      code: "grid.invalid",
      message: "request failed validation",
      issues: [{ field_path: "content", message: "must not be empty" }],
    });
    expect(box.querySelector("code")!.textContent).toBe("grid.invalid");
    expect(box.querySelector(".issue")!.textContent).toBe("content: must not be empty");
  });
});

describe("renderResponse", () => {
  it("routes annotation envelopes through the highlighter", () => {
    const golden = goldens.cases.find((c) => c.expected.length > 0)!;
    const node = renderResponse(
      { kind: "annotations", annotations: golden.response.annotations },
      golden.content,
    );
    expect(node.textContent).toBe(golden.content);
    expect(node.querySelectorAll("mark").length).toBe(golden.expected.length);
  });

  it("routes failure envelopes to the failure banner", () => {
    const node = renderResponse({
      kind: "failure",
      failure: [{ code: "lt.overloaded", message: "queue full" }],
    });
    expect(node.className).toBe("banner failure");
  });

  it("plays audio responses through a data URI", () => {
    const node = renderResponse({
      kind: "audio",
      audio: {
        format: { encoding: "pcm16", sample_rate: 16000, channels: 1 },
        payload: "AAAAAA==",
      },
    });
    const player = node.querySelector("audio")!;
    expect(player.src.startsWith("data:audio/wav;base64,")).toBe(true);
    expect(node.querySelector(".audio-meta")!.textContent).toContain("pcm16");
  });
});
