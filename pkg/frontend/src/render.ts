/** DOM builders. Each takes plain data and returns a detached element; the
 * app swaps them into place. No framework, no innerHTML for user data.
 */

import { buildSidebar } from "./facets.js";
import { Segment, highlightSegments } from "./highlight.js";
import { Selection } from "./state.js";
import {
  AudioDoc,
  ClassScoreDoc,
  FailureItemDoc,
  GatewayErrorDoc,
  ResponseEnvelope,
  SearchHit,
  TextItemDoc,
} from "./types.js";
import { base64ToBytes, bytesToBase64, wavFromPcm16 } from "./validate.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

// ------------------------------------------------------------------ browse

export function renderHits(hits: SearchHit[]): HTMLElement {
  const list = el("ul", "hits");
  for (const hit of hits) {
    const item = el("li", "hit");
    item.dataset.recordId = hit.id;
    const title = el("div", "hit-title", hit.resource_name);
    const badges = el("div", "hit-badges");
    badges.append(el("span", "badge kind", hit.kind));
    if (hit.service_class) {
      badges.append(el("span", "badge class", hit.service_class));
    }
    badges.append(el("span", "badge status", hit.status));
    for (const code of hit.languages ?? []) {
      badges.append(el("span", "badge lang", code));
    }
    item.append(title, badges);
    if (hit.description) {
      item.append(el("div", "hit-description", hit.description));
    }
    list.append(item);
  }
  return list;
}

export function renderSidebar(
  counts: Record<string, Record<string, number>>,
  selection: Selection,
  onToggle: (name: string, value: string) => void,
): HTMLElement {
  const aside = el("div", "facets");
  for (const group of buildSidebar(counts, selection)) {
    const box = el("section", "facet-group");
    box.append(el("h3", undefined, group.name.replace(/_/g, " ")));
    const list = el("ul");
    for (const value of group.values) {
      const row = el("li", value.selected ? "facet selected" : "facet");
      const button = el("button", undefined, value.value);
      button.type = "button";
      button.addEventListener("click", () => onToggle(group.name, value.value));
      row.append(button, el("span", "count", String(value.count)));
      list.append(row);
    }
    box.append(list);
    aside.append(box);
  }
  return aside;
}

// ----------------------------------------------------------------- try-out

export function renderAnnotations(
  content: string,
  layers: Record<string, import("./types.js").AnnotationDoc[]>,
): HTMLElement {
  const box = el("div", "annotated");
  for (const segment of highlightSegments(content, layers)) {
    box.append(segmentNode(segment));
  }
  return box;
}

function segmentNode(segment: Segment): Node {
  if (segment.layer === undefined || segment.annotation === undefined) {
    return document.createTextNode(segment.text);
  }
  const mark = el("mark", `layer-${segment.layer}`, segment.text);
  mark.dataset.layer = segment.layer;
  const features = segment.annotation.features ?? {};
  const parts = Object.entries(features).map(([k, v]) => `${k}=${String(v)}`);
  mark.title = [segment.layer, ...parts].join(" ");
  return mark;
}

export function renderTexts(items: TextItemDoc[], sourceText?: string): HTMLElement {
  const box = el("div", "texts");
  if (sourceText !== undefined) {
    const pane = el("div", "pane source");
    pane.append(el("h4", undefined, "source"), el("p", undefined, sourceText));
    box.append(pane);
  }
  for (const item of items) {
    const pane = el("div", "pane target");
    pane.append(el("h4", undefined, item.role ?? "output"), el("p", undefined, item.content));
    if (item.score !== undefined) {
      pane.append(el("span", "score", item.score.toFixed(3)));
    }
    box.append(pane);
  }
  return box;
}

export function renderClassification(classes: ClassScoreDoc[]): HTMLElement {
  const box = el("div", "classes");
  const ranked = [...classes].sort((a, b) => b.score - a.score || a.label.localeCompare(b.label));
  for (const cls of ranked) {
    const row = el("div", "class-row");
    row.append(el("span", "label", cls.label));
    const track = el("div", "bar-track");
    const bar = el("div", "bar");
    bar.style.width = `${Math.round(cls.score * 100)}%`;
    track.append(bar);
    row.append(track, el("span", "score", cls.score.toFixed(3)));
    box.append(row);
  }
  return box;
}

export function renderAudio(audio: AudioDoc): HTMLElement {
  const box = el("div", "audio");
  const wav = wavFromPcm16(
    base64ToBytes(audio.payload),
    audio.format.sample_rate,
    audio.format.channels,
  );
  const player = el("audio");
  player.controls = true;
  player.src = `data:audio/wav;base64,${bytesToBase64(wav)}`;
  box.append(player);
  const seconds = audio.payload.length > 0 ? wav.length / (audio.format.sample_rate * 2) : 0;
  box.append(el("span", "audio-meta", `${audio.format.encoding} ${seconds.toFixed(2)}s`));
  return box;
}

export function renderFailure(failure: FailureItemDoc[]): HTMLElement {
  const box = el("div", "banner failure");
  for (const item of failure) {
    const row = el("div", "failure-item");
    row.append(el("code", undefined, item.code), el("span", undefined, item.message));
    box.append(row);
  }
  return box;
}

export function renderError(error: GatewayErrorDoc): HTMLElement {
  const box = el("div", "banner error");
  const head = el("div", "failure-item");
  head.append(el("code", undefined, error.code), el("span", undefined, error.message));
  box.append(head);
  for (const issue of error.issues ?? []) {
    box.append(el("div", "issue", `${issue.field_path}: ${issue.message}`));
  }
  return box;
}

export function renderResponse(envelope: ResponseEnvelope, requestText?: string): HTMLElement {
  switch (envelope.kind) {
    case "annotations":
      return renderAnnotations(requestText ?? "", envelope.annotations ?? {});
    case "texts":
      return renderTexts(envelope.texts ?? [], requestText);
    case "classification":
      return renderClassification(envelope.classes ?? []);
    case "audio":
      return envelope.audio
        ? renderAudio(envelope.audio)
        : renderError({ code: "console.bad_payload", message: "audio response without payload" });
    case "failure":
      return renderFailure(envelope.failure ?? []);
  }
}
