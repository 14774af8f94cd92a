/** Standoff-annotation highlighting.
 *
 * Annotation offsets are code-point indices into the request content, so
 * slicing must go through Array.from: String.prototype.slice counts UTF-16
 * units and lands short of the mark after any astral character (emoji,
 * musical symbols). Every rendered highlight in the console comes from
 * these functions.
 */

import { AnnotationDoc } from "./types.js";

export function codePointSlice(content: string, start: number, end: number): string {
  return Array.from(content).slice(start, end).join("");
}

export function annotationText(content: string, annotation: AnnotationDoc): string {
  return codePointSlice(content, annotation.start, annotation.end);
}

export interface Segment {
  text: string;
  layer?: string;
  annotation?: AnnotationDoc;
}

interface Placed {
  layer: string;
  annotation: AnnotationDoc;
}

/** Split content into plain and annotated segments, in document order.
 *
 * Spans are taken earliest-first (ties: longest first); a span overlapping
 * an already-consumed region is dropped rather than nested. Segment texts
 * always concatenate back to the full content.
 */
export function highlightSegments(
  content: string,
  layers: Record<string, AnnotationDoc[]>,
): Segment[] {
  const points = Array.from(content);
  const spans: Placed[] = [];
  for (const layer of Object.keys(layers).sort()) {
    for (const annotation of layers[layer]) {
      if (annotation.start < 0 || annotation.end < annotation.start) {
        continue; // defensive: the gateway validates these away
      }
      spans.push({ layer, annotation });
    }
  }
  spans.sort(
    (a, b) => a.annotation.start - b.annotation.start || b.annotation.end - a.annotation.end,
  );

  const segments: Segment[] = [];
  let cursor = 0;
  for (const { layer, annotation } of spans) {
    if (annotation.start < cursor || annotation.start >= points.length) {
      continue;
    }
    const end = Math.min(annotation.end, points.length);
    if (annotation.start > cursor) {
      segments.push({ text: points.slice(cursor, annotation.start).join("") });
    }
    segments.push({ text: points.slice(annotation.start, end).join(""), layer, annotation });
    cursor = end;
  }
  if (cursor < points.length) {
    segments.push({ text: points.slice(cursor).join("") });
  }
  return segments;
}
