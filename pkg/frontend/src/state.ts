/** Search selection state and its URL round trip.
 *
 * The selection IS the shareable state: queryString() produces the exact
 * parameter string sent to the gateway, and the same string is pushed into
 * the browser URL, so reloading reproduces the identical result list.
 * Parameter order is canonical (q, then facets in sidebar order, then
 * offset, then limit) so equal selections always print equal strings.
 */

export const FACET_NAMES = [
  "kind",
  "service_class",
  "language",
  "language_category",
  "status",
  "function",
  "source",
  "target",
] as const;

export type FacetName = (typeof FACET_NAMES)[number];

export interface Selection {
  q: string;
  facets: Partial<Record<FacetName, string[]>>;
  offset?: number;
  limit?: number;
}

export function emptySelection(): Selection {
  return { q: "", facets: {} };
}

function isFacetName(name: string): name is FacetName {
  return (FACET_NAMES as readonly string[]).includes(name);
}

export function searchParams(selection: Selection): URLSearchParams {
  const params = new URLSearchParams();
  if (selection.q) {
    params.append("q", selection.q);
  }
  for (const name of FACET_NAMES) {
    for (const value of selection.facets[name] ?? []) {
      params.append(name, value);
    }
  }
  if (selection.offset !== undefined) {
    params.append("offset", String(selection.offset));
  }
  if (selection.limit !== undefined) {
    params.append("limit", String(selection.limit));
  }
  return params;
}

export function queryString(selection: Selection): string {
  return searchParams(selection).toString();
}

/** Inverse of queryString; unknown parameters and bad numbers are dropped. */
export function selectionFromParams(params: URLSearchParams): Selection {
  const selection = emptySelection();
  const q = params.get("q");
  if (q) {
    selection.q = q;
  }
  for (const name of FACET_NAMES) {
    const values = params.getAll(name).filter((v) => v !== "");
    if (values.length > 0) {
      selection.facets[name] = values;
    }
  }
  for (const key of ["offset", "limit"] as const) {
    const raw = params.get(key);
    if (raw !== null && /^\d+$/.test(raw)) {
      selection[key] = Number(raw);
    }
  }
  return selection;
}

export function selectionFromUrl(url: string): Selection {
  const mark = url.indexOf("?");
  const qs = mark === -1 ? "" : url.slice(mark + 1);
  return selectionFromParams(new URLSearchParams(qs));
}

export function isSelected(selection: Selection, name: FacetName, value: string): boolean {
  return (selection.facets[name] ?? []).includes(value);
}

/** Add or remove one facet value; paging resets because the page changed. */
export function toggleFacet(selection: Selection, name: string, value: string): Selection {
  if (!isFacetName(name)) {
    return selection;
  }
  const facets = { ...selection.facets };
  const current = facets[name] ?? [];
  const next = current.includes(value)
    ? current.filter((v) => v !== value)
    : [...current, value];
  if (next.length > 0) {
    facets[name] = next;
  } else {
    delete facets[name];
  }
  return { q: selection.q, facets, limit: selection.limit };
}

export function withQuery(selection: Selection, q: string): Selection {
  return { q, facets: selection.facets, limit: selection.limit };
}

export function withPage(selection: Selection, offset: number): Selection {
  const next: Selection = { q: selection.q, facets: selection.facets, limit: selection.limit };
  if (offset > 0) {
    next.offset = offset;
  }
  return next;
}

export function clearFacets(selection: Selection): Selection {
  return { q: selection.q, facets: {}, limit: selection.limit };
}
