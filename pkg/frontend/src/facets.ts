/** Sidebar view model built from the API's facet_counts.
 *
 * The counts are passed through untouched; the console never recomputes
 * them. A selected value the API reports no count for (zero matches under
 * the other filters) is kept visible with count 0 so it can be deselected.
 */

import { FACET_NAMES, FacetName, Selection, isSelected } from "./state.js";

export interface FacetValueView {
  value: string;
  count: number;
  selected: boolean;
  /** true when the value is absent from facet_counts and only shown
   *  because it is selected */
  injected: boolean;
}

export interface FacetGroupView {
  name: FacetName;
  values: FacetValueView[];
}

export function buildSidebar(
  counts: Record<string, Record<string, number>>,
  selection: Selection,
): FacetGroupView[] {
  const groups: FacetGroupView[] = [];
  for (const name of FACET_NAMES) {
    const groupCounts = counts[name];
    if (groupCounts === undefined) {
      continue;
    }
    const values: FacetValueView[] = Object.entries(groupCounts).map(([value, count]) => ({
      value,
      count,
      selected: isSelected(selection, name, value),
      injected: false,
    }));
    for (const value of selection.facets[name] ?? []) {
      if (!(value in groupCounts)) {
        values.push({ value, count: 0, selected: true, injected: true });
      }
    }
    values.sort((a, b) => b.count - a.count || a.value.localeCompare(b.value));
    groups.push({ name, values });
  }
  return groups;
}
