import type { TaxonomyDoc } from "./types.js";

export type Page = "upload" | "summary" | "explore" | "interventions";

/** Session view state. Selected concern ids are always a subset of the
 * active taxonomy's ids; highlighting is driven only by this set. */
export class ViewState {
  page: Page = "upload";
  jobId: string | null = null;
  docId: string | null = null;
  selected = new Set<string>();
  taxonomy: TaxonomyDoc | null = null;

  toggleConcern(id: string): void {
    if (!this.taxonomy || !this.taxonomy.nodes.some((n) => n.id === id)) {
      return; // unknown ids are ignored, keeping selected ⊆ taxonomy
    }
    if (this.selected.has(id)) {
      this.selected.delete(id);
    } else {
      this.selected.add(id);
    }
  }

  clearSelection(): void {
    this.selected.clear();
  }
}
