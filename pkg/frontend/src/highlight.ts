import type { DocumentPayload, PassagePayload } from "./types.js";

export interface Segment {
  start: number;
  end: number;
  highlighted: boolean;
  passageId: string | null;
}

/** True iff the passage's server-assigned labels include any selected concern. */
export function passageMatches(
  passage: PassagePayload,
  nodeIds: string[],
  selected: ReadonlySet<string>,
): boolean {
  if (selected.size === 0) return false;
  for (let i = 0; i < nodeIds.length; i++) {
    if (passage.labels[i] === 1 && selected.has(nodeIds[i])) return true;
  }
  return false;
}

/** Cut raw_text into contiguous segments using only the server-provided
 * offsets; a segment is highlighted iff its passage carries a selected
 * concern. Multiple selections union. Concatenating segments reproduces
 * the document text character-exactly. */
export function highlightSegments(
  doc: DocumentPayload,
  selected: ReadonlySet<string>,
): Segment[] {
  const segments: Segment[] = [];
  let cursor = 0;
  const ordered = [...doc.passages].sort((a, b) => a.start - b.start);
  for (const p of ordered) {
    if (p.start > cursor) {
      segments.push({ start: cursor, end: p.start, highlighted: false, passageId: null });
    }
    segments.push({
      start: p.start,
      end: p.end,
      highlighted: passageMatches(p, doc.node_ids, selected),
      passageId: p.passage_id,
    });
    cursor = p.end;
  }
  if (cursor < doc.raw_text.length) {
    segments.push({
      start: cursor,
      end: doc.raw_text.length,
      highlighted: false,
      passageId: null,
    });
  }
  return segments;
}
