import { describe, expect, it } from "vitest";

import { highlightSegments, passageMatches } from "../src/highlight.js";
import type { DocumentPayload } from "../src/types.js";
import documentFixture from "./fixtures/document_article_b.json";

const doc = documentFixture as unknown as DocumentPayload;

function highlightedText(selected: Set<string>): string[] {
  return highlightSegments(doc, selected)
    .filter((s) => s.highlighted)
    .map((s) => doc.raw_text.slice(s.start, s.end));
}

describe("highlightSegments against the recorded document", () => {
  it("concatenated segments reproduce raw_text exactly", () => {
    const segments = highlightSegments(doc, new Set(["3.2"]));
    const rebuilt = segments.map((s) => doc.raw_text.slice(s.start, s.end)).join("");
    expect(rebuilt).toBe(doc.raw_text);
  });

  it("segment offsets reproduce each passage text character-exactly", () => {
    const segments = highlightSegments(doc, new Set());
    for (const passage of doc.passages) {
      const segment = segments.find((s) => s.passageId === passage.passage_id);
      expect(segment).toBeDefined();
      expect(doc.raw_text.slice(segment!.start, segment!.end)).toBe(
        doc.raw_text.slice(passage.start, passage.end),
      );
    }
  });

  it("empty selection highlights nothing", () => {
    expect(highlightedText(new Set())).toEqual([]);
  });

  it("selecting a concern highlights exactly the passages the server labeled", () => {
    // 1.2 (server labels) is carried only by the second passage
    const spans = highlightedText(new Set(["1.2"]));
    expect(spans).toEqual(["The retracted research started a conspiracy panic."]);
  });

  it("multiple selections union the highlights", () => {
    const one = highlightedText(new Set(["1.2"]));
    const other = highlightedText(new Set(["3.2"]));
    const both = highlightedText(new Set(["1.2", "3.2"]));
    expect(both.length).toBe(new Set([...one, ...other]).size);
    for (const text of [...one, ...other]) {
      expect(both).toContain(text);
    }
  });

  it("parent and child selections overlap on shared passages without duplication", () => {
    // the server labels both 3 and 3.2 on the first passage
    const spans = highlightedText(new Set(["3", "3.2"]));
    expect(spans).toEqual([
      "They say thimerosal and aluminum are risky additives, and thimerosal lingers.",
    ]);
  });

  it("unflagged passages never highlight even if their text mentions the topic", () => {
    const spans = highlightedText(new Set(["2"]));
    expect(spans).toEqual([]); // no passage carries 2; the UI must not guess
  });

  it("passageMatches consults only server labels", () => {
    const passage = doc.passages[0];
    expect(passageMatches(passage, doc.node_ids, new Set(["3.2"]))).toBe(true);
    expect(passageMatches(passage, doc.node_ids, new Set(["5.2"]))).toBe(false);
    expect(passageMatches(passage, doc.node_ids, new Set())).toBe(false);
  });
});
