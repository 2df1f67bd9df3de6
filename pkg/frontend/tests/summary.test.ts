import { describe, expect, it, vi } from "vitest";

import { renderSummaryPage } from "../src/pages/summary.js";
import type { SummaryPayload } from "../src/types.js";
import summaryFixture from "./fixtures/summary_article_b.json";

const payload = summaryFixture as unknown as SummaryPayload;

function render(p: SummaryPayload = payload) {
  const container = document.createElement("div");
  const onExampleClick = vi.fn();
  renderSummaryPage(container, p, { onExampleClick });
  return { container, onExampleClick };
}

describe("summary page against the recorded payload", () => {
  it("renders one section per concern, in server order", () => {
    const { container } = render();
    const sections = [...container.querySelectorAll(".concern-section")];
    expect(sections.map((s) => (s as HTMLElement).dataset.concernId)).toEqual(
      payload.concerns.map((c) => c.id),
    );
  });

  it("renders the fixture word cloud with thimerosal present and largest", () => {
    const { container } = render();
    const section = container.querySelector('[data-concern-id="3.2"]')!;
    const terms = [...section.querySelectorAll(".cloud-term")] as HTMLElement[];
    const byText = new Map(terms.map((t) => [t.textContent, t]));
    expect(byText.has("thimerosal")).toBe(true);
    const sizes = terms.map((t) => parseFloat(t.style.fontSize));
    const thimerosalSize = parseFloat(byText.get("thimerosal")!.style.fontSize);
    expect(thimerosalSize).toBe(Math.max(...sizes));
    // strictly larger than every other term (its count is higher)
    for (const t of terms) {
      if (t.textContent !== "thimerosal") {
        expect(parseFloat(t.style.fontSize)).toBeLessThan(thimerosalSize);
      }
    }
  });

  it("cloud terms keep the server's order verbatim", () => {
    const { container } = render();
    for (const concern of payload.concerns) {
      const section = container.querySelector(`[data-concern-id="${concern.id}"]`)!;
      const rendered = [...section.querySelectorAll(".cloud-term")].map(
        (t) => t.textContent,
      );
      expect(rendered).toEqual(concern.cloud.map(([term]) => term));
    }
  });

  it("examples are clickable and carry doc/passage ids", () => {
    const { container, onExampleClick } = render();
    const concern = payload.concerns.find((c) => c.id === "1.2")!;
    const section = container.querySelector('[data-concern-id="1.2"]')!;
    const link = section.querySelector("a.example") as HTMLAnchorElement;
    expect(link.dataset.docId).toBe(concern.examples[0].doc_id);
    link.click();
    expect(onExampleClick).toHaveBeenCalledWith(concern.examples[0].doc_id, "1.2");
  });

  it("renders at most the server-provided examples, preserving order", () => {
    const { container } = render();
    for (const concern of payload.concerns) {
      const section = container.querySelector(`[data-concern-id="${concern.id}"]`)!;
      const rendered = [...section.querySelectorAll("a.example")] as HTMLElement[];
      expect(rendered.map((a) => a.dataset.passageId)).toEqual(
        concern.examples.map((e) => e.passage_id),
      );
    }
  });

  it("zero concerns renders the explicit empty state", () => {
    const { container } = render({ job_id: "j", concerns: [] });
    const empty = container.querySelector('[data-role="empty"]');
    expect(empty?.textContent).toContain("No concerns detected");
  });
});
