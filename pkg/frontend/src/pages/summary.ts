import { renderWordCloud } from "../wordcloud.js";
import type { SummaryPayload } from "../types.js";

export interface SummaryCallbacks {
  onExampleClick: (docId: string, concernId: string) => void;
}

/** Summary page: one section per concern the server found, each with its
 * word cloud and clickable example passages. Rendering preserves the
 * server's ordering everywhere; an empty payload shows an explicit
 * no-concerns state. */
export function renderSummaryPage(
  container: HTMLElement,
  payload: SummaryPayload,
  callbacks: SummaryCallbacks,
): void {
  container.replaceChildren();
  if (payload.concerns.length === 0) {
    const empty = document.createElement("div");
    empty.className = "empty-state";
    empty.dataset.role = "empty";
    empty.textContent = "No concerns detected in this upload.";
    container.appendChild(empty);
    return;
  }
  for (const concern of payload.concerns) {
    const section = document.createElement("section");
    section.className = "concern-section";
    section.dataset.concernId = concern.id;

    const heading = document.createElement("h2");
    heading.textContent = `${concern.id} ${concern.name}`;
    const count = document.createElement("span");
    count.className = "count";
    count.textContent = ` ${concern.count} passage${concern.count === 1 ? "" : "s"}`;
    heading.appendChild(count);
    section.appendChild(heading);

    section.appendChild(renderWordCloud(document.createElement("div"), concern.cloud));

    const list = document.createElement("ul");
    list.className = "examples";
    for (const example of concern.examples) {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.className = "example";
      link.dataset.docId = example.doc_id;
      link.dataset.passageId = example.passage_id;
      link.textContent = example.text;
      const score = document.createElement("span");
      score.className = "score";
      score.textContent = ` (${example.score.toFixed(3)})`;
      link.appendChild(score);
      link.addEventListener("click", (event) => {
        event.preventDefault();
        callbacks.onExampleClick(example.doc_id, concern.id);
      });
      item.appendChild(link);
      list.appendChild(item);
    }
    section.appendChild(list);
    container.appendChild(section);
  }
}
