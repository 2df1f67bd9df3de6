import { highlightSegments } from "../highlight.js";
import type { ViewState } from "../state.js";
import type { DocumentPayload, TaxonomyDoc } from "../types.js";

/** Explore page: taxonomy tree on the left, the article on the right with
 * the selected concerns' passages highlighted using server offsets only.
 * Toggling checkboxes re-renders the article; selections union. */
export function renderExplorePage(
  container: HTMLElement,
  doc: DocumentPayload,
  taxonomy: TaxonomyDoc,
  state: ViewState,
): void {
  container.replaceChildren();
  const sidebar = document.createElement("aside");
  sidebar.className = "taxonomy-sidebar";
  const article = document.createElement("article");
  article.className = "document-view";
  article.dataset.docId = doc.doc_id;
  container.append(sidebar, article);

  const renderArticle = () => {
    article.replaceChildren();
    for (const segment of highlightSegments(doc, state.selected)) {
      const span = document.createElement("span");
      span.textContent = doc.raw_text.slice(segment.start, segment.end);
      if (segment.passageId) {
        span.dataset.passageId = segment.passageId;
        span.dataset.start = String(segment.start);
        span.dataset.end = String(segment.end);
      }
      if (segment.highlighted) span.className = "highlight";
      article.appendChild(span);
    }
  };

  const tree = document.createElement("ul");
  tree.className = "taxonomy-tree";
  let currentParentList: HTMLUListElement = tree;
  for (const node of taxonomy.nodes) {
    const isParent = !node.id.includes(".");
    const item = document.createElement("li");
    const label = document.createElement("label");
    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.dataset.nodeId = node.id;
    checkbox.checked = state.selected.has(node.id);
    checkbox.addEventListener("change", () => {
      state.toggleConcern(node.id);
      renderArticle();
    });
    label.append(checkbox, document.createTextNode(` ${node.id} ${node.name}`));
    label.title = node.definition;
    item.appendChild(label);
    if (isParent) {
      tree.appendChild(item);
      currentParentList = document.createElement("ul");
      item.appendChild(currentParentList);
    } else {
      currentParentList.appendChild(item);
    }
  }
  const clear = document.createElement("button");
  clear.textContent = "Clear selection";
  clear.dataset.role = "clear-selection";
  clear.addEventListener("click", () => {
    state.clearSelection();
    for (const box of sidebar.querySelectorAll<HTMLInputElement>("input[type=checkbox]")) {
      box.checked = false;
    }
    renderArticle();
  });
  sidebar.append(tree, clear);
  renderArticle();
}
