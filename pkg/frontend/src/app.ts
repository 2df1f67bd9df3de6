import { ApiClient } from "./api.js";
import { ViewState, type Page } from "./state.js";
import { renderExplorePage } from "./pages/explore.js";
import { renderInterventionsPage } from "./pages/interventions.js";
import { renderSummaryPage } from "./pages/summary.js";
import { renderUploadPage } from "./pages/upload.js";
import type { Job } from "./types.js";

const PAGES: [Page, string][] = [
  ["upload", "Upload"],
  ["summary", "Summary"],
  ["explore", "Explore"],
  ["interventions", "Interventions"],
];

/** Wire the four pages into a root element. The only configuration is the
 * API base URL; everything rendered comes from API payloads. */
export async function boot(root: HTMLElement, apiBase: string = ""): Promise<void> {
  const api = new ApiClient(apiBase);
  const state = new ViewState();
  root.replaceChildren();
  const nav = document.createElement("nav");
  const main = document.createElement("main");
  root.append(nav, main);

  state.taxonomy = await api.getTaxonomy();

  const navigate = async (page: Page) => {
    state.page = page;
    for (const button of nav.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.page === page);
    }
    main.replaceChildren();
    if (page === "upload") {
      renderUploadPage(main, api, {
        onComplete: (job: Job) => {
          state.jobId = job.job_id;
          const docIds = job.result?.doc_ids ?? [];
          state.docId = docIds.length ? docIds[0] : null;
          void navigate("summary");
        },
      });
    } else if (page === "summary") {
      if (!state.jobId) {
        main.textContent = "Upload something first.";
        return;
      }
      const payload = await api.getSummary(state.jobId);
      renderSummaryPage(main, payload, {
        onExampleClick: (docId, concernId) => {
          state.docId = docId;
          state.clearSelection();
          state.toggleConcern(concernId);
          void navigate("explore");
        },
      });
    } else if (page === "explore") {
      if (!state.docId || !state.taxonomy) {
        main.textContent = "Upload something first.";
        return;
      }
      let doc;
      try {
        doc = await api.getDocument(state.docId);
      } catch {
        // stale document id (e.g. server state was reset): prompt a reload
        state.docId = null;
        const prompt = document.createElement("div");
        prompt.className = "error-banner";
        prompt.dataset.role = "stale-document";
        prompt.textContent =
          "This document is no longer available; re-upload it to explore again.";
        main.appendChild(prompt);
        return;
      }
      renderExplorePage(main, doc, state.taxonomy, state);
    } else {
      renderInterventionsPage(main, api);
    }
  };

  for (const [page, label] of PAGES) {
    const button = document.createElement("button");
    button.textContent = label;
    button.dataset.page = page;
    button.addEventListener("click", () => void navigate(page));
    nav.appendChild(button);
  }
  await navigate("upload");
}
