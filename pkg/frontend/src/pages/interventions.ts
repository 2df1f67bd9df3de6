import { ApiClient } from "../api.js";

/** Intervention query page: free-text box, detected concerns as chips, and
 * the ranked handout list rendered exactly in the order the API returned
 * (the UI never re-sorts). No-concern results are guidance, not failure. */
export function renderInterventionsPage(container: HTMLElement, api: ApiClient): void {
  container.replaceChildren();
  const box = document.createElement("textarea");
  box.placeholder = "Describe the concern you heard...";
  box.dataset.role = "query-input";
  const submit = document.createElement("button");
  submit.textContent = "Find interventions";
  submit.dataset.role = "query-submit";
  const validation = document.createElement("div");
  validation.className = "field-error";
  validation.dataset.role = "query-validation";
  validation.hidden = true;
  const results = document.createElement("div");
  results.dataset.role = "results";
  const errorBox = document.createElement("div");
  errorBox.className = "error-banner";
  errorBox.dataset.role = "error";
  errorBox.hidden = true;
  container.append(box, submit, validation, results, errorBox);

  submit.addEventListener("click", async () => {
    const text = box.value.trim();
    if (!text) {
      validation.hidden = false;
      validation.textContent = "Enter a concern first";
      return;
    }
    validation.hidden = true;
    errorBox.hidden = true;
    results.replaceChildren();
    let payload;
    try {
      payload = await api.queryInterventions(text);
    } catch (err) {
      errorBox.hidden = false;
      errorBox.textContent = err instanceof Error ? err.message : String(err);
      return;
    }
    if (payload.no_concerns) {
      const guidance = document.createElement("div");
      guidance.className = "empty-state";
      guidance.dataset.role = "no-concerns";
      guidance.textContent =
        "No concerns were detected in that text, so there is nothing to match. " +
        "Try describing the specific worry.";
      results.appendChild(guidance);
      return;
    }
    const detected = document.createElement("div");
    detected.className = "detected";
    detected.dataset.role = "detected";
    for (const id of payload.detected) {
      const chip = document.createElement("span");
      chip.className = "chip";
      chip.textContent = id;
      detected.appendChild(chip);
    }
    results.appendChild(detected);

    const list = document.createElement("ol");
    list.className = "matches";
    list.dataset.role = "matches";
    for (const match of payload.matches) {
      const item = document.createElement("li");
      item.dataset.interventionId = match.id;
      item.dataset.score = String(match.score);
      const link = document.createElement("a");
      link.textContent = match.title;
      if (match.url) link.href = match.url;
      const meta = document.createElement("span");
      meta.className = "meta";
      meta.textContent = ` ${match.audience}, score ${match.score.toFixed(3)}`;
      item.append(link, meta);
      list.appendChild(item);
    }
    results.appendChild(list);
  });
}
