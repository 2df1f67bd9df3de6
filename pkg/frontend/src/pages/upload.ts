import { ApiClient } from "../api.js";
import { pollJob, POLL_INTERVAL_MS } from "../poll.js";
import type { Job } from "../types.js";

export interface UploadCallbacks {
  onComplete: (job: Job) => void;
}

const URL_RE = /^https?:\/\/.+/;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Upload page: three tabs (text / URL / file). Submitting starts a job,
 * polls it once per second, and hands the finished job to onComplete;
 * failures render an inline banner with the server's message and leave the
 * form usable for retry. */
export function renderUploadPage(
  container: HTMLElement,
  api: ApiClient,
  callbacks: UploadCallbacks,
  pollIntervalMs: number = POLL_INTERVAL_MS,
): void {
  container.replaceChildren();
  const tabs = el("div", "tabs");
  const body = el("div", "tab-body");
  const status = el("div", "status");
  status.dataset.role = "status";
  const banner = el("div", "error-banner");
  banner.dataset.role = "error";
  banner.hidden = true;
  container.append(tabs, body, status, banner);

  const showError = (message: string) => {
    banner.hidden = false;
    banner.textContent = `${message} — fix the input and submit again.`;
  };

  const track = (jobPromise: Promise<{ job_id: string }>) => {
    banner.hidden = true;
    status.textContent = "submitting...";
    jobPromise
      .then((r) => {
        status.textContent = `job ${r.job_id}: waiting...`;
        return pollJob(api, r.job_id, pollIntervalMs, (job) => {
          status.textContent = `job ${job.job_id}: ${job.state} (${Math.round(job.progress * 100)}%)`;
        });
      })
      .then((job) => {
        status.textContent = `job ${job.job_id}: done`;
        callbacks.onComplete(job);
      })
      .catch((err) => {
        status.textContent = "";
        showError(err instanceof Error ? err.message : String(err));
      });
  };

  const panes: Record<string, HTMLElement> = {};

  // --- text tab
  {
    const pane = el("div", "pane");
    const textarea = el("textarea");
    textarea.placeholder = "Paste text to analyze...";
    textarea.dataset.role = "text-input";
    const dateInput = el("input");
    dateInput.type = "date";
    dateInput.dataset.role = "date-input";
    const submit = el("button", "", "Analyze text");
    submit.dataset.role = "submit-text";
    submit.addEventListener("click", () => {
      const text = textarea.value.trim();
      if (!text) {
        showError("Enter some text first");
        return;
      }
      track(api.uploadText(text, dateInput.value || undefined));
    });
    pane.append(textarea, dateInput, submit);
    panes["text"] = pane;
  }

  // --- URL tab
  {
    const pane = el("div", "pane");
    const input = el("input");
    input.type = "url";
    input.placeholder = "https://example.org/article";
    input.dataset.role = "url-input";
    const validation = el("div", "field-error");
    validation.dataset.role = "url-validation";
    validation.hidden = true;
    const submit = el("button", "", "Fetch and analyze");
    submit.dataset.role = "submit-url";
    submit.addEventListener("click", () => {
      const url = input.value.trim();
      if (!URL_RE.test(url)) {
        validation.hidden = false;
        validation.textContent = "Enter a valid http(s) URL";
        return; // client-side validation, no request sent
      }
      validation.hidden = true;
      track(api.uploadUrl(url));
    });
    pane.append(input, validation, submit);
    panes["url"] = pane;
  }

  // --- file tab
  {
    const pane = el("div", "pane");
    const input = el("input");
    input.type = "file";
    input.dataset.role = "file-input";
    const format = el("select");
    format.dataset.role = "file-format";
    for (const value of ["jsonl", "csv", "plain"]) {
      const opt = el("option", "", value);
      opt.value = value;
      format.appendChild(opt);
    }
    const submit = el("button", "", "Upload file");
    submit.dataset.role = "submit-file";
    submit.addEventListener("click", () => {
      const file = input.files?.[0];
      if (!file) {
        showError("Choose a file first");
        return;
      }
      track(api.uploadFile(file, format.value));
    });
    pane.append(input, format, submit);
    panes["file"] = pane;
  }

  const order: [string, string][] = [
    ["text", "Upload Text"],
    ["url", "Upload URL"],
    ["file", "Upload File"],
  ];
  const activate = (key: string) => {
    body.replaceChildren(panes[key]);
    for (const button of tabs.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.tab === key);
    }
  };
  for (const [key, label] of order) {
    const button = el("button", "tab", label);
    button.dataset.tab = key;
    button.addEventListener("click", () => activate(key));
    tabs.appendChild(button);
  }
  activate("text");
}
