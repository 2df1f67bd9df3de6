const MIN_PX = 13;
const MAX_PX = 34;

/** Font size for a term: sqrt-scaled between the cloud's min and max counts
 * so a runaway top term does not flatten everything else. */
export function fontSizeFor(count: number, minCount: number, maxCount: number): number {
  if (maxCount <= minCount) return Math.round((MIN_PX + MAX_PX) / 2);
  const t = (Math.sqrt(count) - Math.sqrt(minCount)) / (Math.sqrt(maxCount) - Math.sqrt(minCount));
  return Math.round(MIN_PX + t * (MAX_PX - MIN_PX));
}

/** Render a cloud as inline spans, preserving the server's order (count
 * descending, ties alphabetical). Returns the container for chaining. */
export function renderWordCloud(
  container: HTMLElement,
  entries: [string, number][],
): HTMLElement {
  container.classList.add("wordcloud");
  if (!entries.length) return container;
  const counts = entries.map(([, c]) => c);
  const minCount = Math.min(...counts);
  const maxCount = Math.max(...counts);
  for (const [term, count] of entries) {
    const span = document.createElement("span");
    span.className = "cloud-term";
    span.textContent = term;
    span.title = `${count}`;
    span.dataset.count = String(count);
    span.style.fontSize = `${fontSizeFor(count, minCount, maxCount)}px`;
    container.appendChild(span);
    container.appendChild(document.createTextNode(" "));
  }
  return container;
}
