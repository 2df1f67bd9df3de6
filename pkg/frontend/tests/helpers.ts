import type { FetchLike } from "../src/api.js";

/** Scripted fetch: exact-match routes to JSON payloads, with call log. */
export function mockFetch(
  routes: Record<string, unknown | (() => unknown)>,
): FetchLike & { calls: { url: string; init?: RequestInit }[] } {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = (async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const key = Object.keys(routes).find((k) => url === k || url.startsWith(k));
    if (key === undefined) {
      return new Response(
        JSON.stringify({ code: "not_found", message: `no route for ${url}` }),
        { status: 404, headers: { "Content-Type": "application/json" } },
      );
    }
    const value = routes[key];
    const payload = typeof value === "function" ? (value as () => unknown)() : value;
    if (payload instanceof Response) return payload;
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "Content-Type": "application/json" },
    });
  }) as FetchLike & { calls: { url: string; init?: RequestInit }[] };
  fn.calls = calls;
  return fn;
}

/** Sequential job states for polling tests. */
export function jobSequence(jobId: string, states: [string, number][]) {
  let i = 0;
  return () => {
    const [state, progress] = states[Math.min(i, states.length - 1)];
    i += 1;
    return {
      job_id: jobId,
      kind: "classify",
      state,
      progress,
      result: state === "done" ? { doc_ids: ["dbb8c3c55ae58"] } : null,
      error: state === "failed" ? "boom from server" : null,
    };
  };
}
