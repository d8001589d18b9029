// Replay fetch: serves recorded API exchanges so UI tests run against the
// exact wire payloads a live workbench produced.

export interface RecordedExchange {
  method: string;
  path: string;
  body: unknown;
  response: unknown;
}

export function replayFetch(exchanges: RecordedExchange[]) {
  const pending = exchanges.map((e) => ({ ...e, used: false }));

  function matches(recorded: RecordedExchange, method: string, path: string): boolean {
    if (recorded.method !== method) return false;
    if (recorded.path === path) return true;
    // the model endpoint may be requested with or without an explicit rev
    const strip = (p: string) => p.split("?")[0];
    return strip(recorded.path) === strip(path) && strip(path) === "/api/model";
  }

  const calls: { method: string; path: string }[] = [];

  async function impl(url: string, init?: RequestInit): Promise<Response> {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    calls.push({ method, path });
    const hit = pending.find((e) => !e.used && matches(e, method, path));
    if (!hit) {
      return new Response(JSON.stringify({ code: "NO_RECORDING", message: `${method} ${path}` }), {
        status: 500,
        headers: { "content-type": "application/json" },
      });
    }
    hit.used = true;
    return new Response(JSON.stringify(hit.response), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  }

  return { impl, calls };
}
