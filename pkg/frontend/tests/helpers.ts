/** Route-based fetch stub for exercising the client without a server. */

import type { FetchLike } from "../src/api.js";

export interface Call {
  url: string;
  method: string;
  body: unknown;
}

export type Route = (url: string, init?: RequestInit) => { status?: number; body: unknown } | null;

export function fakeFetch(routes: Route[]): { fetch: FetchLike; calls: Call[] } {
  const calls: Call[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body as string) : null,
    });
    for (const route of routes) {
      const hit = route(url, init);
      if (hit) {
        const status = hit.status ?? 200;
        return new Response(JSON.stringify(hit.body), {
          status,
          headers: { "Content-Type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ detail: `no route for ${url}` }), { status: 404 });
  };
  return { fetch: fetchImpl, calls };
}
