/** Minimal fetch stub: routes (method + path) to canned payloads and logs calls. */

export interface Call {
  method: string;
  url: string;
  body: unknown;
}

export type Handler = (call: Call) =>
  { status: number; payload: unknown } | { status: number; text: string };

export class FetchStub {
  calls: Call[] = [];
  private routes = new Map<string, Handler>();

  on(method: string, url: string, handler: Handler): void {
    this.routes.set(`${method} ${url}`, handler);
  }

  json(method: string, url: string, payload: unknown, status = 200): void {
    this.on(method, url, () => ({ status, payload }));
  }

  install(): void {
    globalThis.fetch = (async (input: unknown, init?: RequestInit) => {
      const url = String(input);
      const method = init?.method ?? 'GET';
      const body = init?.body ? JSON.parse(String(init.body)) : undefined;
      const call: Call = { method, url, body };
      this.calls.push(call);
      const handler = this.routes.get(`${method} ${url}`);
      if (!handler) throw new Error(`unstubbed fetch: ${method} ${url}`);
      const res = handler(call);
      const ok = res.status >= 200 && res.status < 300;
      return {
        ok,
        status: res.status,
        statusText: ok ? 'OK' : 'Error',
        json: async () => {
          if ('payload' in res) return res.payload;
          throw new Error('response body is not JSON');
        },
      } as Response;
    }) as typeof fetch;
  }

  count(method: string, url: string): number {
    return this.calls.filter((c) => c.method === method && c.url === url).length;
  }
}

export const flush = async (): Promise<void> => {
  for (let i = 0; i < 6; i += 1) {
    await new Promise((resolve) => { setTimeout(resolve, 0); });
  }
};
