// Thin fetch client over the zoneopt service. API errors surface with
// their server-provided {code, message} verbatim.

import type {
  ClusteringResponse,
  EmitResponse,
  ResultDocument,
  RunRequestBody,
  RunStatus,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError("unreachable", `server unreachable: ${String(err)}`, 0);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = typeof body.code === "string" ? body.code : "error";
      const message = typeof body.message === "string" ? body.message : response.statusText;
      throw new ApiError(code, message, response.status);
    }
    return body as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  topology(): Promise<{ utilities: unknown[] }> {
    return this.request("/topology");
  }

  createRun(config: RunRequestBody): Promise<{ id: string }> {
    return this.request("/runs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
  }

  listRuns(): Promise<RunStatus[]> {
    return this.request("/runs");
  }

  runStatus(id: string): Promise<RunStatus> {
    return this.request(`/runs/${id}`);
  }

  front(id: string): Promise<ResultDocument[]> {
    return this.request(`/runs/${id}/front`);
  }

  clustering(id: string, k: number, utility?: string): Promise<ClusteringResponse> {
    const query = utility ? `?utility=${encodeURIComponent(utility)}` : "";
    return this.request(`/runs/${id}/solutions/${k}/clustering${query}`);
  }

  emit(id: string, k: number, utility?: string): Promise<EmitResponse> {
    const query = utility ? `?utility=${encodeURIComponent(utility)}` : "";
    return this.request(`/runs/${id}/solutions/${k}/emit${query}`, { method: "POST" });
  }

  latestReport(): Promise<Record<string, unknown>> {
    return this.request("/reports/latest");
  }
}

const TERMINAL = new Set(["completed", "failed"]);

/** Poll a run until it finishes; the server is the source of truth on every tick. */
export async function pollRun(
  client: ApiClient,
  id: string,
  onUpdate: (status: RunStatus) => void,
  intervalMs = 2000,
  sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
): Promise<RunStatus> {
  for (;;) {
    const status = await client.runStatus(id);
    onUpdate(status);
    if (TERMINAL.has(status.status)) {
      return status;
    }
    await sleep(intervalMs);
  }
}
