import type { ApiErrorBody, CurvePayload, ReportPayload, RunSummary } from "./types.js";

/** Non-2xx response, carrying the server's error code and any extra fields. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The data surface the views depend on; `ApiClient` is the live one. */
export interface DataSource {
  runs(): Promise<RunSummary[]>;
  curve(run: string, attribute: string, environment: string): Promise<CurvePayload>;
  report(run: string, attribute: string, environment: string): Promise<ReportPayload>;
}

export class ApiClient implements DataSource {
  constructor(private readonly base: string = "") {}

  runs(): Promise<RunSummary[]> {
    return this.get("/api/v1/runs");
  }

  curve(run: string, attribute: string, environment: string): Promise<CurvePayload> {
    return this.get("/api/v1/curve", { run, attribute, env: environment });
  }

  report(run: string, attribute: string, environment: string): Promise<ReportPayload> {
    return this.get("/api/v1/report", { run, attribute, env: environment });
  }

  private async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    const query = params ? `?${new URLSearchParams(params)}` : "";
    const res = await fetch(`${this.base}${path}${query}`);
    if (!res.ok) throw await toApiError(res);
    return res.json() as Promise<T>;
  }
}

async function toApiError(res: Response): Promise<ApiError> {
  let body: ApiErrorBody | null = null;
  try {
    body = (await res.json()) as ApiErrorBody;
  } catch {
    // non-JSON body (proxy page, empty response); fall through
  }
  if (body && typeof body === "object" && body.error && typeof body.error.code === "string") {
    const { code, message, ...details } = body.error;
    return new ApiError(res.status, code, message ?? res.statusText, details);
  }
  return new ApiError(res.status, "http_error", `HTTP ${res.status} ${res.statusText}`.trim());
}
