import type {
  ExplainRequest,
  ExplanationPayload,
  InstancesPayload,
  MetaPayload,
} from "./types.js";

// Thin client over the local service; the store depends only on this
// interface, so tests substitute a scripted fake.
export interface ApiClient {
  meta(): Promise<MetaPayload>;
  instances(offset: number, limit: number): Promise<InstancesPayload>;
  explain(request: ExplainRequest, signal?: AbortSignal): Promise<ExplanationPayload>;
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      detail = body.detail ? JSON.stringify(body.detail) : detail;
    } catch {
      // keep the status code
    }
    throw new Error(`request failed: ${detail}`);
  }
  return (await response.json()) as T;
}

export class HttpApiClient implements ApiClient {
  constructor(private readonly base: string = "") {}

  meta(): Promise<MetaPayload> {
    return fetch(`${this.base}/api/meta`).then((r) => asJson<MetaPayload>(r));
  }

  instances(offset: number, limit: number): Promise<InstancesPayload> {
    const query = `offset=${offset}&limit=${limit}`;
    return fetch(`${this.base}/api/instances?${query}`).then((r) =>
      asJson<InstancesPayload>(r),
    );
  }

  explain(request: ExplainRequest, signal?: AbortSignal): Promise<ExplanationPayload> {
    return fetch(`${this.base}/api/explain`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
      signal,
    }).then((r) => asJson<ExplanationPayload>(r));
  }
}
