/** Thin fetch client for the annotation API. */

import type {
  DirectorPayload,
  EstimateResponse,
  LabelResponse,
  QueueResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  if (!resp.ok) {
    throw new ApiError(resp.status, await resp.text());
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  queue(source: string, coderId: string): Promise<QueueResponse> {
    const params = new URLSearchParams({ source, coder_id: coderId });
    return getJson(`${this.base}/api/queue?${params}`);
  }

  director(directorId: string): Promise<DirectorPayload> {
    return getJson(`${this.base}/api/directors/${encodeURIComponent(directorId)}`);
  }

  estimate(): Promise<EstimateResponse> {
    return getJson(`${this.base}/api/estimate`);
  }

  async codebook(): Promise<string> {
    const resp = await fetch(`${this.base}/api/codebook`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.text();
  }

  async submitLabel(
    directorId: string,
    coderId: string,
    score: number,
    notes?: string,
  ): Promise<LabelResponse> {
    const resp = await fetch(`${this.base}/api/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        director_id: directorId,
        coder_id: coderId,
        score,
        notes: notes ?? null,
      }),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return (await resp.json()) as LabelResponse;
  }
}
