/** Typed client for the review service; surfaces optimistic-concurrency
 * conflicts as a dedicated error so the UI can offer a reload instead of
 * silently dropping a decision. */

import type { QueuePage, ReviewBody, ReviewResult, ReviewStatus, SampleDetail, TraceRecord } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
    this.name = "ConflictError";
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    return body.detail ?? response.statusText;
  } catch {
    return response.statusText;
  }
}

async function getJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new ApiError(response.status, await detailOf(response));
  }
  return (await response.json()) as T;
}

export class ReviewApi {
  constructor(
    private readonly base: string = "",
    private readonly reviewerToken: string | null = null,
  ) {}

  queueUrl(status: ReviewStatus | "" = "", page = 0, pageSize = 50): string {
    const params = new URLSearchParams({ status, page: String(page), page_size: String(pageSize) });
    return `${this.base}/api/queue?${params.toString()}`;
  }

  async getQueue(status: ReviewStatus | "" = "", page = 0, pageSize = 50): Promise<QueuePage> {
    return getJson<QueuePage>(this.queueUrl(status, page, pageSize));
  }

  async getSample(sampleId: string): Promise<SampleDetail> {
    return getJson<SampleDetail>(`${this.base}/api/samples/${encodeURIComponent(sampleId)}`);
  }

  async submitReview(sampleId: string, body: ReviewBody): Promise<ReviewResult> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.reviewerToken) {
      headers["X-Reviewer-Token"] = this.reviewerToken;
    }
    const response = await fetch(`${this.base}/api/samples/${encodeURIComponent(sampleId)}/review`, {
      method: "POST",
      headers,
      body: JSON.stringify(body),
    });
    if (response.status === 409) {
      throw new ConflictError(await detailOf(response));
    }
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as ReviewResult;
  }

  async getRuns(): Promise<string[]> {
    const body = await getJson<{ runs: string[] }>(`${this.base}/api/runs`);
    return body.runs;
  }

  async getTrace(runId: string, sampleId: string): Promise<TraceRecord> {
    return getJson<TraceRecord>(
      `${this.base}/api/runs/${encodeURIComponent(runId)}/traces/${encodeURIComponent(sampleId)}`,
    );
  }

  exportUrl(): string {
    return `${this.base}/api/export/benchmark`;
  }
}
