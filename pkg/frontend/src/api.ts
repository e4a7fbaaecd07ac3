// Typed client for the triage service. The dashboard never computes
// ER/CER/MER semantics itself; everything displayed comes from these
// responses.

export interface PmrSummary {
  pmr_id: string;
  customer_id: string | null;
  er: number;
  prev_er: number | null;
  cer: number;
  mer: number | null;
  followed: boolean;
  next_action: string | null;
  last_scored: string | null;
  open: boolean;
}

export interface CommentEntry {
  author: string;
  ts: string;
  text: string;
}

export interface HistoryEntry {
  seq: number;
  timestamp: string;
  actor: string;
  event: string;
  sev_from: number | null;
  sev_to: number | null;
  level: string | null;
  support_person_id: string | null;
}

export interface TimelinePoint {
  stage: number;
  er: number;
}

export interface PmrDetail extends PmrSummary {
  comments: CommentEntry[];
  features: Record<string, number>;
  stage: number;
  timeline: TimelinePoint[];
  history: HistoryEntry[];
}

export type SortKey = "er" | "cer" | "mer";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  try {
    const body = (await resp.json()) as { error?: string; message?: string };
    return new ApiError(resp.status, body.error ?? "error", body.message ?? resp.statusText);
  } catch {
    return new ApiError(resp.status, "error", resp.statusText);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  listPmrs(sort: SortKey = "er", followOnly = false): Promise<PmrSummary[]> {
    const params = new URLSearchParams({ sort, follow_only: String(followOnly) });
    return this.request(`/api/pmrs?${params}`);
  }

  getPmr(pmrId: string): Promise<PmrDetail> {
    return this.request(`/api/pmrs/${encodeURIComponent(pmrId)}`);
  }

  setMer(pmrId: string, mer: number): Promise<PmrSummary> {
    return this.request(`/api/pmrs/${encodeURIComponent(pmrId)}/mer`, {
      method: "PUT",
      body: JSON.stringify({ mer }),
    });
  }

  addComment(pmrId: string, author: string, text: string): Promise<PmrSummary> {
    return this.request(`/api/pmrs/${encodeURIComponent(pmrId)}/comments`, {
      method: "POST",
      body: JSON.stringify({ author, text }),
    });
  }

  setNextAction(pmrId: string, text: string): Promise<PmrSummary> {
    return this.request(`/api/pmrs/${encodeURIComponent(pmrId)}/next-action`, {
      method: "PUT",
      body: JSON.stringify({ text }),
    });
  }

  setFollow(pmrId: string, followed: boolean): Promise<PmrSummary> {
    return this.request(`/api/pmrs/${encodeURIComponent(pmrId)}/follow`, {
      method: "PUT",
      body: JSON.stringify({ followed }),
    });
  }

  health(): Promise<{ status: string; pmrs: number; model_loaded: boolean }> {
    return this.request("/api/health");
  }
}
