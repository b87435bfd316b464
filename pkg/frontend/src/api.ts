// Typed client for the session service. Plain fetch, no client-side CG logic:
// the panel only ever displays what the server returns.

export type CgStatus = "selected" | "retained";

export interface CgEntryDto {
  origin_turn: number;
  status: CgStatus;
  surface: string;
}

export interface PassageRef {
  passage_id: string;
  rank: number;
  s_ret_norm: number;
}

export interface AskResponse {
  answer: string;
  cg: { entries: CgEntryDto[] };
  mu: number;
  passages: PassageRef[];
}

export interface DocCard {
  first_sentence: string;
  title: string;
}

export interface TranscriptTurn {
  answer: string;
  cg_full: CgEntryDto[];
  cg_selected: CgEntryDto[];
  mu: number;
  passages: PassageRef[];
  question: string;
}

export interface SessionTranscript {
  created_at: number;
  doc: DocCard | null;
  last_active: number;
  session_id: string;
  turns: TranscriptTurn[];
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function requestJson<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
  } catch (cause) {
    throw new ApiError(0, `service unreachable: ${String(cause)}`);
  }
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // non-JSON bodies fall through to the status check below
  }
  if (!response.ok) {
    const message =
      body && typeof body === "object" && "error" in body
        ? String((body as { error: unknown }).error)
        : `HTTP ${response.status}`;
    throw new ApiError(response.status, message);
  }
  return body as T;
}

export class SessionApi {
  constructor(private readonly baseUrl: string = "") {}

  createSession(doc?: DocCard | null): Promise<{ session_id: string }> {
    const body = doc
      ? { doc_first_sentence: doc.first_sentence, doc_title: doc.title }
      : {};
    return requestJson(`${this.baseUrl}/v1/sessions`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  ask(sessionId: string, question: string): Promise<AskResponse> {
    return requestJson(`${this.baseUrl}/v1/sessions/${sessionId}/ask`, {
      method: "POST",
      body: JSON.stringify({ question }),
    });
  }

  getSession(sessionId: string): Promise<SessionTranscript> {
    return requestJson(`${this.baseUrl}/v1/sessions/${sessionId}`);
  }

  deleteSession(sessionId: string): Promise<{ deleted: boolean }> {
    return requestJson(`${this.baseUrl}/v1/sessions/${sessionId}`, { method: "DELETE" });
  }
}
