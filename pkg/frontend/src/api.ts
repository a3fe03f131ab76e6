/** Typed client for the session service wire protocol. */

export interface SessionInfo {
  session_id: string;
  answered: number;
  total: number;
}

export interface ItemPayload {
  prompt: string;
  answered: number;
  total: number;
  finished: boolean;
}

export interface AnswerPayload {
  accepted: boolean;
  finished: boolean;
  answered: number;
  total: number;
  grade?: number;
}

export interface ResultPayload {
  grade: number;
  final_column: number;
  transcript: unknown[];
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
    this.name = 'ApiError';
  }

  /** Network failures and 5xx are worth retrying; 4xx are not. */
  get retryable(): boolean {
    return this.status === null || this.status >= 500;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(`service unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

export class ServiceClient {
  constructor(private readonly baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  createSession(testId: string, studentKey: string): Promise<SessionInfo> {
    return request<SessionInfo>(
      `${this.baseUrl}/tests/${encodeURIComponent(testId)}/sessions`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ student_key: studentKey }),
      },
    );
  }

  currentItem(sessionId: string): Promise<ItemPayload> {
    return request<ItemPayload>(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/item`,
    );
  }

  submitAnswer(sessionId: string, answer: number): Promise<AnswerPayload> {
    return request<AnswerPayload>(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/answers`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ answer }),
      },
    );
  }

  result(sessionId: string): Promise<ResultPayload> {
    return request<ResultPayload>(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/result`,
    );
  }
}
