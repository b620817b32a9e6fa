import type {
  Draft,
  EditCommand,
  Judgement,
  QuestionDoc,
  Representation,
  SessionView,
} from './types.js';

/** Error carrying the server's machine-readable code (EDIT_CONFLICT, ...). */
export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let data: any = {};
    try {
      data = await response.json();
    } catch {
      // non-JSON body; fall through to the status check
    }
    if (!response.ok) {
      const error = data?.error ?? {};
      throw new ApiError(
        response.status,
        error.code ?? `HTTP_${response.status}`,
        error.message ?? response.statusText,
      );
    }
    return data as T;
  }

  createSession(simId: string, title: string): Promise<SessionView> {
    return this.request('POST', '/sessions', { sim_id: simId, title });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request('GET', `/sessions/${sessionId}`);
  }

  answer(sessionId: string, answer: string): Promise<SessionView> {
    return this.request('POST', `/sessions/${sessionId}/answers`, { answer });
  }

  skip(sessionId: string): Promise<SessionView> {
    return this.request('POST', `/sessions/${sessionId}/answers`, { skip: true });
  }

  extract(sessionId: string): Promise<Draft> {
    return this.request('POST', `/sessions/${sessionId}/extract`, {});
  }

  commit(simId: string, edits: EditCommand[]): Promise<Representation> {
    return this.request('PUT', `/sims/${simId}`, { edits });
  }

  getSim(simId: string): Promise<Representation> {
    return this.request('GET', `/sims/${simId}`);
  }

  supportedTypes(simId: string): Promise<{ supported_types: string[] }> {
    return this.request('GET', `/sims/${simId}/types`);
  }

  generate(
    simId: string,
    body: { qtype: string; format: string; level: string; model?: string },
  ): Promise<QuestionDoc> {
    return this.request('POST', `/sims/${simId}/questions`, body);
  }

  getQuestion(questionId: string): Promise<QuestionDoc> {
    return this.request('GET', `/questions/${questionId}`);
  }

  judge(questionId: string): Promise<Judgement> {
    return this.request('POST', `/questions/${questionId}/judge`, {});
  }
}
