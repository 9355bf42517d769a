// Typed client for the /api/v1 endpoints. The UI is a pure client of this
// API: everything it shows is reconstructible from GET responses + SSE replay.

export interface ResponseView {
  qid: string;
  display_text: string;
  verdict: string | null;
  'section name': string | null;
  justification: string;
  origin: 'llm' | 'human' | 'human_edited';
  needs_review: boolean;
  prompt: string | null;
  llm: string | null;
  elapsed_ms: number | null;
  edited_at: number | null;
  error: string | null;
}

export interface ResponsesPayload {
  job_id: string;
  state: string;
  filename: string;
  paper_title: string | null;
  section_names: string[];
  pipeline_elapsed_s: number;
  provider_elapsed_s: number;
  responses: Record<string, ResponseView>;
  failures: Record<string, string>;
}

export interface ProgressEvent {
  seq: number;
  job_id: string;
  stage: string;
  timestamp: number;
  detail: string | null;
}

export interface EventStreamHandle {
  close(): void;
}

/** Minimal EventSource-shaped contract so tests can inject a fake. */
export interface EventSourceLike {
  onmessage: ((ev: { data: string; lastEventId: string }) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  addEventListener(type: string, listener: (ev: { data: string; lastEventId: string }) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

const STAGES = ['uploaded', 'parsing', 'chunking', 'embedding', 'inferencing',
  'review', 'done', 'failed'];

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: typeof fetch = globalThis.fetch?.bind(globalThis),
    private eventSourceFactory?: EventSourceFactory,
  ) {}

  private async check(resp: Response): Promise<Response> {
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        detail = typeof body.detail === 'string' ? body.detail : JSON.stringify(body.detail);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, detail);
    }
    return resp;
  }

  async uploadTex(file: File): Promise<string> {
    const form = new FormData();
    form.append('file', file, file.name);
    const resp = await this.check(
      await this.fetchFn(`${this.baseUrl}/api/v1/jobs`, { method: 'POST', body: form }),
    );
    const body = await resp.json();
    return body.job_id as string;
  }

  async getResponses(jobId: string): Promise<ResponsesPayload> {
    const resp = await this.check(
      await this.fetchFn(`${this.baseUrl}/api/v1/jobs/${jobId}/responses`),
    );
    return (await resp.json()) as ResponsesPayload;
  }

  async patchResponse(jobId: string, qid: string, text: string): Promise<ResponsesPayload> {
    const resp = await this.check(
      await this.fetchFn(`${this.baseUrl}/api/v1/jobs/${jobId}/responses/${qid}`, {
        method: 'PATCH',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ text }),
      }),
    );
    return (await resp.json()) as ResponsesPayload;
  }

  async exportMarkdown(jobId: string): Promise<Blob> {
    const resp = await this.check(
      await this.fetchFn(`${this.baseUrl}/api/v1/jobs/${jobId}/export`),
    );
    return await resp.blob();
  }

  /**
   * Subscribe to the job's SSE stream. The server replays history and then
   * pushes live events; reconnection goes through Last-Event-ID (native
   * EventSource handles that; the injected fake mimics it).
   */
  streamEvents(
    jobId: string,
    onEvent: (e: ProgressEvent) => void,
    onError?: (err: unknown) => void,
  ): EventStreamHandle {
    const url = `${this.baseUrl}/api/v1/jobs/${jobId}/events`;
    const factory = this.eventSourceFactory
      ?? ((u: string) => new EventSource(u) as unknown as EventSourceLike);
    const source = factory(url);
    const handler = (ev: { data: string }) => {
      try {
        onEvent(JSON.parse(ev.data) as ProgressEvent);
      } catch (err) {
        onError?.(err);
      }
    };
    // named events: the server sets `event: <stage>` per frame
    for (const stage of STAGES) source.addEventListener(stage, handler);
    source.onmessage = handler;
    source.onerror = (err) => onError?.(err);
    return { close: () => source.close() };
  }
}
