// App state: one store per open job, fed by SSE events and GET responses.
// A page refresh rebuilds the identical state from those two sources alone.

import {
  ApiClient,
  ProgressEvent,
  ResponsesPayload,
  ResponseView,
} from './api.js';

export type Screen = 'upload' | 'progress' | 'review';

export interface UiSection {
  key: 'A' | 'B' | 'C' | 'D' | 'E';
  questions: string[];
  answered_count: number;
  total_count: number;
}

export interface AppState {
  screen: Screen;
  jobId: string | null;
  stage: string | null;
  failureReason: string | null;
  inferencedQids: string[];
  payload: ResponsesPayload | null;
  activeSection: UiSection['key'];
}

type Listener = (state: AppState) => void;

export const SECTION_KEYS: UiSection['key'][] = ['A', 'B', 'C', 'D', 'E'];

export function sectionOf(qid: string): UiSection['key'] {
  return qid[0] as UiSection['key'];
}

/** E answers count only once a human filled them; needs_review still counts
 * as answered (it is flagged visually instead). */
export function isAnswered(r: ResponseView): boolean {
  return r.display_text.trim().length > 0;
}

export function buildSections(payload: ResponsesPayload): UiSection[] {
  return SECTION_KEYS.map((key) => {
    const qids = Object.keys(payload.responses)
      .filter((qid) => sectionOf(qid) === key)
      .sort();
    const answered = qids.filter((qid) => isAnswered(payload.responses[qid])).length;
    return { key, questions: qids, answered_count: answered, total_count: qids.length };
  }).filter((s) => s.total_count > 0);
}

export function exportReady(payload: ResponsesPayload | null): boolean {
  if (!payload) return false;
  return Object.values(payload.responses)
    .filter((r) => sectionOf(r.qid) === 'E')
    .every(isAnswered);
}

export class Store {
  private state: AppState = {
    screen: 'upload',
    jobId: null,
    stage: null,
    failureReason: null,
    inferencedQids: [],
    payload: null,
    activeSection: 'A',
  };

  private listeners: Listener[] = [];
  private stream: { close(): void } | null = null;

  constructor(private api: ApiClient) {}

  get current(): AppState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.state);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private set(patch: Partial<AppState>): void {
    this.state = { ...this.state, ...patch };
    for (const l of this.listeners) l(this.state);
  }

  async upload(file: File): Promise<void> {
    const jobId = await this.api.uploadTex(file);
    this.set({ jobId, screen: 'progress', stage: 'uploaded', inferencedQids: [] });
    this.watch(jobId);
  }

  /** Attach to an existing job (deep link / refresh): SSE replay brings the
   * stage history back; once review is reached the responses load. */
  async attach(jobId: string): Promise<void> {
    this.set({ jobId, screen: 'progress', stage: null, inferencedQids: [] });
    this.watch(jobId);
    try {
      await this.loadResponses();
    } catch {
      /* not ready yet: the SSE review event will trigger the load */
    }
  }

  private watch(jobId: string): void {
    this.stream?.close();
    this.stream = this.api.streamEvents(jobId, (event) => {
      void this.onEvent(event);
    });
  }

  private async onEvent(event: ProgressEvent): Promise<void> {
    if (event.stage === 'inferencing' && event.detail) {
      this.set({
        stage: 'inferencing',
        inferencedQids: [...this.state.inferencedQids, event.detail],
      });
      return;
    }
    if (event.stage === 'failed') {
      this.set({ stage: 'failed', failureReason: event.detail ?? 'unknown failure' });
      this.stream?.close();
      return;
    }
    this.set({ stage: event.stage });
    if (event.stage === 'review' || event.stage === 'done') {
      await this.loadResponses();
    }
  }

  async loadResponses(): Promise<void> {
    if (!this.state.jobId) return;
    const payload = await this.api.getResponses(this.state.jobId);
    this.set({ payload, screen: 'review' });
  }

  async edit(qid: string, text: string): Promise<void> {
    if (!this.state.jobId || !this.state.payload) return;
    const before = this.state.payload;
    // optimistic update, rolled back when the PATCH fails
    const optimistic: ResponsesPayload = {
      ...before,
      responses: {
        ...before.responses,
        [qid]: { ...before.responses[qid], display_text: text, needs_review: false },
      },
    };
    this.set({ payload: optimistic });
    try {
      const payload = await this.api.patchResponse(this.state.jobId, qid, text);
      this.set({ payload });
    } catch (err) {
      this.set({ payload: before });
      throw err;
    }
  }

  setActiveSection(key: UiSection['key']): void {
    this.set({ activeSection: key });
  }

  nextSection(direction: 1 | -1): void {
    if (!this.state.payload) return;
    const keys = buildSections(this.state.payload).map((s) => s.key);
    const at = keys.indexOf(this.state.activeSection);
    const to = Math.min(Math.max(at + direction, 0), keys.length - 1);
    this.set({ activeSection: keys[to] });
  }

  async export(): Promise<Blob> {
    if (!this.state.jobId) throw new Error('no job');
    return this.api.exportMarkdown(this.state.jobId);
  }

  reset(): void {
    this.stream?.close();
    this.set({
      screen: 'upload', jobId: null, stage: null, failureReason: null,
      inferencedQids: [], payload: null, activeSection: 'A',
    });
  }
}
