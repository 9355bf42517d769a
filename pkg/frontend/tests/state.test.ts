// Store/state unit tests: section progress math, export gating, optimistic
// edits with rollback.

import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { Store, buildSections, exportReady, isAnswered } from '../src/state.js';
import { MockServer } from './mock-server.js';

function makeClient(server: MockServer): ApiClient {
  return new ApiClient('', server.fetch, server.eventSourceFactory);
}

describe('section progress', () => {
  let server: MockServer;

  beforeEach(() => {
    server = new MockServer();
    server.runToReview();
  });

  it('groups qids into A-E with counts', () => {
    const sections = buildSections(server.payload());
    expect(sections.map((s) => s.key)).toEqual(['A', 'B', 'C', 'D', 'E']);
    expect(sections.map((s) => s.total_count)).toEqual([3, 6, 4, 5, 1]);
    const e = sections.find((s) => s.key === 'E')!;
    expect(e.answered_count).toBe(0); // never pre-filled
    const a = sections.find((s) => s.key === 'A')!;
    expect(a.answered_count).toBe(3);
  });

  it('answered means non-empty display text', () => {
    const payload = server.payload();
    expect(isAnswered(payload.responses['A1'])).toBe(true);
    expect(isAnswered(payload.responses['E1'])).toBe(false);
  });

  it('export readiness requires section E', () => {
    expect(exportReady(server.payload())).toBe(false);
    server.responses['E1'].display_text = 'No assistants.';
    expect(exportReady(server.payload())).toBe(true);
  });
});

describe('store edits', () => {
  it('applies optimistic update then server payload', async () => {
    const server = new MockServer();
    server.runToReview();
    const store = new Store(makeClient(server));
    await store.attach(server.jobId);
    await store.edit('A1', 'Edited by hand');
    expect(store.current.payload!.responses['A1'].display_text).toBe('Edited by hand');
    expect(store.current.payload!.responses['A1'].origin).toBe('human_edited');
    expect(server.patchCalls).toEqual([{ qid: 'A1', text: 'Edited by hand' }]);
  });

  it('rolls back when the PATCH fails', async () => {
    const server = new MockServer();
    server.runToReview();
    const failingFetch: typeof fetch = async (input, init) => {
      if (init?.method === 'PATCH') {
        return Response.json({ detail: 'boom' }, { status: 500 });
      }
      return server.fetch(input, init);
    };
    const store = new Store(new ApiClient('', failingFetch, server.eventSourceFactory));
    await store.attach(server.jobId);
    const before = store.current.payload!.responses['A1'].display_text;
    await expect(store.edit('A1', 'will not stick')).rejects.toThrow();
    expect(store.current.payload!.responses['A1'].display_text).toBe(before);
  });

  it('tracks inferencing ticks from the stream', async () => {
    const server = new MockServer();
    const store = new Store(makeClient(server));
    await store.attach(server.jobId);
    server.pushEvent('uploaded', 'paper.tex');
    server.pushEvent('parsing');
    server.pushEvent('inferencing', 'A1');
    server.pushEvent('inferencing', 'A2');
    await new Promise((r) => setTimeout(r, 0));
    expect(store.current.inferencedQids).toEqual(['A1', 'A2']);
    expect(store.current.stage).toBe('inferencing');
  });
});
