// Progress screen: pipeline stages in order plus per-question inferencing
// ticks, with a retry-upload affordance when the job fails.

import { AppState, Store } from '../state.js';

const PIPELINE_STAGES = ['uploaded', 'parsing', 'chunking', 'embedding',
  'inferencing', 'review'] as const;

export function renderProgress(container: HTMLElement, state: AppState, store: Store): void {
  const reached = (stage: string): boolean => {
    if (state.stage === null) return false;
    const at = PIPELINE_STAGES.indexOf(state.stage as typeof PIPELINE_STAGES[number]);
    return at >= PIPELINE_STAGES.indexOf(stage as typeof PIPELINE_STAGES[number]);
  };

  const stageRows = PIPELINE_STAGES.map((stage) => {
    const cls = state.stage === stage ? 'stage current' : reached(stage) ? 'stage done' : 'stage';
    const ticks = stage === 'inferencing' && state.inferencedQids.length
      ? ` <span class="ticks" data-testid="question-ticks">${state.inferencedQids.join(' ')}</span>`
      : '';
    return `<li class="${cls}" data-stage="${stage}">${stage}${ticks}</li>`;
  }).join('');

  const failed = state.stage === 'failed';
  container.innerHTML = `
    <section class="progress-screen" data-testid="progress-screen">
      <h2>Analyzing your paper…</h2>
      <ol class="stages">${stageRows}</ol>
      ${failed ? `
        <div class="failure" data-testid="failure-box">
          <p>Processing failed: <span data-testid="failure-reason">${state.failureReason ?? ''}</span></p>
          <button data-testid="retry-upload">Upload another file</button>
        </div>` : ''}
    </section>`;

  container.querySelector('[data-testid=retry-upload]')
    ?.addEventListener('click', () => store.reset());
}
