// Review screen: primary top navigation across sections A-E with per-section
// progress, auto-filled response fields editable by clicking the text itself
// (no edit button), a copy button per response, and bottom prev/next
// navigation so checking flows section to section without scrolling back up.

import { ResponseView } from '../api.js';
import { AppState, Store, buildSections, sectionOf } from '../state.js';

const SECTION_E_PLACEHOLDER =
  'Answer required: disclose any use of AI assistants (authors only).';

function responseBlock(r: ResponseView, questionText: string): string {
  const flag = r.needs_review ? ' needs-review' : '';
  const isHumanOnly = sectionOf(r.qid) === 'E';
  const empty = r.display_text.trim().length === 0;
  const body = empty
    ? `<span class="placeholder">${isHumanOnly ? SECTION_E_PLACEHOLDER : 'Click to answer.'}</span>`
    : escapeHtml(r.display_text);
  return `
    <article class="response${flag}" data-qid="${r.qid}">
      <h3 class="question"><span class="qid">${r.qid}</span> ${escapeHtml(questionText)}</h3>
      <div class="answer" data-testid="answer-${r.qid}" tabindex="0"
           title="Click to edit">${body}</div>
      <div class="response-tools">
        <button class="copy" data-testid="copy-${r.qid}" title="Copy the entire response">Copy</button>
        ${r.needs_review ? '<span class="review-flag" data-testid="flag">needs review</span>' : ''}
        ${r.origin !== 'llm' ? `<span class="origin">${r.origin.replace('_', ' ')}</span>` : ''}
      </div>
    </article>`;
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export interface ReviewDeps {
  /** question text per qid, from the bank as echoed by prompts; falls back to qid */
  questionText?: (qid: string) => string;
  clipboard?: { writeText(text: string): Promise<void> };
}

export function renderReview(container: HTMLElement, state: AppState, store: Store,
                             deps: ReviewDeps = {}): void {
  const payload = state.payload;
  if (!payload) {
    container.innerHTML = '<p>Loading responses…</p>';
    return;
  }
  const sections = buildSections(payload);
  const active = sections.find((s) => s.key === state.activeSection) ?? sections[0];

  const nav = sections.map((s) => `
    <button class="section-tab${s.key === active.key ? ' active' : ''}"
            data-testid="tab-${s.key}" data-section="${s.key}">
      ${s.key} <span class="count" data-testid="count-${s.key}">${s.answered_count}/${s.total_count}</span>
    </button>`).join('');

  const blocks = active.questions
    .map((qid) => responseBlock(payload.responses[qid],
      deps.questionText?.(qid) ?? qid))
    .join('');

  container.innerHTML = `
    <section class="review-screen" data-testid="review-screen">
      <nav class="primary-nav" data-testid="primary-nav">${nav}</nav>
      <div class="responses">${blocks}</div>
      <nav class="secondary-nav" data-testid="secondary-nav">
        <button data-testid="prev-section">&larr; previous section</button>
        <button data-testid="next-section">next section &rarr;</button>
      </nav>
    </section>`;

  for (const tab of container.querySelectorAll<HTMLElement>('.section-tab')) {
    tab.addEventListener('click', () =>
      store.setActiveSection(tab.dataset.section as 'A'));
  }
  container.querySelector('[data-testid=prev-section]')
    ?.addEventListener('click', () => store.nextSection(-1));
  container.querySelector('[data-testid=next-section]')
    ?.addEventListener('click', () => store.nextSection(1));

  const clipboard = deps.clipboard ?? navigator.clipboard;
  for (const article of container.querySelectorAll<HTMLElement>('.response')) {
    const qid = article.dataset.qid!;
    const answer = article.querySelector<HTMLElement>('.answer')!;

    // click the generated text to edit in place; blur saves via PATCH
    answer.addEventListener('click', () => {
      if (article.querySelector('textarea')) return;
      const current = payload.responses[qid].display_text;
      const editor = document.createElement('textarea');
      editor.value = current;
      editor.setAttribute('data-testid', `editor-${qid}`);
      answer.replaceWith(editor);
      editor.focus();
      editor.addEventListener('blur', () => {
        const text = editor.value.trim();
        if (!text || text === current) {
          store.setActiveSection(state.activeSection); // re-render, discard editor
          return;
        }
        void store.edit(qid, text).catch(() => {
          store.setActiveSection(state.activeSection); // rollback already applied
        });
      });
    });

    article.querySelector<HTMLElement>('.copy')!.addEventListener('click', () => {
      void clipboard.writeText(payload.responses[qid].display_text);
    });
  }
}
