// Bootstrap: wires the store to the three screens. The job id rides in the
// URL hash so a refresh mid-review reattaches and rebuilds identical state
// from SSE replay + GET responses.

import { ApiClient } from './api.js';
import { Store } from './state.js';
import { ExportDeps, renderExportButton } from './views/exportbtn.js';
import { renderProgress } from './views/progress.js';
import { ReviewDeps, renderReview } from './views/review.js';
import { renderUploadPanel } from './views/upload.js';

export interface BootstrapDeps {
  review?: ReviewDeps;
  export?: ExportDeps;
}

export function bootstrap(root: HTMLElement, api = new ApiClient(),
                          deps: BootstrapDeps = {}): Store {
  const store = new Store(api);
  root.innerHTML = `
    <div class="layout">
      <div id="sidebar"></div>
      <main id="content"></main>
      <div id="footer"></div>
    </div>`;
  const sidebar = root.querySelector<HTMLElement>('#sidebar')!;
  const content = root.querySelector<HTMLElement>('#content')!;
  const footer = root.querySelector<HTMLElement>('#footer')!;

  renderUploadPanel(sidebar, store);

  store.subscribe((state) => {
    if (state.jobId) {
      window.location.hash = `job=${state.jobId}`;
    }
    if (state.screen === 'upload') {
      content.innerHTML = '<p class="hint">Upload a .tex file to get started.</p>';
      footer.innerHTML = '';
    } else if (state.screen === 'progress') {
      renderProgress(content, state, store);
      footer.innerHTML = '';
    } else {
      renderReview(content, state, store, deps.review);
      renderExportButton(footer, state, store, deps.export);
    }
  });

  const match = window.location.hash.match(/job=([a-z0-9]+)/i);
  if (match) void store.attach(match[1]);
  return store;
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  bootstrap(document.getElementById('app')!);
}
