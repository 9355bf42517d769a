// Export control: enabled once section E is filled, downloads the markdown
// generated by the server (the UI never rebuilds it client-side).

import { AppState, Store, exportReady } from '../state.js';

export interface ExportDeps {
  download?: (blob: Blob, filename: string) => void;
}

function browserDownload(blob: Blob, filename: string): void {
  const url = URL.createObjectURL(blob);
  const a = document.createElement('a');
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}

export function renderExportButton(container: HTMLElement, state: AppState,
                                   store: Store, deps: ExportDeps = {}): void {
  const ready = exportReady(state.payload);
  container.innerHTML = `
    <div class="export-bar">
      <button data-testid="export-button" ${ready ? '' : 'disabled'}
              title="${ready ? 'Download the checklist as markdown'
                             : 'Answer section E before exporting'}">
        Export checklist
      </button>
    </div>`;

  container.querySelector<HTMLButtonElement>('[data-testid=export-button]')!
    .addEventListener('click', () => {
      void store.export().then((blob) => {
        const stem = state.payload?.filename.replace(/\.tex$/i, '') ?? 'paper';
        (deps.download ?? browserDownload)(blob, `${stem}-checklist.md`);
      });
    });
}
