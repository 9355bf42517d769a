// Sidebar upload panel, styled as file tabs. Rejects anything but .tex before
// any request leaves the browser and blocks double submits while in flight.

import { Store } from '../state.js';

export function renderUploadPanel(container: HTMLElement, store: Store): void {
  container.innerHTML = `
    <aside class="sidebar">
      <div class="file-tab active" data-testid="file-tab">
        <span class="tab-label">Upload paper</span>
      </div>
      <label class="upload-zone" data-testid="upload-zone">
        <input type="file" accept=".tex" data-testid="file-input" hidden>
        <span class="upload-hint">Drop your .tex file here<br>or click to browse</span>
      </label>
      <p class="upload-error" data-testid="upload-error" hidden></p>
    </aside>`;

  const input = container.querySelector<HTMLInputElement>('[data-testid=file-input]')!;
  const errorBox = container.querySelector<HTMLElement>('[data-testid=upload-error]')!;
  let inFlight = false;

  const showError = (message: string) => {
    errorBox.textContent = message;
    errorBox.hidden = false;
  };

  const submit = async (file: File | undefined) => {
    errorBox.hidden = true;
    if (!file) return;
    if (!file.name.toLowerCase().endsWith('.tex')) {
      showError('Only .tex files are accepted.');
      return;
    }
    if (inFlight) return;
    inFlight = true;
    try {
      await store.upload(file);
    } catch (err) {
      showError(err instanceof Error ? err.message : 'Upload failed.');
    } finally {
      inFlight = false;
    }
  };

  input.addEventListener('change', () => void submit(input.files?.[0]));

  const zone = container.querySelector<HTMLElement>('[data-testid=upload-zone]')!;
  zone.addEventListener('dragover', (e) => e.preventDefault());
  zone.addEventListener('drop', (e) => {
    e.preventDefault();
    void submit((e as DragEvent).dataTransfer?.files?.[0]);
  });
}
