/**
 * Scripted end-to-end run against the real HTTP service backed by the
 * deterministic mock model: elicit -> review_structure -> generate ->
 * review_questions, finishing with an export. No live models involved.
 */
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { spawn, type ChildProcessWithoutNullStreams } from 'node:child_process';
import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { mount, type App } from '../src/app';

const GUIDED_PROMPTS = [
  'What are the key concepts or phenomena you want students to explore in this simulation?',
  'What prior knowledge do students bring into the activity?',
  'What kinds of reasoning or analysis should students practice?',
];

let server: ChildProcessWithoutNullStreams | null = null;
let base = '';

async function waitFor(predicate: () => boolean, label: string, timeoutMs = 15_000): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < timeoutMs) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
  throw new Error(`timed out waiting for ${label}`);
}

beforeAll(async () => {
  const port = 8600 + Math.floor(Math.random() * 300);
  base = `http://127.0.0.1:${port}`;
  const dir = mkdtempSync(join(tmpdir(), 'simqgen-ui-'));
  const configPath = join(dir, 'config.json');
  writeFileSync(configPath, JSON.stringify({ store_root: join(dir, 'store'), bind_port: port }));
  server = spawn('python3', ['-m', 'simqgen.cli', '--config', configPath, 'serve'], {
    stdio: ['ignore', 'pipe', 'pipe'],
  });
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${base}/spec`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error('service did not come up');
});

afterAll(() => {
  server?.kill();
});

function q<T extends Element>(root: HTMLElement, selector: string): T {
  const node = root.querySelector(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node as T;
}

describe('teacher workflow against the mock-model service', () => {
  it('completes all four stages and exports an accepted question', async () => {
    const root = document.createElement('div');
    document.body.append(root);
    const app: App = mount(root, base);

    // Stage 1: elicit.
    q<HTMLInputElement>(root, '.sim-id-input').value = 'sim-e2e';
    q<HTMLInputElement>(root, '.sim-title-input').value = 'E2E Lab';
    q<HTMLButtonElement>(root, '.start-button').click();
    await waitFor(() => root.querySelector('.current-prompt') !== null, 'first guided prompt');

    for (let i = 0; i < 3; i++) {
      expect(q(root, '.current-prompt').textContent).toBe(GUIDED_PROMPTS[i]);
      const input = q<HTMLTextAreaElement>(root, 'textarea.answer-input');
      input.value = ['gas behavior', 'particle basics', 'cause and effect reasoning'][i]!;
      q<HTMLButtonElement>(root, '.answer-button').click();
      if (i < 2) {
        await waitFor(
          () => root.querySelector('.current-prompt')?.textContent === GUIDED_PROMPTS[i + 1],
          `prompt ${i + 2}`,
        );
      } else {
        await waitFor(() => root.querySelector('.extract-button') !== null, 'extract button');
      }
    }
    q<HTMLButtonElement>(root, '.extract-button').click();

    // Stage 2: review_structure.
    await waitFor(() => root.querySelector('.structure-editor') !== null, 'structure editor');
    expect(app.view.stage).toBe('review_structure');
    const kuRows = root.querySelectorAll('.ku-row');
    expect(kuRows.length).toBeGreaterThanOrEqual(2);
    const kindOptions = Array.from(q<HTMLSelectElement>(root, '.ku-kind').options).map((o) => o.value);
    expect(kindOptions).toEqual(['input', 'output', 'constant', 'observable']);

    // A dangling deletion is blocked client-side with a cascade prompt.
    q<HTMLButtonElement>(root, '.ku-row[data-ku="ku-1"] .delete-ku').click();
    await waitFor(() => root.querySelector('.cascade-prompt') !== null, 'cascade prompt');
    expect(root.querySelector('.ku-row[data-ku="ku-1"]')).not.toBeNull();
    expect(app.editor?.edits ?? []).toHaveLength(0);

    // Add a knowledge unit, then commit.
    q<HTMLInputElement>(root, '.new-ku-name').value = 'container size';
    q<HTMLButtonElement>(root, '.add-ku').click();
    await waitFor(() => root.querySelectorAll('.ku-row').length === kuRows.length + 1, 'added unit');
    q<HTMLButtonElement>(root, '.commit-button').click();

    // Stage 3: generate.
    await waitFor(() => root.querySelector('.generate-panel') !== null, 'generate panel');
    expect(app.view.stage).toBe('generate');
    q<HTMLSelectElement>(root, '.qtype-select').value = 'cause_and_effect';
    q<HTMLSelectElement>(root, '.format-select').value = 'multiple_choice';
    q<HTMLButtonElement>(root, '.generate-button').click();
    await waitFor(() => app.view.questions.length === 1, 'question generated');
    expect(app.view.questions[0]!.status).toBe('ok');

    // Stage 4: review_questions.
    q<HTMLButtonElement>(root, 'button[data-stage="review_questions"]').click();
    await waitFor(() => root.querySelector('.question-card') !== null, 'question card');
    expect(app.view.stage).toBe('review_questions');
    q<HTMLButtonElement>(root, '.question-card .accept').click();
    await waitFor(() => app.view.acceptedIds.length === 1, 'accepted');
    q<HTMLButtonElement>(root, '.export-button').click();
    await waitFor(() => root.querySelector('.export-preview') !== null, 'export preview');

    const entries = JSON.parse(app.lastExport!.json);
    expect(entries.length).toBeGreaterThanOrEqual(1);

    // Export is a passthrough of the server's stored payload.
    const stored = await (await fetch(`${base}/questions/${entries[0].question_id}`)).json();
    expect(entries[0].payload).toEqual(stored.payload);
  });

  it('surfaces a 409 state error and disables the wizard input', async () => {
    const root = document.createElement('div');
    document.body.append(root);
    const app: App = mount(root, base);

    // Drive a fresh session to committed state through the API directly,
    // leaving the mounted wizard with a stale open-session snapshot.
    const created = await (
      await fetch(`${base}/sessions`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ sim_id: 'sim-stale', title: 'Stale' }),
      })
    ).json();
    const sid = created.session_id;
    app.view = { ...app.view, session: created, stage: 'elicit' };
    app.render();
    for (const answer of ['a', 'b', 'c']) {
      await fetch(`${base}/sessions/${sid}/answers`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ answer }),
      });
    }
    await fetch(`${base}/sessions/${sid}/extract`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({}),
    });
    await fetch(`${base}/sims/sim-stale`, {
      method: 'PUT',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ edits: [] }),
    });

    const input = q<HTMLTextAreaElement>(root, 'textarea.answer-input');
    input.value = 'late answer';
    q<HTMLButtonElement>(root, '.answer-button').click();
    await waitFor(() => app.view.error !== null, 'error banner');
    expect(app.view.error?.code).toBe('SESSION_CLOSED');
    app.render();
    expect(q<HTMLTextAreaElement>(root, 'textarea.answer-input').disabled).toBe(true);
    expect(root.querySelector('.error-banner')?.textContent).toContain('SESSION_CLOSED');
  });
});
