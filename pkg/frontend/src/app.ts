import { ApiClient, ApiError } from './api.js';
import { clear, el } from './dom.js';
import {
  addKu,
  addRelationship,
  deleteKu,
  deleteRelationship,
  deletionBlockers,
  editorState,
  preview,
  renameKu,
  setKuKind,
  toggleDirection,
  type EditorState,
} from './structure_editor.js';
import { buildExport, questionCard } from './review.js';
import { elicitationWizard } from './wizard.js';
import {
  addQuestion,
  applyCommit,
  applyDraft,
  applySession,
  discardQuestion,
  goToStage,
  initialView,
  replaceQuestion,
  toggleAccepted,
  withError,
  withPending,
  type WorkflowView,
} from './workflow.js';
import { KU_KINDS, QUESTION_FORMATS, TELER_LEVELS, type SessionView } from './types.js';

export class App {
  view: WorkflowView = initialView();
  editor: EditorState | null = null;
  confirmSkip = false;
  cascadePromptFor: string | null = null;
  exportText: string | null = null;
  lastExport: { json: string; text: string } | null = null;

  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {}

  private set(view: WorkflowView): void {
    this.view = view;
    this.render();
  }

  /** Run one API action with the pending flag and error banner handled. */
  private async act(action: () => Promise<void>): Promise<void> {
    this.set(withPending(this.view, true));
    try {
      await action();
    } catch (error) {
      if (error instanceof ApiError) {
        this.set(withError(this.view, error.code, error.message));
      } else {
        this.set(withError(this.view, 'NETWORK', String(error)));
      }
    } finally {
      this.set(withPending(this.view, false));
    }
  }

  async startSession(simId: string, title: string): Promise<void> {
    await this.act(async () => {
      const session = await this.api.createSession(simId, title);
      this.set(applySession(this.view, session));
    });
  }

  async answer(text: string): Promise<void> {
    const session = this.view.session;
    if (!session) return;
    await this.act(async () => {
      const updated = await this.api.answer(session.session_id, text);
      this.confirmSkip = false;
      this.set(applySession(this.view, updated));
    });
  }

  async skip(): Promise<void> {
    const session = this.view.session;
    if (!session) return;
    await this.act(async () => {
      const updated = await this.api.skip(session.session_id);
      this.confirmSkip = false;
      this.set(applySession(this.view, updated));
    });
  }

  async extract(): Promise<void> {
    const session = this.view.session;
    if (!session) return;
    await this.act(async () => {
      const draft = await this.api.extract(session.session_id);
      const refreshed = await this.api.getSession(session.session_id);
      this.editor = editorState(draft.base);
      this.set(applySession(applyDraft(this.view, draft), refreshed));
    });
  }

  async commit(): Promise<void> {
    const session = this.view.session;
    if (!session || !this.editor) return;
    const edits = this.editor.edits;
    await this.act(async () => {
      const sim = await this.api.commit(session.sim_ref, edits);
      const types = await this.api.supportedTypes(session.sim_ref);
      this.set(applyCommit(this.view, sim, types.supported_types));
    });
  }

  async generate(qtype: string, format: string, level: string): Promise<void> {
    const sim = this.view.sim;
    if (!sim) return;
    await this.act(async () => {
      const doc = await this.api.generate(sim.sim_id, { qtype, format, level });
      this.set(addQuestion(this.view, doc));
    });
  }

  async judge(questionId: string): Promise<void> {
    await this.act(async () => {
      await this.api.judge(questionId);
      const doc = await this.api.getQuestion(questionId);
      this.set(replaceQuestion(this.view, doc));
    });
  }

  exportAccepted(): void {
    this.lastExport = buildExport(this.view.questions, this.view.acceptedIds);
    this.exportText = this.lastExport.text;
    this.render();
  }

  // -- editor event handlers ------------------------------------------------

  private editorAction(action: (state: EditorState) => EditorState): void {
    if (!this.editor) return;
    try {
      this.editor = action(this.editor);
      this.view = { ...this.view, error: null };
    } catch (error) {
      this.view = withError(this.view, 'EDIT_CONFLICT', String(error));
    }
    this.render();
  }

  requestDeleteKu(kuId: string): void {
    if (!this.editor) return;
    const blockers = deletionBlockers(preview(this.editor), kuId);
    if (blockers.length > 0 && this.cascadePromptFor !== kuId) {
      // Blocked: surface the cascade prompt instead of queueing the edit.
      this.cascadePromptFor = kuId;
      this.render();
      return;
    }
    const cascade = blockers.length > 0;
    this.cascadePromptFor = null;
    this.editorAction((state) => deleteKu(state, kuId, cascade));
  }

  // -- rendering ------------------------------------------------------------

  render(): void {
    clear(this.root);
    this.root.append(this.renderStageNav());
    if (this.view.error && this.view.stage !== 'elicit') {
      this.root.append(
        el('div', { class: 'error-banner', role: 'alert' }, `${this.view.error.code}: ${this.view.error.message}`),
      );
    }
    if (this.view.pending) {
      this.root.append(el('div', { class: 'pending-indicator' }, 'Working...'));
    }
    switch (this.view.stage) {
      case 'elicit':
        this.root.append(this.renderElicit());
        break;
      case 'review_structure':
        this.root.append(this.renderStructureEditor());
        break;
      case 'generate':
        this.root.append(this.renderGenerate());
        break;
      case 'review_questions':
        this.root.append(this.renderReview());
        break;
    }
  }

  private renderStageNav(): HTMLElement {
    const nav = el('nav', { class: 'stage-nav' });
    for (const stage of ['elicit', 'review_structure', 'generate', 'review_questions'] as const) {
      nav.append(
        el(
          'button',
          {
            class: this.view.stage === stage ? 'stage active' : 'stage',
            'data-stage': stage,
            onclick: () => this.set(goToStage(this.view, stage)),
          },
          stage.replace('_', ' '),
        ),
      );
    }
    return nav;
  }

  private renderElicit(): HTMLElement {
    if (!this.view.session) {
      const simInput = el('input', { class: 'sim-id-input', placeholder: 'sim id (e.g. sim-gas-law)' });
      const titleInput = el('input', { class: 'sim-title-input', placeholder: 'lab title' });
      return el(
        'section',
        { class: 'start-form' },
        el('h2', {}, 'Describe your lab'),
        simInput,
        titleInput,
        el(
          'button',
          {
            class: 'start-button',
            disabled: this.view.pending,
            onclick: () => {
              if (simInput.value.trim()) void this.startSession(simInput.value.trim(), titleInput.value);
            },
          },
          'Start',
        ),
      );
    }
    return elicitationWizard(
      this.view.session,
      {
        onAnswer: (text) => void this.answer(text),
        onSkip: () => void this.skip(),
        onExtract: () => void this.extract(),
      },
      {
        pending: this.view.pending,
        error: this.view.error,
        confirmSkip: this.confirmSkip,
        onConfirmSkipChange: (confirming) => {
          this.confirmSkip = confirming;
          this.render();
        },
      },
    );
  }

  private renderStructureEditor(): HTMLElement {
    const section = el('section', { class: 'structure-editor' });
    if (!this.editor) {
      section.append(el('p', {}, 'No draft yet; extract a structure first.'));
      return section;
    }
    const rep = preview(this.editor);
    section.append(el('h2', {}, 'Knowledge units'));
    const kuList = el('ul', { class: 'ku-list' });
    for (const ku of rep.knowledge_units) {
      const nameInput = el('input', { class: 'ku-name', value: ku.name, 'data-ku': ku.id });
      nameInput.addEventListener('change', () => this.editorAction((s) => renameKu(s, ku.id, nameInput.value)));
      const kindSelect = el('select', { class: 'ku-kind', 'data-ku': ku.id });
      for (const kind of KU_KINDS) {
        kindSelect.append(el('option', kind === ku.kind ? { value: kind, selected: true } : { value: kind }, kind));
      }
      kindSelect.addEventListener('change', () => this.editorAction((s) => setKuKind(s, ku.id, kindSelect.value)));
      const item = el(
        'li',
        { class: 'ku-row', 'data-ku': ku.id },
        el('span', { class: 'ku-id' }, ku.id),
        nameInput,
        kindSelect,
        el('button', { class: 'delete-ku', onclick: () => this.requestDeleteKu(ku.id) }, 'Delete'),
      );
      if (this.cascadePromptFor === ku.id) {
        item.append(
          el(
            'span',
            { class: 'cascade-prompt', role: 'alertdialog' },
            `Used by ${deletionBlockers(rep, ku.id).join(', ')} — delete again to cascade`,
          ),
        );
      }
      kuList.append(item);
    }
    section.append(kuList);

    const newKuName = el('input', { class: 'new-ku-name', placeholder: 'new knowledge unit' });
    const newKuKind = el('select', { class: 'new-ku-kind' });
    for (const kind of KU_KINDS) newKuKind.append(el('option', { value: kind }, kind));
    section.append(
      el(
        'div',
        { class: 'add-ku-row' },
        newKuName,
        newKuKind,
        el(
          'button',
          {
            class: 'add-ku',
            onclick: () => {
              if (newKuName.value.trim()) {
                this.editorAction((s) => addKu(s, newKuName.value.trim(), newKuKind.value));
              }
            },
          },
          'Add knowledge unit',
        ),
      ),
    );

    section.append(el('h2', {}, 'Relationships'));
    const relList = el('ul', { class: 'rel-list' });
    for (const rel of rep.relationships) {
      const direction = el(
        'button',
        { class: 'toggle-direction', onclick: () => this.editorAction((s) => toggleDirection(s, rel.id)) },
        rel.directed ? 'directed' : 'undirected',
      );
      relList.append(
        el(
          'li',
          { class: 'rel-row', 'data-rel': rel.id },
          el('span', { class: 'rel-id' }, rel.id),
          el('span', { class: 'rel-label' }, rel.label),
          el('span', { class: 'rel-members' }, rel.members.join(rel.directed ? ' -> ' : ' <-> ')),
          direction,
          el(
            'button',
            { class: 'delete-rel', onclick: () => this.editorAction((s) => deleteRelationship(s, rel.id)) },
            'Delete',
          ),
        ),
      );
    }
    section.append(relList);

    const relLabel = el('input', { class: 'new-rel-label', placeholder: 'relationship label' });
    const memberSelect = el('select', { class: 'new-rel-members', multiple: true });
    for (const ku of rep.knowledge_units) memberSelect.append(el('option', { value: ku.id }, ku.name));
    const directedToggle = el('input', { type: 'checkbox', class: 'new-rel-directed' });
    section.append(
      el(
        'div',
        { class: 'add-rel-row' },
        relLabel,
        memberSelect,
        el('label', {}, directedToggle, 'directed'),
        el(
          'button',
          {
            class: 'add-rel',
            onclick: () => {
              const members = Array.from(memberSelect.selectedOptions).map((o) => o.value);
              if (members.length >= 2) {
                this.editorAction((s) => addRelationship(s, relLabel.value, members, directedToggle.checked));
              }
            },
          },
          'Add relationship',
        ),
      ),
    );

    section.append(
      el(
        'button',
        { class: 'commit-button', disabled: this.view.pending, onclick: () => void this.commit() },
        'Commit structure',
      ),
    );
    return section;
  }

  private renderGenerate(): HTMLElement {
    const section = el('section', { class: 'generate-panel' });
    section.append(el('h2', {}, 'Generate a question'));
    const typeSelect = el('select', { class: 'qtype-select' });
    for (const qtype of this.view.supportedTypes) typeSelect.append(el('option', { value: qtype }, qtype));
    const formatSelect = el('select', { class: 'format-select' });
    for (const format of QUESTION_FORMATS) formatSelect.append(el('option', { value: format }, format));
    const levelSelect = el('select', { class: 'level-select' });
    for (const level of TELER_LEVELS) {
      levelSelect.append(level === 'L3' ? el('option', { value: level, selected: true }, level) : el('option', { value: level }, level));
    }
    section.append(
      el('div', { class: 'generate-row' }, typeSelect, formatSelect, levelSelect),
      el(
        'button',
        {
          class: 'generate-button',
          disabled: this.view.pending,
          onclick: () => void this.generate(typeSelect.value, formatSelect.value, levelSelect.value),
        },
        'Generate',
      ),
      el('p', { class: 'question-count' }, `${this.view.questions.length} question(s) so far`),
    );
    return section;
  }

  private renderReview(): HTMLElement {
    const section = el('section', { class: 'review-panel' });
    section.append(el('h2', {}, 'Review questions'));
    for (const doc of this.view.questions) {
      section.append(
        questionCard(doc, this.view.acceptedIds.includes(doc.question_id), {
          onAccept: (id) => this.set(toggleAccepted(this.view, id)),
          onDiscard: (id) => this.set(discardQuestion(this.view, id)),
          onJudge: (id) => void this.judge(id),
        }),
      );
    }
    section.append(
      el(
        'button',
        {
          class: 'export-button',
          disabled: this.view.acceptedIds.length === 0,
          onclick: () => this.exportAccepted(),
        },
        `Export ${this.view.acceptedIds.length} accepted`,
      ),
    );
    if (this.exportText !== null) {
      section.append(el('pre', { class: 'export-preview' }, this.exportText));
    }
    return section;
  }
}

export function mount(root: HTMLElement, baseUrl: string): App {
  const app = new App(new ApiClient(baseUrl), root);
  app.render();
  return app;
}
