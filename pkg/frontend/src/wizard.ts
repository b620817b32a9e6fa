import { el } from './dom.js';
import type { SessionView } from './types.js';

export interface WizardCallbacks {
  onAnswer: (text: string) => void;
  onSkip: () => void;
  onExtract: () => void;
}

export interface WizardOptions {
  pending: boolean;
  error: { code: string; message: string } | null;
  confirmSkip: boolean;
  onConfirmSkipChange: (confirming: boolean) => void;
}

/** Chat-style elicitation: one card per turn, the pending guided prompt
 * rendered verbatim from the server, and an answer box. Skipping asks for
 * confirmation first; a state error (409) disables input. */
export function elicitationWizard(
  session: SessionView,
  callbacks: WizardCallbacks,
  options: WizardOptions,
): HTMLElement {
  const root = el('section', { class: 'wizard' });
  const transcript = el('div', { class: 'transcript' });
  for (const turn of session.turns) {
    transcript.append(el('div', { class: 'chat-card system-card' }, turn.prompt));
    transcript.append(
      el(
        'div',
        { class: turn.skipped ? 'chat-card teacher-card skipped' : 'chat-card teacher-card' },
        turn.skipped ? '(skipped)' : turn.answer,
      ),
    );
  }
  if (session.next_prompt) {
    transcript.append(el('div', { class: 'chat-card system-card current-prompt' }, session.next_prompt));
  }
  root.append(transcript);

  const stateLocked = session.status !== 'open' || options.error?.code === 'SESSION_CLOSED';
  const inputDisabled = options.pending || stateLocked || !session.next_prompt;

  if (options.error) {
    root.append(
      el('div', { class: 'error-banner', role: 'alert' }, `${options.error.code}: ${options.error.message}`),
    );
  }

  if (session.next_prompt) {
    const input = el('textarea', {
      class: 'answer-input',
      placeholder: 'Type your answer...',
      disabled: inputDisabled,
    });
    const answerButton = el(
      'button',
      {
        class: 'answer-button',
        disabled: inputDisabled,
        onclick: () => {
          if (input.value.trim()) callbacks.onAnswer(input.value);
        },
      },
      'Answer',
    );
    const skipButton = el(
      'button',
      {
        class: options.confirmSkip ? 'skip-button confirming' : 'skip-button',
        disabled: inputDisabled,
        onclick: () => {
          if (options.confirmSkip) callbacks.onSkip();
          else options.onConfirmSkipChange(true);
        },
      },
      options.confirmSkip ? 'Skip this prompt? Click again to confirm' : 'Skip',
    );
    root.append(el('div', { class: 'answer-row' }, input, answerButton, skipButton));
  } else if (session.status === 'open') {
    root.append(
      el(
        'button',
        { class: 'extract-button', disabled: options.pending, onclick: () => callbacks.onExtract() },
        'Extract structure',
      ),
    );
  }
  return root;
}
