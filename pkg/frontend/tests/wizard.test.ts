import { describe, expect, it, vi } from 'vitest';

import freshFixture from './fixtures/session_fresh.json';
import answeredFixture from './fixtures/session_answered.json';
import { elicitationWizard } from '../src/wizard';
import type { SessionView } from '../src/types';

const fresh = freshFixture as SessionView;
const answered = answeredFixture as SessionView;

const CONCEPTS_PROMPT =
  'What are the key concepts or phenomena you want students to explore in this simulation?';

function render(session: SessionView, overrides: Partial<Parameters<typeof elicitationWizard>[2]> = {}) {
  const callbacks = { onAnswer: vi.fn(), onSkip: vi.fn(), onExtract: vi.fn() };
  const options = {
    pending: false,
    error: null as { code: string; message: string } | null,
    confirmSkip: false,
    onConfirmSkipChange: vi.fn(),
    ...overrides,
  };
  return { node: elicitationWizard(session, callbacks, options), callbacks, options };
}

describe('elicitation wizard', () => {
  it('a fresh session shows the first guided prompt verbatim', () => {
    const { node } = render(fresh);
    const current = node.querySelector('.current-prompt');
    expect(current?.textContent).toBe(CONCEPTS_PROMPT);
  });

  it('answers post through the callback', () => {
    const { node, callbacks } = render(fresh);
    const input = node.querySelector('textarea') as HTMLTextAreaElement;
    input.value = 'ideal gas behavior';
    (node.querySelector('.answer-button') as HTMLButtonElement).click();
    expect(callbacks.onAnswer).toHaveBeenCalledWith('ideal gas behavior');
  });

  it('skip asks for confirmation before posting', () => {
    const first = render(fresh);
    (first.node.querySelector('.skip-button') as HTMLButtonElement).click();
    expect(first.callbacks.onSkip).not.toHaveBeenCalled();
    expect(first.options.onConfirmSkipChange).toHaveBeenCalledWith(true);

    const second = render(fresh, { confirmSkip: true });
    (second.node.querySelector('.skip-button') as HTMLButtonElement).click();
    expect(second.callbacks.onSkip).toHaveBeenCalled();
  });

  it('a state error disables input and shows the code', () => {
    const { node } = render(fresh, { error: { code: 'SESSION_CLOSED', message: 'session is committed, not open' } });
    const input = node.querySelector('textarea') as HTMLTextAreaElement;
    expect(input.disabled).toBe(true);
    expect(node.querySelector('.error-banner')?.textContent).toContain('SESSION_CLOSED');
  });

  it('an exhausted queue offers extraction instead of an answer box', () => {
    const { node, callbacks } = render(answered);
    expect(node.querySelector('textarea')).toBeNull();
    const extract = node.querySelector('.extract-button') as HTMLButtonElement;
    extract.click();
    expect(callbacks.onExtract).toHaveBeenCalled();
  });

  it('turns render prompts and answers verbatim from the server snapshot', () => {
    const { node } = render(answered);
    for (const turn of answered.turns) {
      expect(node.textContent).toContain(turn.prompt);
      expect(node.textContent).toContain(turn.answer);
    }
  });
});
