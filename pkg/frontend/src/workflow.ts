import type { Draft, QuestionDoc, Representation, SessionStatus, SessionView } from './types.js';

/** The four workflow stages, in order. Stage is derived from server state,
 * never advanced speculatively. */
export type Stage = 'elicit' | 'review_structure' | 'generate' | 'review_questions';

export const STAGES: Stage[] = ['elicit', 'review_structure', 'generate', 'review_questions'];

export interface WorkflowView {
  stage: Stage;
  session: SessionView | null;
  draft: Draft | null;
  sim: Representation | null;
  supportedTypes: string[];
  questions: QuestionDoc[];
  acceptedIds: string[];
  pending: boolean;
  error: { code: string; message: string } | null;
}

export function initialView(): WorkflowView {
  return {
    stage: 'elicit',
    session: null,
    draft: null,
    sim: null,
    supportedTypes: [],
    questions: [],
    acceptedIds: [],
    pending: false,
    error: null,
  };
}

/** Mirror of the server session state machine. */
export function stageForStatus(status: SessionStatus, hasQuestions: boolean): Stage {
  if (status === 'open' || status === 'extracting') return 'elicit';
  if (status === 'review') return 'review_structure';
  return hasQuestions ? 'review_questions' : 'generate';
}

function derivedStage(view: WorkflowView): Stage {
  if (!view.session) return 'elicit';
  return stageForStatus(view.session.status, view.questions.length > 0);
}

export function applySession(view: WorkflowView, session: SessionView): WorkflowView {
  const next = { ...view, session, error: null };
  return { ...next, stage: derivedStage(next) };
}

export function applyDraft(view: WorkflowView, draft: Draft): WorkflowView {
  return { ...view, draft, error: null };
}

export function applyCommit(view: WorkflowView, sim: Representation, supportedTypes: string[]): WorkflowView {
  const session = view.session ? { ...view.session, status: 'committed' as SessionStatus } : null;
  const next = { ...view, sim, supportedTypes, session, error: null };
  return { ...next, stage: derivedStage(next) };
}

export function addQuestion(view: WorkflowView, question: QuestionDoc): WorkflowView {
  return { ...view, questions: [...view.questions, question], error: null };
}

export function replaceQuestion(view: WorkflowView, question: QuestionDoc): WorkflowView {
  const questions = view.questions.map((q) => (q.question_id === question.question_id ? question : q));
  return { ...view, questions };
}

export function toggleAccepted(view: WorkflowView, questionId: string): WorkflowView {
  const accepted = view.acceptedIds.includes(questionId)
    ? view.acceptedIds.filter((id) => id !== questionId)
    : [...view.acceptedIds, questionId];
  return { ...view, acceptedIds: accepted };
}

export function discardQuestion(view: WorkflowView, questionId: string): WorkflowView {
  return {
    ...view,
    questions: view.questions.filter((q) => q.question_id !== questionId),
    acceptedIds: view.acceptedIds.filter((id) => id !== questionId),
  };
}

export function withPending(view: WorkflowView, pending: boolean): WorkflowView {
  return { ...view, pending };
}

export function withError(view: WorkflowView, code: string, message: string): WorkflowView {
  return { ...view, error: { code, message } };
}

export function goToStage(view: WorkflowView, stage: Stage): WorkflowView {
  // Manual navigation may only move between stages the server state allows:
  // generate <-> review_questions once committed.
  const allowed = derivedStage(view);
  if (stage === 'generate' && allowed === 'review_questions') return { ...view, stage };
  if (stage === 'review_questions' && allowed === 'generate' && view.questions.length > 0) {
    return { ...view, stage };
  }
  return { ...view, stage: allowed };
}
