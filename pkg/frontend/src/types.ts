/** Server payload shapes. Field names mirror the HTTP API exactly. */

export type SessionStatus = 'open' | 'extracting' | 'review' | 'committed';

export interface DialogueTurn {
  prompt: string;
  answer: string;
  at: string;
  skipped: boolean;
}

export interface SessionView {
  session_id: string;
  sim_ref: string;
  title: string;
  turns: DialogueTurn[];
  queue: string[];
  status: SessionStatus;
  next_prompt: string | null;
}

/** The four knowledge-unit kinds offered by the editor's selector. */
export const KU_KINDS = ['input', 'output', 'constant', 'observable'] as const;
export type KuKind = (typeof KU_KINDS)[number];

export interface KnowledgeUnit {
  id: string;
  name: string;
  description: string;
  kind: string;
}

export interface Relationship {
  id: string;
  label: string;
  description: string;
  members: string[];
  directed: boolean;
}

export interface Representation {
  sim_id: string;
  title: string;
  instruction_goals: string;
  knowledge_units: KnowledgeUnit[];
  relationships: Relationship[];
}

export interface Draft {
  base: Representation;
  provenance: Record<string, number>;
  confidence_notes: string[];
  session_id?: string;
}

export interface EditCommand {
  op:
    | 'add_ku'
    | 'update_ku'
    | 'delete_ku'
    | 'add_relationship'
    | 'update_relationship'
    | 'delete_relationship';
  target_id?: string;
  fields?: Record<string, unknown>;
  cascade?: boolean;
}

export interface ValidityInfo {
  json_ok: boolean;
  format_ok: boolean | null;
  failure: string | null;
}

export interface JudgementAggregate {
  per_criterion_mean: Record<string, number>;
  composite: number;
  alpha: number | null;
  n_judges: number;
}

export interface Judgement {
  question_id: string;
  ratings: { judge_id: string; scores: Record<string, number> }[];
  failures: { judge_id: string; failure: string }[];
  aggregate?: JudgementAggregate;
}

export interface QuestionDoc {
  question_id: string;
  sim_ref: string;
  qtype: string;
  format: string;
  level: string;
  model: string;
  status: 'ok' | 'invalid' | 'transport_failed';
  validity: ValidityInfo | null;
  payload: Record<string, unknown> | null;
  judgement?: Judgement;
}

export const QUESTION_TYPES = [
  'conceptual',
  'cause_and_effect',
  'critical_thinking',
  'relationship',
  'causal_chain',
  'calculation',
  'justification',
] as const;

export const QUESTION_FORMATS = [
  'multiple_choice',
  'multiple_select',
  'true_false',
  'fill_in_the_blank',
  'free_response_essay',
] as const;

export const TELER_LEVELS = ['L1', 'L2', 'L3', 'L4'] as const;
