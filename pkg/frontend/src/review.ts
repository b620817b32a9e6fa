import { el } from './dom.js';
import type { QuestionDoc } from './types.js';

/** Render a fill-in-the-blank question with each ____ run as an underlined gap. */
export function renderBlankedText(text: string): HTMLElement {
  const container = el('span');
  const pattern = /_{4,}/g;
  let cursor = 0;
  for (const match of text.matchAll(pattern)) {
    const start = match.index ?? 0;
    if (start > cursor) container.append(document.createTextNode(text.slice(cursor, start)));
    container.append(el('span', { class: 'blank', 'aria-label': 'blank' }, '    '));
    cursor = start + match[0].length;
  }
  if (cursor < text.length) container.append(document.createTextNode(text.slice(cursor)));
  return container;
}

function renderPayload(doc: QuestionDoc): HTMLElement {
  const payload = doc.payload ?? {};
  const body = el('div', { class: 'question-body' });
  if (doc.format === 'fill_in_the_blank') {
    body.append(el('p', {}, renderBlankedText(String(payload.question ?? ''))));
    const answers = (payload.answers as string[]) ?? [];
    body.append(el('p', { class: 'answers' }, `Answers: ${answers.join(', ')}`));
  } else if (doc.format === 'multiple_choice' || doc.format === 'multiple_select') {
    body.append(el('p', {}, String(payload.question ?? '')));
    const options = (payload.options as string[]) ?? [];
    const correct = new Set<number>(
      doc.format === 'multiple_choice'
        ? [Number(payload.answer_index)]
        : ((payload.answer_indices as number[]) ?? []),
    );
    const list = el('ol', { class: 'options' });
    options.forEach((option, index) => {
      list.append(el('li', { class: correct.has(index) ? 'option correct' : 'option' }, option));
    });
    body.append(list);
  } else if (doc.format === 'true_false') {
    body.append(el('p', {}, String(payload.question ?? '')));
    body.append(el('p', { class: 'answers' }, `Answer: ${payload.answer ? 'true' : 'false'}`));
  } else {
    body.append(el('p', {}, String(payload.question ?? '')));
    const points = (payload.exemplar_points as string[]) ?? [];
    const list = el('ul', { class: 'exemplar-points' });
    points.forEach((point) => list.append(el('li', {}, point)));
    body.append(list);
  }
  const explanation = payload.explanation as string | undefined;
  if (explanation) body.append(el('p', { class: 'explanation' }, explanation));
  return body;
}

export interface CardActions {
  onAccept?: (questionId: string) => void;
  onDiscard?: (questionId: string) => void;
  onJudge?: (questionId: string) => void;
}

export function questionCard(doc: QuestionDoc, accepted: boolean, actions: CardActions = {}): HTMLElement {
  const card = el('article', { class: `question-card status-${doc.status}`, 'data-question-id': doc.question_id });
  const badges = el('div', { class: 'badges' });
  badges.append(el('span', { class: 'badge' }, doc.qtype));
  badges.append(el('span', { class: 'badge' }, doc.format));
  badges.append(el('span', { class: 'badge' }, doc.level));
  if (doc.status !== 'ok') {
    const failure = doc.validity?.failure ?? doc.status;
    badges.append(el('span', { class: 'badge failure-badge' }, `invalid: ${failure}`));
  }
  const composite = doc.judgement?.aggregate?.composite;
  if (composite !== undefined) {
    badges.append(el('span', { class: 'badge quality-badge' }, `quality ${composite.toFixed(2)}`));
  }
  card.append(badges);

  if (doc.payload) {
    card.append(renderPayload(doc));
  } else {
    card.append(el('p', { class: 'no-payload' }, 'No structurally valid question was produced.'));
  }

  const controls = el('div', { class: 'card-controls' });
  if (doc.status === 'ok') {
    controls.append(
      el(
        'button',
        { class: accepted ? 'accept accepted' : 'accept', onclick: () => actions.onAccept?.(doc.question_id) },
        accepted ? 'Accepted' : 'Accept',
      ),
    );
    if (actions.onJudge) {
      controls.append(el('button', { class: 'judge', onclick: () => actions.onJudge?.(doc.question_id) }, 'Rate quality'));
    }
  }
  controls.append(
    el('button', { class: 'discard', onclick: () => actions.onDiscard?.(doc.question_id) }, 'Discard'),
  );
  card.append(controls);
  return card;
}

export interface ExportBundle {
  json: string;
  text: string;
}

/** Export the accepted set: canonical question JSON (payloads verbatim from
 * the server) plus a printable text rendering. */
export function buildExport(questions: QuestionDoc[], acceptedIds: string[]): ExportBundle {
  const accepted = questions.filter((q) => acceptedIds.includes(q.question_id) && q.payload);
  const json = JSON.stringify(
    accepted.map((q) => ({
      question_id: q.question_id,
      sim_ref: q.sim_ref,
      qtype: q.qtype,
      format: q.format,
      level: q.level,
      model: q.model,
      payload: q.payload,
    })),
    null,
    2,
  );
  const lines: string[] = [];
  accepted.forEach((q, index) => {
    const payload = q.payload ?? {};
    lines.push(`${index + 1}. [${q.format}] ${String(payload.question ?? '')}`);
    if (q.format === 'multiple_choice' || q.format === 'multiple_select') {
      const options = (payload.options as string[]) ?? [];
      options.forEach((option, i) => lines.push(`   ${String.fromCharCode(97 + i)}) ${option}`));
    }
    if (q.format === 'fill_in_the_blank') {
      lines.push(`   answers: ${((payload.answers as string[]) ?? []).join(', ')}`);
    }
    if (q.format === 'true_false') {
      lines.push(`   answer: ${payload.answer ? 'true' : 'false'}`);
    }
    if (q.format === 'free_response_essay') {
      ((payload.exemplar_points as string[]) ?? []).forEach((point) => lines.push(`   - ${point}`));
    }
    lines.push('');
  });
  return { json, text: lines.join('\n') };
}
