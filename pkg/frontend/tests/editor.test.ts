import { describe, expect, it } from 'vitest';

import draftFixture from './fixtures/draft.json';
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
} from '../src/structure_editor';
import type { Draft } from '../src/types';

const draft = draftFixture as Draft;

describe('dangling deletions', () => {
  it('reports the relationships that reference a knowledge unit', () => {
    const blockers = deletionBlockers(draft.base, 'ku-1');
    expect(blockers.length).toBeGreaterThan(0);
    expect(blockers[0]).toMatch(/^rel-/);
  });

  it('blocks a plain delete of a referenced unit, mirroring the server rule', () => {
    const state = editorState(draft.base);
    expect(() => deleteKu(state, 'ku-1', false)).toThrowError(/EDIT_CONFLICT/);
  });

  it('cascade delete drops the unit from members and dissolves thin relationships', () => {
    const state = deleteKu(editorState(draft.base), 'ku-1', true);
    const rep = preview(state);
    expect(rep.knowledge_units.some((ku) => ku.id === 'ku-1')).toBe(false);
    for (const rel of rep.relationships) {
      expect(rel.members).not.toContain('ku-1');
      expect(rel.members.length).toBeGreaterThanOrEqual(2);
    }
  });
});

describe('edits preview like the server applies them', () => {
  it('renames keep ids stable', () => {
    const state = renameKu(editorState(draft.base), 'ku-1', 'gas temperature');
    const ku = preview(state).knowledge_units.find((k) => k.id === 'ku-1');
    expect(ku?.name).toBe('gas temperature');
  });

  it('kind changes are tracked', () => {
    const state = setKuKind(editorState(draft.base), 'ku-1', 'constant');
    expect(preview(state).knowledge_units.find((k) => k.id === 'ku-1')?.kind).toBe('constant');
  });

  it('new knowledge units get the next system id, like the server assigns', () => {
    const base = draft.base;
    const state = addKu(editorState(base), 'volume knob', 'input');
    const expectedId = `ku-${base.knowledge_units.length + 1}`;
    expect(preview(state).knowledge_units.at(-1)?.id).toBe(expectedId);
  });

  it('relationships can be added, re-oriented, and deleted', () => {
    let state = addRelationship(editorState(draft.base), 'pairing', ['ku-1', 'ku-2'], false);
    const relId = preview(state).relationships.at(-1)!.id;
    state = toggleDirection(state, relId);
    expect(preview(state).relationships.at(-1)?.directed).toBe(true);
    state = deleteRelationship(state, relId);
    expect(preview(state).relationships.some((r) => r.id === relId)).toBe(false);
  });

  it('a bad edit never enters the queue', () => {
    const state = editorState(draft.base);
    expect(() => deleteKu(state, 'ku-1', false)).toThrow();
    expect(state.edits).toHaveLength(0);
  });
});
