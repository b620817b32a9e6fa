import type { EditCommand, KnowledgeUnit, Relationship, Representation } from './types.js';

/** Pending edits applied locally for preview; the server re-validates on
 * commit. The apply rules here mirror the server's exactly, including the
 * dangling-deletion conflict, so a teacher is blocked client-side for the
 * same reasons the server would refuse. */
export interface EditorState {
  original: Representation;
  edits: EditCommand[];
}

export function editorState(base: Representation): EditorState {
  return { original: base, edits: [] };
}

/** Relationship ids that reference the knowledge unit: non-empty means a
 * plain delete would dangle and must be blocked or cascaded. */
export function deletionBlockers(rep: Representation, kuId: string): string[] {
  return rep.relationships.filter((rel) => rel.members.includes(kuId)).map((rel) => rel.id);
}

function nextId(prefix: string, ids: string[]): string {
  let best = 0;
  for (const id of ids) {
    if (id.startsWith(prefix)) {
      const suffix = Number(id.slice(prefix.length));
      if (Number.isInteger(suffix) && suffix > best) best = suffix;
    }
  }
  return `${prefix}${best + 1}`;
}

/** Local mirror of the server's edit application. Throws Error with the
 * server's conflict semantics when a delete would dangle. */
export function applyEdits(base: Representation, edits: EditCommand[]): Representation {
  let kus: KnowledgeUnit[] = base.knowledge_units.map((ku) => ({ ...ku }));
  let rels: Relationship[] = base.relationships.map((rel) => ({ ...rel, members: [...rel.members] }));
  for (const edit of edits) {
    const fields = edit.fields ?? {};
    if (edit.op === 'add_ku') {
      kus.push({
        id: nextId('ku-', kus.map((k) => k.id)),
        name: String(fields.name ?? ''),
        description: String(fields.description ?? ''),
        kind: String(fields.kind ?? 'observable'),
      });
    } else if (edit.op === 'update_ku') {
      const ku = kus.find((k) => k.id === edit.target_id);
      if (!ku) throw new Error(`no knowledge unit ${edit.target_id}`);
      if (fields.name !== undefined) ku.name = String(fields.name);
      if (fields.description !== undefined) ku.description = String(fields.description);
      if (fields.kind !== undefined) ku.kind = String(fields.kind);
    } else if (edit.op === 'delete_ku') {
      const blockers = rels.filter((rel) => rel.members.includes(edit.target_id ?? ''));
      if (blockers.length > 0 && !edit.cascade) {
        throw new Error(`EDIT_CONFLICT: referenced by ${blockers.map((r) => r.id).join(', ')}`);
      }
      kus = kus.filter((k) => k.id !== edit.target_id);
      rels = rels
        .map((rel) => ({ ...rel, members: rel.members.filter((m) => m !== edit.target_id) }))
        .filter((rel) => rel.members.length >= 2);
    } else if (edit.op === 'add_relationship') {
      rels.push({
        id: nextId('rel-', rels.map((r) => r.id)),
        label: String(fields.label ?? ''),
        description: String(fields.description ?? ''),
        members: Array.isArray(fields.members) ? fields.members.map(String) : [],
        directed: Boolean(fields.directed ?? false),
      });
    } else if (edit.op === 'update_relationship') {
      const rel = rels.find((r) => r.id === edit.target_id);
      if (!rel) throw new Error(`no relationship ${edit.target_id}`);
      if (fields.label !== undefined) rel.label = String(fields.label);
      if (fields.description !== undefined) rel.description = String(fields.description);
      if (fields.members !== undefined && Array.isArray(fields.members)) {
        rel.members = fields.members.map(String);
      }
      if (fields.directed !== undefined) rel.directed = Boolean(fields.directed);
    } else if (edit.op === 'delete_relationship') {
      rels = rels.filter((r) => r.id !== edit.target_id);
    }
  }
  return { ...base, knowledge_units: kus, relationships: rels };
}

/** Current preview of the representation with pending edits applied. */
export function preview(state: EditorState): Representation {
  return applyEdits(state.original, state.edits);
}

function pushEdit(state: EditorState, edit: EditCommand): EditorState {
  // Validate locally before queueing so a bad edit never reaches the server.
  applyEdits(state.original, [...state.edits, edit]);
  return { ...state, edits: [...state.edits, edit] };
}

export function addKu(state: EditorState, name: string, kind: string): EditorState {
  return pushEdit(state, { op: 'add_ku', fields: { name, kind } });
}

export function renameKu(state: EditorState, kuId: string, name: string): EditorState {
  return pushEdit(state, { op: 'update_ku', target_id: kuId, fields: { name } });
}

export function setKuKind(state: EditorState, kuId: string, kind: string): EditorState {
  return pushEdit(state, { op: 'update_ku', target_id: kuId, fields: { kind } });
}

export function deleteKu(state: EditorState, kuId: string, cascade: boolean): EditorState {
  return pushEdit(state, { op: 'delete_ku', target_id: kuId, cascade });
}

export function addRelationship(
  state: EditorState,
  label: string,
  members: string[],
  directed: boolean,
): EditorState {
  return pushEdit(state, { op: 'add_relationship', fields: { label, members, directed } });
}

export function toggleDirection(state: EditorState, relId: string): EditorState {
  const rel = preview(state).relationships.find((r) => r.id === relId);
  if (!rel) throw new Error(`no relationship ${relId}`);
  return pushEdit(state, { op: 'update_relationship', target_id: relId, fields: { directed: !rel.directed } });
}

export function deleteRelationship(state: EditorState, relId: string): EditorState {
  return pushEdit(state, { op: 'delete_relationship', target_id: relId });
}
