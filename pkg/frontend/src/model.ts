/**
 * View model for the review screen.
 *
 * The API reports one change group per (identity, key, expected, actual)
 * signature. The screen shows one card per element identity with a diff
 * row per signature, so a login button with five changed attributes is a
 * single card with five rows. Everything here is a pure projection of the
 * groups payload plus the decisions taken this session.
 */

import type { Action, ChangeGroup, GroupsPayload, Occurrence, Report, Signature } from "./api.js";

export type RowStatus = "pending" | "accepted" | "ignored";

export interface DiffRow {
  groupIndex: number;
  signature: Signature;
  count: number;
  occurrences: Occurrence[];
  status: RowStatus;
  busy: boolean;
  error: string | null;
}

export interface ElementGroup {
  identity: [string, string][];
  label: string;
  occurrence: Occurrence;
  rows: DiffRow[];
}

export interface ViewModel {
  pending: number;
  groups: ElementGroup[];
}

function identityKey(identity: [string, string][]): string {
  return JSON.stringify(identity);
}

export function identityLabel(identity: [string, string][]): string {
  if (identity.length === 0) return "(anonymous element)";
  return identity.map(([key, value]) => `${key}=${value}`).join(", ");
}

function toRow(group: ChangeGroup): DiffRow {
  return {
    groupIndex: group.index,
    signature: group.signature,
    count: group.count,
    occurrences: group.occurrences,
    status: "pending",
    busy: false,
    error: null,
  };
}

export function buildViewModel(payload: GroupsPayload): ViewModel {
  const byIdentity = new Map<string, ElementGroup>();
  for (const group of payload.groups) {
    const key = identityKey(group.signature.identity);
    let card = byIdentity.get(key);
    if (card === undefined) {
      const occurrence = group.occurrences[0];
      if (occurrence === undefined) continue; // defensive: API always sends at least one
      card = {
        identity: group.signature.identity,
        label: identityLabel(group.signature.identity),
        occurrence,
        rows: [],
      };
      byIdentity.set(key, card);
    }
    card.rows.push(toRow(group));
  }
  return { pending: payload.pending, groups: [...byIdentity.values()] };
}

/** Number of groups-payload rows represented; must match the API count. */
export function rowCount(vm: ViewModel): number {
  return vm.groups.reduce((total, group) => total + group.rows.length, 0);
}

/** A decision is recorded at most once per row and session. */
export function markResolved(row: DiffRow, action: Action): void {
  if (row.status !== "pending") {
    throw new Error(`decision already recorded for ${row.signature.key}`);
  }
  row.status = action === "accept" ? "accepted" : "ignored";
  row.error = null;
}

/** Roll an optimistic transition back after an API failure. */
export function markPending(row: DiffRow, error: string): void {
  row.status = "pending";
  row.busy = false;
  row.error = error;
}

/** The propagate toggle only makes sense when the change occurs elsewhere. */
export function canPropagate(row: DiffRow): boolean {
  return row.count > 1;
}

export function pendingRows(group: ElementGroup): DiffRow[] {
  return group.rows.filter((row) => row.status === "pending" && !row.busy);
}

export function isResolved(group: ElementGroup): boolean {
  return group.rows.every((row) => row.status !== "pending");
}

/**
 * Element context (type plus displayed attributes) for a card, looked up
 * in the stored reports by occurrence coordinates.
 */
export function elementContext(reports: Report[], occurrence: Occurrence) {
  for (const report of reports) {
    if (report.test_id !== occurrence.test_id || report.step_name !== occurrence.step_name) {
      continue;
    }
    for (const pair of report.attribute_diffs) {
      if (pair.handle === occurrence.handle) return pair.element;
    }
  }
  return null;
}
