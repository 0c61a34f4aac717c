/** Client-side session state: append-only estimate histories and label audit. */

import type { EstimatesPage, EstimateRow, SessionResource } from "./api";

export interface SessionState {
  resource: SessionResource | null;
  /** Per-bin append-only history, merged from paginated fetches. */
  history: Map<string, EstimateRow[]>;
  /** Next page index to request from /estimates. */
  next: number;
  /** Vertices labeled through this client, in order. */
  labeled: number[];
  stopped: boolean;
}

export function emptyState(): SessionState {
  return {
    resource: null,
    history: new Map(),
    next: 0,
    labeled: [],
    stopped: false,
  };
}

export function applyResource(
  state: SessionState,
  resource: SessionResource,
): void {
  if (state.resource && resource.labels_used < state.resource.labels_used) {
    throw new Error("labels_used went backwards; stale response");
  }
  state.resource = resource;
}

/** Record a label submitted by the user; enforces the label-once contract. */
export function recordLabel(state: SessionState, vertex: number): void {
  if (state.labeled.includes(vertex)) {
    throw new Error(`vertex ${vertex} was already labeled by this client`);
  }
  state.labeled.push(vertex);
}

/**
 * Merge one estimates page into the history. Rows must continue each bin's
 * history exactly where it left off (append-only contract); overlapping rows
 * must match what is already stored.
 */
export function mergePage(state: SessionState, page: EstimatesPage): void {
  for (const [bin, rows] of Object.entries(page.bins)) {
    const have = state.history.get(bin) ?? [];
    for (const row of rows) {
      if (row.index < have.length) {
        const prior = have[row.index];
        if (
          prior.labels_used !== row.labels_used ||
          prior.k !== row.k ||
          prior.estimate !== row.estimate
        ) {
          throw new Error(`bin ${bin} history rewritten at index ${row.index}`);
        }
        continue;
      }
      if (row.index > have.length) {
        throw new Error(
          `bin ${bin} history gap: got index ${row.index}, expected ${have.length}`,
        );
      }
      have.push(row);
    }
    state.history.set(bin, have);
  }
  if (page.next < state.next) {
    throw new Error("pagination cursor went backwards");
  }
  state.next = page.next;
}

/** Rows currently charted for one bin (estimate present). */
export function chartRows(state: SessionState, bin: string): EstimateRow[] {
  return (state.history.get(bin) ?? []).filter((r) => r.estimate !== null);
}

/** Plain-object export of everything the client saw, for download. */
export function exportReport(state: SessionState): object {
  return {
    session: state.resource,
    labeled: state.labeled,
    history: Object.fromEntries(state.history),
  };
}
