// Client-side page state for one view. The server's ViewState is the only
// source of truth; the page layer adds stream-resume bookkeeping and
// optimistic button disabling between a click and the refreshed state.

import { EventRecord, ViewState } from "./types.js";

export interface ViewPage {
  state: ViewState;
  lastEventId: string | null;
  pending: ReadonlySet<string>; // actions optimistically disabled
}

export function toPage(state: ViewState, lastEventId: string | null = null): ViewPage {
  return { state, lastEventId, pending: new Set() };
}

export function optimisticDisable(page: ViewPage, action: string): ViewPage {
  const pending = new Set(page.pending);
  pending.add(action);
  return { ...page, pending };
}

export function applyServerState(
  page: ViewPage,
  state: ViewState,
  lastEventId: string | null = page.lastEventId,
): ViewPage {
  return { state, lastEventId, pending: new Set() };
}

// A button renders enabled only when the server said so and no click on it
// is in flight.
export function buttonEnabled(page: ViewPage, action: string): boolean {
  const control = page.state.controls.find((c) => c.property === action);
  return !!control && control.enabled && !page.pending.has(action);
}

export function enabledSet(page: ViewPage): string[] {
  return page.state.controls
    .filter((c) => buttonEnabled(page, c.property))
    .map((c) => c.property);
}

// Refetch policy: an event is relevant when it lands on the viewed
// individual or on any individual one of its relation rows points at
// (the location's fire state flips cook availability, for example).
export function affectsPage(
  page: ViewPage,
  record: EventRecord,
  ownerOf: (record: EventRecord) => string | null,
): boolean {
  const individual = page.state.individual;
  if (!individual) return false;
  const owner = ownerOf(record);
  if (owner === null) return false;
  if (owner === individual) return true;
  return page.state.rows.some(
    (row) => typeof row.value === "string" && row.value === owner,
  );
}
