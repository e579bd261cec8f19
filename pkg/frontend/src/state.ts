// Pure queue state. The server is the source of truth; an optimistic label
// lives in `pending` until the POST is acked, and a failed ack surfaces in
// the banner instead of being dropped silently.

import type { Label, PendingFilter, PendingItem, PendingPage } from "./types.js";

export interface QueueState {
  items: PendingItem[];
  page: number;
  size: number;
  total: number;
  focus: number;
  pending: Record<string, Label>;
  banner: string | null;
  filter: PendingFilter;
  apiDown: boolean;
}

export function initialState(size = 12, filter: PendingFilter = "unlabeled"): QueueState {
  return {
    items: [],
    page: 1,
    size,
    total: 0,
    focus: 0,
    pending: {},
    banner: null,
    filter,
    apiDown: false,
  };
}

export function pageCount(total: number, size: number): number {
  return size > 0 ? Math.ceil(total / size) : 0;
}

export function queueLoaded(state: QueueState, page: PendingPage): QueueState {
  const focus = Math.min(state.focus, Math.max(0, page.items.length - 1));
  return {
    ...state,
    items: page.items,
    page: page.page,
    size: page.size,
    total: page.total,
    focus,
    apiDown: false,
  };
}

export function moveFocus(state: QueueState, delta: number): QueueState {
  if (state.items.length === 0) return state;
  const focus = Math.max(0, Math.min(state.items.length - 1, state.focus + delta));
  return { ...state, focus };
}

export function focusedItem(state: QueueState): PendingItem | null {
  return state.items[state.focus] ?? null;
}

export function labelRequested(state: QueueState, id: string, label: Label): QueueState {
  return { ...state, pending: { ...state.pending, [id]: label }, banner: null };
}

export function labelAcked(state: QueueState, id: string, label: Label): QueueState {
  const pending = { ...state.pending };
  delete pending[id];
  const items = state.items.map((item) => (item.id === id ? { ...item, label } : item));
  return { ...state, items, pending, apiDown: false };
}

export function labelFailed(state: QueueState, id: string, message: string): QueueState {
  const pending = { ...state.pending };
  delete pending[id];
  return {
    ...state,
    pending,
    banner: `label for ${id} was NOT saved: ${message}`,
  };
}

export function apiWentDown(state: QueueState, message: string): QueueState {
  return { ...state, apiDown: true, banner: message };
}

export function bannerCleared(state: QueueState): QueueState {
  return { ...state, banner: null };
}

/** What the UI should display for an item: optimistic label wins until ack. */
export function effectiveLabel(state: QueueState, item: PendingItem): Label | null {
  return state.pending[item.id] ?? item.label;
}

export function hasUnacked(state: QueueState): boolean {
  return Object.keys(state.pending).length > 0;
}
