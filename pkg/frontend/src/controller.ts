import { ApiError, ReviewApi } from "./api.js";
import { actionForKey } from "./keyboard.js";
import {
  QueueState,
  apiWentDown,
  focusedItem,
  initialState,
  labelAcked,
  labelFailed,
  labelRequested,
  moveFocus,
  pageCount,
  queueLoaded,
} from "./state.js";
import type { Label, PendingFilter } from "./types.js";

/** Drives the labeling queue: key events in, API calls out, state to render. */
export class QueueController {
  state: QueueState;

  constructor(
    private readonly api: ReviewApi,
    private readonly onChange: (state: QueueState) => void = () => {},
    private readonly annotator: string = "reviewer",
    size = 12,
    filter: PendingFilter = "unlabeled",
  ) {
    this.state = initialState(size, filter);
  }

  private update(next: QueueState): void {
    this.state = next;
    this.onChange(next);
  }

  async load(page = 1): Promise<void> {
    try {
      const data = await this.api.pending(page, this.state.size, this.state.filter);
      this.update(queueLoaded(this.state, data));
    } catch (err) {
      this.update(apiWentDown(this.state, describe(err)));
    }
  }

  async handleKey(key: string): Promise<void> {
    const action = actionForKey(key);
    if (action === null || this.state.apiDown) return;
    switch (action.kind) {
      case "label":
        await this.labelFocused(action.label);
        break;
      case "skip":
        this.update(moveFocus(this.state, 1));
        break;
      case "prev":
        this.update(moveFocus(this.state, -1));
        break;
      case "next-page":
        if (this.state.page < pageCount(this.state.total, this.state.size)) {
          await this.load(this.state.page + 1);
        }
        break;
      case "prev-page":
        if (this.state.page > 1) {
          await this.load(this.state.page - 1);
        }
        break;
    }
  }

  /** Optimistic label: pending immediately, reconciled on the server ack. */
  async labelFocused(label: Label): Promise<void> {
    const item = focusedItem(this.state);
    if (item === null) return;
    this.update(labelRequested(this.state, item.id, label));
    try {
      await this.api.submitLabel(item.id, label, this.annotator);
      this.update(moveFocus(labelAcked(this.state, item.id, label), 1));
    } catch (err) {
      let next = labelFailed(this.state, item.id, describe(err));
      if (err instanceof ApiError && err.status === 0) {
        next = apiWentDown(next, next.banner ?? "API unreachable");
      }
      this.update(next);
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status === 0 ? err.message : `HTTP ${err.status}: ${err.message}`;
  }
  return String(err);
}
