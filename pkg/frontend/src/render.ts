// DOM rendering for the queue grid and the triage view. No framework: the
// state is small and rerendered wholesale on change.

import { ReviewApi } from "./api.js";
import { QueueState, effectiveLabel, pageCount } from "./state.js";
import type { PendingItem, SourceSummary, Verdict } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function verdictBadgeText(v: Verdict): string {
  const value = Number.isFinite(v.measured) ? v.measured.toFixed(2) : String(v.measured);
  return v.passed ? `${v.filter} ${value} ok` : `${v.filter} ${value} violates ${v.threshold}`;
}

function badges(item: PendingItem): HTMLElement {
  const wrap = el("div", "badges");
  for (const v of item.verdicts) {
    wrap.appendChild(el("span", v.passed ? "badge pass" : "badge fail", verdictBadgeText(v)));
  }
  if (item.ssim !== null) {
    const passed = item.kept;
    wrap.appendChild(
      el("span", passed ? "badge pass" : "badge fail ssim-fail", `ssim ${item.ssim.toFixed(4)}`),
    );
  }
  return wrap;
}

export function renderQueue(
  root: HTMLElement,
  state: QueueState,
  api: ReviewApi,
  onCardClick: (index: number) => void,
): void {
  root.replaceChildren();

  if (state.banner) {
    root.appendChild(el("div", state.apiDown ? "banner error" : "banner warn", state.banner));
  }

  const pages = pageCount(state.total, state.size);
  root.appendChild(
    el(
      "div",
      "pager",
      `page ${state.page}/${Math.max(pages, 1)} of ${state.total} pending  [g]=good [b]=bad [s]=skip [n/p]=page`,
    ),
  );

  const grid = el("div", "grid");
  state.items.forEach((item, index) => {
    const card = el("div", index === state.focus ? "card focus" : "card");
    if (state.apiDown) card.classList.add("disabled");
    const img = el("img");
    img.src = api.cropUrl(item.id);
    img.alt = item.id;
    card.appendChild(img);
    card.appendChild(el("div", "cardid", item.id));
    const label = effectiveLabel(state, item);
    const unacked = item.id in state.pending;
    if (label) {
      card.appendChild(
        el("div", `label ${label}${unacked ? " unacked" : ""}`, unacked ? `${label}?` : label),
      );
    }
    card.appendChild(badges(item));
    card.addEventListener("click", () => onCardClick(index));
    grid.appendChild(card);
  });
  root.appendChild(grid);
}

export function renderTriage(
  root: HTMLElement,
  sources: SourceSummary[],
  items: PendingItem[],
  selected: string | null,
  api: ReviewApi,
  onPick: (source: string) => void,
): void {
  root.replaceChildren();

  const picker = el("div", "sources");
  for (const s of sources) {
    const button = el(
      "button",
      s.id === selected ? "source picked" : "source",
      `${s.id} (${s.n_post_nms} cand, ${s.n_records} kept)`,
    );
    button.addEventListener("click", () => onPick(s.id));
    picker.appendChild(button);
  }
  root.appendChild(picker);

  const list = el("div", "triage");
  for (const item of items) {
    const gateFailed = item.ssim !== null && !item.kept;
    const row = el("div", gateFailed ? "trow struck" : "trow");
    const img = el("img");
    img.src = api.cropUrl(item.id);
    img.alt = item.id;
    row.appendChild(img);
    const body = el("div", "tbody");
    body.appendChild(el("div", "cardid", `${item.id}${item.kept ? "  [kept]" : ""}`));
    body.appendChild(badges(item));
    row.appendChild(body);
    list.appendChild(row);
  }
  root.appendChild(list);
}
