import { ReviewApi } from "./api.js";
import { QueueController } from "./controller.js";
import { renderQueue, renderTriage } from "./render.js";
import type { PendingFilter } from "./types.js";

const api = new ReviewApi("");
const queueRoot = document.getElementById("queue")!;
const triageRoot = document.getElementById("triage")!;
const tabs = Array.from(document.querySelectorAll<HTMLButtonElement>("[data-tab]"));

let activeTab = "queue";
let triageSource: string | null = null;

const controller = new QueueController(api, (state) => {
  renderQueue(queueRoot as HTMLElement, state, api, (index) => {
    const delta = index - state.focus;
    if (delta !== 0) void controller.handleKey(delta > 0 ? "ArrowRight" : "ArrowLeft");
  });
});

async function showTriage(): Promise<void> {
  try {
    const sources = await api.sources();
    if (triageSource === null && sources.length > 0) triageSource = sources[0].id;
    const data = await api.triage(triageSource ?? undefined);
    renderTriage(triageRoot as HTMLElement, sources, data.items, triageSource, api, (src) => {
      triageSource = src;
      void showTriage();
    });
  } catch (err) {
    triageRoot.textContent = `triage unavailable: ${String(err)}`;
  }
}

function switchTab(name: string): void {
  activeTab = name;
  queueRoot.style.display = name === "queue" ? "" : "none";
  triageRoot.style.display = name === "triage" ? "" : "none";
  for (const tab of tabs) {
    tab.classList.toggle("picked", tab.dataset.tab === name);
  }
  if (name === "triage") void showTriage();
}

for (const tab of tabs) {
  tab.addEventListener("click", () => switchTab(tab.dataset.tab!));
}

const filterSelect = document.getElementById("filter") as HTMLSelectElement | null;
filterSelect?.addEventListener("change", () => {
  const value = (filterSelect.value as PendingFilter) || "unlabeled";
  controller.state.filter = value;
  void controller.load(1);
});

document.addEventListener("keydown", (event) => {
  if (activeTab !== "queue") return;
  if (event.target instanceof HTMLInputElement || event.target instanceof HTMLSelectElement) {
    return;
  }
  void controller.handleKey(event.key);
});

switchTab("queue");
void controller.load(1);
