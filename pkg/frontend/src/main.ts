/**
 * DOM wiring for the curation client. Two panels: the labeling grid and
 * the review queue; a status bar shows counts and validation metrics.
 */

import { ApiClient } from "./api.js";
import { actionForKey } from "./keyboard.js";
import { LabelGrid } from "./labelGrid.js";
import type { ReviewQueue } from "./reviewQueue.js";
import { correct, loadReviewQueue, runTraining } from "./trainFlow.js";

const api = new ApiClient("");
const grid = new LabelGrid(api);
let queue: ReviewQueue | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderGrid(): void {
  const container = el<HTMLDivElement>("grid");
  container.innerHTML = "";
  grid.samples.forEach((sample, i) => {
    const tile = document.createElement("figure");
    tile.className = "tile" + (i === grid.focus ? " focused" : "");
    tile.dataset.label = sample.label;
    const img = document.createElement("img");
    img.src = api.imageUrl(sample.id);
    img.alt = sample.path;
    const caption = document.createElement("figcaption");
    caption.textContent = `#${sample.id} ${sample.label}`
      + (grid.failed.has(sample.id) ? " (retry!)" : "");
    tile.append(img, caption);
    tile.addEventListener("click", () => {
      grid.focus = i;
      renderGrid();
    });
    container.append(tile);
  });
  void renderCounts();
}

async function renderCounts(): Promise<void> {
  const counts = await grid.counts();
  el("counts").textContent =
    `${counts.labeled} labeled / ${counts.unlabeled} unlabeled`;
}

function renderQueue(): void {
  const current = queue?.current() ?? null;
  const panel = el<HTMLDivElement>("review");
  if (!queue || current === null) {
    panel.hidden = true;
    return;
  }
  panel.hidden = false;
  el("review-status").textContent =
    `${queue.remaining} of ${queue.length} left, margin ${current.margin}, ` +
    `predicted ${current.predicted}`;
  el<HTMLImageElement>("review-image").src =
    current.id === null ? "" : api.imageUrl(current.id);
}

async function onTrainClick(): Promise<void> {
  const status = el("train-status");
  status.textContent = "training...";
  try {
    const job = await runTraining(api, 21, 0);
    const v = job.validation;
    status.textContent =
      `validation sensitivity ${v?.sensitivity?.toFixed(3) ?? "n/a"}, ` +
      `specificity ${v?.specificity?.toFixed(3) ?? "n/a"}`;
    await api.classify();
    queue = await loadReviewQueue(api, el<HTMLInputElement>("positives-only").checked);
    renderQueue();
  } catch (err) {
    status.textContent = err instanceof Error ? err.message : String(err);
  }
}

async function onReviewKey(label: "particle" | "non_particle" | null): Promise<void> {
  if (!queue) return;
  const current = queue.current();
  if (!current) return;
  if (label !== null) {
    await correct(api, current, label);
    void renderCounts();
  }
  queue.advance();
  renderQueue();
}

function onKeyDown(event: KeyboardEvent): void {
  if (event.target instanceof HTMLInputElement) return;
  const action = actionForKey(event.key);
  if (!action) return;
  event.preventDefault();
  const reviewing = queue !== null && queue.current() !== null && !el("review").hidden;
  if (action.kind === "move") {
    grid.moveFocus(action.delta);
    renderGrid();
  } else if (action.kind === "skip") {
    if (reviewing) void onReviewKey(null);
  } else if (reviewing) {
    void onReviewKey(action.label);
  } else {
    void grid.labelFocused(action.label).then(renderGrid, renderGrid);
  }
}

async function start(): Promise<void> {
  await grid.loadPage(0);
  renderGrid();
  el("train").addEventListener("click", () => void onTrainClick());
  el("prev-page").addEventListener("click", () => {
    void grid.loadPage(Math.max(0, grid.offset - grid.pageSize)).then(renderGrid);
  });
  el("next-page").addEventListener("click", () => {
    void grid.loadPage(grid.offset + grid.pageSize).then(renderGrid);
  });
  window.addEventListener("keydown", onKeyDown);
}

void start();
