// Page wiring: upload a CSV, pick a group-by column, browse recommendations
// and pivot between references.  Everything statistical comes back from the
// service; this file only moves JSON into DOM.

import { DatasetHandle, ServiceClient } from "./api.js";
import { ExplorerState } from "./state.js";
import {
  renderComparison,
  renderRecommendationList,
  renderReferenceOnly,
} from "./render.js";

const SERVICE_URL = (window as { VIZREC_SERVICE_URL?: string } & Window).VIZREC_SERVICE_URL ?? "http://localhost:8000";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function startApp(): void {
  const client = new ServiceClient(SERVICE_URL);
  let handle: DatasetHandle | null = null;
  let state: ExplorerState | null = null;
  let selected = 0;

  const status = el<HTMLElement>("status");
  const listPane = el<HTMLElement>("recommendations");
  const chartPane = el<HTMLElement>("chart");
  const groupBySelect = el<HTMLSelectElement>("group-by");
  const backButton = el<HTMLButtonElement>("back");

  function redraw(): void {
    if (!state || !state.current) return;
    const { current } = state;
    status.textContent = state.notice ?? `${current.recommendations.length} safe recommendations (${current.n_candidates} candidates, ${current.tarone_excluded} zero-support)`;
    listPane.innerHTML = renderRecommendationList(current.recommendations);
    const rec = current.recommendations[selected];
    chartPane.innerHTML = rec
      ? renderComparison(current.reference, rec)
      : renderReferenceOnly(current.reference);
    backButton.disabled = !state.canGoBack;
    for (const btn of listPane.querySelectorAll<HTMLButtonElement>("button.pivot")) {
      btn.addEventListener("click", () => {
        const target = current.recommendations[Number(btn.dataset.index)];
        selected = 0;
        void state!.pivotTo(target).catch((err) => {
          status.textContent = String(err);
        });
      });
    }
    for (const item of listPane.querySelectorAll<HTMLElement>("li.rec")) {
      item.addEventListener("click", () => {
        selected = Number(item.dataset.index);
        redraw();
      });
    }
  }

  el<HTMLFormElement>("upload-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const input = el<HTMLInputElement>("csv-file");
    const file = input.files?.[0];
    if (!file) return;
    const vcRaw = el<HTMLInputElement>("vc-dimension").value.trim();
    const config: Record<string, unknown> = {};
    if (vcRaw) config.vc_dimension = Number(vcRaw);
    status.textContent = "uploading...";
    void client
      .uploadDataset(file, config)
      .then((h) => {
        handle = h;
        status.textContent = `dataset ${h.id}: n=${h.n}, d=${h.d}`;
        groupBySelect.innerHTML = Object.keys(h.schema)
          .map((c) => `<option value="${c}">${c}</option>`)
          .join("");
      })
      .catch((err) => {
        status.textContent = String(err);
      });
  });

  el<HTMLButtonElement>("explore").addEventListener("click", () => {
    if (!handle) {
      status.textContent = "upload a dataset first";
      return;
    }
    const deltaRaw = el<HTMLInputElement>("delta").value.trim();
    state = new ExplorerState(
      client,
      handle.id,
      groupBySelect.value,
      deltaRaw ? { delta: Number(deltaRaw) } : {},
      redraw,
    );
    selected = 0;
    void state.refresh().catch((err) => {
      status.textContent = String(err);
    });
  });

  backButton.addEventListener("click", () => {
    selected = 0;
    void state?.back();
  });
}

if (typeof document !== "undefined" && document.getElementById("upload-form")) {
  startApp();
}
