import { HttpApiClient } from "./api.js";
import { renderExplanation, esc } from "./render.js";
import { ExplorerStore } from "./state.js";
import type { InstanceRow, MetaPayload } from "./types.js";

// Browser bootstrap: wires DOM controls to the store and repaints the
// explanation pane on every state change. All logic lives in the store
// and the pure renderers.

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const client = new HttpApiClient("");
  const store = new ExplorerStore(client, 0);

  const meta: MetaPayload = await client.meta();
  const instances = await client.instances(0, 200);

  const rowSelect = el<HTMLSelectElement>("row-select");
  rowSelect.innerHTML = instances.rows
    .map((row: InstanceRow) => {
      const predicted = meta.class_names[row.prediction] ?? `#${row.prediction}`;
      return `<option value="${row.index}">row ${row.index} (predicted ${esc(predicted)})</option>`;
    })
    .join("");

  const partitionSelect = el<HTMLSelectElement>("partition-select");
  partitionSelect.innerHTML = Object.keys(meta.partitions)
    .sort()
    .map((name) => `<option value="${esc(name)}">${esc(name)}</option>`)
    .join("");
  partitionSelect.value = "singletons";

  const modeSelect = el<HTMLSelectElement>("mode-select");
  const tauSlider = el<HTMLInputElement>("tau-slider");
  const tauValue = el<HTMLSpanElement>("tau-value");
  const pane = el<HTMLDivElement>("explanation");

  store.subscribe((state) => {
    tauValue.textContent = state.tau.toFixed(1);
    pane.classList.toggle("loading", state.loading);
    pane.innerHTML = renderExplanation(state);
  });

  rowSelect.addEventListener("change", () => {
    void store.selectRow(Number(rowSelect.value));
  });
  partitionSelect.addEventListener("change", () => {
    void store.setPartition(partitionSelect.value);
  });
  modeSelect.addEventListener("change", () => {
    void store.setMode(modeSelect.value as "sequential" | "oneshot");
  });
  tauSlider.addEventListener("input", () => {
    store.setTau(Number(tauSlider.value));
  });
  pane.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.step !== undefined) {
      store.setStep(Number(target.dataset.step));
    } else if (target.dataset.action === "retry") {
      void store.retry();
    }
  });

  if (instances.rows.length > 0 && instances.rows[0]) {
    rowSelect.value = String(instances.rows[0].index);
    await store.selectRow(instances.rows[0].index);
  }
}

boot().catch((error) => {
  const pane = document.getElementById("explanation");
  if (pane) {
    pane.innerHTML = `<div class="error-card">failed to reach the service: ${esc(String(error))}</div>`;
  }
});
