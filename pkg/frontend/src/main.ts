import { ApiClient } from "./api.js";
import { ExplorerApp } from "./app.js";

function grab<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

window.addEventListener("DOMContentLoaded", () => {
  const params = new URLSearchParams(location.search);
  const api = new ApiClient(params.get("service") ?? "http://127.0.0.1:8710");
  const app = new ExplorerApp(api, grab<HTMLCanvasElement>("view"), {
    vSlider: grab<HTMLInputElement>("v-slider"),
    kSlider: grab<HTMLInputElement>("k-slider"),
    systemToggle: grab<HTMLSelectElement>("system"),
    sheetToggle: grab<HTMLSelectElement>("sheet"),
    toggles: {
      orbits: grab<HTMLInputElement>("toggle-orbits"),
      heatmap: grab<HTMLInputElement>("toggle-heatmap"),
      periodic: grab<HTMLInputElement>("toggle-periodic"),
      manifolds: grab<HTMLInputElement>("toggle-manifolds"),
      singularities: grab<HTMLInputElement>("toggle-singularities"),
    },
    readout: grab("readout"),
    toast: grab("toast"),
    events: grab("events"),
    scanButton: grab<HTMLButtonElement>("scan"),
    clearButton: grab<HTMLButtonElement>("clear"),
  });
  (window as unknown as { explorer: ExplorerApp }).explorer = app;
});
