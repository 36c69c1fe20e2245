/**
 * Explorer wiring: canvas rendering, click-to-seed, parameter sliders with
 * debounce and progressive heatmap refresh, overlay management with
 * request-token staleness control, and the tangency events panel.
 */

import { ApiClient, ChaosResponse, OrbitResponse, ServiceError,
         TangencyEventRecord } from "./api.js";
import { ViewState, clampV, clampK, decodeHash, encodeHash } from "./state.js";
import { RequestTokens } from "./tokens.js";
import { canvasToChart, chartToCanvas, zoomAbout } from "./transform.js";

const SEED_COLORS = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
                     "#a65628", "#f781bf", "#17becf"];
const SINGULARITIES: [number, number][] = [[1, 1], [-1, -1], [1, -1], [-1, 1]];
const DEBOUNCE_MS = 150;
const ORBIT_N = 10_000;

interface Overlays {
  orbits: Map<number, { seed: number[]; color: string; resp: OrbitResponse }>;
  heatmap: ChaosResponse | null;
  manifolds: { side: string; polyline: number[][] }[];
  periodicPoints: number[][];
  suggestion: number[] | null;
  events: TangencyEventRecord[];
}

export class ExplorerApp {
  state: ViewState;
  readonly tokens = new RequestTokens();
  private overlays: Overlays = {
    orbits: new Map(), heatmap: null, manifolds: [], periodicPoints: [],
    suggestion: null, events: [],
  };
  private sliderTimer: number | undefined;
  private nextSeedId = 0;

  constructor(
    readonly api: ApiClient,
    readonly canvas: HTMLCanvasElement,
    readonly ui: {
      vSlider: HTMLInputElement;
      kSlider: HTMLInputElement;
      systemToggle: HTMLSelectElement;
      sheetToggle: HTMLSelectElement;
      toggles: Record<string, HTMLInputElement>;
      readout: HTMLElement;
      toast: HTMLElement;
      events: HTMLElement;
      scanButton: HTMLButtonElement;
      clearButton: HTMLButtonElement;
    },
  ) {
    this.state = decodeHash(location.hash, canvas.width, canvas.height);
    this.bind();
    this.syncControls();
    this.refreshAll();
  }

  private bind(): void {
    this.canvas.addEventListener("click", (ev) => {
      const rect = this.canvas.getBoundingClientRect();
      void this.clickToSeed(ev.clientX - rect.left, ev.clientY - rect.top);
    });
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const rect = this.canvas.getBoundingClientRect();
      const factor = ev.deltaY < 0 ? 1.25 : 0.8;
      this.state.viewport = zoomAbout(
        this.state.viewport, ev.clientX - rect.left, ev.clientY - rect.top, factor);
      this.pushHash();
      this.render();
    });
    const onSlide = () => this.slideParameter();
    this.ui.vSlider.addEventListener("input", onSlide);
    this.ui.kSlider.addEventListener("input", onSlide);
    this.ui.systemToggle.addEventListener("change", () => {
      this.state.system = this.ui.systemToggle.value as "trace" | "standard";
      this.clearOverlays();
      this.pushHash();
      this.refreshAll();
    });
    this.ui.sheetToggle.addEventListener("change", () => {
      this.state.sheet = this.ui.sheetToggle.value as "upper" | "lower";
      this.refreshAll();
    });
    for (const [name, el] of Object.entries(this.ui.toggles)) {
      el.addEventListener("change", () => {
        (this.state.overlays as Record<string, boolean>)[name] = el.checked;
        this.pushHash();
        this.refreshAll();
      });
    }
    this.ui.scanButton.addEventListener("click", () => void this.runTangencyScan());
    this.ui.clearButton.addEventListener("click", () => {
      this.state.seeds = [];
      this.clearOverlays();
      this.pushHash();
      this.render();
    });
  }

  private syncControls(): void {
    this.ui.vSlider.value = String(this.state.V);
    this.ui.kSlider.value = String(this.state.k);
    this.ui.systemToggle.value = this.state.system;
    this.ui.sheetToggle.value = this.state.sheet;
    for (const [name, el] of Object.entries(this.ui.toggles)) {
      el.checked = (this.state.overlays as Record<string, boolean>)[name];
    }
  }

  private pushHash(): void {
    history.replaceState(null, "", encodeHash(this.state));
  }

  private system() {
    return this.state.system === "trace"
      ? { kind: "trace" as const, V: this.state.V }
      : { kind: "standard" as const, k: this.state.k };
  }

  private toast(msg: string): void {
    this.ui.toast.textContent = msg;
    this.ui.toast.classList.add("visible");
    window.setTimeout(() => this.ui.toast.classList.remove("visible"), 4000);
  }

  /** Convert a canvas click to chart coordinates and request an orbit. */
  async clickToSeed(px: number, py: number): Promise<void> {
    const [x, y] = canvasToChart(this.state.viewport, px, py);
    const color = SEED_COLORS[this.state.seeds.length % SEED_COLORS.length];
    this.state.seeds.push({ x, y, color });
    this.pushHash();
    const id = this.nextSeedId++;
    const token = this.tokens.issue("orbit");
    try {
      const resp = await this.api.orbit(this.system(), [x, y], ORBIT_N,
                                        this.state.sheet);
      if (!this.tokens.isCurrent("orbit", token)) return;
      this.overlays.orbits.set(id, { seed: [x, y], color, resp });
      this.overlays.suggestion = null;
      const badge = resp.lyapunov_applicable && resp.lyapunov !== null
        ? `lyapunov ${resp.lyapunov.toFixed(4)}`
        : "lyapunov n/a (fixed point)";
      this.ui.readout.textContent =
        `seed (${x.toFixed(4)}, ${y.toFixed(4)}): ${badge}, ` +
        `drift ${resp.max_drift.toExponential(1)}`;
    } catch (err) {
      const e = err as ServiceError;
      const detail = (e.body as { detail?: { suggestion?: number[] } })?.detail;
      if (e.status === 422 && detail?.suggestion) {
        this.overlays.suggestion = detail.suggestion;
        this.toast("off-surface click: showing projected suggestion");
      } else {
        this.toast(`orbit request failed (${e.status ?? "network"}): `
                   + JSON.stringify(e.body ?? ""));
      }
    }
    this.render();
  }

  /** Debounced parameter slide: preview-resolution heatmap first, then full. */
  slideParameter(): void {
    this.state.V = clampV(Number(this.ui.vSlider.value));
    this.state.k = clampK(Number(this.ui.kSlider.value));
    this.pushHash();
    if (this.sliderTimer !== undefined) window.clearTimeout(this.sliderTimer);
    this.sliderTimer = window.setTimeout(() => void this.refreshAll(), DEBOUNCE_MS);
  }

  private clearOverlays(): void {
    this.overlays.orbits.clear();
    this.overlays.heatmap = null;
    this.overlays.manifolds = [];
    this.overlays.periodicPoints = [];
    this.overlays.suggestion = null;
  }

  /** Reissue every visible overlay against the current parameters. */
  async refreshAll(): Promise<void> {
    this.clearOverlays();
    this.render();
    const jobs: Promise<unknown>[] = [];
    if (this.state.overlays.heatmap) jobs.push(this.refreshHeatmap());
    if (this.state.overlays.orbits) jobs.push(this.replaySeeds());
    if (this.state.overlays.manifolds || this.state.overlays.periodic) {
      jobs.push(this.refreshManifolds());
    }
    await Promise.allSettled(jobs);
    this.render();
  }

  private async replaySeeds(): Promise<void> {
    const token = this.tokens.issue("orbit");
    const entries = this.state.seeds.slice(-8);
    const results = await Promise.allSettled(entries.map((s) =>
      this.api.orbit(this.system(), [s.x, s.y], ORBIT_N, this.state.sheet)));
    if (!this.tokens.isCurrent("orbit", token)) return;
    this.overlays.orbits.clear();
    results.forEach((r, i) => {
      if (r.status === "fulfilled") {
        this.overlays.orbits.set(this.nextSeedId++, {
          seed: [entries[i].x, entries[i].y],
          color: entries[i].color,
          resp: r.value,
        });
      }
    });
    this.render();
  }

  private async refreshHeatmap(): Promise<void> {
    const preview = this.tokens.issue("heatmap-preview");
    const full = this.tokens.issue("heatmap");
    try {
      const lo = await this.api.chaos(this.system(), 64, 400, this.state.sheet);
      if (this.tokens.isCurrent("heatmap-preview", preview)
          && this.tokens.isCurrent("heatmap", full)) {
        this.overlays.heatmap = lo;
        this.render();
      }
      const hi = await this.api.chaos(this.system(), 160, 1500, this.state.sheet);
      if (this.tokens.isCurrent("heatmap", full)) {
        this.overlays.heatmap = hi;
        this.render();
      }
    } catch (err) {
      this.toast("heatmap request failed: " + JSON.stringify(
        (err as ServiceError).body ?? ""));
    }
  }

  private async refreshManifolds(): Promise<void> {
    if (this.state.system !== "trace") return;
    const token = this.tokens.issue("manifold");
    try {
      const sides = this.state.overlays.manifolds ? ["Unstable", "Stable"] : [];
      const results = [];
      for (const side of sides) {
        results.push(await this.api.manifold(
          this.state.V, 2, [0.3, -0.8, 0.3], side, 6.0));
      }
      if (!this.tokens.isCurrent("manifold", token)) return;
      this.overlays.manifolds = results.map((r) => ({
        side: r.side, polyline: r.polyline,
      }));
      if (results.length && this.state.overlays.periodic) {
        this.overlays.periodicPoints = results[0].orbit.points;
      }
    } catch (err) {
      const e = err as ServiceError;
      this.toast(`manifold request failed (${e.status}): the orbit may not be
 hyperbolic at this V`.replace("\n", ""));
    }
  }

  async runTangencyScan(): Promise<void> {
    const vmax = Math.min(-0.01, this.state.V + 0.02);
    const vmin = vmax - 0.04;
    this.ui.events.textContent = `scanning V in [${vmin.toFixed(3)}, ${vmax.toFixed(3)}]...`;
    const token = this.tokens.issue("scan");
    try {
      const jobId = await this.api.startTangencyScan(vmin, vmax);
      for (;;) {
        await new Promise((res) => setTimeout(res, 1500));
        if (!this.tokens.isCurrent("scan", token)) return;
        const status = await this.api.pollJob(jobId);
        if (status.status === "done") {
          this.overlays.events = status.result ?? [];
          this.renderEvents();
          return;
        }
        if (status.status === "error") {
          this.ui.events.textContent = "scan failed: " + status.error;
          return;
        }
      }
    } catch (err) {
      this.ui.events.textContent = "scan failed: "
        + JSON.stringify((err as ServiceError).body ?? "");
    }
  }

  private renderEvents(): void {
    const panel = this.ui.events;
    panel.textContent = "";
    if (!this.overlays.events.length) {
      panel.textContent = "no tangency events in the scanned window";
      return;
    }
    for (const ev of this.overlays.events) {
      const row = document.createElement("button");
      row.className = "event-row";
      row.textContent =
        `V* = ${ev.V.toFixed(7)}  gap ${(ev.c_u - ev.c_s).toFixed(2)}  `
        + `speed ${(ev.speed ?? 0).toFixed(3)}`;
      row.addEventListener("click", () => {
        // jump-to-location: recenter on the event and slide V there
        this.state.viewport.centerX = ev.point[0];
        this.state.viewport.centerY = ev.point[1];
        this.state.viewport.unitsPerPixel /= 4;
        this.state.V = clampV(ev.V);
        this.syncControls();
        this.pushHash();
        void this.refreshAll();
      });
      panel.appendChild(row);
    }
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const vp = this.state.viewport;
    ctx.fillStyle = "#101018";
    ctx.fillRect(0, 0, vp.widthPx, vp.heightPx);
    if (this.overlays.heatmap) this.drawHeatmap(ctx, this.overlays.heatmap);
    if (this.state.overlays.orbits) this.drawOrbits(ctx);
    if (this.state.overlays.manifolds) this.drawManifolds(ctx);
    if (this.state.overlays.periodic) this.drawPeriodic(ctx);
    if (this.state.overlays.singularities && this.state.system === "trace") {
      this.drawSingularities(ctx);
    }
    if (this.overlays.suggestion) this.drawSuggestion(ctx);
  }

  private drawHeatmap(ctx: CanvasRenderingContext2D, hm: ChaosResponse): void {
    const res = hm.metadata.res;
    const vp = this.state.viewport;
    const domain = this.state.system === "trace" ? [-1, 1] : [0, 1];
    const img = ctx.createImageData(res, res);
    let maxLam = 1e-9;
    for (const v of hm.lyapunov) if (v > maxLam) maxLam = v;
    for (let i = 0; i < res; i++) {
      for (let j = 0; j < res; j++) {
        const lam = hm.lyapunov[i * res + j];
        const cls = hm.classes[i * res + j];
        const o = ((res - 1 - j) * res + i) * 4;  // chart y up, canvas y down
        if (cls === 3 || lam < 0) {
          img.data[o + 3] = 0;
          continue;
        }
        const t = Math.max(0, Math.min(1, lam / maxLam));
        img.data[o] = Math.floor(40 + 215 * t);
        img.data[o + 1] = Math.floor(20 + 60 * t);
        img.data[o + 2] = Math.floor(90 - 60 * t + 40);
        img.data[o + 3] = 170;
      }
    }
    const off = document.createElement("canvas");
    off.width = res;
    off.height = res;
    off.getContext("2d")!.putImageData(img, 0, 0);
    const [px0, py1] = chartToCanvas(vp, domain[0], domain[0]);
    const [px1, py0] = chartToCanvas(vp, domain[1], domain[1]);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(off, px0, py0, px1 - px0, py1 - py0);
  }

  private drawOrbits(ctx: CanvasRenderingContext2D): void {
    const vp = this.state.viewport;
    for (const { color, resp } of this.overlays.orbits.values()) {
      ctx.fillStyle = color;
      for (const p of resp.points) {
        const [px, py] = chartToCanvas(vp, p[0], p[1]);
        if (px >= 0 && px < vp.widthPx && py >= 0 && py < vp.heightPx) {
          ctx.fillRect(px, py, 1, 1);
        }
      }
    }
  }

  private drawManifolds(ctx: CanvasRenderingContext2D): void {
    const vp = this.state.viewport;
    for (const arc of this.overlays.manifolds) {
      ctx.strokeStyle = arc.side === "Unstable" ? "#ff5050" : "#5080ff";
      ctx.lineWidth = 0.8;
      ctx.beginPath();
      arc.polyline.forEach((p, i) => {
        const [px, py] = chartToCanvas(vp, p[0], p[1]);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }
  }

  private drawPeriodic(ctx: CanvasRenderingContext2D): void {
    const vp = this.state.viewport;
    ctx.fillStyle = "#ffd700";
    for (const p of this.overlays.periodicPoints) {
      const [px, py] = chartToCanvas(vp, p[0], p[1]);
      ctx.beginPath();
      ctx.arc(px, py, 4, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  private drawSingularities(ctx: CanvasRenderingContext2D): void {
    const vp = this.state.viewport;
    ctx.strokeStyle = "#00e0a0";
    for (const [x, y] of SINGULARITIES) {
      const [px, py] = chartToCanvas(vp, x, y);
      ctx.beginPath();
      ctx.arc(px, py, 5, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }

  private drawSuggestion(ctx: CanvasRenderingContext2D): void {
    const vp = this.state.viewport;
    const s = this.overlays.suggestion!;
    const [px, py] = chartToCanvas(vp, s[0], s[1]);
    ctx.strokeStyle = "#ffffff";
    ctx.beginPath();
    ctx.moveTo(px - 6, py);
    ctx.lineTo(px + 6, py);
    ctx.moveTo(px, py - 6);
    ctx.lineTo(px, py + 6);
    ctx.stroke();
    ctx.strokeRect(px - 6, py - 6, 12, 12);
  }
}
