/**
 * Typed client for the tracelab service.  The UI performs no numerics; all
 * displayed values originate from these responses.
 */

export type SystemSpec =
  | { kind: "trace"; V: number }
  | { kind: "standard"; k: number };

export interface OrbitResponse {
  points: number[][];
  lyapunov: number | null;
  lyapunov_applicable: boolean;
  escaped: boolean;
  max_drift: number;
  downsample_stride: number;
  n_computed: number;
}

export interface ChaosResponse {
  lyapunov: number[];
  classes: number[];
  order: string;
  metadata: { res: number; chaotic_fraction: number; [k: string]: unknown };
}

export interface ManifoldResponse {
  polyline: number[][];
  arclength: number;
  side: string;
  orbit: { points: number[][]; period: number; stability: string; trace: number };
}

export interface TangencyEventRecord {
  V: number;
  point: number[];
  angle: number;
  c_s: number;
  c_u: number;
  speed: number | null;
}

export interface ServiceError {
  status: number;
  body: unknown;
}

export class ApiClient {
  constructor(readonly baseUrl: string = "http://127.0.0.1:8710") {}

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) {
      const body = await resp.json().catch(() => ({}));
      throw { status: resp.status, body } satisfies ServiceError;
    }
    return (await resp.json()) as T;
  }

  meta(): Promise<Record<string, unknown>> {
    return fetch(this.baseUrl + "/meta").then((r) => r.json());
  }

  orbit(system: SystemSpec, seed: number[], n: number,
        sheet: "upper" | "lower" = "upper"): Promise<OrbitResponse> {
    return this.post("/orbit", { system, seed, n, sheet });
  }

  chaos(system: SystemSpec, res: number, n: number,
        sheet: "upper" | "lower" = "upper"): Promise<ChaosResponse> {
    return this.post("/chaos", { system, res, n, sheet });
  }

  manifold(V: number, period: number, guess: number[], side: string,
           arclength: number): Promise<ManifoldResponse> {
    return this.post("/manifold", { V, period, guess, side, arclength });
  }

  async startTangencyScan(vmin: number, vmax: number,
                          maxEvents = 1): Promise<string> {
    const r = await this.post<{ job_id: string }>("/tangency-scan", {
      vmin, vmax, period: 2, grid: 4, arclength: 48.0, max_events: maxEvents,
    });
    return r.job_id;
  }

  async pollJob(jobId: string): Promise<{
    status: string;
    result: TangencyEventRecord[] | null;
    error: string | null;
  }> {
    const resp = await fetch(`${this.baseUrl}/jobs/${jobId}`);
    if (!resp.ok) throw { status: resp.status, body: await resp.text() };
    return resp.json();
  }
}
