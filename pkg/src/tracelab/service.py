"""Local JSON-over-HTTP session service for the interactive explorer.

Compute kernels are the pure library functions; identical request bodies
return identical responses via an immutable per-session cache.  Long
computations (tangency scans) run as async jobs polled through /jobs/{id};
everything else is synchronous.  Malformed bodies give 400, semantically
invalid seeds 422 (with a projected suggestion), and saturation 503.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, manifolds, orbits, periodic
from .defaults import DEFAULTS, resolved
from .errors import TracelabError
from .maps import invariant
from .surface import project_to_level, solve_z

UI_ORIGIN = os.environ.get("TRACELAB_UI_ORIGIN", "http://127.0.0.1:8711")


class TraceSystem(BaseModel):
    kind: str = Field("trace", pattern="^trace$")
    V: float = Field(..., ge=-1.0, le=0.0)


class StandardSystem(BaseModel):
    kind: str = Field("standard", pattern="^standard$")
    k: float = Field(..., ge=0.0)


class OrbitRequest(BaseModel):
    system: TraceSystem | StandardSystem
    seed: list[float]
    n: int = Field(..., ge=1)
    sheet: str = Field("upper", pattern="^(upper|lower)$")


class ChaosRequest(BaseModel):
    system: TraceSystem | StandardSystem
    res: int = Field(DEFAULTS["chaos_resolution"], ge=2)
    n: int = Field(2000, ge=10)
    threshold: float = DEFAULTS["chaos_threshold"]
    sheet: str = Field("upper", pattern="^(upper|lower)$")


class ManifoldRequest(BaseModel):
    V: float = Field(..., gt=-1.0, lt=0.0)
    period: int = Field(..., ge=1)
    guess: list[float]
    side: str = Field(..., pattern="^(Stable|Unstable)$")
    arclength: float = Field(4.0, gt=0.0)


class TangencyScanRequest(BaseModel):
    vmin: float = Field(..., gt=-1.0, lt=0.0)
    vmax: float = Field(..., gt=-1.0, lt=0.0)
    period: int = Field(2, ge=1)
    grid: int = Field(6, ge=3, le=16)
    arclength: float = Field(64.0, gt=0.0)
    max_events: int = Field(1, ge=1, le=4)


def _canonical_hash(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _downsample(points: np.ndarray, cap: int) -> tuple:
    """Stride-uniform downsampling that keeps the first and last point."""
    m = len(points)
    if m <= cap:
        return points, 1
    stride = int(np.ceil((m - 1) / (cap - 1)))
    idx = list(range(0, m, stride))
    if idx[-1] != m - 1:
        idx.append(m - 1)
    return points[idx], stride


def create_app(compute_slots: int = 4) -> FastAPI:
    app = FastAPI(title="tracelab service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[UI_ORIGIN],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    sessions: dict = {}
    sessions_lock = threading.Lock()
    budget = threading.Semaphore(compute_slots)
    jobs: dict = {}
    jobs_lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=2)
    app.state.executor = executor

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request",
                                                      "detail": exc.errors()})

    def session_cache(session_id: str) -> dict:
        with sessions_lock:
            return sessions.setdefault(session_id, {"cache": {}, "lock": threading.Lock()})

    def cached(session_id: str, kind: str, payload: dict, compute):
        state = session_cache(session_id)
        key = (kind, _canonical_hash(payload))
        with state["lock"]:
            if key in state["cache"]:
                return state["cache"][key]
        if not budget.acquire(blocking=False):
            raise HTTPException(status_code=503, detail="compute budget saturated")
        try:
            result = compute()
        finally:
            budget.release()
        with state["lock"]:
            # first writer wins; entries are immutable afterwards
            state["cache"].setdefault(key, result)
            return state["cache"][key]

    @app.get("/meta")
    def meta():
        return {
            "version": __version__,
            "defaults": resolved(),
            "precision": "Standard",
            "transport_point_cap": DEFAULTS["transport_point_cap"],
            "orbit_request_cap": DEFAULTS["orbit_request_cap"],
        }

    @app.post("/orbit")
    def orbit(req: OrbitRequest, x_session_id: str = Header("default")):
        cap = DEFAULTS["orbit_request_cap"]
        if req.n > cap:
            raise HTTPException(
                status_code=400,
                detail={"error": "n over cap", "cap": cap, "requested": req.n},
            )
        if req.system.kind == "trace":
            if len(req.seed) == 2:
                x, y = req.seed
                roots = solve_z(float(x), float(y), req.system.V)
                if not roots:
                    raise HTTPException(status_code=422, detail={
                        "error": "off-surface seed",
                        "reason": "no real sheet at (x, y)",
                        "suggestion": None,
                    })
                z = roots[-1] if req.sheet == "upper" else roots[0]
                seed = np.array([x, y, z])
            elif len(req.seed) == 3:
                seed = np.array(req.seed, dtype=float)
            else:
                raise HTTPException(status_code=400,
                                    detail={"error": "seed must have 2 or 3 coordinates"})
            drift = abs(float(invariant(seed)) - req.system.V)
            if drift >= 1e-6:
                try:
                    suggestion = project_to_level(seed, req.system.V).tolist()
                except TracelabError:
                    suggestion = None
                raise HTTPException(status_code=422, detail={
                    "error": "off-surface seed",
                    "invariant_error": drift,
                    "suggestion": suggestion,
                })
        else:
            if len(req.seed) != 2:
                raise HTTPException(status_code=400,
                                    detail={"error": "torus seed must have 2 coordinates"})
            seed = np.asarray(req.seed, dtype=float) % 1.0

        def compute():
            if req.system.kind == "trace":
                orb = orbits.iterate(seed, req.system.V, req.n)
                pts = orb.points
                escaped = orb.escaped
                diameter = float(np.max(np.linalg.norm(pts - pts[0], axis=-1)))
                lyap = (
                    None if diameter < 1e-12
                    else orbits.lyapunov_exponent(seed, req.system.V, min(req.n, 20_000))
                )
                drift_out = orb.max_drift
            else:
                from .maps import standard_map

                pts = np.empty((req.n + 1, 2))
                pts[0] = seed
                for i in range(req.n):
                    pts[i + 1] = standard_map(pts[i], req.system.k)
                from ._kernels import standard_lyapunov_batch

                diameter = float(np.max(np.linalg.norm(pts - pts[0], axis=-1)))
                lyap = (
                    None if diameter < 1e-12
                    else float(standard_lyapunov_batch(
                        seed.reshape(1, 2), req.system.k, min(req.n, 20_000))[0])
                )
                escaped = False
                drift_out = 0.0
            out, stride = _downsample(pts, DEFAULTS["transport_point_cap"])
            return {
                "points": out.tolist(),
                "lyapunov": lyap,
                "lyapunov_applicable": lyap is not None,
                "escaped": bool(escaped),
                "max_drift": drift_out,
                "downsample_stride": stride,
                "downsampling": "stride-uniform, first and last point preserved",
                "n_computed": int(len(pts)),
            }

        return cached(x_session_id, "orbit", req.model_dump(), compute)

    @app.post("/chaos")
    def chaos(req: ChaosRequest, x_session_id: str = Header("default")):
        if req.res > DEFAULTS["chaos_resolution_cap"]:
            raise HTTPException(status_code=400, detail={
                "error": "res over cap", "cap": DEFAULTS["chaos_resolution_cap"]})
        if req.n > DEFAULTS["chaos_iteration_cap"]:
            raise HTTPException(status_code=400, detail={
                "error": "n over cap", "cap": DEFAULTS["chaos_iteration_cap"]})

        def compute():
            if req.system.kind == "trace":
                if not -1.0 < req.system.V < 0.0:
                    raise HTTPException(status_code=422,
                                        detail={"error": "V outside (-1, 0)"})
                cm = orbits.chaos_grid(req.system.V, req.res, req.n,
                                       req.threshold, sheet=req.sheet)
            else:
                cm = orbits.stdmap_chaos_grid(req.system.k, req.res, req.n,
                                              req.threshold)
            lam = np.where(np.isfinite(cm.lyapunov), cm.lyapunov, -1.0)
            return {
                "lyapunov": lam.ravel().tolist(),
                "classes": cm.classes.ravel().tolist(),
                "order": "row-major",
                "metadata": cm.sidecar(),
            }

        return cached(x_session_id, "chaos", req.model_dump(), compute)

    @app.post("/manifold")
    def manifold(req: ManifoldRequest, x_session_id: str = Header("default")):
        def compute():
            po = periodic.find_periodic(req.V, req.period, np.array(req.guess))
            arc = manifolds.grow_manifold(po, req.side, req.arclength,
                                          on_singularity="truncate")
            pts, stride = _downsample(arc.vertices, DEFAULTS["transport_point_cap"])
            return {
                "polyline": pts.tolist(),
                "arclength": arc.arclength,
                "side": arc.side,
                "orbit": po.to_json_dict(),
                "downsample_stride": stride,
            }

        try:
            return cached(x_session_id, "manifold", req.model_dump(), compute)
        except TracelabError as exc:
            raise HTTPException(status_code=422, detail={
                "error": type(exc).__name__, "detail": str(exc)})

    @app.post("/tangency-scan")
    def tangency_scan(req: TangencyScanRequest):
        if not req.vmin < req.vmax:
            raise HTTPException(status_code=400, detail={"error": "need vmin < vmax"})
        job_id = str(uuid.uuid4())
        with jobs_lock:
            jobs[job_id] = {"status": "queued", "result": None, "error": None}

        def run():
            with jobs_lock:
                jobs[job_id]["status"] = "running"
            try:
                events = manifolds.tangency_hunt(
                    req.vmin, req.vmax, period=req.period, grid=req.grid,
                    arclength=req.arclength, max_events=req.max_events,
                )
                result = [ev.to_json_dict() for ev in events]
                with jobs_lock:
                    jobs[job_id].update(status="done", result=result)
            except Exception as exc:  # job errors are reported, not raised
                with jobs_lock:
                    jobs[job_id].update(status="error", error=str(exc))

        executor.submit(run)
        return {"job_id": job_id, "poll": f"/jobs/{job_id}"}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        with jobs_lock:
            if job_id not in jobs:
                raise HTTPException(status_code=404, detail={"error": "unknown job"})
            return dict(jobs[job_id], job_id=job_id)

    return app


def main(argv=None) -> int:
    import argparse

    import uvicorn

    ap = argparse.ArgumentParser(prog="tracelab-service")
    ap.add_argument("--port", type=int, default=8710)
    ap.add_argument("--host", default="127.0.0.1")
    args = ap.parse_args(argv)
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    main()
