"""Batch command-line entry point.

Every subcommand is a thin, validated wrapper around a library pipeline and
writes reproducible outputs: CSV for point data, JSON for structured
records, JSON-lines for branches.  Each artifact embeds the resolved
configuration and the defaults-table version.  Exit codes: 0 ok, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, cantor, horseshoe, manifolds, orbits, periodic
from .defaults import DEFAULTS, resolved
from .errors import TracelabError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("TRACELAB_WORKERS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _config_dict(args, command: str) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    cfg["command"] = command
    cfg["artifact_version"] = __version__
    cfg["defaults_version"] = resolved()["defaults_version"]
    return cfg


def _emit_error(exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({
        "error": type(exc).__name__,
        "detail": str(exc),
        "exit_code": code,
    }) + "\n")
    return code


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_poincare(args) -> int:
    out = Path(args.out)
    if args.grid is not None:
        from .surface import sample_compact_component

        pts = sample_compact_component(args.V, args.grid * args.grid)
        rng = np.random.default_rng(args.rng_seed)
        idx = rng.choice(len(pts), size=min(args.seeds, len(pts)), replace=False)
        idx.sort()
        seeds = pts[idx]
    else:
        seeds = np.array(json.loads(args.seed_json))
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "poincare"),
                          "n_seeds": int(len(seeds))}, sort_keys=True))
        return EXIT_OK
    cloud = orbits.poincare_cloud(args.V, seeds, args.n)
    out.parent.mkdir(parents=True, exist_ok=True)
    cloud.to_csv(out)
    sidecar = _config_dict(args, "poincare")
    sidecar.update(cloud.metadata)
    sidecar["failures"] = cloud.failures
    sidecar["points_written"] = int(len(cloud.points))
    _write_json(out.with_suffix(".json"), sidecar)
    return EXIT_OK


def cmd_chaos(args) -> int:
    out = Path(args.out)
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "chaos")}, sort_keys=True))
        return EXIT_OK
    workers = _workers(args)
    if args.stdmap:
        params = [float(x) for x in args.k.split(",")]
        make = lambda p: orbits.stdmap_chaos_grid(
            p, args.res, args.n, args.threshold, workers=workers)
    else:
        params = [float(x) for x in args.V.split(",")]
        make = lambda p: orbits.chaos_grid(
            p, args.res, args.n, args.threshold, sheet=args.sheet, workers=workers)
    rows = []
    for k, p in enumerate(params):
        cm = make(p)
        stem = out if len(params) == 1 else out.with_name(f"{out.stem}_{k}{out.suffix}")
        orbits.chaos_map_to_files(cm, stem, stem.with_suffix(".json"))
        rows.append({"parameter": p, "chaotic_fraction": cm.chaotic_fraction})
    if len(params) > 1:
        _write_json(out.with_suffix(".sweep.json"),
                    {"rows": rows, **_config_dict(args, "chaos")})
    return EXIT_OK


def cmd_periodic(args) -> int:
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "periodic")}, sort_keys=True))
        return EXIT_OK
    guess = np.array(json.loads(args.guess))
    po = periodic.find_periodic(args.V, args.period, guess)
    payload = po.to_json_dict()
    payload.update(_config_dict(args, "periodic"))
    _write_json(Path(args.out), payload)
    return EXIT_OK


def cmd_continue(args) -> int:
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "continue")}, sort_keys=True))
        return EXIT_OK
    guess = np.array(json.loads(args.guess))
    po = periodic.find_periodic(args.V, args.period, guess)
    branch = periodic.continue_in_V(po, args.V_target, max_step=args.max_step)
    periodic.branch_to_jsonl(branch, args.out)
    return EXIT_OK


def cmd_manifold(args) -> int:
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "manifold")}, sort_keys=True))
        return EXIT_OK
    guess = np.array(json.loads(args.guess))
    po = periodic.find_periodic(args.V, args.period, guess)
    arc = manifolds.grow_manifold(po, args.side, args.arclength,
                                  on_singularity="truncate")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps({"owner": po.to_json_dict(), "side": arc.side,
                         "arclength": arc.arclength,
                         **_config_dict(args, "manifold")}, sort_keys=True)
    with open(out, "w") as fh:
        fh.write("# " + header + "\n")
        fh.write("tau,x,y,z\n")
        for t, p in zip(arc.params, arc.vertices):
            fh.write(f"{t:.17g},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n")
    return EXIT_OK


def cmd_tangency(args) -> int:
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "tangency")}, sort_keys=True))
        return EXIT_OK
    events = manifolds.tangency_hunt(
        args.vmin, args.vmax, period=args.period,
        grid=args.grid, arclength=args.arclength, max_events=args.max_events,
    )
    payload = {
        "events": [ev.to_json_dict() for ev in events],
        **_config_dict(args, "tangency"),
    }
    _write_json(Path(args.out), payload)
    return EXIT_OK


def cmd_thickness(args) -> int:
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "thickness")}, sort_keys=True))
        return EXIT_OK
    c = cantor.middle_alpha_cantor(args.middle_alpha, args.depth)
    tau = cantor.thickness(c)
    print(f"{tau:.12g}")
    if args.out:
        _write_json(Path(args.out), {
            "tau": tau,
            "dim_lower_bound": cantor.dim_lower_bound(tau),
            "presentation": c.to_json_dict(),
            **_config_dict(args, "thickness"),
        })
    return EXIT_OK


def cmd_survivor(args) -> int:
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "survivor")}, sort_keys=True))
        return EXIT_OK
    eps_list = [float(x) for x in args.eps.split(",")]
    anchor = tuple(json.loads(args.anchor))
    table = horseshoe.thickness_vs_epsilon(
        eps_list, anchor=anchor, direction=args.direction, depth=args.depth)
    table.update(_config_dict(args, "survivor"))
    _write_json(Path(args.out), table)
    for row in table["rows"]:
        tau = "inf" if row["tau"] is None else f"{row['tau']:.6g}"
        print(f"eps={row['epsilon']:g} tau={tau} [{row['status']}]")
    return EXIT_OK


def cmd_boxdim(args) -> int:
    if args.dry_run:
        print(json.dumps({"plan": _config_dict(args, "boxdim")}, sort_keys=True))
        return EXIT_OK
    cm = orbits.chaos_grid(args.V, args.res, args.n, args.threshold,
                           workers=_workers(args))
    pts = cm.cell_centers(orbits.CLASS_CHAOTIC)
    scales = [args.scale0 / 2 ** k for k in range(args.n_scales)]
    report = cantor.box_dimension(pts, scales)
    payload = report.to_json_dict()
    payload["chaotic_fraction"] = cm.chaotic_fraction
    payload.update(_config_dict(args, "boxdim"))
    _write_json(Path(args.out), payload)
    print(f"{report.slope:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tracelab",
        description="Trace-map laboratory: batch pipelines with reproducible outputs",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--rng-seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=None,
                       help="parallel width (default: TRACELAB_WORKERS or cpu count)")
        p.add_argument("--dry-run", action="store_true",
                       help="validate config and print the plan without computing")
        p.add_argument("--precision", choices=["Standard", "Extended"],
                       default="Standard")

    p = sub.add_parser("poincare", help="labeled orbit clouds on the compact surface")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--grid", type=int, default=None,
                   help="sample seeds from a grid of this resolution")
    p.add_argument("--seeds", type=int, default=DEFAULTS["poincare_seeds"])
    p.add_argument("--seed-json", default=None, help="explicit seed list as JSON")
    p.add_argument("--n", type=int, default=DEFAULTS["poincare_iterations"])
    common(p)
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("chaos", help="Lyapunov classification grids")
    p.add_argument("--V", default=None, help="level(s), comma separated")
    p.add_argument("--k", default=None, help="standard-map parameter(s)")
    p.add_argument("--stdmap", action="store_true")
    p.add_argument("--res", type=int, default=DEFAULTS["chaos_resolution"])
    p.add_argument("--n", type=int, default=DEFAULTS["chaos_iterations"])
    p.add_argument("--threshold", type=float, default=DEFAULTS["chaos_threshold"])
    p.add_argument("--sheet", choices=["upper", "lower"], default="upper")
    common(p)
    p.set_defaults(func=cmd_chaos)

    p = sub.add_parser("periodic", help="locate a periodic orbit by Newton")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--guess", required=True, help="JSON [x, y, z]")
    common(p)
    p.set_defaults(func=cmd_periodic)

    p = sub.add_parser("continue", help="continue a periodic orbit in V")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--V-target", type=float, required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--guess", required=True)
    p.add_argument("--max-step", type=float, default=0.01)
    common(p)
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("manifold", help="grow a stable or unstable manifold arc")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--guess", required=True)
    p.add_argument("--side", choices=["Stable", "Unstable"], required=True)
    p.add_argument("--arclength", type=float, default=4.0)
    common(p)
    p.set_defaults(func=cmd_manifold)

    p = sub.add_parser("tangency", help="hunt homoclinic tangencies in V")
    p.add_argument("--vmin", type=float, required=True)
    p.add_argument("--vmax", type=float, required=True)
    p.add_argument("--period", type=int, default=2)
    p.add_argument("--period-max", type=int, default=6, dest="period_max")
    p.add_argument("--grid", type=int, default=6)
    p.add_argument("--arclength", type=float, default=64.0)
    p.add_argument("--max-events", type=int, default=2)
    common(p)
    p.set_defaults(func=cmd_tangency)

    p = sub.add_parser("thickness", help="thickness of a middle-alpha Cantor set")
    p.add_argument("--middle-alpha", type=float, required=True)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--out", default=None)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--precision", choices=["Standard", "Extended"], default="Standard")
    p.set_defaults(func=cmd_thickness)

    p = sub.add_parser("survivor", help="avoidance survivor thickness table")
    p.add_argument("--eps", required=True, help="decreasing list, comma separated")
    p.add_argument("--depth", type=int, default=DEFAULTS["avoidance_depth"])
    p.add_argument("--anchor", default="[0.25, 0.25]")
    p.add_argument("--direction", choices=["Stable", "Unstable"], default="Stable")
    common(p)
    p.set_defaults(func=cmd_survivor)

    p = sub.add_parser("boxdim", help="box dimension of the chaotic-cell cloud")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--res", type=int, default=128)
    p.add_argument("--n", type=int, default=DEFAULTS["chaos_iterations"])
    p.add_argument("--threshold", type=float, default=DEFAULTS["chaos_threshold"])
    p.add_argument("--scale0", type=float, default=0.5)
    p.add_argument("--n-scales", type=int, default=6)
    common(p)
    p.set_defaults(func=cmd_boxdim)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        _validate(args)
    except (ValueError, json.JSONDecodeError) as exc:
        return _emit_error(exc, EXIT_CONFIG)
    try:
        return args.func(args)
    except TracelabError as exc:
        return _emit_error(exc, EXIT_NUMERIC)
    except (ValueError, json.JSONDecodeError) as exc:
        return _emit_error(exc, EXIT_CONFIG)


def _validate(args) -> None:
    if args.command == "poincare" and not (-1.0 <= args.V <= 0.0):
        raise ValueError(f"V = {args.V} outside the compact range [-1, 0]")
    if args.command == "poincare" and args.grid is None and args.seed_json is None:
        raise ValueError("need --grid or --seed-json")
    if args.command == "chaos":
        if args.stdmap and args.k is None:
            raise ValueError("--stdmap needs --k")
        if not args.stdmap and args.V is None:
            raise ValueError("need --V (or --stdmap with --k)")
    if args.command == "tangency" and not (-1.0 < args.vmin < args.vmax < 0.0):
        raise ValueError("need -1 < vmin < vmax < 0")
    if args.command == "thickness" and not (0.0 < args.middle_alpha < 1.0):
        raise ValueError("middle-alpha must be in (0, 1)")


if __name__ == "__main__":
    sys.exit(main())
