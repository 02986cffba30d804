"""Config-driven experiment runner.

One subcommand per library capability: bands, count, bs, split, green,
green-scan, ltsum, verify.  Every subcommand takes --config, supports
--dry-run (validate and print the resolved plan without computing) and
--no-timestamp (outputs then depend only on the config, byte for byte).
Exit codes: 0 success, 1 config/schema error, 2 numerical failure.
GAPCOUNT_THREADS bounds the worker pool for seed/grid/schedule sweeps.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, bands, birman_schwinger, config, green, inertia, ltsums, output, splitting
from .errors import ConfigError, NumericalError
from .ltsums import PowerFunction
from .operators import JacobiOperator, truncate


def _threads():
    val = os.environ.get("GAPCOUNT_THREADS")
    if not val:
        return None
    try:
        return max(1, int(val))
    except ValueError:
        raise ConfigError("GAPCOUNT_THREADS must be an integer")


def _parse_window(text):
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"window {text!r} must look like '-200..200'")


def _parse_pair(text, name):
    try:
        a, b = text.split(",")
        return float(a), float(b)
    except ValueError:
        raise ConfigError(f"{name} {text!r} must look like 'a,b'")


def _parse_seeds(text):
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return range(int(lo), int(hi) + 1)
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ConfigError(f"seeds {text!r} must look like '0..199' or '0,1,2'")


def _window_from(sec, name, args):
    if getattr(args, "window", None):
        return _parse_window(args.window)
    win = config.get(sec, name, "window", list)
    if len(win) != 2:
        raise ConfigError(f"[{name}] key 'window' must be [n_lo, n_hi]")
    return int(win[0]), int(win[1])


def _resolved(cfg, extra):
    flat = config.flatten(cfg)
    flat.update({f"resolved.{k}": v for k, v in extra.items()})
    return flat


def _emit(args, resolved, extra_header, writer):
    headers = output.header_lines(
        resolved, __version__, timestamp=not args.no_timestamp, extra=extra_header
    )
    if args.dry_run:
        for line in headers:
            print(line)
        print("# dry-run: no computation performed")
        return
    writer(headers)
    print(f"wrote {args.out}")


def _emit_table(args, resolved, extra_header, columns, rows):
    """Tabular result: CSV by default, JSON records with --format json."""
    if args.format == "json":
        payload = {"columns": list(columns),
                   "rows": [list(r) for r in rows]}
        _emit(args, resolved, extra_header,
              lambda headers: output.write_json(args.out, headers, payload))
    else:
        _emit(args, resolved, extra_header,
              lambda headers: output.write_csv(args.out, headers, columns, rows))


def _emit_json(args, resolved, extra_header, payload):
    if args.format == "csv":
        raise ConfigError(
            f"subcommand {args.subcommand!r} produces structured JSON; "
            "csv format is not available"
        )
    _emit(args, resolved, extra_header,
          lambda headers: output.write_json(args.out, headers, payload))


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_bands(args, cfg):
    bg = config.build_background(cfg)
    sec = config.section(cfg, "bands", required=False)
    tol = args.tol if args.tol is not None else config.get(sec, "bands", "tol", float, 1e-10)
    resolved = _resolved(cfg, {"subcommand": "bands", "tol": tol})
    if args.dry_run:
        _emit(args, resolved, None, None)
        return 0
    bset = bands.compute_bands(bg, tol)
    dpoly = bands.discriminant_polynomial(bg).deriv()
    rows = []
    for j, (lo, hi) in enumerate(bset.bands):
        rows.append((j, "lower", lo, float(dpoly(lo))))
        rows.append((j, "upper", hi, float(dpoly(hi))))
    for pt in bset.degenerate_points:
        rows.append((-1, "degenerate", pt, float(dpoly(pt))))
    _emit_table(args, resolved, None, ("index", "side", "lambda", "dprime"), rows)
    return 0


def _cmd_count(args, cfg):
    bg = config.build_background(cfg)
    pert = config.build_perturbation(cfg)
    sec = config.section(cfg, "count")
    window = _window_from(sec, "count", args)
    if args.interval:
        interval = _parse_pair(args.interval, "interval")
    else:
        interval = tuple(config.get(sec, "count", "interval", list))
        if len(interval) != 2:
            raise ConfigError("[count] key 'interval' must be [alpha, beta]")
        interval = (float(interval[0]), float(interval[1]))
    tol = args.tol if args.tol is not None else config.get(sec, "count", "tol", float, None)
    want_eigs = config.get(sec, "count", "eigenvalues", bool, True)
    resolved = _resolved(cfg, {
        "subcommand": "count", "window": list(window), "interval": list(interval),
    })
    if args.dry_run:
        _emit(args, resolved, None, None)
        return 0
    t = truncate(JacobiOperator(bg, pert), window)
    res = inertia.count_in_interval(t, interval, tol)
    payload = {
        "count": res.count,
        "boundary_flags": list(res.boundary_flags),
    }
    if want_eigs:
        payload["eigenvalues"] = [float(v) for v in inertia.eigs_in_interval(t, interval, tol)]
    _emit_json(args, resolved, None, payload)
    return 0


def _cmd_bs(args, cfg):
    bg = config.build_background(cfg)
    pert = config.build_perturbation(cfg)
    sec = config.section(cfg, "bs")
    window = _window_from(sec, "bs", args)
    energy = args.energy if args.energy is not None else config.get(sec, "bs", "energy", float)
    tol = args.tol if args.tol is not None else config.get(sec, "bs", "tol", float, None)
    resolved = _resolved(cfg, {
        "subcommand": "bs", "window": list(window), "energy": energy,
    })
    if args.dry_run:
        _emit(args, resolved, None, None)
        return 0
    a = truncate(JacobiOperator(bg), window)
    sp = splitting.split(pert, window)
    op = birman_schwinger.bs_operator(a, sp.plus_diag, energy, tol)
    sites = a.sites
    payload = {
        "energy": energy,
        "dimension": op.dimension,
        "support_sites": [int(sites[i]) for i in op.support],
        "eigenvalues": [float(v) for v in op.eigenvalues()],
        "count_ge_one": op.count_ge(1.0),
    }
    if op.dimension <= 40:
        payload["kernel"] = [[float(v) for v in row] for row in op.kernel]
    _emit_json(args, resolved, None, payload)
    return 0


def _cmd_split(args, cfg):
    pert = config.build_perturbation(cfg)
    config.build_background(cfg)
    sec = config.section(cfg, "split")
    window = _window_from(sec, "split", args)
    resolved = _resolved(cfg, {"subcommand": "split", "window": list(window)})
    if args.dry_run:
        _emit(args, resolved, None, None)
        return 0
    sp = splitting.split(pert, window)
    minus_min = (
        float(np.linalg.eigvalsh(sp.minus_dense()).min()) if sp.size else 0.0
    )
    norm = max(float(np.max(np.abs(sp.minus_diag))) if sp.size else 0.0, 1e-300)
    payload = {
        "window": list(window),
        "sites": [int(n) for n in sp.sites],
        "plus_diag": [float(v) for v in sp.plus_diag],
        "minus_diag": [float(v) for v in sp.minus_diag],
        "minus_off": [float(v) for v in sp.minus_off],
        "checks": {
            "plus_min_entry": float(np.min(sp.plus_diag)) if sp.size else 0.0,
            "minus_min_eigenvalue": minus_min,
            "minus_psd": bool(minus_min >= -1e-12 * norm),
        },
    }
    _emit_json(args, resolved, None, payload)
    return 0


def _cmd_green(args, cfg):
    bg = config.build_background(cfg)
    sec = config.section(cfg, "green")
    lam = args.lam if args.lam is not None else config.get(sec, "green", "lambda", float)
    if args.pairs:
        try:
            pairs = [
                tuple(int(v) for v in tok.split(","))
                for tok in args.pairs.split(";") if tok
            ]
        except ValueError:
            raise ConfigError(f"pairs {args.pairs!r} must look like '0,0;1,0'")
    else:
        pairs = [tuple(int(v) for v in row) for row in config.get(sec, "green", "pairs", list)]
    for pair in pairs:
        if len(pair) != 2:
            raise ConfigError("each green pair must be two integers n,m")
    half_width = config.get(sec, "green", "half_width", int, None)
    tol = args.tol if args.tol is not None else config.get(sec, "green", "tol", float, 1e-8)
    resolved = _resolved(cfg, {
        "subcommand": "green", "lambda": lam,
        "pairs": [list(p) for p in pairs],
    })
    if args.dry_run:
        _emit(args, resolved, None, None)
        return 0
    ev = green.evaluate_green(bg, pairs, lam, half_width, tol)
    rows = [(n, m, val) for n, m, val in ev.entries]
    _emit_table(args, resolved,
                [f"half_width = {ev.half_width}", f"method = {ev.method}"],
                ("n", "m", "value"), rows)
    return 0


def _cmd_green_scan(args, cfg):
    bg = config.build_background(cfg)
    sec = config.section(cfg, "green_scan")
    bset = bands.compute_bands(bg)
    gap_cfg = config.get(sec, "green_scan", "gap", list, None)
    if gap_cfg is None:
        gaps = bset.interior_gaps
        if not gaps:
            raise ConfigError("background has no interior gap to scan")
        widths = [hi - lo for lo, hi in gaps]
        gap = gaps[int(np.argmax(widths))]
    else:
        gap = (float(gap_cfg[0]), float(gap_cfg[1]))
    edge = args.edge or config.get(sec, "green_scan", "edge", str, "lower")
    grid_points = args.grid_points or config.get(sec, "green_scan", "grid_points", int, 50)
    decades = config.get(sec, "green_scan", "decades", int, 5)
    eps = config.get(sec, "green_scan", "eps", float, None)
    n_range = config.get(sec, "green_scan", "n_range", int, 300)
    tol = args.tol if args.tol is not None else config.get(sec, "green_scan", "tol", float, 1e-3)
    resolved = _resolved(cfg, {
        "subcommand": "green-scan", "gap": list(gap), "edge": edge,
        "grid_points": grid_points, "decades": decades, "n_range": n_range,
    })
    if args.dry_run:
        _emit(args, resolved, None, None)
        return 0
    rep = green.scan_green_bounds(
        bg, gap, edge, grid_points=grid_points, decades=decades, eps=eps,
        n_range=n_range, tol=tol, threads=_threads(),
    )
    extra = [
        f"slope.{k} = {output.format_value(v)}" for k, v in sorted(rep.slopes.items())
    ] + [
        f"bounded.{k} = {output.format_value(v)}" for k, v in sorted(rep.bounded.items())
    ]
    _emit_table(args, resolved, extra,
                ("t", "lambda", "half_width", "c52", "c54", "c55"), rep.rows)
    return 0


def _cmd_ltsum(args, cfg):
    bg = config.build_background(cfg)
    pert = config.build_perturbation(cfg)
    sec = config.section(cfg, "ltsum")
    variant = args.variant or config.get(sec, "ltsum", "variant", str)
    alpha = args.alpha if args.alpha is not None else config.get(sec, "ltsum", "alpha", float)
    if args.schedule:
        try:
            schedule = [int(tok) for tok in args.schedule.split(",")]
        except ValueError:
            raise ConfigError(f"schedule {args.schedule!r} must be integers 'a,b,c'")
    else:
        schedule = [int(v) for v in config.get(sec, "ltsum", "schedule", list)]
    tol = args.tol if args.tol is not None else config.get(sec, "ltsum", "tol", float, 1e-3)
    support_tol = config.get(sec, "ltsum", "support_tol", float, None)
    inset = config.get(sec, "ltsum", "inset", float, None)
    log_eps = config.get(sec, "ltsum", "log_eps", float, 0.5)
    resolved = _resolved(cfg, {
        "subcommand": "ltsum", "variant": variant, "alpha": alpha,
        "schedule": schedule, "tol": tol,
    })
    if args.dry_run:
        _emit(args, resolved, None, None)
        return 0
    try:
        table = ltsums.convergence_experiment(
            variant, bg, pert, alpha, schedule, tol,
            support_tol=support_tol, inset=inset, log_eps=log_eps,
            threads=_threads(),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    rows = []
    for (half_width, count, total, delta), rep, last in zip(
        table.rows, table.reports,
        [False] * (len(table.rows) - 1) + [True],
    ):
        for comp in rep.components:
            rows.append((
                half_width, comp.label, comp.eigenvalues.size,
                float(np.sum(comp.distances ** alpha)), "", "",
            ))
        rows.append((
            half_width, "total", count, total,
            "" if np.isnan(delta) else delta,
            table.verdict if last else "",
        ))
    extra = []
    if table.majorant:
        extra = [f"majorant.{k} = {output.format_value(v)}"
                 for k, v in sorted(table.majorant.items())]
    _emit_table(args, resolved, extra,
                ("N", "gap_index", "count", "power_sum", "delta_prev", "verdict"),
                rows)
    return 0


def _cmd_verify(args, cfg):
    sec = config.section(cfg, "verify", required=False)
    variant = args.variant or config.get(sec, "verify", "variant", str, "t11")
    seeds = _parse_seeds(args.seeds) if args.seeds else _parse_seeds(
        config.get(sec, "verify", "seeds", str, "0..99")
    )
    if args.dim_range:
        lo, hi = _parse_pair(args.dim_range, "dim-range")
        dim_range = (int(lo), int(hi))
    else:
        dr = config.get(sec, "verify", "dim_range", list, [10, 100])
        dim_range = (int(dr[0]), int(dr[1]))
    gap_cfg = config.get(sec, "verify", "gap", list, [-1.0, 1.0])
    gap = (float(gap_cfg[0]), float(gap_cfg[1]))
    tol = args.tol if args.tol is not None else config.get(sec, "verify", "tol", float, 1e-8)
    # resolvent-proximity guard for the bound variants; None keeps the
    # 1e-6 * gap-width default
    guard_tol = config.get(sec, "verify", "guard_tol", float, None)
    e0 = config.get(sec, "verify", "e0", float, None)
    resolved = _resolved(cfg, {
        "subcommand": "verify", "variant": variant,
        "seeds": f"{seeds[0]}..{seeds[-1]}" if isinstance(seeds, range) else list(seeds),
        "dim_range": list(dim_range), "gap": list(gap),
    })
    if args.dry_run:
        _emit(args, resolved, None, None)
        return 0
    if variant == "prop21":
        reports = birman_schwinger.run_prop21_campaign(
            seeds, dim_range, gap, tol, e=e0, threads=_threads()
        )
        payload = {
            "variant": variant,
            "instances": [
                {
                    "seed": int(seed),
                    "energy": rep.energy,
                    "checked_mus": len(rep.checks),
                    "violations": rep.violations,
                    "max_vector_residual": rep.max_vector_residual,
                }
                for seed, rep in zip(seeds, reports)
            ],
            "total_violations": int(sum(r.violations for r in reports)),
        }
        ok = payload["total_violations"] == 0
    else:
        reports = birman_schwinger.run_bound_campaign(
            variant, seeds, dim_range, gap, tol=guard_tol, e0=e0,
            threads=_threads()
        )
        payload = {
            "variant": variant,
            "instances": [
                dict(seed=int(seed), **rep.to_dict())
                for seed, rep in zip(seeds, reports)
            ],
            "all_satisfied": bool(all(r.satisfied for r in reports)),
        }
        ok = payload["all_satisfied"]
    payload["ok"] = bool(ok)
    _emit_json(args, resolved, None, payload)
    return 0


# ---------------------------------------------------------------------------


_DEFAULT_OUT = {
    "bands": "bands.csv",
    "count": "count.json",
    "bs": "bs.json",
    "split": "split.json",
    "green": "green.csv",
    "green-scan": "scan.csv",
    "ltsum": "table.csv",
    "verify": "report.json",
}

_HANDLERS = {
    "bands": _cmd_bands,
    "count": _cmd_count,
    "bs": _cmd_bs,
    "split": _cmd_split,
    "green": _cmd_green,
    "green-scan": _cmd_green_scan,
    "ltsum": _cmd_ltsum,
    "verify": _cmd_verify,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gapcount",
        description="Eigenvalue counting experiments in spectral gaps of "
                    "perturbed periodic Jacobi matrices",
    )
    parser.add_argument("--version", action="version", version=f"gapcount {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--out", help="output path (subcommand default otherwise)")
        p.add_argument("--format", choices=("csv", "json"),
                       help="output format (tabular subcommands default to csv)")
        p.add_argument("--dry-run", action="store_true",
                       help="validate config and print the resolved plan")
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit the timestamp header (reproducible output)")

    p = sub.add_parser("bands", help="band edges of the periodic background")
    common(p)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("count", help="eigenvalue count in an interval")
    common(p)
    p.add_argument("--window", help="truncation window, e.g. -200..200")
    p.add_argument("--interval", help="open interval, e.g. -1.0,1.0")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("bs", help="Birman-Schwinger kernel at an energy")
    common(p)
    p.add_argument("--window")
    p.add_argument("--energy", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("split", help="positive/negative perturbation split")
    common(p)
    p.add_argument("--window")

    p = sub.add_parser("green", help="Green's function entries")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--pairs", help="semicolon-separated n,m pairs: 0,0;1,0")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("green-scan", help="edge scaling scan of Green's bounds")
    common(p)
    p.add_argument("--edge", choices=("lower", "upper"))
    p.add_argument("--grid-points", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("ltsum", help="distance power-sum convergence experiment")
    common(p)
    p.add_argument("--variant", choices=("thm13", "thm14", "conjecture"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--schedule", help="comma-separated half-widths: 100,200,400,800")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("verify", help="randomized bound/equivalence campaigns")
    common(p)
    p.add_argument("--variant", choices=("t11", "t31", "t32", "prop21"))
    p.add_argument("--seeds", help="seed range 0..199 or list 0,1,2")
    p.add_argument("--dim-range", help="dimension range lo,hi")
    p.add_argument("--tol", type=float)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.out is None:
        args.out = _DEFAULT_OUT[args.subcommand]
    try:
        cfg = config.load_config(args.config)
        # schema-validate the operator sections before any computation,
        # also for subcommands that use only part of them
        config.build_background(cfg)
        config.build_perturbation(cfg)
        return _HANDLERS[args.subcommand](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
