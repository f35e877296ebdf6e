"""Command-line entry point: ``polybeam {solve,sweep,baseline,series}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from polybeam.errors import DegenerateSystemError, DomainError, NonIsolatedRootsError
from polybeam.model import exhaustive_search
from polybeam.pipeline import (RESULT_COLUMNS, AlignmentConfig, ExperimentRecord, align,
                               dump_series_csv, load_config, parse_angle, parse_pairs,
                               run_sweep, with_overrides, write_results_csv)
from polybeam.polytope import objective_value


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--nt", type=int, dest="n_tx", help="transmit antennas")
    p.add_argument("--nr", type=int, dest="n_rx", help="receive antennas")
    p.add_argument("--degree-cap", type=int, dest="degree_cap")
    p.add_argument("--center", action="append", metavar="RX:TX",
                   help="expansion center, e.g. pi:pi; repeat for several")
    p.add_argument("--grid", type=int, dest="grid_points", help="baseline grid points per axis")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polybeam", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="align one channel with one threshold pair")
    _common(p)
    p.add_argument("--eps1", type=float, default=0.7)
    p.add_argument("--eps2", type=float, default=0.7)

    p = sub.add_parser("sweep", help="run the threshold-pair sweep and write results.csv")
    _common(p)
    p.add_argument("--eps-pairs", help="comma separated a:b list, e.g. 0.7:0.7,0.7:0.75")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--svg", help="also write a standalone SVG plot")
    p.add_argument("--fig", help="also render the plot with matplotlib (png/pdf)")
    p.add_argument("--workers", type=int)
    p.add_argument("--timing", action="store_true", default=None,
                   help="fill the wall_ms column (makes output run-dependent)")

    p = sub.add_parser("baseline", help="exhaustive beam sweep")
    _common(p)

    p = sub.add_parser("series", help="dump normalized Taylor coefficients of f1 or f2")
    _common(p)
    p.add_argument("--which", choices=("f1", "f2"), default="f1")
    p.add_argument("--eps", type=float, help="add a 0/1 selected column for this threshold")
    p.add_argument("--out", default="coeffs.csv")
    p.add_argument("--fig", help="also plot magnitudes (and selection) with matplotlib")
    return ap


def _config(args) -> AlignmentConfig:
    over = {k: getattr(args, k, None) for k in
            ("seed", "n_tx", "n_rx", "degree_cap", "grid_points", "workers")}
    if getattr(args, "timing", None):
        over["record_timing"] = True
    if args.center:
        over["centers"] = tuple(parse_pairs(c, parse_angle)[0] for c in args.center)
    if getattr(args, "eps_pairs", None):
        over["eps_pairs"] = parse_pairs(args.eps_pairs)
    if args.config:
        return load_config(args.config, **over)
    return with_overrides(AlignmentConfig(), **over)


def _cmd_solve(args, cfg, out):
    H = cfg.channel()
    _, r_exh = exhaustive_search(H, cfg.alphas, cfg.grid_points)
    res = align(H, cfg.alphas, args.eps1, args.eps2, cfg)
    rec = ExperimentRecord(args.eps1, args.eps2, res.eta, res.delta,
                           objective_value(res.eta, res.delta), res.r_est, r_exh,
                           abs(res.r_est - r_exh), res.n_real_roots,
                           "no_roots" if res.no_roots else "ok")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RESULT_COLUMNS[:-1] + ["theta_rx", "theta_tx"])
    w.writerow(rec.row()[:-1] + [repr(res.best.theta_rx), repr(res.best.theta_tx)])


def _cmd_sweep(args, cfg, out):
    records = run_sweep(cfg)
    write_results_csv(records, args.out)
    if args.svg:
        from polybeam.report import sweep_svg
        sweep_svg(records, args.svg)
    if args.fig:
        from polybeam.report import plot_sweep
        plot_sweep(records, args.fig)
    bad = sum(r.status not in ("ok", "no_roots") for r in records)
    print(f"wrote {len(records)} records to {args.out} ({bad} failed)", file=out)


def _cmd_baseline(args, cfg, out):
    best, r = exhaustive_search(cfg.channel(), cfg.alphas, cfg.grid_points)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["grid_points", "theta_rx", "theta_tx", "r_exh"])
    w.writerow([cfg.grid_points, repr(best.theta_rx), repr(best.theta_tx), repr(r)])


def _cmd_series(args, cfg, out):
    n = dump_series_csv(cfg, args.which, args.out, args.eps)
    if args.fig:
        from polybeam.report import plot_coefficients
        with open(args.out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        mags = [((int(r["deg_rx"]), int(r["deg_tx"])), float(r["magnitude"])) for r in rows]
        sel = None if args.eps is None else [int(r["selected"]) for r in rows]
        plot_coefficients(mags, args.fig, sel, title=args.which)
    print(f"wrote {n} coefficients to {args.out}", file=out)


COMMANDS = {"solve": _cmd_solve, "sweep": _cmd_sweep, "baseline": _cmd_baseline,
            "series": _cmd_series}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        COMMANDS[args.command](args, cfg, out)
    except (DomainError, NonIsolatedRootsError, DegenerateSystemError, OSError) as exc:
        print(f"polybeam {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
