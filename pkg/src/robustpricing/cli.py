"""Command-line interface: single solves, interval solves, mechanism
evaluation, and sweeps that write plot-ready data tables.

All commands print one JSON report to stdout (numbers as fractions, full
float precision); diagnostics go to stderr.  Exit codes: 0 success, 2 for
usage or domain errors (including degenerate conversion rates), 1 for
internal errors.  Sweep commands additionally write a whitespace-separated
``.dat`` table with header ``q ylw yup`` in percent units (the plotting
convention) next to a JSON sidecar with the full reports.

Default LP parameters are the production grid (N=2500, eta=1e-5,
b=250); override with flags or the environment variables ROBUSTPRICING_N,
ROBUSTPRICING_ETA and ROBUSTPRICING_B.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import lp as lpmod
from .deterministic import solve_deterministic
from .kernel import DomainError
from .mechanism import Mechanism, nature_worst_case
from .worstcase import PricingContext


def _env_default(name: str, fallback, cast):
    raw = os.environ.get(name)
    return cast(raw) if raw is not None else fallback


def _default_lp_params() -> tuple[int, float, float]:
    return (
        _env_default("ROBUSTPRICING_N", lpmod.DEFAULT_N, int),
        _env_default("ROBUSTPRICING_ETA", lpmod.DEFAULT_ETA, float),
        _env_default("ROBUSTPRICING_B", lpmod.DEFAULT_B, float),
    )


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _mechanism_dict(m: Mechanism) -> dict:
    return {"atoms": m.atoms.tolist(), "probs": m.probs.tolist()}


def read_mechanism(path: str) -> Mechanism:
    """Parse the mechanism text format: one `price probability` pair per
    line, `#` starts a comment."""
    atoms, probs = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(
                    f"{path}:{lineno}: expected `price probability`, got {raw!r}"
                )
            atoms.append(float(parts[0]))
            probs.append(float(parts[1]))
    order = np.argsort(atoms)
    return Mechanism(np.asarray(atoms)[order], np.asarray(probs)[order])


def write_mechanism(path: str, m: Mechanism) -> None:
    with open(path, "w") as fh:
        fh.write("# price probability\n")
        for a, p in zip(m.atoms, m.probs):
            fh.write(f"{float(a)!r} {float(p)!r}\n")


def _deterministic_report(alpha: float, w: float, q: float) -> dict:
    ctx = PricingContext.point(alpha, w, q)
    t0 = time.perf_counter()
    sol = solve_deterministic(ctx)
    return {
        "alpha": alpha,
        "w": w,
        "q": q,
        "deterministic": {
            "price": sol.price,
            "ratio": sol.ratio,
            "regime": sol.regime,
            "method": sol.method,
        },
        "timing_seconds": time.perf_counter() - t0,
    }


def _randomized_report(
    alpha: float, w: float, q_lo: float, q_hi: float, n: int, eta: float, b: float
) -> dict:
    ctx = PricingContext(alpha, w, q_lo, q_hi)
    t0 = time.perf_counter()
    grid = lpmod.build_grid(ctx, n=n, eta=eta, b=b)
    bounds = lpmod.solve_bounds(ctx, grid)
    report = {
        "alpha": alpha,
        "w": w,
        "q": q_lo if ctx.is_point else None,
        "q_interval": None if ctx.is_point else [q_lo, q_hi],
        "randomized": {
            "lower": bounds.lower,
            "upper": bounds.upper,
            "mechanism": _mechanism_dict(bounds.mechanism),
            "certificate_cap": bounds.certificate_cap,
            "truncation_bound": bounds.truncation,
        },
        "params": {"n": n, "eta": eta, "b": b},
        "timing_seconds": time.perf_counter() - t0,
    }
    if ctx.is_point:
        det = solve_deterministic(ctx)
        report["deterministic"] = {
            "price": det.price,
            "ratio": det.ratio,
            "regime": det.regime,
            "method": det.method,
        }
    return report


def cmd_deterministic(args: argparse.Namespace) -> int:
    _emit(_deterministic_report(args.alpha, args.w, args.q))
    return 0


def cmd_randomized(args: argparse.Namespace) -> int:
    _emit(
        _randomized_report(args.alpha, args.w, args.q, args.q, args.n, args.eta, args.b)
    )
    return 0


def cmd_interval(args: argparse.Namespace) -> int:
    if args.q_hat is not None:
        if args.samples is None:
            raise DomainError("--q-hat requires --samples")
        q_lo, q_hi = lpmod.wald_interval(args.q_hat, args.samples)
    else:
        if args.qm is None or args.qM is None:
            raise DomainError("provide either --qm/--qM or --q-hat/--samples")
        q_lo, q_hi = args.qm, args.qM
        if not q_lo < q_hi:
            raise DomainError(f"interval needs qm < qM, got [{q_lo}, {q_hi}]")
    report = _randomized_report(args.alpha, args.w, q_lo, q_hi, args.n, args.eta, args.b)
    if args.q_hat is not None:
        report["estimate"] = {"q_hat": args.q_hat, "samples": args.samples}
    _emit(report)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    ctx = PricingContext.point(args.alpha, args.w, args.q)
    mech = read_mechanism(args.mechanism)
    t0 = time.perf_counter()
    rep = nature_worst_case(mech, ctx, r_cap=args.r_cap)
    _emit(
        {
            "alpha": args.alpha,
            "w": args.w,
            "q": args.q,
            "mechanism_file": args.mechanism,
            "evaluation": {
                "ratio": rep.ratio,
                "argmin_r": rep.argmin_r,
                "side": rep.side,
                "tail_slack": rep.tail_slack,
            },
            "timing_seconds": time.perf_counter() - t0,
        }
    )
    return 0


def _parse_q_list(args: argparse.Namespace) -> list[float]:
    if args.q_list:
        qs = [float(tok) for tok in args.q_list.split(",")]
    else:
        start, stop, step = args.q_range
        count = int(round((stop - start) / step)) + 1
        qs = [start + k * step for k in range(count) if start + k * step <= stop + 1e-12]
    for q in qs:
        if not 0.0 < q < 1.0:
            raise DomainError(f"sweep rate {q} outside (0, 1)")
    return sorted(qs)


def _sweep_cell(task) -> dict:
    mode, alpha, w, q, n, eta, b, samples = task
    if mode == "det":
        rep = _deterministic_report(alpha, w, q)
        ratio = rep["deterministic"]["ratio"]
        rep["ylw"], rep["yup"] = ratio, ratio
        return rep
    if mode == "rand":
        rep = _randomized_report(alpha, w, q, q, n, eta, b)
    else:  # interval around the estimate q
        q_lo, q_hi = lpmod.wald_interval(q, samples)
        rep = _randomized_report(alpha, w, q_lo, q_hi, n, eta, b)
        rep["estimate"] = {"q_hat": q, "samples": samples}
    rep["ylw"] = rep["randomized"]["lower"]
    rep["yup"] = rep["randomized"]["upper"]
    rep["q"] = q
    return rep


def cmd_sweep(args: argparse.Namespace) -> int:
    qs = _parse_q_list(args)
    if args.mode == "interval" and args.samples is None:
        raise DomainError("interval sweeps require --samples")
    tasks = [
        (args.mode, args.alpha, args.w, q, args.n, args.eta, args.b, args.samples)
        for q in qs
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_sweep_cell, tasks))
    else:
        reports = [_sweep_cell(t) for t in tasks]
    reports.sort(key=lambda r: r["q"])

    dat_path = args.out
    with open(dat_path, "w") as fh:
        fh.write("q ylw yup\n")
        for rep in reports:
            fh.write(f"{rep['q']!r} {100.0 * rep['ylw']!r} {100.0 * rep['yup']!r}\n")
    sidecar = dat_path + ".json"
    with open(sidecar, "w") as fh:
        json.dump(reports, fh, indent=2)
        fh.write("\n")
    _emit(
        {
            "mode": args.mode,
            "alpha": args.alpha,
            "w": args.w,
            "q_values": qs,
            "table": dat_path,
            "sidecar": sidecar,
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    n0, eta0, b0 = _default_lp_params()
    parser = argparse.ArgumentParser(
        prog="robustpricing",
        description=(
            "Robust pricing from a single historical price point: maximin "
            "guarantees and near-optimal price distributions.  JSON reports "
            "use fractions; sweep .dat tables use percent."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, lp_params: bool = False) -> None:
        p.add_argument("--alpha", type=float, required=True, help="tail-class parameter in [0,1]; 0=regular, 1=mhr")
        p.add_argument("--w", type=float, default=1.0, help="incumbent price (default 1)")
        if lp_params:
            p.add_argument("--n", type=int, default=n0, help=f"grid size per block (default {n0})")
            p.add_argument("--eta", type=float, default=eta0, help=f"top-of-lower-block offset (default {eta0})")
            p.add_argument("--b", type=float, default=b0, help=f"normalized upper price cap (default {b0})")

    p = sub.add_parser("deterministic", help="optimal single posted price and its exact guarantee")
    common(p)
    p.add_argument("--q", type=float, required=True, help="conversion rate at the incumbent price")
    p.set_defaults(func=cmd_deterministic)

    p = sub.add_parser("randomized", help="LP bracket and certified randomized mechanism")
    common(p, lp_params=True)
    p.add_argument("--q", type=float, required=True, help="conversion rate at the incumbent price")
    p.set_defaults(func=cmd_randomized)

    p = sub.add_parser("interval", help="same, with the conversion rate known only to an interval")
    common(p, lp_params=True)
    p.add_argument("--qm", type=float, help="interval lower endpoint")
    p.add_argument("--qM", type=float, help="interval upper endpoint")
    p.add_argument("--q-hat", type=float, dest="q_hat", help="point estimate (with --samples builds a 95%% interval)")
    p.add_argument("--samples", type=int, help="number of buy/no-buy observations behind --q-hat")
    p.set_defaults(func=cmd_interval)

    p = sub.add_parser("evaluate", help="worst-case ratio of a mechanism file via the nature oracle")
    common(p)
    p.add_argument("--q", type=float, required=True, help="conversion rate at the incumbent price")
    p.add_argument("--mechanism", required=True, help="text file: one `price probability` per line, # comments")
    p.add_argument("--r-cap", type=float, dest="r_cap", help="truncate the above-price search at this oracle price")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="solve across conversion rates; write a .dat table plus JSON sidecar")
    common(p, lp_params=True)
    p.add_argument("--mode", choices=["det", "rand", "interval"], default="rand")
    p.add_argument("--q-list", dest="q_list", help="comma-separated conversion rates")
    p.add_argument("--q-range", dest="q_range", type=float, nargs=3, metavar=("START", "STOP", "STEP"), help="inclusive range of rates")
    p.add_argument("--samples", type=int, help="sample size for interval mode")
    p.add_argument("--out", required=True, help="path of the .dat output table")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for sweep cells")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "sweep" and not (args.q_list or args.q_range):
        parser.error("sweep requires --q-list or --q-range")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure: distinct exit code
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
