"""Command-line front end.

Commands: bounds, minvol, build, verify, levelset, lemma, sweep.  JSON goes
to stdout; --out writes files.  Exit codes: 0 success, 2 bad configuration,
3 infeasible inputs (pinching/gluing), 4 a numerical check failed.
CONICVOL_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import levelset as ls
from .core import (
    CurvatureBand,
    Divisor,
    InfeasibleBandError,
    classify,
    min_vol,
    volume_bounds,
    weighted_euler,
)
from .extremal import (
    MODEL_KINDS,
    GluingError,
    PiecewiseRadialMetric,
    build_extremal,
    verify_model,
)
from .lemma import bang_bang, brute_force_max, lemma_bound, random_search_max

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_TOLERANCE = 4


@dataclass
class JobConfig:
    """One CLI invocation, round-trippable through JSON."""

    command: str
    orders: list = field(default_factory=list)
    a: float | None = None
    b: float | None = None
    kind: str | None = None
    half_width: float = 8.0
    n: int = 512
    thresholds: int = 256
    target: str | None = None
    out: str | None = None
    csv_path: str | None = None
    svg_path: str | None = None
    grid_path: str | None = None
    save_grid: str | None = None
    deficit_trend: bool = False
    eps: list = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.02])
    V: float | None = None
    chi: float | None = None
    segments: int = 1000
    random_check: bool = False
    restarts: int = 20
    steps: int = 2000
    a_range: list = field(default_factory=list)
    b_range: list = field(default_factory=list)
    samples: int = 513
    rho_min: float = 1e-4
    rho_max: float = 1e4
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "JobConfig":
        return cls(**d)


def _parse_orders(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (int, float, np.floating))
                             else v for v in row])


def _svg_polylines(path: str, series, title: str, width=640, height=400) -> None:
    """Minimal SVG line plot: ``series`` is a list of (xs, ys, label)."""
    pad = 50
    xs_all = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    ys_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    y0, y1 = float(ys_all.min()), float(ys_all.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
        f'height="{height - 2 * pad}" fill="none" stroke="#444"/>',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" '
        f'font-size="14">{title}</text>',
        f'<text x="{pad}" y="{height - 10}" font-size="11">'
        f'x: [{x0:.4g}, {x1:.4g}]  y: [{y0:.4g}, {y1:.4g}]</text>',
    ]
    for i, (xs, ys, label) in enumerate(series):
        pts = " ".join(f"{sx(float(x)):.2f},{sy(float(y)):.2f}"
                       for x, y in zip(xs, ys))
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.2"/>')
        parts.append(f'<text x="{width - pad + 4}" y="{pad + 14 * (i + 1)}" '
                     f'font-size="11" fill="{color}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _divisor(cfg: JobConfig) -> Divisor:
    return Divisor.from_orders(cfg.orders)


def _band(cfg: JobConfig) -> CurvatureBand:
    if cfg.a is None or cfg.b is None:
        raise ValueError("this command needs both --a and --b")
    return CurvatureBand(cfg.a, cfg.b)


def cmd_bounds(cfg: JobConfig) -> int:
    d = _divisor(cfg)
    report = volume_bounds(d, _band(cfg))
    payload = report.to_dict()
    payload["classification"] = classify(d)
    payload["config"] = cfg.to_dict()
    _emit(payload, cfg.out)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_minvol(cfg: JobConfig) -> int:
    d = _divisor(cfg)
    payload = {
        "min_vol": min_vol(d),
        "alpha": d.alpha,
        "beta": d.beta,
        "chi": weighted_euler(d),
        "classification": classify(d),
        "config": cfg.to_dict(),
    }
    _emit(payload, cfg.out)
    return EXIT_OK


def _build(cfg: JobConfig) -> PiecewiseRadialMetric:
    if cfg.kind is None:
        raise ValueError(f"--kind is required (one of {MODEL_KINDS})")
    band = None
    if cfg.a is not None and cfg.b is not None:
        band = CurvatureBand(cfg.a, cfg.b)
    return build_extremal(cfg.kind, _divisor(cfg), band)


def cmd_build(cfg: JobConfig) -> int:
    metric = _build(cfg)
    payload = metric.to_dict()
    payload["config"] = cfg.to_dict()
    _emit(payload, cfg.out)
    rho = np.logspace(math.log10(cfg.rho_min), math.log10(cfg.rho_max),
                      cfg.samples)
    if cfg.csv_path:
        metric.write_csv(cfg.csv_path, rho)
    if cfg.svg_path:
        _, u, e2u, k = metric.sample(rho)
        _svg_polylines(cfg.svg_path,
                       [(np.log10(rho), e2u, "e2u"), (np.log10(rho), k, "K")],
                       f"{metric.kind} profile (x = log10 rho)")
    return EXIT_OK


def cmd_verify(cfg: JobConfig) -> int:
    metric = _build(cfg)
    report = verify_model(metric)
    report["config"] = cfg.to_dict()
    _emit(report, cfg.out)
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def cmd_levelset(cfg: JobConfig) -> int:
    if cfg.grid_path:
        grid = ls.load_grid(cfg.grid_path)
        metric = None
    else:
        metric = _build(cfg)
        grid = ls.grid_from_metric(metric, cfg.half_width, cfg.n)
    if cfg.save_grid:
        ls.save_grid(cfg.save_grid, grid)

    payload: dict = {"config": cfg.to_dict()}
    if cfg.deficit_trend:
        if metric is None:
            raise ValueError("--deficit-trend needs a model, not --grid")
        trend = ls.deficit_trend(metric, cfg.eps, cfg.half_width, cfg.n)
        payload["deficit_trend"] = trend
        vols, defs = trend["volumes"], trend["mean_deficits"]
        monotone = (all(x > y for x, y in zip(vols, vols[1:]))
                    and all(x > y for x, y in zip(defs, defs[1:])))
        payload["deficit_trend"]["monotone"] = monotone
        _emit(payload, cfg.out)
        return EXIT_OK if monotone else EXIT_TOLERANCE

    summary = ls.summarize(grid, n_thresholds=cfg.thresholds)
    band = None
    if cfg.a is not None and cfg.b is not None:
        band = CurvatureBand(cfg.a, cfg.b)
    bp = ls.b_prime_check(summary)
    ki = ls.key_inequality_check(summary)
    payload.update({
        "v_captured": summary.v_captured,
        "chi_captured": summary.chi_captured,
        "jump_intervals": [[j.s_lo, j.s_hi, j.t] for j in summary.jump_intervals],
        "warnings": summary.warnings,
        "b_prime": asdict(bp),
        "key_inequality": asdict(ki),
    })
    passed = bp.passed and ki.passed_pointwise \
        and (ki.passed_integral is not False)
    if band is not None:
        sb = ls.slope_band_check(summary, band)
        payload["slope_band"] = asdict(sb)
        passed = passed and sb.passed
    if cfg.out:
        rhs = 1.0 + summary.alpha_eff - summary.a_of_s / (2.0 * math.pi)
        lhs = np.empty_like(rhs)
        lhs[:-1] = np.diff(np.exp(2.0 * summary.t_of_s) * summary.b_of_s) \
            / np.diff(summary.s_grid)
        lhs[-1] = lhs[-2]
        _write_csv(cfg.out + "_thresholds.csv", ["t", "s", "B", "A"],
                   zip(summary.thresholds, summary.s_of_t,
                       summary.b_of_t, summary.a_of_t))
        _write_csv(cfg.out + "_sgrid.csv",
                   ["s_uniform", "t_of_s", "A_of_s", "B_of_s",
                    "lhs_key_inequality", "rhs_key_inequality"],
                   zip(summary.s_grid, summary.t_of_s, summary.a_of_s,
                       summary.b_of_s, lhs, rhs))
        _emit(payload, cfg.out + "_report.json")
    else:
        _emit(payload, None)
    return EXIT_OK if passed else EXIT_TOLERANCE


def cmd_lemma(cfg: JobConfig) -> int:
    if cfg.V is None or cfg.chi is None or cfg.a is None or cfg.b is None:
        raise ValueError("lemma needs --V, --chi, --a and --b")
    bound = lemma_bound(cfg.V, cfg.chi, cfg.a, cfg.b)
    greedy = brute_force_max(cfg.V, cfg.chi, cfg.a, cfg.b, cfg.segments)
    payload = {
        "bound": bound,
        "greedy": greedy,
        "gap": bound - greedy,
        "segments": cfg.segments,
        "bang_bang_integral": bang_bang(cfg.V, cfg.chi, cfg.a, cfg.b).integral(),
        "config": cfg.to_dict(),
    }
    if cfg.random_check:
        payload["random_search"] = random_search_max(
            cfg.V, cfg.chi, cfg.a, cfg.b, cfg.segments,
            restarts=cfg.restarts, steps=cfg.steps, seed=cfg.seed)
    _emit(payload, cfg.out)
    return EXIT_OK if payload["gap"] >= -1e-12 else EXIT_TOLERANCE


def cmd_sweep(cfg: JobConfig) -> int:
    if len(cfg.a_range) != 3 or len(cfg.b_range) != 3:
        raise ValueError("sweep needs --a-range lo,hi,steps and "
                         "--b-range lo,hi,steps")
    d = _divisor(cfg)
    a_lo, a_hi, a_n = cfg.a_range
    b_lo, b_hi, b_n = cfg.b_range
    a_vals = np.linspace(a_lo, a_hi, int(a_n))
    b_vals = np.linspace(b_lo, b_hi, int(b_n))
    points = [(float(a), float(b)) for a in a_vals for b in b_vals]

    def work(ab):
        a, b = ab
        if b <= 0.0 or a > b:
            return (a, b, "invalid", False, None, None)
        rep = volume_bounds(d, CurvatureBand(a, b))
        return (a, b, rep.case, rep.feasible, rep.v_lower, rep.v_upper)

    n_threads = int(os.environ.get("CONICVOL_THREADS", "0")) or None
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        rows = list(pool.map(work, points))
    header = ["a", "b", "case", "feasible", "v_lower", "v_upper"]
    if cfg.out:
        _write_csv(cfg.out, header,
                   [[a, b, case, str(feas),
                     "" if lo is None else repr(lo),
                     "" if hi is None else repr(hi)]
                    for a, b, case, feas, lo, hi in rows])
    feasible = sum(1 for r in rows if r[3])
    _emit({"points": len(rows), "feasible": feasible,
           "config": cfg.to_dict()}, None if cfg.out else cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="conicvol",
        description="Volume bounds and extremal glued-football metrics "
                    "for conic 2-spheres.",
        epilog="Exit codes: 0 ok, 2 bad config, 3 infeasible, "
               "4 numerical check failed.")
    p.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", default=None)
        return sp

    sp = add("bounds", "sharp volume bounds for a divisor and band")
    sp.add_argument("--orders", default="")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)

    sp = add("minvol", "smallest volume with |K| <= 1")
    sp.add_argument("--orders", default="")

    for name, help_ in (("build", "assemble an extremal model"),
                        ("verify", "run the invariant battery on a model")):
        sp = add(name, help_)
        sp.add_argument("--kind", choices=MODEL_KINDS, required=True)
        sp.add_argument("--orders", default="")
        sp.add_argument("--a", type=float, default=None)
        sp.add_argument("--b", type=float, default=None)
        if name == "build":
            sp.add_argument("--csv", dest="csv_path", default=None)
            sp.add_argument("--svg", dest="svg_path", default=None)
            sp.add_argument("--rho-min", type=float, default=1e-4)
            sp.add_argument("--rho-max", type=float, default=1e4)
            sp.add_argument("--samples", type=int, default=513)

    sp = add("levelset", "level-set machinery on a model or raster grid")
    sp.add_argument("--kind", choices=MODEL_KINDS, default=None)
    sp.add_argument("--orders", default="")
    sp.add_argument("--a", type=float, default=None)
    sp.add_argument("--b", type=float, default=None)
    sp.add_argument("--L", dest="half_width", type=float, default=8.0)
    sp.add_argument("--N", dest="n", type=int, default=512)
    sp.add_argument("--thresholds", type=int, default=256)
    sp.add_argument("--grid", dest="grid_path", default=None)
    sp.add_argument("--save-grid", dest="save_grid", default=None)
    sp.add_argument("--deficit-trend", dest="deficit_trend",
                    action="store_true")
    sp.add_argument("--eps", default="0.2,0.1,0.05,0.02")

    sp = add("lemma", "slope-constrained integral bound vs brute force")
    sp.add_argument("--V", type=float, required=True)
    sp.add_argument("--chi", type=float, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--n", dest="segments", type=int, default=1000)
    sp.add_argument("--random-check", dest="random_check",
                    action="store_true")
    sp.add_argument("--restarts", type=int, default=20)
    sp.add_argument("--steps", type=int, default=2000)

    sp = add("sweep", "lattice sweep over (a, b) with feasibility")
    sp.add_argument("--orders", default="")
    sp.add_argument("--a-range", dest="a_range", required=True,
                    help="lo,hi,steps")
    sp.add_argument("--b-range", dest="b_range", required=True,
                    help="lo,hi,steps")
    return p


def config_from_args(argv) -> JobConfig:
    ns = build_parser().parse_args(argv)
    cfg = JobConfig(command=ns.command, seed=ns.seed)
    for name in ("a", "b", "kind", "half_width", "n", "thresholds",
                 "out", "csv_path", "svg_path", "grid_path", "save_grid",
                 "deficit_trend", "V", "chi", "segments", "random_check",
                 "restarts", "steps", "samples", "rho_min", "rho_max"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if hasattr(ns, "orders"):
        cfg.orders = _parse_orders(ns.orders)
    if hasattr(ns, "eps"):
        cfg.eps = _parse_orders(ns.eps)
    for attr in ("a_range", "b_range"):
        if hasattr(ns, attr):
            setattr(cfg, attr, _parse_orders(getattr(ns, attr)))
    return cfg


HANDLERS = {
    "bounds": cmd_bounds,
    "minvol": cmd_minvol,
    "build": cmd_build,
    "verify": cmd_verify,
    "levelset": cmd_levelset,
    "lemma": cmd_lemma,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return HANDLERS[cfg.command](cfg)
    except (InfeasibleBandError, GluingError) as exc:
        print(json.dumps({"error": str(exc), "kind": "infeasible"}),
              file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}),
              file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
