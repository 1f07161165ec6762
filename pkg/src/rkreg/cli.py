"""Command-line entry point: simulation runs, real-data fits and theory tables.

Subcommands
-----------
simulate   run the Monte-Carlo benchmark and write a results CSV
fit        smooth a real x/y CSV with automatic bandwidths, write curves + SVG
theory     print kernel functionals, optimal-coefficient values and risk ratios

Exit codes: 0 success, 1 runtime or numeric error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    cosine_model,
    logistic_model,
    mwise_ratio,
    optimal_h_coefficient,
    true_functionals,
    PluginSelectionError,
)
from .bandwidth import robust_scale
from .kernels import gaussian_kernel
from .recursive import make_dataset, ratio_with_zero_fallback
from .sequences import StepsizeConfig
from .simulation import (
    ESTIMATOR_NAMES,
    SimulationConfig,
    fit_estimator,
    run_experiment,
)

__all__ = ["main"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd")
_DEFAULT_FIT_ESTIMATORS = "NW,Recursive1,Recursive4"


class IngestionError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


def _comma_floats(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip() != ""]


def _comma_ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip() != ""]


def _comma_names(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip() != ""]


def read_xy_csv(path, x_col: str, y_col: str):
    """Read two numeric columns from a headered CSV.

    Non-numeric cells are a hard error naming the row and column; rows with
    non-finite values are dropped and counted.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (x_col, y_col):
            if col not in header:
                raise IngestionError(f"column {col!r} not found in header of {path}")
        xs, ys = [], []
        dropped = 0
        for line_no, row in enumerate(reader, start=2):
            values = {}
            for col in (x_col, y_col):
                cell = row.get(col)
                try:
                    values[col] = float(cell)
                except (TypeError, ValueError):
                    raise IngestionError(
                        f"non-numeric value {cell!r} at row {line_no}, column {col!r}"
                    ) from None
            if not all(math.isfinite(v) for v in values.values()):
                dropped += 1
                continue
            xs.append(values[x_col])
            ys.append(values[y_col])
    if len(xs) < 10:
        raise InsufficientDataError(
            f"need at least 10 usable rows, found {len(xs)} in {path}"
        )
    return np.asarray(xs), np.asarray(ys), dropped


def write_svg(path, xs, ys, grid, curves: dict, x_label: str, y_label: str) -> None:
    """Self-contained scatter + fitted-curves figure (no plotting dependency)."""
    width, height = 800, 500
    margin = 55.0
    finite_curves = [np.asarray(v)[np.isfinite(v)] for v in curves.values()]
    all_y = np.concatenate([np.asarray(ys)] + finite_curves)
    x_lo, x_hi = float(np.min(np.concatenate([xs, grid]))), float(np.max(np.concatenate([xs, grid])))
    y_lo, y_hi = float(np.min(all_y)), float(np.max(all_y))
    x_pad = 0.02 * (x_hi - x_lo or 1.0)
    y_pad = 0.05 * (y_hi - y_lo or 1.0)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(v):
        return margin + (v - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
    ]
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" '
                     f'fill="#777777" fill-opacity="0.55"/>')
    for idx, (name, values) in enumerate(curves.items()):
        colour = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(
            f"{sx(g):.2f},{sy(v):.2f}"
            for g, v in zip(grid, values)
            if math.isfinite(v)
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" '
                     f'stroke-width="2"/>')
        ly = margin + 20 * idx
        parts.append(f'<line x1="{width - margin - 150}" y1="{ly}" '
                     f'x2="{width - margin - 120}" y2="{ly}" stroke="{colour}" '
                     f'stroke-width="3"/>')
        parts.append(f'<text x="{width - margin - 112}" y="{ly + 4}" '
                     f'font-size="13" font-family="sans-serif">{name}</text>')
    parts.append(f'<text x="{width / 2:.0f}" y="{height - 12}" font-size="13" '
                 f'text-anchor="middle" font-family="sans-serif">{x_label}</text>')
    parts.append(f'<text x="16" y="{height / 2:.0f}" font-size="13" text-anchor="middle" '
                 f'font-family="sans-serif" transform="rotate(-90 16 {height / 2:.0f})">'
                 f'{y_label}</text>')
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(f'<text x="{sx(xv):.0f}" y="{height - margin + 18}" font-size="11" '
                     f'text-anchor="middle" font-family="sans-serif">{xv:.4g}</text>')
        parts.append(f'<text x="{margin - 8}" y="{sy(yv) + 4:.0f}" font-size="11" '
                     f'text-anchor="end" font-family="sans-serif">{yv:.4g}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")


def _write_metadata(path, payload: dict) -> None:
    payload = dict(payload)
    payload["versions"] = {"rkreg": __version__, "numpy": np.__version__}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def _cmd_simulate(args) -> int:
    config = SimulationConfig(
        model=args.model,
        sigmas=_comma_floats(args.sigma),
        ns=_comma_ints(args.n),
        replications=args.reps,
        seed=args.seed,
        estimators=tuple(_comma_names(args.estimators)),
    )
    table = run_experiment(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"results_{args.model}.csv"
    table.to_csv(csv_path)
    _write_metadata(
        out_dir / f"results_{args.model}_meta.json",
        {
            "command": "simulate",
            "model": config.model,
            "sigmas": list(config.sigmas),
            "ns": list(config.ns),
            "replications": config.replications,
            "seed": config.seed,
            "estimators": list(config.estimators),
            "fallbacks": {f"{r.estimator}/sigma={r.sigma}/n={r.n}": r.fallbacks
                          for r in table.rows},
        },
    )
    print(f"wrote {csv_path} ({len(table.rows)} rows)")
    header = f"{'sigma':>6} {'n':>6} {'estimator':>12} {'mse':>12} {'seconds':>9} {'fallbacks':>9}"
    print(header)
    for row in table.rows:
        print(f"{row.sigma:>6.3g} {row.n:>6d} {row.estimator:>12} "
              f"{row.mse:>12.6g} {row.cpu_seconds:>9.3f} {row.fallbacks:>9d}")
    return 0


def _cmd_fit(args) -> int:
    xs, ys, dropped = read_xy_csv(args.input, args.x_col, args.y_col)
    if args.shuffle is not None:
        order = np.random.Generator(np.random.Philox(args.shuffle)).permutation(xs.size)
        xs, ys = xs[order], ys[order]
    data = make_dataset(xs, ys)
    estimators = _comma_names(args.estimators)
    for name in estimators:
        if name not in ESTIMATOR_NAMES:
            raise ValueError(f"unknown estimator {name!r}; expected one of {ESTIMATOR_NAMES}")
    kernel = gaussian_kernel()
    n = xs.size
    # grid padding uses the pilot-scale bandwidth so all estimators share one grid
    pad = 3.0 * robust_scale(xs) * n ** -0.2
    grid = np.linspace(xs.min() - pad, xs.max() + pad, args.grid_size)

    curves = {}
    fallbacks = {}
    for name in estimators:
        fitted, coefficient, fallback = fit_estimator(data, name, grid, kernel)
        curves[name] = fitted
        fallbacks[name] = {"coefficient": coefficient, "pilot_fallback": fallback}
        if fallback:
            print(f"warning: plug-in selection failed for {name}; "
                  f"using pilot-scale bandwidth", file=sys.stderr)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    curves_path = out_dir / f"{stem}_curves.csv"
    with open(curves_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grid"] + estimators)
        for i, g in enumerate(grid):
            writer.writerow([repr(float(g))] + [repr(float(curves[e][i])) for e in estimators])
    # sorted by x for plotting only; the fit consumed file order
    order = np.argsort(xs)
    svg_path = out_dir / f"{stem}_fit.svg"
    write_svg(svg_path, xs[order], ys[order], grid, curves, args.x_col, args.y_col)
    _write_metadata(
        out_dir / f"{stem}_meta.json",
        {
            "command": "fit",
            "input": str(args.input),
            "x_col": args.x_col,
            "y_col": args.y_col,
            "rows_used": int(n),
            "rows_dropped_nonfinite": int(dropped),
            "shuffle": args.shuffle,
            "grid_size": args.grid_size,
            "grid_span": [float(grid[0]), float(grid[-1])],
            "estimators": fallbacks,
        },
    )
    print(f"fitted {n} observations ({dropped} dropped); wrote {curves_path} and {svg_path}")
    return 0


def _print_ratios() -> None:
    print("minimised weighted-risk ratio relative to the non-recursive baseline:")
    for name in ("Recursive1", "Recursive2", "Recursive3", "Recursive4"):
        ratio = mwise_ratio(StepsizeConfig.by_name(name))
        text = f"{ratio:.5f}" if ratio is not None else "not comparable"
        print(f"  {name}: {text}")


def _print_kernel(name: str) -> None:
    if name.lower() != "gaussian":
        raise ValueError(f"unknown kernel {name!r}; only 'gaussian' is built in")
    kernel = gaussian_kernel()
    print(f"kernel {kernel.name}: R={kernel.R:.7f} mu2={kernel.mu2:.7f} "
          f"theta={kernel.theta:.6f}")


def _print_functionals(args) -> None:
    if args.functionals is not True:
        values = _comma_floats(args.functionals)
        if len(values) != 5:
            raise ValueError("--functionals expects five comma-separated values "
                             "(i1,i2,i3,i4,i5) or no value for model-derived ones")
        from .asymptotics import TrueFunctionals

        functionals = TrueFunctionals(*values)
        label = "user-supplied"
    else:
        if args.model is None or args.sigma is None:
            raise ValueError("--functionals without values needs --model and --sigma")
        sigma = float(args.sigma)
        model = {"cos": cosine_model, "logistic": logistic_model}[args.model]
        functionals = true_functionals(model(sigma))
        label = f"{args.model} model, sigma={sigma}"
    f = functionals
    print(f"functionals ({label}):")
    print(f"  i1={f.i1:.6f} i2={f.i2:.6f} i3={f.i3:.6f} i4={f.i4:.6f} i5={f.i5:.6f}")
    print(f"  i4-i5 = {f.i4 - f.i5:.6f}   i1+i3-2*i2 = {f.i1 + f.i3 - 2 * f.i2:.6f}")
    kernel = gaussian_kernel()
    print("optimal bandwidth coefficients h(n) = C * n**(-1/5):")
    for name in ESTIMATOR_NAMES:
        config = StepsizeConfig.by_name(name)
        try:
            c = optimal_h_coefficient(f, config, kernel)
            print(f"  {name}: C = {c:.5f}")
        except PluginSelectionError as exc:
            print(f"  {name}: undefined ({exc})")


def _cmd_theory(args) -> int:
    selected = args.ratios or args.kernel is not None or args.functionals is not None
    if args.ratios or not selected:
        _print_ratios()
    if args.kernel is not None or not selected:
        _print_kernel(args.kernel or "gaussian")
    if args.functionals is not None:
        _print_functionals(args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkreg",
        description="Semi-recursive kernel regression with automatic bandwidth selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the Monte-Carlo benchmark")
    sim.add_argument("--model", required=True, choices=sorted(("cos", "logistic")))
    sim.add_argument("--sigma", default="0.1", help="comma list of noise sds")
    sim.add_argument("--n", default="100", help="comma list of sample sizes")
    sim.add_argument("--reps", type=int, default=500)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--estimators", default=",".join(ESTIMATOR_NAMES))
    sim.add_argument("--out-dir", default=".")
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit", help="smooth a real x/y dataset from CSV")
    fit.add_argument("--input", required=True)
    fit.add_argument("--x-col", required=True)
    fit.add_argument("--y-col", required=True)
    fit.add_argument("--estimators", default=_DEFAULT_FIT_ESTIMATORS)
    fit.add_argument("--out-dir", default=".")
    fit.add_argument("--grid-size", type=int, default=101)
    fit.add_argument("--shuffle", type=int, default=None,
                     help="shuffle the stream order with this seed (sensitivity check)")
    fit.set_defaults(func=_cmd_fit)

    theory = sub.add_parser("theory", help="print closed-form constants")
    theory.add_argument("--ratios", action="store_true")
    theory.add_argument("--kernel", default=None)
    theory.add_argument("--model", default=None, choices=sorted(("cos", "logistic")))
    theory.add_argument("--sigma", default=None)
    theory.add_argument("--functionals", nargs="?", const=True, default=None,
                        help="print functional values; optionally pass i1,i2,i3,i4,i5")
    theory.set_defaults(func=_cmd_theory)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
