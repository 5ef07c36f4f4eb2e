"""Command-line front end.

Subcommands: ``fit`` estimates a transform per CSV column and persists it to
a line-oriented fit file plus per-column QQ tables; ``transform`` /
``inverse`` apply a fit file to a CSV; ``simulate`` runs the bias/MSE
contamination grids; ``sensitivity`` emits stylized sensitivity curves.

Conventions: CSVs are RFC-4180 with a header row, UTF-8, empty field =
missing. Row indices in reports and error messages are 0-based data rows
(the header row does not count). TSV tables carry 12 significant digits.
``CN_THREADS`` caps worker threads for per-column fitting.
"""

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CentranormError, TransformRangeError
from .estimators import (
    EstimatorSpec,
    FittedTransform,
    PrestandardizationRecord,
    apply,
    apply_inverse,
    fit,
)
from .optimize import SearchConfig
from .robust import normal_quantile, plotting_positions
from .simulation import SimulationScenario, run_bias_mse, sensitivity_curve
from .transforms import BOXCOX, YEOJOHNSON, TransformFamily

_FAMILY_FLAG = {"bc": BOXCOX, "yj": YEOJOHNSON}
_EPS_SWEEP = (0.0, 0.05, 0.10, 0.15)
_DEFAULT_ESTIMATORS = "ml,carroll,mtl95,mtl90,mtl85,rewml,rewmlnr"


def _fmt(value) -> str:
    return format(float(value), ".12g")


def _threads(n_tasks: int) -> int:
    env = os.environ.get("CN_THREADS", "").strip()
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


class CliError(Exception):
    """Fatal command error; message goes to stderr, exit code 2."""


def _read_csv(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise CliError(f"cannot read {path}: {err}") from err
    if not rows:
        raise CliError(f"{path}: empty file, expected a header row")
    return rows[0], rows[1:]


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _parse_column(rows, idx, name):
    values = np.empty(len(rows))
    for r, row in enumerate(rows):
        cell = row[idx].strip() if idx < len(row) else ""
        if cell == "":
            values[r] = math.nan
        else:
            try:
                values[r] = float(cell)
            except ValueError:
                raise ValueError(f"column {name!r} row {r}: not numeric: {cell!r}") from None
    return values


def _numeric_columns(header, rows):
    picked = []
    for idx, name in enumerate(header):
        try:
            values = _parse_column(rows, idx, name)
        except ValueError:
            continue
        if np.isfinite(values).any():
            picked.append(name)
    return picked


# fit file: line-oriented key=value records, one per column, blank-line
# separated; floats are written with repr() so parsing restores them exactly.

_FIT_HEADER = "# centranorm fit file v1"


@dataclass
class ColumnFit:
    """One fitted column as persisted in a fit file."""

    column: str
    fitted: FittedTransform
    n_used: int
    flagged_rows: list


def write_fit_file(path, fits):
    lines = [_FIT_HEADER, ""]
    for item in fits:
        f = item.fitted
        spec = f.spec
        search = spec.search
        lines += [
            f"column={item.column}",
            f"family={f.family.kind}",
            f"method={spec.method}",
            f"lambda={f.family.lam!r}",
            f"location={f.location!r}",
            f"scale={f.scale!r}",
            f"n_used={item.n_used}",
            f"flagged_count={len(item.flagged_rows)}",
            "flagged_rows=" + ",".join(str(int(r)) for r in item.flagged_rows),
            f"prestandardize={f.prestandardization.mode}",
            f"pre_center={f.prestandardization.center!r}",
            f"pre_spread={f.prestandardization.spread!r}",
            f"c={spec.c!r}",
            f"cutoff_quantile={spec.cutoff_quantile!r}",
            f"huber_b={spec.huber_b!r}",
            f"reweight_steps={spec.reweight_steps}",
            "trim_fraction=" + ("" if spec.trim_fraction is None else repr(spec.trim_fraction)),
            f"lambda_min={search.lambda_min!r}",
            f"lambda_max={search.lambda_max!r}",
            f"tolerance={search.tolerance!r}",
            f"coarse_grid_points={search.coarse_grid_points}",
            "",
        ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def read_fit_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise CliError(f"cannot read {path}: {err}") from err
    records = []
    block = {}
    for line in text.splitlines():
        if line.startswith("#"):
            continue
        if not line.strip():
            if block:
                records.append(_record_from(block, path))
                block = {}
            continue
        key, _, value = line.partition("=")
        block[key.strip()] = value
    if block:
        records.append(_record_from(block, path))
    return records


def _record_from(block, path):
    try:
        search = SearchConfig(
            lambda_min=float(block["lambda_min"]),
            lambda_max=float(block["lambda_max"]),
            tolerance=float(block["tolerance"]),
            coarse_grid_points=int(block["coarse_grid_points"]),
        )
        trim = block.get("trim_fraction", "")
        spec = EstimatorSpec(
            method=block["method"],
            family_kind=block["family"],
            c=float(block["c"]),
            cutoff_quantile=float(block["cutoff_quantile"]),
            trim_fraction=float(trim) if trim else None,
            reweight_steps=int(block["reweight_steps"]),
            huber_b=float(block["huber_b"]),
            search=search,
        )
        fitted = FittedTransform(
            family=TransformFamily(block["family"], float(block["lambda"])),
            location=float(block["location"]),
            scale=float(block["scale"]),
            weights=np.ones(0),
            spec=spec,
            prestandardization=PrestandardizationRecord(
                block["prestandardize"],
                float(block["pre_center"]),
                float(block["pre_spread"]),
            ),
        )
        flagged = block.get("flagged_rows", "")
        rows = [int(tok) for tok in flagged.split(",") if tok.strip()]
        return ColumnFit(block["column"], fitted, int(block["n_used"]), rows)
    except (KeyError, ValueError) as err:
        raise CliError(f"{path}: malformed fit record: {err}") from err


def _fit_one_column(name, values, spec, prestandardize_mode):
    mask = ~np.isnan(values)
    rows_used = np.flatnonzero(mask)
    if rows_used.size == 0:
        raise CentranormError("all values missing")
    fitted = fit(values[mask], spec, prestandardize_mode=prestandardize_mode)
    flagged = [int(r) for r in rows_used[fitted.weights == 0.0]]
    theo = normal_quantile(plotting_positions(rows_used.size))
    emp = np.sort(apply(fitted, values[mask]))
    return ColumnFit(name, fitted, int(rows_used.size), flagged), theo, emp


def cmd_fit(args):
    header, rows = _read_csv(args.input)
    if args.columns:
        columns = [c.strip() for c in args.columns.split(",") if c.strip()]
        missing = [c for c in columns if c not in header]
        if missing:
            raise CliError(f"columns not in {args.input}: {', '.join(missing)}")
    else:
        columns = _numeric_columns(header, rows)
        if not columns:
            raise CliError(f"{args.input}: no numeric columns found")
    family = _FAMILY_FLAG[args.family]
    spec = _estimator_spec(args.method, family, args)
    mode = args.prestandardize
    os.makedirs(args.out_dir, exist_ok=True)

    def worker(name):
        values = _parse_column(rows, header.index(name), name)
        return _fit_one_column(name, values, spec, mode)

    results, errors = {}, {}
    with ThreadPoolExecutor(max_workers=_threads(len(columns))) as pool:
        futures = {name: pool.submit(worker, name) for name in columns}
    for name in columns:
        try:
            results[name] = futures[name].result()
        except (CentranormError, ValueError) as err:
            errors[name] = str(err)

    fits = [results[name][0] for name in columns if name in results]
    write_fit_file(os.path.join(args.out_dir, "fits.txt"), fits)
    for name in columns:
        if name not in results:
            continue
        _, theo, emp = results[name]
        qq_path = os.path.join(args.out_dir, f"qq_{name}.tsv")
        with open(qq_path, "w", encoding="utf-8") as fh:
            fh.write("theoretical\tempirical\n")
            for t, e in zip(theo, emp):
                fh.write(f"{_fmt(t)}\t{_fmt(e)}\n")

    summary_header = ["column", "status", "method", "family", "lambda", "location",
                      "scale", "n_used", "flagged_count"]
    summary_rows = []
    for name in columns:
        if name in results:
            item = results[name][0]
            summary_rows.append([
                name, "ok", item.fitted.spec.method, item.fitted.family.kind,
                _fmt(item.fitted.family.lam), _fmt(item.fitted.location),
                _fmt(item.fitted.scale), str(item.n_used), str(len(item.flagged_rows)),
            ])
        else:
            summary_rows.append([name, "error: " + errors[name]] + [""] * 7)
    with open(os.path.join(args.out_dir, "summary.tsv"), "w", encoding="utf-8") as fh:
        fh.write("\t".join(summary_header) + "\n")
        for row in summary_rows:
            fh.write("\t".join(row) + "\n")
    print("\t".join(summary_header))
    for row in summary_rows:
        print("\t".join(row))
    for name, message in errors.items():
        print(f"error: column {name!r}: {message}", file=sys.stderr)
    return 1 if errors else 0


def _run_apply(args, inverse_direction):
    records = read_fit_file(args.fit)
    header, rows = _read_csv(args.input)
    missing = [rec.column for rec in records if rec.column not in header]
    if missing:
        raise CliError(f"fit file columns not in {args.input}: {', '.join(missing)}")
    table = [list(row) + [""] * (len(header) - len(row)) for row in rows]
    errors = []
    for rec in records:
        idx = header.index(rec.column)
        try:
            values = _parse_column(rows, idx, rec.column)
        except ValueError as err:
            errors.append(str(err))
            continue
        present = ~np.isnan(values)
        if not inverse_direction and rec.fitted.family.kind == BOXCOX:
            bad = np.flatnonzero(present & (values <= 0.0))
            if bad.size:
                errors.extend(
                    f"column {rec.column!r} row {r}: boxcox needs positive values, "
                    f"got {values[r]!r}" for r in bad[:20]
                )
                continue
        try:
            if inverse_direction:
                out = apply_inverse(rec.fitted, values)
            else:
                out = apply(rec.fitted, values)
        except TransformRangeError as err:
            errors.extend(
                f"column {rec.column!r} row {r}: value outside the transform range"
                for r in err.positions[:20]
            )
            continue
        except CentranormError as err:
            errors.append(f"column {rec.column!r}: {err}")
            continue
        for r in range(len(table)):
            table[r][idx] = "" if math.isnan(out[r]) else repr(float(out[r]))
    if errors:
        for message in errors:
            print("error: " + message, file=sys.stderr)
        return 1
    _write_csv(args.out, header, table)
    return 0


def cmd_transform(args):
    return _run_apply(args, inverse_direction=False)


def cmd_inverse(args):
    return _run_apply(args, inverse_direction=True)


def _estimator_spec(name, family, args):
    name = name.strip().lower()
    search = _parse_lambda_range(args.lambda_range)
    common = dict(
        family_kind=family,
        c=args.c,
        cutoff_quantile=args.cutoff,
        reweight_steps=args.reweight_steps,
        search=search,
    )
    if name in ("ml", "carroll", "rawml", "rewml", "rewmlnr"):
        return EstimatorSpec(method=name, **common)
    if name.startswith("mtl"):
        suffix = name[3:]
        if suffix:
            trim = float(suffix) / 100.0
        elif args.trim is not None:
            trim = args.trim
        else:
            raise CliError("mtl needs --trim or an inline fraction like mtl90")
        return EstimatorSpec(method="mtl", trim_fraction=trim, **common)
    raise CliError(f"unknown estimator {name!r}")


def _parse_lambda_range(text):
    try:
        lo, _, hi = text.partition(":")
        return SearchConfig(lambda_min=float(lo), lambda_max=float(hi))
    except ValueError as err:
        raise CliError(f"bad --lambda-range {text!r}: expected a:b") from err


def cmd_simulate(args):
    family = _FAMILY_FLAG[args.family]
    if args.eps_sweep and args.k_sweep:
        raise CliError("choose one of --eps-sweep / --k-sweep")
    estimators = {}
    for name in args.estimators.split(","):
        if name.strip():
            estimators[name.strip().lower()] = _estimator_spec(name, family, args)
    if not estimators:
        raise CliError("no estimators selected")
    eps_values = _EPS_SWEEP if args.eps_sweep else (args.eps,)
    k_values = tuple(range(0, 11)) if args.k_sweep else (args.k,)
    lines = ["family\ttrue_lambda\tn\tm\teps\tk\testimator\tbias\tmse\tn_failed"]
    for eps in eps_values:
        for k in k_values:
            scenario = SimulationScenario(family, args.true_lambda, n=args.n,
                                          epsilon=eps, k=k, replications=args.m,
                                          seed=args.seed)
            results = run_bias_mse(scenario, estimators)
            for name in estimators:
                res = results[name]
                lines.append("\t".join([
                    args.family, _fmt(args.true_lambda), str(args.n), str(args.m),
                    _fmt(eps), str(k), name, _fmt(res.bias), _fmt(res.mse),
                    str(res.n_failed),
                ]))
    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "bias_mse.tsv")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_sensitivity(args):
    family = _FAMILY_FLAG[args.family]
    spec = _estimator_spec(args.estimator, family, args)
    try:
        lo_s, mid_s, step_s = args.z.split(":")
        lo, hi, step = float(lo_s), float(mid_s), float(step_s)
    except ValueError as err:
        raise CliError(f"bad --z {args.z!r}: expected a:b:step") from err
    if step <= 0.0 or lo > hi:
        raise CliError(f"empty z grid: {args.z!r}")
    grid = np.arange(lo, hi + 0.5 * step, step)
    scale = args.z_scale or ("log" if family == BOXCOX else "linear")
    z = np.exp(grid) if scale == "log" else grid
    curve = sensitivity_curve(spec, args.n, z)
    lines = ["logz\tz\tsc"] if scale == "log" else ["z\tsc"]
    for i in range(z.size):
        sc = "nan" if math.isnan(curve.sc[i]) else _fmt(curve.sc[i])
        if scale == "log":
            lines.append(f"{_fmt(grid[i])}\t{_fmt(z[i])}\t{sc}")
        else:
            lines.append(f"{_fmt(z[i])}\t{sc}")
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "sensitivity.tsv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def _add_tuning_flags(parser):
    parser.add_argument("--family", choices=("bc", "yj"), default="yj",
                        help="transform family (default yj)")
    parser.add_argument("--c", type=float, default=0.5,
                        help="bounded-loss tuning constant (default 0.5)")
    parser.add_argument("--cutoff", type=float, default=0.995,
                        help="hard-rejection quantile (default 0.995)")
    parser.add_argument("--lambda-range", default="-4:6",
                        help="search interval a:b for lambda (default -4:6)")
    parser.add_argument("--reweight-steps", type=int, default=2,
                        help="reweighting rounds for rewml (default 2)")
    parser.add_argument("--trim", type=float, default=None,
                        help="h/n fraction for mtl, in (0.5, 1)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="centranorm",
        description="Robust Box-Cox / Yeo-Johnson fitting and its simulation harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a transform per CSV column")
    p_fit.add_argument("input", help="input CSV (header row required)")
    p_fit.add_argument("--columns", default=None,
                       help="comma-separated column names (default: all numeric)")
    p_fit.add_argument("--method", default="rewml",
                       help="ml | carroll | mtl[NN] | rawml | rewml | rewmlnr (default rewml)")
    p_fit.add_argument("--prestandardize", default="auto",
                       choices=("auto", "none", "mad", "logmad", "median"),
                       help="pre-fit scaling; auto = mad for yj, logmad for bc")
    p_fit.add_argument("--out-dir", default=".", help="output directory (default .)")
    _add_tuning_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    for verb, func, help_text in (
        ("transform", cmd_transform, "apply a fit file to a CSV"),
        ("inverse", cmd_inverse, "invert a fit file on a CSV"),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("fit", help="fit file from `centranorm fit`")
        p.add_argument("input", help="input CSV")
        p.add_argument("--out", default=f"{verb}ed.csv",
                       help=f"output CSV (default {verb}ed.csv)")
        p.set_defaults(func=func)

    p_sim = sub.add_parser("simulate", help="bias/MSE of estimators on contaminated data")
    p_sim.add_argument("--lambda", dest="true_lambda", type=float, default=1.0,
                       help="true transform parameter (default 1)")
    p_sim.add_argument("--n", type=int, default=100, help="sample size (default 100)")
    p_sim.add_argument("--m", type=int, default=100, help="replications (default 100)")
    p_sim.add_argument("--eps", type=float, default=0.0,
                       help="outlier fraction (default 0)")
    p_sim.add_argument("--k", type=int, default=10, help="outlier position (default 10)")
    p_sim.add_argument("--eps-sweep", action="store_true",
                       help="sweep eps over 0, 0.05, 0.10, 0.15")
    p_sim.add_argument("--k-sweep", action="store_true", help="sweep k over 0..10")
    p_sim.add_argument("--estimators", default=_DEFAULT_ESTIMATORS,
                       help=f"comma-separated list (default {_DEFAULT_ESTIMATORS})")
    p_sim.add_argument("--seed", type=int, default=0, help="scenario seed (default 0)")
    p_sim.add_argument("--out-dir", default=".", help="output directory (default .)")
    _add_tuning_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_sc = sub.add_parser("sensitivity", help="stylized sensitivity curve of an estimator")
    p_sc.add_argument("--estimator", default="rewml",
                      help="ml | carroll | mtl[NN] | rawml | rewml | rewmlnr")
    p_sc.add_argument("--n", type=int, default=100, help="sample size (default 100)")
    p_sc.add_argument("--z", required=True,
                      help="grid a:b:step for the roaming point (use --z=-10:10:0.25); "
                           "interpreted on the log scale for bc by default")
    p_sc.add_argument("--z-scale", choices=("linear", "log"), default=None,
                      help="grid scale (default: linear for yj, log for bc)")
    p_sc.add_argument("--out-dir", default=".", help="output directory (default .)")
    _add_tuning_flags(p_sc)
    p_sc.set_defaults(func=cmd_sensitivity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print("error: " + str(err), file=sys.stderr)
        return 2
    except CentranormError as err:
        print("error: " + str(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
