"""Command-line entry point.

Row indices in every output file are 0-based and follow input file order.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .density import DensityConfig, density_profile
from .errors import TeachsetError
from .evaluation import passive_median_error, risk_curve, threshold_demo
from .geometry import DEFAULT_MAX_NORM, project_to_ball
from .io import file_digest, format_csv, read_table, write_atomic, RawTable
from .teaching import TeachingConfig, teach, teaching_report

PROG = "teachset"

DEFAULTS = {
    "format": "csv",
    "delimiter": ",",
    "header": "auto",
    "label_column": None,
    "surrogate_frac": 0.95,
    "surrogate_size": None,
    "radius": 0.4,
    "eta": 1.0e-4,
    "metric": "poincare",
    "halvings": None,
    "target_size": None,
    "seed": 0,
    "kernel": "distance",
    "bandwidth": "median",
    "center": False,
    "max_norm": DEFAULT_MAX_NORM,
    "normalized": False,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _clean(obj):
    """Make ``obj`` JSON-ready with floats fixed to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    return obj


def dump_report(obj):
    return json.dumps(_clean(obj), indent=2, ensure_ascii=True) + "\n"


def _add_input(p):
    p.add_argument("--input", required=True, help="input data file")
    p.add_argument("--format", choices=("csv", "libsvm"))
    p.add_argument("--delimiter", help="CSV delimiter (default ',')")
    p.add_argument("--header", choices=("auto", "yes", "no"))
    p.add_argument("--label-column",
                   help="CSV label column, 0-based index or header name")
    p.add_argument("--center", action="store_true", default=None,
                   help="subtract column means before ball projection")
    p.add_argument("--max-norm", type=float,
                   help=f"largest row norm after projection (default {DEFAULT_MAX_NORM})")
    p.add_argument("--config", help="JSON file of option defaults (flags win)")


def _add_pipeline(p):
    frac = p.add_mutually_exclusive_group()
    frac.add_argument("--surrogate-frac", type=float,
                      help="surrogate size as a fraction of n (default 0.95)")
    frac.add_argument("--surrogate-size", type=int, help="surrogate size n'")
    p.add_argument("--radius", type=float, help="hypersphere radius (default 0.4)")
    p.add_argument("--eta", type=float, help="kernel regularizer (default 1e-4)")
    p.add_argument("--metric", choices=("poincare", "euclidean"))
    p.add_argument("--kernel", choices=("rbf", "distance"),
                   help="halving kernel over Poincare distances (default distance)")
    p.add_argument("--bandwidth", help="rbf bandwidth or 'median' (default median)")
    p.add_argument("--seed", type=int)


def build_parser():
    parser = _Parser(prog=PROG, description=(
        "Teaching-set selection by Poincare-density surrogates and iterative "
        "kernel-deflation halving. Output row indices are 0-based."))
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("teach", help="select a teaching set")
    _add_input(p)
    _add_pipeline(p)
    size = p.add_mutually_exclusive_group()
    size.add_argument("--halvings", type=int, help="number of halvings l")
    size.add_argument("--target-size", type=int, help="exact teaching-set size")
    p.add_argument("--out-indices", required=True,
                   help="selected row indices, one per line, 0-based")
    p.add_argument("--out-report", required=True, help="JSON report")
    p.add_argument("--out-density", help="optional CSV index,score,neighbors")
    p.add_argument("--figure", help="optional figure of the halving stages")

    p = sub.add_parser("density", help="per-point density scores")
    _add_input(p)
    p.add_argument("--radius", type=float)
    p.add_argument("--metric", choices=("poincare", "euclidean"))
    p.add_argument("--normalized", action="store_true", default=None)
    p.add_argument("--out", required=True, help="CSV index,score,neighbors")
    p.add_argument("--figure")

    ev = sub.add_parser("eval", help="evaluation harness")
    evsub = ev.add_subparsers(dest="eval_command", parser_class=_Parser)
    p = evsub.add_parser("risk-curve", help="risk disagreement against cost")
    _add_input(p)
    _add_pipeline(p)
    p.add_argument("--strategy", required=True, choices=("teaching", "random", "kmedoids"))
    p.add_argument("--costs", required=True, help="ascending comma-separated costs")
    p.add_argument("--out", help="JSON report (default stdout)")
    p.add_argument("--out-csv", help="optional CSV cost,risk")
    p.add_argument("--figure")

    demo = sub.add_parser("demo", help="demonstrations")
    dsub = demo.add_subparsers(dest="demo_command", parser_class=_Parser)
    p = dsub.add_parser("threshold", help="1-D threshold label-complexity demo")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--passive-n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=100,
                   help="seeds for the passive median error")
    p.add_argument("--out", help="JSON output (default stdout)")

    p = sub.add_parser("synth", help="write a synthetic data set as CSV")
    p.add_argument("kind", choices=("gaussian", "blobs-noise"))
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _resolve(args, keys):
    cfg = {}
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise TeachsetError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise TeachsetError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    out = {}
    for key in keys:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            out[key] = cli_value
        elif key in cfg:
            out[key] = cfg[key]
        else:
            out[key] = DEFAULTS.get(key)
    # a sizing flag on the command line overrides either sizing key in the file
    if getattr(args, "halvings", None) is not None:
        out["target_size"] = None
    if getattr(args, "target_size", None) is not None:
        out["halvings"] = None
    if getattr(args, "surrogate_size", None) is not None:
        out["surrogate_frac"] = DEFAULTS["surrogate_frac"]
    elif getattr(args, "surrogate_frac", None) is not None:
        out["surrogate_size"] = None
    return out


INPUT_KEYS = ("format", "delimiter", "header", "label_column", "center", "max_norm")
PIPELINE_KEYS = ("surrogate_frac", "surrogate_size", "radius", "eta", "metric",
                 "kernel", "bandwidth", "seed")


def _load(args, opts):
    label = opts["label_column"]
    if isinstance(label, str) and label.lstrip("-").isdigit():
        label = int(label)
    header = {"auto": "auto", "yes": True, "no": False}.get(opts["header"], opts["header"])
    if opts["format"] == "csv":
        table = read_table(args.input, "csv", delimiter=opts["delimiter"],
                           header=header, label_column=label)
    else:
        table = read_table(args.input, "libsvm")
    ds = project_to_ball(table.rows, opts["max_norm"], table.labels, bool(opts["center"]))
    manifest_input = {
        "path": args.input,
        "format": opts["format"],
        "digest": file_digest(args.input),
        "rows": ds.n,
        "features": ds.dim,
        "label_column": label,
        "center": bool(opts["center"]),
        "max_norm": opts["max_norm"],
    }
    return ds, manifest_input


def _bandwidth(value):
    if value in (None, "median"):
        return "median"
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"argument --bandwidth: invalid value {value!r}") from None


def _manifest(command, inputs, config, outputs):
    return {
        "tool": PROG,
        "version": __version__,
        "command": command,
        "input": inputs,
        "config": config,
        "outputs": outputs,
    }


def _density_csv(profile):
    lines = ["index,score,neighbors"]
    for i, (s, c) in enumerate(zip(profile.scores, profile.neighbor_counts)):
        lines.append(f"{i},{float(s):.12g},{int(c)}")
    return "\n".join(lines) + "\n"


def cmd_teach(args):
    opts = _resolve(args, INPUT_KEYS + PIPELINE_KEYS + ("halvings", "target_size"))
    if opts["halvings"] is None and opts["target_size"] is None:
        raise UsageError("one of the arguments --halvings --target-size is required")
    if opts["halvings"] is not None and opts["target_size"] is not None:
        raise UsageError("argument --target-size: not allowed with argument --halvings")
    ds, inputs = _load(args, opts)
    config = TeachingConfig(
        surrogate_frac=float(opts["surrogate_frac"]),
        radius=float(opts["radius"]),
        eta=float(opts["eta"]),
        metric=opts["metric"],
        halvings=opts["halvings"],
        target_size=opts["target_size"],
        seed=int(opts["seed"]),
        surrogate_size=opts["surrogate_size"],
        kernel=opts["kernel"],
        bandwidth=_bandwidth(opts["bandwidth"]),
    )
    ts = teach(ds, config)
    outputs = {"indices": args.out_indices, "report": args.out_report,
               "density": args.out_density, "figure": args.figure}
    report = teaching_report(ts, ds)
    report["manifest"] = _manifest("teach", inputs, config.to_dict(), outputs)
    report["indices"] = ts.indices
    write_atomic(args.out_indices, "".join(f"{int(i)}\n" for i in ts.indices))
    write_atomic(args.out_report, dump_report(report))
    if args.out_density:
        write_atomic(args.out_density, _density_csv(ts.profile))
    if args.figure:
        from .plotting import plot_teaching
        plot_teaching(ds, ts, args.figure)
    return 0


def cmd_density(args):
    opts = _resolve(args, INPUT_KEYS + ("radius", "metric", "normalized"))
    ds, _ = _load(args, opts)
    profile = density_profile(ds, DensityConfig(float(opts["radius"]), opts["metric"],
                                                bool(opts["normalized"])))
    write_atomic(args.out, _density_csv(profile))
    if args.figure:
        from .plotting import plot_density
        plot_density(ds, profile, args.figure)
    return 0


def _parse_costs(text):
    try:
        costs = [int(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise UsageError(f"argument --costs: invalid list {text!r}") from None
    if not costs:
        raise UsageError("argument --costs: empty list")
    return costs


def cmd_risk_curve(args):
    opts = _resolve(args, INPUT_KEYS + PIPELINE_KEYS)
    costs = _parse_costs(args.costs)
    ds, inputs = _load(args, opts)
    config = TeachingConfig(
        surrogate_frac=float(opts["surrogate_frac"]),
        radius=float(opts["radius"]),
        eta=float(opts["eta"]),
        metric=opts["metric"],
        halvings=0,
        seed=int(opts["seed"]),
        surrogate_size=opts["surrogate_size"],
        kernel=opts["kernel"],
        bandwidth=_bandwidth(opts["bandwidth"]),
    )
    rep = risk_curve(ds, args.strategy, costs, config, seed=int(opts["seed"]))
    body = {"schema": "teachset.risk-curve/1"}
    body.update(rep.to_dict())
    outputs = {"report": args.out, "csv": args.out_csv, "figure": args.figure}
    cfg = config.to_dict()
    cfg.pop("halvings")
    cfg.pop("target_size")
    body["manifest"] = _manifest("eval risk-curve", inputs, cfg, outputs)
    text = dump_report(body)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    if args.out_csv:
        lines = ["cost,risk"] + [f"{c},{r:.12g}" for c, r in zip(rep.costs, rep.risks)]
        write_atomic(args.out_csv, "\n".join(lines) + "\n")
    if args.figure:
        from .plotting import plot_risk_curves
        plot_risk_curves([rep], args.figure)
    return 0


def cmd_threshold(args):
    res = threshold_demo(args.epsilon, args.passive_n, args.seed)
    body = {
        "schema": "teachset.threshold-demo/1",
        "epsilon": res.epsilon,
        "teacher": {"examples": res.teaching_examples, "error": res.teaching_error},
        "active": {"queries": res.active_queries, "error": res.active_error,
                   "query_bound": res.active_query_bound,
                   "reference_queries": res.reference_active_queries},
        "passive": {"samples": res.passive_queries, "error": res.passive_error,
                    "median_error": passive_median_error(
                        args.passive_n, range(args.seed, args.seed + args.repeats)),
                    "repeats": args.repeats,
                    "reference_samples": res.reference_passive_samples},
        "manifest": _manifest("demo threshold", None, {
            "epsilon": args.epsilon, "passive_n": args.passive_n,
            "seed": args.seed, "repeats": args.repeats}, {"report": args.out}),
    }
    text = dump_report(body)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_synth(args):
    from .datasets import blobs_with_noise, case_study_gaussian
    if args.kind == "gaussian":
        rows, labels = case_study_gaussian(args.seed, args.n or 1400)
    else:
        rows, labels = blobs_with_noise(args.n or 900, seed=args.seed)
    d = rows.shape[1]
    table = RawTable(rows, labels, [f"x{i + 1}" for i in range(d)] + ["y"], d)
    write_atomic(args.out, format_csv(table))
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required (teach, density, eval, demo, synth)")
        if args.command == "teach":
            return cmd_teach(args)
        if args.command == "density":
            return cmd_density(args)
        if args.command == "eval":
            if args.eval_command != "risk-curve":
                raise UsageError("eval needs a subcommand: risk-curve")
            return cmd_risk_curve(args)
        if args.command == "demo":
            if args.demo_command != "threshold":
                raise UsageError("demo needs a subcommand: threshold")
            return cmd_threshold(args)
        return cmd_synth(args)
    except UsageError as exc:
        print(f"{PROG}: error: usage: {exc}", file=sys.stderr)
        return 2
    except TeachsetError as exc:
        print(f"{PROG}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
