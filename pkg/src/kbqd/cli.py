"""Batch command-line interface.

CSV in, JSON out (stdout or --out), plot-ready CSV series to --aux-dir.
Exit codes: 0 success, 2 usage error (bad flags, missing files), 1
computation error (parse failures, invalid numeric inputs). Identical
flags plus an identical seed produce byte-identical outputs; the seed
falls back to the QUADRATIK_SEED environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import ClusterConfig, pkbc_fit, summary_stat, validate
from .core import RandomSource, descriptive_stats
from .gof import (ResamplingPlan, ksample_test, normality_test, summarize,
                  twosample_test)
from .pkbd import dpkb, rpkb
from .tuning import AlternativeSpec, select_h
from .uniformity import pk_test

SCHEMA_VERSION = 1
SEED_ENV_VAR = "QUADRATIK_SEED"


class CliInputError(Exception):
    """Usage-level problem: missing file, malformed flag value."""


class CsvParseError(Exception):
    """Data-level problem inside an input file."""


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------


def read_csv_matrix(path, delimiter=",", has_header=False):
    """Parse a numeric CSV into an array, with row/column diagnostics."""
    file = Path(path)
    if not file.is_file():
        raise CliInputError(f"input file not found: {path}")
    rows = []
    header = None
    with open(file, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for line_no, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if has_header and header is None:
                header = [cell.strip() for cell in row]
                continue
            values = []
            for col_no, cell in enumerate(row, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CsvParseError(
                        f"{path}: non-numeric cell at row {line_no}, "
                        f"column {col_no}: {cell.strip()!r}") from None
            if rows and len(values) != len(rows[0]):
                raise CsvParseError(
                    f"{path}: row {line_no} has {len(values)} fields, "
                    f"expected {len(rows[0])}")
            rows.append(values)
    if not rows:
        raise CsvParseError(f"{path}: no data rows")
    return np.asarray(rows), header


def split_label_column(data, labels_col):
    """Remove the 1-based label column from a parsed matrix."""
    n_cols = data.shape[1]
    if not 1 <= labels_col <= n_cols:
        raise CliInputError(
            f"--labels-col {labels_col} out of range for {n_cols} columns")
    idx = labels_col - 1
    labels = data[:, idx]
    features = np.delete(data, idx, axis=1)
    return features, labels


def parse_float_list(text, flag):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise CliInputError(f"{flag} expects comma-separated numbers, got "
                            f"{text!r}") from None


def parse_k_list(text):
    """Cluster counts: '4', '2,3,4' or '2..10'."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise CliInputError(f"--k range must be int..int, got {text!r}") \
                from None
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise CliInputError(f"--k expects ints, got {text!r}") from None


def resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliInputError(
                f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return 0


def plan_from_args(args) -> ResamplingPlan:
    return ResamplingPlan(method=args.method, B=args.num_iter, b=args.b,
                          quantile=args.quantile)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonify(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        # strict JSON has no NaN/Inf; missing values travel as null
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def emit_json(payload, out_path):
    text = json.dumps(jsonify(payload), indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v))
                             if isinstance(v, (float, np.floating)) else v
                             for v in row])


def write_matrix_csv(target, matrix):
    rows = "\n".join(",".join(repr(float(v)) for v in row) for row in matrix)
    text = rows + "\n"
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


def aux_dir(args):
    if args.aux_dir:
        path = Path(args.aux_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path
    return None


def write_summary_tables(path, tables):
    write_csv(path, ["variable", "statistic", "group", "value"],
              [[r["variable"], r["statistic"], r["group"], r["value"]]
               for r in tables.to_records()])


def write_qq_series(path, qq_series):
    rows = []
    for variable, series in qq_series.items():
        for i, (xv, yv) in enumerate(zip(series["x"], series["y"])):
            rows.append([variable, i, xv, yv])
    write_csv(path, ["variable", "index", "x", "y"], rows)


def outcome_payload(outcome):
    return {
        "schema_version": SCHEMA_VERSION,
        "test_type": outcome.test_type,
        "statistics": list(outcome.statistics),
        "critical_values": list(outcome.critical_values),
        "reject": list(outcome.reject),
        "h0_rejected": outcome.h0_rejected,
        "cv_method": outcome.cv_method,
        "h": outcome.h,
        "quantile": outcome.quantile,
        "b_replicates": outcome.b_used,
        "details": outcome.details,
    }


def emit_test_result(args, outcome, x, y=None, labels=None):
    summary = summarize(outcome, x, y=y, labels=labels)
    payload = outcome_payload(outcome)
    payload["summary_statistics"] = summary.tables.to_records()
    emit_json(payload, args.out)
    aux = aux_dir(args)
    if aux:
        write_summary_tables(aux / "summary_stats.csv", summary.tables)
        if summary.qq_series:
            write_qq_series(aux / "qq_series.csv", summary.qq_series)
    return 0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_normal_test(args):
    data, _ = read_csv_matrix(args.data, args.delim, args.has_header)
    mu_hat = np.array(parse_float_list(args.mu_hat, "--mu-hat")) \
        if args.mu_hat else None
    sigma_hat = None
    if args.sigma_hat:
        sigma_hat, _ = read_csv_matrix(args.sigma_hat, args.delim, False)
    out = normality_test(data, args.h, mu_hat=mu_hat, sigma_hat=sigma_hat,
                         centering=args.centering,
                         plan=ResamplingPlan(B=args.num_iter,
                                             quantile=args.quantile),
                         rng=RandomSource(resolve_seed(args)))
    return emit_test_result(args, out, data)


def cmd_twosample_test(args):
    x, _ = read_csv_matrix(args.data, args.delim, args.has_header)
    y, _ = read_csv_matrix(args.data2, args.delim, args.has_header)
    out = twosample_test(x, y, args.h, plan_from_args(args),
                         RandomSource(resolve_seed(args)))
    return emit_test_result(args, out, x, y=y)


def cmd_ksample_test(args):
    data, _ = read_csv_matrix(args.data, args.delim, args.has_header)
    if args.labels:
        labels, _ = read_csv_matrix(args.labels, args.delim, False)
        labels = labels[:, 0]
        features = data
    elif args.labels_col is not None:
        features, labels = split_label_column(data, args.labels_col)
    else:
        raise CliInputError("ksample-test needs --labels-col or --labels")
    out = ksample_test(features, labels, args.h, plan_from_args(args),
                       RandomSource(resolve_seed(args)))
    return emit_test_result(args, out, features, labels=labels)


def cmd_uniformity_test(args):
    data, _ = read_csv_matrix(args.data, args.delim, args.has_header)
    out = pk_test(data, args.rho, B=args.num_iter, quantile=args.quantile,
                  rng=RandomSource(resolve_seed(args)))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "test_type": out.test_type,
        "rho": out.rho,
        "un": out.un,
        "tn_normalized": out.tn_normalized,
        "un_critical": out.un_critical,
        "reject_u": out.reject_u,
        "vn": out.vn,
        "vn_cutoff": out.vn_cutoff,
        "reject_v": out.reject_v,
        "dof": out.dof,
        "c_constant": out.c_constant,
        "var_un": out.var_un,
        "quantile": out.quantile,
        "b_replicates": out.b_used,
        "h0_rejected": out.h0_rejected,
    }
    summary = summarize(out, data)
    payload["summary_statistics"] = summary.tables.to_records()
    emit_json(payload, args.out)
    aux = aux_dir(args)
    if aux:
        write_summary_tables(aux / "summary_stats.csv", summary.tables)
        write_qq_series(aux / "qq_series.csv", summary.qq_series)
    return 0


def cmd_select_h(args):
    data, _ = read_csv_matrix(args.data, args.delim, args.has_header)
    y = None
    if args.data2:
        y, _ = read_csv_matrix(args.data2, args.delim, args.has_header)
    elif args.labels:
        labels, _ = read_csv_matrix(args.labels, args.delim, False)
        y = labels[:, 0]
    elif args.labels_col is not None:
        data, y = split_label_column(data, args.labels_col)
    deltas = tuple(parse_float_list(args.deltas, "--deltas")) \
        if args.deltas else ()
    spec = AlternativeSpec(args.alternative, deltas)
    res = select_h(data, y, spec, h_grid=parse_float_list(args.h_grid, "--h-grid"),
                   n_rep=args.n_rep, plan=plan_from_args(args),
                   rng=RandomSource(resolve_seed(args)), n_jobs=args.threads)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "h_selected": res.h_selected,
        "delta_selected": res.delta_selected,
        "power_at_selection": res.power_at_selection,
        "alternative": spec.family,
        "deltas": list(spec.deltas),
        "power_curve": res.curve.to_records(),
    }
    emit_json(payload, args.out)
    aux = aux_dir(args)
    if aux:
        write_csv(aux / "power_curve.csv",
                  ["h", "delta", "power", "rejections", "N"],
                  [[r["h"], r["delta"], r["power"], r["rejections"], r["N"]]
                   for r in res.curve.rows])
    return 0


def cmd_pkbd_sample(args):
    mu = np.array(parse_float_list(args.mu, "--mu"))
    report = rpkb(args.n, mu, args.rho, method=args.pkbd_method,
                  rng=RandomSource(resolve_seed(args)))
    write_matrix_csv(args.out, report.samples)
    aux = aux_dir(args)
    if aux:
        emit_json({
            "schema_version": SCHEMA_VERSION,
            "method": report.method,
            "n": args.n,
            "rho": args.rho,
            "mu": mu.tolist(),
            "proposals_used": report.proposals_used,
            "acceptance_rate": report.acceptance_rate,
        }, aux / "sampler_report.json")
    return 0


def cmd_pkbd_density(args):
    data, _ = read_csv_matrix(args.data, args.delim, args.has_header)
    mu = np.array(parse_float_list(args.mu, "--mu"))
    dens = dpkb(data, mu, args.rho)
    emit_json({
        "schema_version": SCHEMA_VERSION,
        "rho": args.rho,
        "mu": mu.tolist(),
        "density": np.atleast_1d(dens).tolist(),
    }, args.out)
    return 0


def _load_clustering_inputs(args):
    data, _ = read_csv_matrix(args.data, args.delim, args.has_header)
    true_labels = None
    if args.true_labels_col is not None:
        data, true_labels = split_label_column(data, args.true_labels_col)
    if args.normalize:
        norms = np.linalg.norm(data, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise CsvParseError("cannot L2-normalize a zero row")
        data = data / norms
    return data, true_labels


def _fit_payload(fit):
    return {
        "k": fit.k,
        "alpha": fit.alpha.tolist(),
        "mu": fit.mu.tolist(),
        "rho": fit.rho.tolist(),
        "log_lik": fit.log_lik,
        "wcss_euclidean": fit.wcss_euclidean,
        "wcss_cosine": fit.wcss_cosine,
        "final_memberships": fit.final_memberships.tolist(),
        "run_info": {
            "log_liks": fit.run_info["log_liks"],
            "iterations": fit.run_info["iterations"],
            "reseeds": fit.run_info["reseeds"],
        },
    }


def _cluster_config(args, ks):
    return ClusterConfig(n_clust=tuple(ks), max_iter=args.max_iter,
                         stopping_rule=args.stopping_rule,
                         num_init=args.num_init)


def cmd_cluster(args):
    data, true_labels = _load_clustering_inputs(args)
    ks = parse_k_list(args.k)
    fits = pkbc_fit(data, _cluster_config(args, ks),
                    RandomSource(resolve_seed(args)))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "k_values": ks,
        "fits": {str(k): _fit_payload(fit) for k, fit in sorted(fits.items())},
        "elbow": [{"k": k, "wcss_euclidean": f.wcss_euclidean,
                   "wcss_cosine": f.wcss_cosine}
                  for k, f in sorted(fits.items())],
    }
    if true_labels is not None:
        from .clustering import adjusted_rand_index, macro_precision_recall
        for k, fit in sorted(fits.items()):
            entry = payload["fits"][str(k)]
            entry["ari"] = adjusted_rand_index(true_labels,
                                               fit.final_memberships)
            prec, rec = macro_precision_recall(true_labels,
                                               fit.final_memberships)
            entry["macro_precision"] = prec
            entry["macro_recall"] = rec
    emit_json(payload, args.out)
    aux = aux_dir(args)
    if aux:
        write_csv(aux / "elbow.csv", ["k", "wcss_euclidean", "wcss_cosine"],
                  [[k, f.wcss_euclidean, f.wcss_cosine]
                   for k, f in sorted(fits.items())])
        from .clustering import sphere_display_coordinates
        coords = sphere_display_coordinates(data)
        write_csv(aux / "sphere_coordinates.csv",
                  ["c1", "c2", "c3"][:coords.shape[1]],
                  [list(map(float, row)) for row in coords])
        write_csv(aux / "memberships.csv",
                  ["row"] + [f"k{k}" for k in sorted(fits)],
                  [[i] + [int(fits[k].final_memberships[i])
                          for k in sorted(fits)]
                   for i in range(data.shape[0])])
    return 0


def cmd_validate(args):
    data, true_labels = _load_clustering_inputs(args)
    ks = parse_k_list(args.k)
    seed = resolve_seed(args)
    fits = pkbc_fit(data, _cluster_config(args, ks), RandomSource(seed))
    report = validate(fits, data, true_labels=true_labels, h=args.h_test,
                      plan=plan_from_args(args),
                      rng=RandomSource(seed).child(999))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "k_values": ks,
        "per_k": {str(k): entry for k, entry in sorted(report.per_k.items())},
        "elbow": [{"k": k, "wcss_euclidean": e, "wcss_cosine": c}
                  for k, e, c in report.elbow],
        "elbow_knee_cosine": report.elbow_knee("cosine"),
        "elbow_knee_euclidean": report.elbow_knee("euclidean"),
    }
    emit_json(payload, args.out)
    aux = aux_dir(args)
    if aux:
        write_csv(aux / "elbow.csv", ["k", "wcss_euclidean", "wcss_cosine"],
                  [[k, e, c] for k, e, c in report.elbow])
    return 0


def cmd_summary(args):
    data, _ = read_csv_matrix(args.data, args.delim, args.has_header)
    labels = None
    if args.labels_col is not None:
        data, labels = split_label_column(data, args.labels_col)
    tables = descriptive_stats(data, labels)
    emit_json({
        "schema_version": SCHEMA_VERSION,
        "n": int(data.shape[0]),
        "d": int(data.shape[1]),
        "summary_statistics": tables.to_records(),
    }, args.out)
    aux = aux_dir(args)
    if aux:
        write_summary_tables(aux / "summary_stats.csv", tables)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_io_flags(sub, data_required=True):
    sub.add_argument("--data", required=data_required, help="input CSV file")
    sub.add_argument("--delim", default=",", help="CSV delimiter")
    sub.add_argument("--has-header", action="store_true",
                     help="skip the first CSV row")
    sub.add_argument("--out", default=None, help="write JSON here "
                     "(default: stdout)")
    sub.add_argument("--aux-dir", default=None,
                     help="directory for auxiliary CSV series")
    sub.add_argument("--seed", type=int, default=None,
                     help=f"RNG seed (fallback: ${SEED_ENV_VAR}, then 0)")
    sub.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                     help="worker threads for embarrassingly parallel steps")


def _add_plan_flags(sub, default_b=150):
    sub.add_argument("--method", default="subsampling",
                     choices=["subsampling", "bootstrap", "permutation"])
    sub.add_argument("--B", dest="num_iter", type=int, default=default_b,
                     help="number of resampling replicates")
    sub.add_argument("--b", type=float, default=0.9,
                     help="subsample fraction in (0, 1]")
    sub.add_argument("--quantile", type=float, default=0.95)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbqd",
        description="Kernel-based quadratic distance tests, sphere "
                    "uniformity, PKBD sampling and clustering")
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("normal-test", help="one-sample normality test")
    _add_io_flags(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--B", dest="num_iter", type=int, default=150)
    p.add_argument("--quantile", type=float, default=0.95)
    p.add_argument("--centering", default="nonparam",
                   choices=["param", "nonparam"])
    p.add_argument("--mu-hat", default=None,
                   help="reference mean, comma-separated (default zeros)")
    p.add_argument("--sigma-hat", default=None,
                   help="CSV file with the reference covariance (default "
                        "identity)")
    p.set_defaults(func=cmd_normal_test)

    p = commands.add_parser("twosample-test", help="nonparametric two-sample "
                            "test")
    _add_io_flags(p)
    p.add_argument("--data2", required=True, help="second sample CSV")
    p.add_argument("--h", type=float, required=True)
    _add_plan_flags(p)
    p.set_defaults(func=cmd_twosample_test)

    p = commands.add_parser("ksample-test", help="k-sample omnibus test")
    _add_io_flags(p)
    p.add_argument("--labels-col", type=int, default=None,
                   help="1-based column holding group labels")
    p.add_argument("--labels", default=None, help="separate label CSV")
    p.add_argument("--h", type=float, required=True)
    _add_plan_flags(p)
    p.set_defaults(func=cmd_ksample_test)

    p = commands.add_parser("uniformity-test", help="Poisson kernel-based "
                            "sphere-uniformity test")
    _add_io_flags(p)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--B", dest="num_iter", type=int, default=300)
    p.add_argument("--quantile", type=float, default=0.95)
    p.set_defaults(func=cmd_uniformity_test)

    p = commands.add_parser("select-h", help="mid-power bandwidth selection")
    _add_io_flags(p)
    p.add_argument("--data2", default=None, help="second sample CSV")
    p.add_argument("--labels-col", type=int, default=None)
    p.add_argument("--labels", default=None)
    p.add_argument("--alternative", default="location",
                   choices=["location", "scale", "skewness"])
    p.add_argument("--deltas", default=None,
                   help="comma-separated departure sizes")
    p.add_argument("--h-grid", default="0.6,1,1.4,1.8,2.2")
    p.add_argument("--n-rep", type=int, default=50,
                   help="Monte Carlo runs per grid cell")
    _add_plan_flags(p)
    p.set_defaults(func=cmd_select_h)

    p = commands.add_parser("pkbd-sample", help="draw from a Poisson "
                            "kernel-based density (CSV of unit rows)")
    _add_io_flags(p, data_required=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--mu", required=True, help="mean direction, "
                   "comma-separated")
    p.add_argument("--method", dest="pkbd_method", default="rejacg",
                   choices=["rejvmf", "rejacg", "rejpsaw"])
    p.set_defaults(func=cmd_pkbd_sample)

    p = commands.add_parser("pkbd-density", help="evaluate a Poisson "
                            "kernel-based density")
    _add_io_flags(p)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--mu", required=True)
    p.set_defaults(func=cmd_pkbd_density)

    for name, handler in (("cluster", cmd_cluster), ("validate", cmd_validate)):
        p = commands.add_parser(
            name, help="mixture clustering on the sphere"
            if name == "cluster" else "clustering validation metrics")
        _add_io_flags(p)
        p.add_argument("--k", required=True,
                       help="cluster counts: '4', '2,4,6' or '2..10'")
        p.add_argument("--true-labels-col", type=int, default=None)
        p.add_argument("--normalize", action="store_true",
                       help="L2-normalize rows before fitting")
        p.add_argument("--num-init", type=int, default=10)
        p.add_argument("--max-iter", type=int, default=300)
        p.add_argument("--stopping-rule", default="loglik",
                       choices=["loglik", "membership", "max"])
        if name == "validate":
            p.add_argument("--h-test", type=float, default=1.5,
                           help="bandwidth for the k-sample check on "
                                "fitted clusters")
            _add_plan_flags(p)
        p.set_defaults(func=handler)

    p = commands.add_parser("summary", help="descriptive statistics")
    _add_io_flags(p)
    p.add_argument("--labels-col", type=int, default=None)
    p.set_defaults(func=cmd_summary)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliInputError as exc:
        print(f"kbqd: {exc}", file=sys.stderr)
        return 2
    except (CsvParseError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"kbqd: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
