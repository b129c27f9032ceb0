"""Batch command-line front end.

Exit codes: 0 ok, 2 usage, 3 I/O failure, 4 schema violation, 5 protocol
precondition failure. `HAR_SEED` provides a default seed; an explicit
--seed flag wins.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .classifiers import ModelKind, ModelSpec
from .errors import (
    HarkitError,
    MalformedRow,
    NonFiniteValue,
    NonMonotonicTimestamps,
    SingleSubject,
    TooFewInstances,
    UnknownActivity,
    UnknownSensor,
)
from .evaluation import (
    DEFAULT_SWEEP_SIZES,
    EvalConfig,
    Protocol,
    Treatment,
    evaluate,
    recordings_to_features,
    window_sweep,
)
from .features import Bank, feature_matrix
from .ingest import (
    SensorKind,
    SynthParams,
    dataset_summary,
    generate_synthetic,
    parse_recordings_csv,
    write_manifest_csv,
    write_recordings_csv,
)
from .reporting import (
    RunManifest,
    Stopwatch,
    atomic_write_text,
    is_features_csv,
    read_features_csv,
    read_results_csv,
    report_markdown,
    report_rows,
    sha256_file,
    sweep_svg,
    write_features_csv,
    write_results_csv,
)
from .stats import paired_t_test

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_PROTOCOL = 5

SCHEMA_ERRORS = (MalformedRow, NonFiniteValue, NonMonotonicTimestamps,
                 UnknownActivity, UnknownSensor)
PROTOCOL_ERRORS = (SingleSubject, TooFewInstances)


def _default_seed() -> int:
    env = os.environ.get("HAR_SEED")
    return int(env) if env else 7


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return n


def _positive_float(value: str) -> float:
    v = float(value)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return v


def _parse_sizes(text: str) -> tuple[int, ...]:
    if ":" in text:
        lo, hi, step = (int(p) for p in text.split(":"))
        return tuple(range(lo, hi + 1, step))
    return tuple(int(p) for p in text.split(","))


def _write_run_manifest(out_dir: Path, command: str, config: dict, seed: int,
                        inputs: list[Path], duration_s: float) -> None:
    manifest = RunManifest(
        command=command,
        config=config,
        seed=seed,
        input_digests={str(p): sha256_file(p) for p in inputs},
        duration_s=round(duration_s, 3),
    )
    atomic_write_text(out_dir / f"{command}_manifest.json", manifest.to_json())


def _model_spec(args) -> ModelSpec:
    return ModelSpec(
        kind=ModelKind(args.model),
        seed=args.seed,
        k=args.knn_k,
        n_learners=args.bag_learners,
        C=args.svm_c,
        max_splits=args.tree_splits,
    )


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=[k.value for k in ModelKind], default="dtree")
    p.add_argument("--bank", choices=["a", "b"], default="a")
    p.add_argument("--window", type=_positive_int, default=75)
    p.add_argument("--protocol", choices=["personal", "impersonal"], default="personal")
    p.add_argument("--treatment", default="nr-rp",
                   choices=["nr-rp", "nr-nrp", "unr-rp", "unr-nrp"])
    p.add_argument("--folds", type=_positive_int, default=10)
    p.add_argument("--sensor", choices=["accel", "gyro", "mag"], default="accel")
    p.add_argument("--filter-order", type=int, default=3)
    p.add_argument("--knn-k", type=_positive_int, default=10)
    p.add_argument("--bag-learners", type=_positive_int, default=50)
    p.add_argument("--svm-c", type=_positive_float, default=1.0)
    p.add_argument("--tree-splits", type=_positive_int, default=85)
    p.add_argument("--permute-columns", action="store_true",
                   help="apply a seeded feature-column permutation to train and test")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harkit",
                                     description="Smartwatch activity-recognition experiment toolkit")
    parser.add_argument("--seed", type=int, default=None,
                        help="global seed (default: HAR_SEED env var, else 7)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic dataset")
    p.add_argument("--subjects", type=_positive_int, default=6)
    p.add_argument("--minutes", type=_positive_float, default=10.0)
    p.add_argument("--rate", type=_positive_float, default=20.0)
    p.add_argument("--variability", type=float, default=1.0)
    p.add_argument("-o", "--out-dir", required=True)

    p = sub.add_parser("extract", help="filter, segment, and extract features")
    p.add_argument("--input", required=True, help="recordings CSV")
    p.add_argument("--bank", choices=["a", "b"], default="a")
    p.add_argument("--window", type=int, default=75)
    p.add_argument("--filter-order", type=int, default=3)
    p.add_argument("--sensor", choices=["accel", "gyro", "mag"], default="accel")
    p.add_argument("-o", "--output", required=True, help="feature CSV path")

    p = sub.add_parser("eval", help="run one evaluation cell")
    p.add_argument("--input", required=True, help="recordings CSV or feature CSV")
    _add_eval_flags(p)
    p.add_argument("-o", "--out-dir", required=True)

    p = sub.add_parser("sweep", help="window-size sweep")
    p.add_argument("--input", required=True, help="recordings CSV")
    _add_eval_flags(p)
    p.add_argument("--sizes", default="25:300:25",
                   help="lo:hi:step or comma list, e.g. 75 or 25,75,150")
    p.add_argument("-o", "--out-dir", required=True)

    p = sub.add_parser("report", help="combine results CSVs with treatment t-tests")
    p.add_argument("inputs", nargs="+", help="results CSV files")
    p.add_argument("-o", "--output", required=True, help="markdown output path")

    p = sub.add_parser("summary", help="describe a recordings CSV")
    p.add_argument("--input", required=True)
    return parser


def cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"error: cannot create {out_dir}: {e}", file=sys.stderr)
        return EXIT_IO
    params = SynthParams(
        n_subjects=args.subjects,
        minutes_per_activity=args.minutes,
        sample_rate_hz=args.rate,
        seed=args.seed,
        subject_variability=args.variability,
    )
    with Stopwatch() as sw:
        recordings, metas = generate_synthetic(params)
        try:
            write_recordings_csv(recordings, out_dir / "recordings.csv")
            write_manifest_csv(metas, out_dir / "manifest.csv")
        except OSError as e:
            print(f"error: write failed: {e}", file=sys.stderr)
            return EXIT_IO
    _write_run_manifest(out_dir, "synth", asdict(params), args.seed, [], sw.elapsed)
    print(f"wrote {len(recordings)} recordings to {out_dir / 'recordings.csv'}")
    return EXIT_OK


def cmd_extract(args) -> int:
    if args.window < 4:
        print("error: --window must be at least 4", file=sys.stderr)
        return EXIT_USAGE
    recordings = parse_recordings_csv(args.input)
    vectors = recordings_to_features(
        recordings, Bank(args.bank), args.window, args.filter_order,
        SensorKind(args.sensor),
    )
    if not vectors:
        print("error: no windows produced (recordings too short?)", file=sys.stderr)
        return EXIT_PROTOCOL
    write_features_csv(vectors, args.output)
    print(f"wrote {len(vectors)} feature vectors to {args.output}")
    return EXIT_OK


def _load_vectors(args):
    if is_features_csv(args.input):
        return read_features_csv(args.input)
    recordings = parse_recordings_csv(args.input)
    return recordings_to_features(
        recordings, Bank(args.bank), args.window, args.filter_order,
        SensorKind(args.sensor),
    )


def cmd_eval(args) -> int:
    if args.window < 4:
        print("error: --window must be at least 4", file=sys.stderr)
        return EXIT_USAGE
    vectors = _load_vectors(args)
    if not vectors:
        raise TooFewInstances("no feature vectors available")
    config = EvalConfig(
        model_spec=_model_spec(args),
        bank=vectors[0].bank,
        samples_per_window=args.window,
        treatment=Treatment.from_name(args.treatment),
        protocol=Protocol(args.protocol),
        folds=args.folds,
        seed=args.seed,
    )
    X, y, subjects = feature_matrix(vectors)
    if args.permute_columns:
        col_order = np.random.default_rng(args.seed).permutation(X.shape[1])
        X = X[:, col_order]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with Stopwatch() as sw:
        report = evaluate(config, X, y, subjects)
    write_results_csv(report_rows(config, report), out_dir / "results.csv")
    atomic_write_text(out_dir / "table.md", report_markdown(config, report))
    _write_run_manifest(
        out_dir, "eval",
        {"model": args.model, "bank": config.bank.value, "window": args.window,
         "treatment": args.treatment, "protocol": args.protocol,
         "folds": args.folds, "permute_columns": args.permute_columns},
        args.seed, [Path(args.input)], sw.elapsed,
    )
    print(f"overall accuracy {report.overall_accuracy:.4f} "
          f"± {report.ci_halfwidth:.4f} (98% CI, n={report.n_units})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    sizes = _parse_sizes(args.sizes)
    if not sizes or any(s < 4 for s in sizes):
        print("error: --sizes must be positive window sizes >= 4", file=sys.stderr)
        return EXIT_USAGE
    recordings = parse_recordings_csv(args.input)
    config = EvalConfig(
        model_spec=_model_spec(args),
        bank=Bank(args.bank),
        samples_per_window=sizes[0],
        treatment=Treatment.from_name(args.treatment),
        protocol=Protocol(args.protocol),
        folds=args.folds,
        seed=args.seed,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with Stopwatch() as sw:
        results = window_sweep(config, recordings, sizes,
                               args.filter_order, SensorKind(args.sensor))
    rows = []
    for size in sizes:
        from dataclasses import replace

        rows.extend(report_rows(replace(config, samples_per_window=size), results[size]))
    write_results_csv(rows, out_dir / "sweep_results.csv")
    series = {args.model: {s: results[s].overall_accuracy for s in sizes}}
    from .ingest import ACTIVITY_CSV_NAMES, Activity

    for act in Activity:
        series[ACTIVITY_CSV_NAMES[act]] = {
            s: results[s].per_activity_recall[act] for s in sizes
        }
    atomic_write_text(out_dir / "sweep.svg", sweep_svg(series))
    _write_run_manifest(
        out_dir, "sweep",
        {"model": args.model, "bank": args.bank, "sizes": list(sizes),
         "treatment": args.treatment, "protocol": args.protocol},
        args.seed, [Path(args.input)], sw.elapsed,
    )
    for size in sizes:
        print(f"window {size:4d}: overall accuracy {results[size].overall_accuracy:.4f}")
    return EXIT_OK


def cmd_report(args) -> int:
    rows = []
    for path in args.inputs:
        rows.extend(read_results_csv(path))

    # cell key -> treatment -> {unit -> value}
    cells: dict[tuple, dict[str, dict[str, float]]] = {}
    for r in rows:
        if ":" not in r["metric"]:
            continue
        _, unit = r["metric"].split(":", 1)
        key = (r["protocol"], r["classifier"], r["bank"], r["window"], r["activity"])
        cells.setdefault(key, {}).setdefault(r["treatment"], {})[unit] = float(r["value"])

    lines = ["# Treatment comparison report", ""]
    have_pairs = any("nr-rp" in t and "unr-rp" in t for t in cells.values())
    if not have_pairs:
        lines.append("_Note: no NR-RP / UNR-RP pair found; t-test column omitted._")
        lines.append("")
        lines.append("| protocol | classifier | bank | window | activity | treatment | mean |")
        lines.append("|---|---|---|---|---|---|---|")
        for key in sorted(cells):
            for tname, units in sorted(cells[key].items()):
                mean = sum(units.values()) / len(units)
                lines.append("| " + " | ".join(key) + f" | {tname} | {mean:.4f} |")
    else:
        lines.append("Paired t-tests compare NR-RP against UNR-RP per unit at α = 0.02;")
        lines.append("significant means are in **boldface**.")
        lines.append("")
        lines.append("| protocol | classifier | bank | window | activity | NR-RP | UNR-RP | t | p |")
        lines.append("|---|---|---|---|---|---|---|---|---|")
        for key in sorted(cells):
            treatments = cells[key]
            if "nr-rp" not in treatments or "unr-rp" not in treatments:
                continue
            units = sorted(set(treatments["nr-rp"]) & set(treatments["unr-rp"]))
            if len(units) < 2:
                continue
            a = np.array([treatments["nr-rp"][u] for u in units])
            b = np.array([treatments["unr-rp"][u] for u in units])
            res = paired_t_test(a, b)
            ma, mb = float(a.mean()), float(b.mean())
            sig = res.p_two_sided <= 0.02
            fa = f"**{ma:.4f}**" if sig and ma >= mb else f"{ma:.4f}"
            fb = f"**{mb:.4f}**" if sig and mb > ma else f"{mb:.4f}"
            ttxt = "inf" if not np.isfinite(res.t_stat) else f"{res.t_stat:.3f}"
            lines.append("| " + " | ".join(key) + f" | {fa} | {fb} | {ttxt} | {res.p_two_sided:.4f} |")
    atomic_write_text(args.output, "\n".join(lines) + "\n")
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_summary(args) -> int:
    recordings = parse_recordings_csv(args.input)
    summary = dataset_summary(recordings)
    print("subject_id,activity,sensor,n_samples,duration_s")
    for row in summary.rows:
        print(f"{row.subject_id},{row.activity.name},{row.sensor.name},"
              f"{row.n_samples},{row.duration_s:.1f}")
    print("class balance:", {a.name: round(f, 4) for a, f in summary.class_balance.items()})
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "summary": cmd_summary,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    try:
        return COMMANDS[args.command](args)
    except PROTOCOL_ERRORS as e:
        print(f"error ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_PROTOCOL
    except SCHEMA_ERRORS as e:
        print(f"error ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except HarkitError as e:
        print(f"error ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
