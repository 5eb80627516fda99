"""Batch command-line interface.

Subcommands: fixations, scanpath, ais, compare, simulate, validate. Every
subcommand is deterministic given its inputs and --seed; reruns produce
byte-identical files (outputs carry no timestamps), and --jobs only bounds
concurrency without affecting results.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiment import (RunConfig, analyze_trial, compare_conditions,
                         lag_histogram, parse_run_config)
from .gaze import (PipelineParams, ScanpathRecord, build_scanpath,
                   detect_fixations_idt, filter_gaze, load_aois, read_gaze_csv)
from .markov import analytic_ais, analytic_entropy, analytic_gte, generate, \
    load_markov_spec
from .rng import derive_seed, indexed_map
from .validate import run_all

SCHEMA_VERSION = 1


def _round12(obj):
    """Round every float to 12 significant digits for stable output files."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _round12(float(obj))
    return obj


def _write_json(path, doc):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round12(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _fmt(value) -> str:
    return f"{value:.12g}" if isinstance(value, float) else str(value)


def _run_config(args) -> RunConfig:
    cfg = parse_run_config(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "kmax", None) is not None:
        cfg.k_max = args.kmax
    if getattr(args, "alpha", None) is not None:
        cfg.alpha = args.alpha
    if getattr(args, "nperm", None) is not None:
        cfg.n_perm_selection = args.nperm
    if getattr(args, "nperm_comparison", None) is not None:
        cfg.n_perm_comparison = args.nperm_comparison
    if getattr(args, "tail", None) is not None:
        cfg.tail = args.tail
    if getattr(args, "collapse_repeats", False):
        cfg.collapse_repeats = True
    return cfg


def _pipeline_params(args, collapse=False) -> PipelineParams:
    return PipelineParams(
        min_confidence=args.min_confidence,
        dispersion_threshold=args.dispersion,
        min_duration_ms=args.min_duration,
        max_duration_ms=getattr(args, "max_duration", 1500.0),
        collapse_repeats=collapse,
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fixations(args) -> int:
    trials = read_gaze_csv(args.input)
    rows = []
    for trial in trials:
        kept = filter_gaze(trial.samples, args.min_confidence)
        for fix in detect_fixations_idt(kept, args.dispersion, args.min_duration):
            rows.append((trial.trial_id, fix.start_time, fix.duration,
                         fix.centroid_x, fix.centroid_y))
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial_id", "start_time", "duration_ms",
                         "centroid_x", "centroid_y"])
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return 0


def cmd_scanpath(args) -> int:
    trials = read_gaze_csv(args.input)
    aois = load_aois(args.aois)
    collapse = args.collapse_repeats or _run_config(args).collapse_repeats
    params = _pipeline_params(args, collapse=collapse)
    records = [build_scanpath(trial, aois, params) for trial in trials]
    records.sort(key=lambda r: (r.participant_id, r.trial_id))
    _write_json(args.out, {
        "schema_version": SCHEMA_VERSION,
        "trials": [r.to_dict() for r in records],
    })
    return 0


def _load_scanpath_records(path):
    doc = _load_json(path)
    entries = doc["trials"] if isinstance(doc, dict) else doc
    return [ScanpathRecord.from_dict(entry) for entry in entries]


def cmd_ais(args) -> int:
    cfg = _run_config(args)
    ecfg = cfg.embedding_config()
    records = _load_scanpath_records(args.input)
    records.sort(key=lambda r: (r.participant_id, r.trial_id))

    def analyze(i):
        rec = records[i]
        return analyze_trial(
            rec.sequence, ecfg,
            trial_id=rec.trial_id, participant_id=rec.participant_id,
            condition=rec.condition,
            seed=derive_seed(cfg.seed, "trial", rec.participant_id,
                             rec.condition, rec.trial_id),
        )

    results = indexed_map(analyze, len(records), args.jobs)
    out_results = []
    for rec, res in zip(records, results):
        entry = res.to_dict()
        entry["symbols"] = [int(s) for s in rec.symbols]
        entry["alphabet_size"] = int(rec.alphabet_size)
        out_results.append(entry)
    _write_json(args.out, {
        "schema_version": SCHEMA_VERSION,
        "config": {"k_max": cfg.k_max, "alpha": cfg.alpha,
                   "n_perm_selection": cfg.n_perm_selection,
                   "seed": cfg.seed},
        "results": out_results,
    })
    return 0


def cmd_compare(args) -> int:
    cfg = _run_config(args)
    ecfg = cfg.embedding_config()
    by_participant = {}
    for path in args.inputs:
        doc = _load_json(path)
        for entry in doc["results"]:
            if entry.get("symbols") is None:
                raise ValueError(
                    f"{path}: results lack trial symbols; rerun `ais` to "
                    f"produce comparable input"
                )
            rec = ScanpathRecord(
                trial_id=str(entry["trial_id"]),
                participant_id=str(entry["participant_id"]),
                condition=str(entry["condition"]),
                symbols=np.asarray(entry["symbols"], dtype=np.int64),
                alphabet_size=int(entry["alphabet_size"]),
            )
            by_participant.setdefault(rec.participant_id, []).append(rec)

    participant_ids = sorted(by_participant)

    def compare(i):
        pid = participant_ids[i]
        records = sorted(by_participant[pid],
                         key=lambda r: (r.condition, r.trial_id))
        return compare_conditions(
            records, ecfg, n_perm=cfg.n_perm_comparison, tail=cfg.tail,
            seed=derive_seed(cfg.seed, "participant", pid),
        )

    comparisons = indexed_map(compare, len(participant_ids), args.jobs)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_results = [res for comp in comparisons for res in comp.trial_results]
    hist = lag_histogram(all_results, k_max=cfg.k_max)
    _write_json(out_dir / "comparison.json", {
        "schema_version": SCHEMA_VERSION,
        "config": {"k_max": cfg.k_max, "alpha": cfg.alpha,
                   "n_perm_selection": cfg.n_perm_selection,
                   "n_perm_comparison": cfg.n_perm_comparison,
                   "tail": cfg.tail, "seed": cfg.seed},
        "lag_histogram": hist.to_dict(),
        "participants": [comp.to_dict() for comp in comparisons],
    })

    with open(out_dir / "condition_summary.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["participant_id", "condition", "n_trials",
                         "mean_ais", "sem_ais", "mean_entropy", "sem_entropy",
                         "mean_normalized_ais", "sem_normalized_ais",
                         "p_ais", "p_entropy", "p_normalized_ais"])
        for comp in comparisons:
            for cond in comp.conditions:
                writer.writerow([
                    comp.participant_id, cond, comp.trial_counts[cond],
                    _fmt(comp.means["ais"][cond]),
                    _fmt(comp.sems["ais"][cond]),
                    _fmt(comp.means["entropy"][cond]),
                    _fmt(comp.sems["entropy"][cond]),
                    _fmt(comp.means["normalized_ais"][cond]),
                    _fmt(comp.sems["normalized_ais"][cond]),
                    _fmt(comp.contrasts["ais"].p_value),
                    _fmt(comp.contrasts["entropy"].p_value),
                    _fmt(comp.contrasts["normalized_ais"].p_value),
                ])

    with open(out_dir / "lag_histogram.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "count"])
        for lag in sorted(hist.counts):
            writer.writerow([lag, hist.counts[lag]])
    return 0


def cmd_simulate(args) -> int:
    spec = load_markov_spec(args.spec)
    oracle_lags = tuple(range(1, max(spec.order, 1) + 1))
    trials = []
    for i in range(args.trials):
        seq = generate(spec, args.length,
                       seed=derive_seed(args.seed, "simulate", i),
                       burn_in=args.burn_in)
        trials.append(ScanpathRecord(
            trial_id=f"t{i:03d}",
            participant_id=args.participant,
            condition=args.condition,
            symbols=seq.symbols,
            alphabet_size=seq.alphabet_size,
        ))
    _write_json(args.out, {
        "schema_version": SCHEMA_VERSION,
        "spec": spec.to_json_dict(),
        "oracle": {
            "analytic_entropy": analytic_entropy(spec),
            "analytic_gte": analytic_gte(spec),
            "analytic_ais_lag1": analytic_ais(spec, (1,)),
            "analytic_ais_full_order": analytic_ais(spec, oracle_lags),
            "full_order_lags": list(oracle_lags),
        },
        "trials": [r.to_dict() for r in trials],
    })
    return 0


def cmd_validate(args) -> int:
    checks = run_all(seed=args.seed if args.seed is not None else 12345,
                     quick=args.quick)
    failed = 0
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: {check.detail}")
        failed += 0 if check.passed else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sub, out_required=True):
    sub.add_argument("--config", help="run configuration file (key = value lines)")
    sub.add_argument("--seed", type=int, help="master seed for all randomness")
    sub.add_argument("--jobs", type=int, default=1,
                     help="max concurrent workers (results are identical for any value)")
    if out_required:
        sub.add_argument("--out", required=True, help="output path")


def _add_pipeline_flags(sub):
    sub.add_argument("--min-confidence", type=float, default=0.9,
                     dest="min_confidence")
    sub.add_argument("--dispersion", type=float, default=50.0,
                     help="IDT dispersion threshold in pixels")
    sub.add_argument("--min-duration", type=float, default=100.0,
                     dest="min_duration", help="minimum fixation duration (ms)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazeais",
        description="Scanpath predictability via active information storage",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("fixations", help="detect fixations in a gaze CSV")
    p.add_argument("input", help="gaze CSV (trial_id,participant_id,condition,timestamp,x,y,confidence)")
    _add_common(p)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_fixations)

    p = subs.add_parser("scanpath", help="build AOI symbol sequences from a gaze CSV")
    p.add_argument("input", help="gaze CSV")
    p.add_argument("--aois", required=True, help="AOI definitions JSON")
    _add_common(p)
    _add_pipeline_flags(p)
    p.add_argument("--max-duration", type=float, default=1500.0,
                   dest="max_duration", help="maximum fixation duration (ms)")
    p.add_argument("--collapse-repeats", action="store_true",
                   dest="collapse_repeats",
                   help="collapse consecutive identical AOI symbols")
    p.set_defaults(func=cmd_scanpath)

    p = subs.add_parser("ais", help="per-trial past-state optimization and AIS")
    p.add_argument("input", help="scanpath JSON")
    _add_common(p)
    p.add_argument("--kmax", type=int, help="maximum candidate lag")
    p.add_argument("--alpha", type=float, help="selection significance level")
    p.add_argument("--nperm", type=int, help="selection surrogate count")
    p.set_defaults(func=cmd_ais)

    p = subs.add_parser("compare", help="per-participant condition contrasts")
    p.add_argument("inputs", nargs="+", help="results JSON files from `ais`")
    _add_common(p)
    p.add_argument("--kmax", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--nperm", type=int, help="selection surrogate count")
    p.add_argument("--nperm-comparison", type=int, dest="nperm_comparison",
                   help="surrogate count for the condition contrasts")
    p.add_argument("--tail", choices=("two_sided", "greater", "less"))
    p.set_defaults(func=cmd_compare)

    p = subs.add_parser("simulate", help="generate synthetic trials with oracle values")
    p.add_argument("spec", help="Markov spec JSON")
    _add_common(p)
    p.add_argument("--length", type=int, required=True, help="symbols per trial")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--burn-in", type=int, default=1000, dest="burn_in")
    p.add_argument("--condition", default="sim")
    p.add_argument("--participant", default="sim")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("validate", help="run the oracle self-check suite")
    p.add_argument("--seed", type=int)
    p.add_argument("--quick", action="store_true",
                   help="smaller sample sizes for a fast smoke run")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    seed = getattr(args, "seed", None)
    if seed is None and args.command in ("fixations", "scanpath", "ais",
                                         "compare", "simulate"):
        args.seed = 0
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
