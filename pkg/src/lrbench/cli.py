"""Command-line entry point.

Subcommands:

* build-population: generate a population from a JSON config and save its
  spec (the saved parameters are the ground truth later runs score against).
* run: execute a benchmark suite from a JSON run config and write CSV
  outputs plus a manifest.
* list-methods: print every runnable method id.

All numbers in CSV outputs are printed with 9 significant digits, so reruns
with identical configs produce byte-identical files.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiment import (FIG3_METHODS, MV_METHODS, PAV_FAMILY_METHODS,
                         MethodConfig, MethodFailure, as_method_configs,
                         list_method_ids, method_details, make_context,
                         run_suite)
from .population import (GmmPopulationSpec, MultivariateGenConfig,
                         UnivariateGenConfig, build_gmm_population,
                         build_univariate_population, load_population,
                         save_population)

_SUITE_ROSTERS = {
    "fig3": FIG3_METHODS,
    "fig17": PAV_FAMILY_METHODS,
    "appendix_a": MV_METHODS,
}


def _fmt(x) -> str:
    return f"{float(x):.9g}"


def _check_keys(mapping: dict, allowed, where: str) -> None:
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# configs


_UNI_KEYS = {"kind", "n_sources", "grand_mean", "between_sd", "within_sd",
             "tokens_per_source_init", "seed"}
_GMM_KEYS = {"kind", "dims", "n_between_components",
             "sources_per_between_component", "n_within_components",
             "between_range", "within_range", "between_init_var",
             "within_init_var", "min_within_separation",
             "tokens_per_component_factor", "suspects_per_between_component",
             "seed"}


def population_from_config(cfg: dict):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise CliError("population config must be an object with a 'kind'")
    kind = cfg["kind"]
    if kind == "file":
        _check_keys(cfg, {"kind", "path"}, "population")
        return load_population(cfg["path"])
    if kind == "univariate":
        _check_keys(cfg, _UNI_KEYS, "population")
        params = {k: v for k, v in cfg.items() if k != "kind"}
        return build_univariate_population(UnivariateGenConfig(**params))
    if kind == "gmm":
        _check_keys(cfg, _GMM_KEYS, "population")
        params = {k: v for k, v in cfg.items() if k != "kind"}
        return build_gmm_population(MultivariateGenConfig(**params))
    raise CliError(f"unknown population kind {kind!r}")


_RUN_KEYS = {"population", "suite", "methods", "n_reps", "base_seed",
             "out_dir", "sample_sources", "sample_tokens"}


def load_run_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read run config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise CliError("run config must be a JSON object")
    _check_keys(cfg, _RUN_KEYS, "run config")
    if "population" not in cfg:
        raise CliError("run config needs a 'population' section")
    suite = cfg.get("suite", "custom")
    if suite not in (*_SUITE_ROSTERS, "custom"):
        raise CliError(f"unknown suite {suite!r}")
    if suite == "custom" and not cfg.get("methods"):
        raise CliError("custom suite needs an explicit 'methods' list")
    return cfg


# ---------------------------------------------------------------------------
# CSV writers


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_truth_csv(path: Path, suite) -> None:
    rows = []
    for k, sus in enumerate(suite.suspect_labels):
        for g in range(suite.offender_labels.shape[1]):
            rows.append((_fmt(sus), _fmt(suite.offender_labels[k, g]),
                         _fmt(suite.true_curves[k, g])))
    _write_csv(path, ["suspect_mean", "offender_x", "log10_lr_true"], rows)


def write_lr_curves_csv(path: Path, suite) -> None:
    rows = []
    for m in suite.methods:
        for res in suite.results[m.method_id]:
            if res.status != "ok":
                continue
            for k, sus in enumerate(suite.suspect_labels):
                for g in range(suite.offender_labels.shape[1]):
                    rows.append((m.method_id, str(res.replication), _fmt(sus),
                                 _fmt(suite.offender_labels[k, g]),
                                 _fmt(res.est[k, g]),
                                 _fmt(suite.true_curves[k, g])))
    _write_csv(path, ["method", "replication", "suspect_mean", "offender_x",
                      "log10_lr_est", "log10_lr_true"], rows)


def write_rms_csv(path: Path, suite) -> None:
    rows = []
    for m in suite.methods:
        for res in suite.results[m.method_id]:
            rows.append((m.method_id, str(res.replication), _fmt(res.rms),
                         res.status.replace(",", ";")))
    _write_csv(path, ["method", "replication", "rms", "status"], rows)


def write_summary_csv(path: Path, suite) -> None:
    rows = []
    for m in suite.methods:
        s = suite.summaries[m.method_id]
        rows.append((m.method_id, _fmt(s.rms_median), _fmt(s.rms_q1),
                     _fmt(s.rms_q3), _fmt(s.rms_lo_whisker),
                     _fmt(s.rms_hi_whisker), _fmt(s.rms_mean),
                     _fmt(s.rms_sd), str(s.n_failed)))
    _write_csv(path, ["method", "median_rms", "q1", "q3", "lo_whisker",
                      "hi_whisker", "mean", "sd", "n_failed"], rows)


def write_percentiles_csv(path: Path, suite) -> None:
    rows = []
    for m in suite.methods:
        s = suite.summaries[m.method_id]
        if s.percentile_curves is None:
            continue
        for k, sus in enumerate(suite.suspect_labels):
            for g in range(suite.offender_labels.shape[1]):
                rows.append((m.method_id, _fmt(sus),
                             _fmt(suite.offender_labels[k, g]),
                             _fmt(s.percentile_curves[5][k, g]),
                             _fmt(s.percentile_curves[50][k, g]),
                             _fmt(s.percentile_curves[95][k, g]),
                             _fmt(suite.true_curves[k, g])))
    _write_csv(path, ["method", "suspect_mean", "offender_x", "p5", "p50",
                      "p95", "log10_lr_true"], rows)


def write_scores_and_mapping_csvs(scores_path: Path, mapping_path: Path,
                                  pop, suite) -> None:
    """Training scores and fitted mappings for replication 0.

    Methods without one global score set (direct and anchored families)
    contribute no rows.
    """
    score_rows = []
    map_rows = []
    ctx = None
    for m in suite.methods:
        if ctx is None:
            ctx = make_context(pop, suite.base_seed, 0,
                               suite.n_sample_sources, suite.n_sample_tokens)
        try:
            det = method_details(pop, m, suite.base_seed, replication=0,
                                 ctx=ctx)
        except MethodFailure:
            # the corresponding replication is already marked failed in
            # rms.csv; there is no fitted mapping to export
            continue
        ss = det["scoreset"]
        if ss is None:
            continue
        for label, values in (("so", ss.same_origin),
                              ("do", ss.different_origin)):
            for v in values:
                score_rows.append((m.method_id, "0", label, _fmt(v)))
        for s_val, lr in zip(det["mapping_scores"], det["mapping_log10_lrs"]):
            map_rows.append((m.method_id, "0", _fmt(s_val), _fmt(lr)))
    _write_csv(scores_path, ["method", "replication", "label", "value"],
               score_rows)
    _write_csv(mapping_path, ["method", "replication", "score", "log10_lr"],
               map_rows)


# ---------------------------------------------------------------------------
# subcommands


def cmd_build_population(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        pop = population_from_config(cfg)
    except (CliError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    save_population(pop, args.out)
    kind = "gmm" if isinstance(pop, GmmPopulationSpec) else "univariate"
    print(f"wrote {kind} population ({pop.n_sources} sources) to {args.out}")
    return 0


def cmd_run(args) -> int:
    try:
        cfg = load_run_config(args.config)
        pop = population_from_config(cfg["population"])
    except (CliError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    suite_name = cfg.get("suite", "custom")
    methods = cfg.get("methods") or list(_SUITE_ROSTERS[suite_name])
    n_reps = args.reps if args.reps is not None else cfg.get("n_reps", 100)
    base_seed = args.seed if args.seed is not None else cfg.get("base_seed", 0)
    out_dir = Path(args.out if args.out is not None
                   else cfg.get("out_dir", "run_output"))
    sample_sources = cfg.get("sample_sources", 100)
    sample_tokens = cfg.get("sample_tokens", 30)

    try:
        methods = as_method_configs(methods)
    except (TypeError, KeyError, ValueError) as exc:
        print(f"error: bad methods list: {exc}", file=sys.stderr)
        return 2

    def progress(done, total):
        if done == total or done % 10 == 0:
            print(f"replication {done}/{total}", file=sys.stderr)

    suite = run_suite(pop, methods, n_reps, base_seed,
                      n_sample_sources=sample_sources,
                      n_sample_tokens=sample_tokens,
                      suite=suite_name, progress=progress)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_truth_csv(out_dir / "truth.csv", suite)
    write_lr_curves_csv(out_dir / "lr_curves.csv", suite)
    write_rms_csv(out_dir / "rms.csv", suite)
    write_summary_csv(out_dir / "summary.csv", suite)
    write_percentiles_csv(out_dir / "percentiles.csv", suite)
    write_scores_and_mapping_csvs(out_dir / "scores.csv",
                                  out_dir / "mapping.csv", pop, suite)

    n_failed = sum(s.n_failed for s in suite.summaries.values())
    manifest = {
        "version": __version__,
        "suite": suite_name,
        "methods": [{"id": m.method_id, "params": m.params} for m in methods],
        "n_reps": n_reps,
        "base_seed": base_seed,
        "sample_sources": sample_sources,
        "sample_tokens": sample_tokens,
        "population": cfg["population"],
        "n_failed_replications": n_failed,
        "outputs": ["truth.csv", "lr_curves.csv", "rms.csv", "summary.csv",
                    "percentiles.csv", "scores.csv", "mapping.csv"],
    }
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    for m in methods:
        s = suite.summaries[m.method_id]
        print(f"{m.method_id}: median RMS {_fmt(s.rms_median)} "
              f"({s.n_failed} failed)")
    print(f"outputs written to {out_dir}")
    if n_failed and args.strict:
        print("error: failed replications present (strict mode)",
              file=sys.stderr)
        return 1
    return 0


def cmd_list_methods(args) -> int:
    del args
    for mid in list_method_ids():
        defaults = MethodConfig(mid).params
        suffix = f"  defaults: {json.dumps(defaults)}" if defaults else ""
        print(f"{mid}{suffix}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrbench",
        description="Benchmark likelihood-ratio methods on synthetic "
                    "populations with known ground truth.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build-population",
                             help="generate and save a population spec")
    p_build.add_argument("--config", required=True,
                         help="JSON population config")
    p_build.add_argument("--out", required=True, help="output spec path")
    p_build.set_defaults(func=cmd_build_population)

    p_run = sub.add_parser("run", help="run a benchmark suite")
    p_run.add_argument("--config", required=True, help="JSON run config")
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.add_argument("--reps", type=int,
                       help="replication count (overrides config)")
    p_run.add_argument("--seed", type=int,
                       help="base seed (overrides config)")
    p_run.add_argument("--strict", action="store_true",
                       help="exit nonzero if any replication failed")
    p_run.set_defaults(func=cmd_run)

    p_list = sub.add_parser("list-methods", help="list runnable method ids")
    p_list.set_defaults(func=cmd_list_methods)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
