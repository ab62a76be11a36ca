"""Render figures from a benchmark run directory.

Input is the CSV set written by ``lrbench run``; nothing here imports the
benchmark package itself, so the renderer works on any directory with the
same schemas. Output is SVG with timestamps disabled, so re-rendering an
unchanged run directory reproduces the files byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

# deterministic ids inside the SVG output
matplotlib.rcParams["svg.hashsalt"] = "lrfigures"

TRUTH_STYLE = dict(color="black", linestyle="--", linewidth=1.2)
SUSPECT_COLORS = ("tab:blue", "tab:red", "tab:green", "tab:purple",
                  "tab:orange", "tab:brown")

KINDS = ("lr_curve_single", "lr_curve_percentiles", "score_dist_and_mapping",
         "rms_boxplot")

# required columns per csv role
SCHEMAS = {
    "truth": ("suspect_mean", "offender_x", "log10_lr_true"),
    "lr_curves": ("method", "replication", "suspect_mean", "offender_x",
                  "log10_lr_est", "log10_lr_true"),
    "percentiles": ("method", "suspect_mean", "offender_x", "p5", "p50",
                    "p95", "log10_lr_true"),
    "scores": ("method", "replication", "label", "value"),
    "mapping": ("method", "replication", "score", "log10_lr"),
    "rms": ("method", "replication", "rms", "status"),
    "summary": ("method", "median_rms", "q1", "q3", "lo_whisker",
                "hi_whisker", "mean", "sd", "n_failed"),
}

# csv roles each figure kind reads
KIND_INPUTS = {
    "lr_curve_single": ("truth",),            # lr_curves only when a method is drawn
    "lr_curve_percentiles": ("truth", "percentiles"),
    "score_dist_and_mapping": ("scores", "mapping"),
    "rms_boxplot": ("rms",),
}


class FigureError(Exception):
    pass


@dataclass
class FigureSpec:
    kind: str
    inputs: dict = field(default_factory=dict)  # csv role -> path
    output: Path | str = "figure.svg"
    method: str | None = None
    replication: int | None = None

    def required_inputs(self):
        roles = list(KIND_INPUTS[self.kind])
        if self.kind == "lr_curve_single" and self.method is not None:
            roles.append("lr_curves")
        return roles


def load_csv(path, role: str) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise FigureError(f"missing input CSV: {path}")
    df = pd.read_csv(path)
    for col in SCHEMAS[role]:
        if col not in df.columns:
            raise FigureError(f"{path.name}: missing column {col!r}")
    return df


def validate(spec: FigureSpec) -> dict:
    """Check kind and inputs, returning the loaded frames keyed by role."""
    if spec.kind not in KINDS:
        raise FigureError(f"unknown figure kind {spec.kind!r}")
    frames = {}
    for role in spec.required_inputs():
        if role not in spec.inputs:
            raise FigureError(f"{spec.kind} needs input {role!r}")
        frames[role] = load_csv(spec.inputs[role], role)
    return frames


def _suspect_color(i: int) -> str:
    return SUSPECT_COLORS[i % len(SUSPECT_COLORS)]


def build_lr_curve_single(truth: pd.DataFrame,
                          curves: pd.DataFrame | None = None,
                          method: str | None = None,
                          replication: int | None = None):
    """Dashed truth per suspect, plus one solid estimated curve per suspect.

    Without a method this is the truth-only figure: the two dashed curves
    with dotted vertical lines at the suspect means.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    sus_means = sorted(truth["suspect_mean"].unique())
    for mu in sus_means:
        part = truth[truth["suspect_mean"] == mu].sort_values("offender_x")
        ax.plot(part["offender_x"], part["log10_lr_true"], **TRUTH_STYLE)
        ax.axvline(mu, color="gray", linestyle=":", linewidth=0.9)
    title = "true log10 LR"
    if method is not None:
        sub = curves[curves["method"] == method]
        if sub.empty:
            raise FigureError(f"no curves for method {method!r}")
        if replication is None:
            replication = int(sub["replication"].min())
        sub = sub[sub["replication"] == replication]
        if sub.empty:
            raise FigureError(
                f"no curves for method {method!r} replication {replication}")
        for i, mu in enumerate(sus_means):
            part = sub[sub["suspect_mean"] == mu].sort_values("offender_x")
            ax.plot(part["offender_x"], part["log10_lr_est"],
                    color=_suspect_color(i), linestyle="-", linewidth=1.4)
        title = f"{method}, replication {replication} (dashed: truth)"
    ax.set_xlabel("feature value")
    ax.set_ylabel("log10 LR")
    ax.set_title(title)
    fig.tight_layout()
    return fig


def build_lr_curve_percentiles(truth: pd.DataFrame, pct: pd.DataFrame,
                               method: str):
    """Dashed truth plus solid 5/50/95 percentile curves per suspect."""
    sub = pct[pct["method"] == method]
    if sub.empty:
        raise FigureError(f"no percentile curves for method {method!r}")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    sus_means = sorted(truth["suspect_mean"].unique())
    for i, mu in enumerate(sus_means):
        part = truth[truth["suspect_mean"] == mu].sort_values("offender_x")
        ax.plot(part["offender_x"], part["log10_lr_true"], **TRUTH_STYLE)
        ax.axvline(mu, color="gray", linestyle=":", linewidth=0.9)
        p = sub[sub["suspect_mean"] == mu].sort_values("offender_x")
        for col, width in (("p5", 0.9), ("p50", 1.6), ("p95", 0.9)):
            ax.plot(p["offender_x"], p[col], color=_suspect_color(i),
                    linestyle="-", linewidth=width)
    ax.set_xlabel("feature value")
    ax.set_ylabel("log10 LR")
    ax.set_title(f"{method}: 5/50/95 percentiles (dashed: truth)")
    fig.tight_layout()
    return fig


def build_score_dist_and_mapping(scores: pd.DataFrame, mapping: pd.DataFrame,
                                 method: str):
    """Left: score distributions by origin. Right: score to log10 LR map."""
    ssub = scores[scores["method"] == method]
    msub = mapping[mapping["method"] == method].sort_values("score")
    if ssub.empty:
        raise FigureError(f"no scores for method {method!r}")
    if msub.empty:
        raise FigureError(f"no mapping for method {method!r}")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    lo = ssub["value"].min()
    hi = ssub["value"].max()
    bins = np.linspace(lo, hi if hi > lo else lo + 1.0, 41)
    for label, color in (("so", "tab:blue"), ("do", "tab:red")):
        vals = ssub[ssub["label"] == label]["value"]
        ax1.hist(vals, bins=bins, density=True, histtype="step",
                 color=color, label=f"{label} ({len(vals)})")
    ax1.set_xlabel("score")
    ax1.set_ylabel("density")
    ax1.legend(frameon=False)
    ax2.plot(msub["score"], msub["log10_lr"], color="black", linewidth=1.4)
    ax2.set_xlabel("score")
    ax2.set_ylabel("log10 LR")
    fig.suptitle(method)
    fig.tight_layout()
    return fig


def build_rms_boxplot(rms: pd.DataFrame):
    """Method-labeled boxes: median, quartiles, 1.5-IQR whiskers, outliers."""
    ok = rms[rms["status"] == "ok"]
    if ok.empty:
        raise FigureError("rms.csv has no successful replications")
    methods = list(dict.fromkeys(rms["method"]))  # first-seen order
    data = [ok[ok["method"] == m]["rms"].to_numpy() for m in methods]
    kept = [(m, d) for m, d in zip(methods, data) if d.size]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.55 * len(kept) + 1.5), 4.2))
    ax.boxplot([d for _, d in kept], tick_labels=[m for m, _ in kept],
               whis=1.5)
    ax.set_ylabel("RMS error (log10 LR)")
    ax.tick_params(axis="x", rotation=60)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render one figure to spec.output and return the path."""
    frames = validate(spec)
    if spec.kind == "lr_curve_single":
        fig = build_lr_curve_single(frames["truth"], frames.get("lr_curves"),
                                    spec.method, spec.replication)
    elif spec.kind == "lr_curve_percentiles":
        if spec.method is None:
            raise FigureError("lr_curve_percentiles needs a method")
        fig = build_lr_curve_percentiles(frames["truth"],
                                         frames["percentiles"], spec.method)
    elif spec.kind == "score_dist_and_mapping":
        if spec.method is None:
            raise FigureError("score_dist_and_mapping needs a method")
        fig = build_score_dist_and_mapping(frames["scores"],
                                           frames["mapping"], spec.method)
    else:
        fig = build_rms_boxplot(frames["rms"])
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    # Date=None drops the creation timestamp, keeping reruns byte-identical
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def run_csv_paths(run_dir) -> dict:
    run_dir = Path(run_dir)
    return {role: run_dir / f"{name}.csv"
            for role, name in (("truth", "truth"), ("lr_curves", "lr_curves"),
                               ("percentiles", "percentiles"),
                               ("scores", "scores"), ("mapping", "mapping"),
                               ("rms", "rms"), ("summary", "summary"))}


def render_all(run_dir, out_dir=None, kinds=KINDS) -> list[Path]:
    """Render the full figure set for a run directory.

    Per method in summary.csv: a single-replication LR-curve figure and a
    percentile variant, plus a score/mapping panel when the method exported
    training scores. One truth-only figure and one RMS boxplot round out
    the set.
    """
    paths = run_csv_paths(run_dir)
    out_dir = Path(out_dir) if out_dir is not None else Path(run_dir) / "figures"
    methods = list(load_csv(paths["summary"], "summary")["method"])
    scored = set(load_csv(paths["scores"], "scores")["method"])
    written = []

    def emit(spec):
        written.append(render(spec))

    if "lr_curve_single" in kinds:
        emit(FigureSpec("lr_curve_single", {"truth": paths["truth"]},
                        out_dir / "truth.svg"))
        for m in methods:
            emit(FigureSpec("lr_curve_single",
                            {"truth": paths["truth"],
                             "lr_curves": paths["lr_curves"]},
                            out_dir / f"lr_single_{m}.svg", method=m))
    if "lr_curve_percentiles" in kinds:
        for m in methods:
            emit(FigureSpec("lr_curve_percentiles",
                            {"truth": paths["truth"],
                             "percentiles": paths["percentiles"]},
                            out_dir / f"lr_percentiles_{m}.svg", method=m))
    if "score_dist_and_mapping" in kinds:
        for m in methods:
            if m in scored:
                emit(FigureSpec("score_dist_and_mapping",
                                {"scores": paths["scores"],
                                 "mapping": paths["mapping"]},
                                out_dir / f"scores_mapping_{m}.svg",
                                method=m))
    if "rms_boxplot" in kinds:
        emit(FigureSpec("rms_boxplot", {"rms": paths["rms"]},
                        out_dir / "rms_boxplot.svg"))
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lrfigures",
        description="Render figures from a benchmark run directory.")
    parser.add_argument("--run-dir", required=True,
                        help="directory written by the benchmark CLI")
    parser.add_argument("--figures",
                        help="comma-separated subset of: " + ", ".join(KINDS))
    parser.add_argument("--out-dir",
                        help="output directory (default: RUN_DIR/figures)")
    args = parser.parse_args(argv)
    kinds = KINDS
    if args.figures:
        kinds = tuple(k.strip() for k in args.figures.split(",") if k.strip())
        bad = [k for k in kinds if k not in KINDS]
        if bad:
            print(f"error: unknown figure kinds {bad}", file=sys.stderr)
            return 2
    try:
        written = render_all(args.run_dir, args.out_dir, kinds)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(written)} figures")
    return 0


if __name__ == "__main__":
    sys.exit(main())
