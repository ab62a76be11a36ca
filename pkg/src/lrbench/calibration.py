"""Calibration of scores into base-10 log likelihood ratios.

Each calibrator is fitted on a labelled ScoreSet and then maps new scores to
log10 LR values.  Five families are provided: a zero-mean Gaussian pair for
signed difference scores, a kernel-density pair, weighted logistic
regression, a Gaussian pair with equal or separate variances, and pool
adjacent violators (nonparametric isotonic calibration).
"""

from dataclasses import dataclass

import numpy as np

from .density import LN10, KdeModel, kde_log_pdf, log_gaussian_pdf
from .scoring import ScoreSet


# ---------------------------------------------------------------------------
# zero-mean Gaussian pair (signed difference scores)


@dataclass(frozen=True)
class ZeroMeanGaussianCalibrator:
    """Both score classes modelled as zero-mean Gaussians.

    Difference scores scatter around zero for same-origin comparisons and
    spread wider for different-origin ones, so only the spreads are fitted:
    sd = sqrt(sum(S^2) / (n - 1)).
    """

    variant = "zero_mean_gauss"
    sd_same: float
    sd_different: float

    def log10_lr(self, scores):
        s = np.asarray(scores, dtype=float)
        num = log_gaussian_pdf(s, 0.0, self.sd_same)
        den = log_gaussian_pdf(s, 0.0, self.sd_different)
        return (num - den) / LN10


def _zero_mean_sd(scores: np.ndarray) -> float:
    if scores.size < 2:
        raise ValueError("need >= 2 scores per class")
    return float(np.sqrt(np.sum(scores ** 2) / (scores.size - 1)))


def fit_zero_mean_gaussians(scores: ScoreSet) -> ZeroMeanGaussianCalibrator:
    if scores.score_type != "difference":
        raise ValueError("zero-mean pair applies to signed difference scores")
    return ZeroMeanGaussianCalibrator(
        sd_same=_zero_mean_sd(scores.same_origin),
        sd_different=_zero_mean_sd(scores.different_origin))


# ---------------------------------------------------------------------------
# kernel-density pair


@dataclass(frozen=True)
class KdePairCalibrator:
    variant = "kde_pair"
    kde_same: KdeModel
    kde_different: KdeModel

    def log10_lr(self, scores):
        s = np.asarray(scores, dtype=float)
        return (kde_log_pdf(s, self.kde_same)
                - kde_log_pdf(s, self.kde_different)) / LN10


def fit_kde_pair(scores: ScoreSet, bandwidth: float) -> KdePairCalibrator:
    if bandwidth <= 0:
        raise ValueError("bandwidth must be > 0")
    return KdePairCalibrator(
        kde_same=KdeModel(scores.same_origin, bandwidth),
        kde_different=KdeModel(scores.different_origin, bandwidth))


# ---------------------------------------------------------------------------
# logistic regression


@dataclass(frozen=True)
class LogisticCalibrator:
    """log10 LR = alpha + beta * score, fitted with equal class weights."""

    variant = "logistic"
    alpha: float
    beta: float
    converged: bool

    def log10_lr(self, scores):
        return self.alpha + self.beta * np.asarray(scores, dtype=float)


def fit_logistic(scores: ScoreSet, max_iter: int = 200,
                 tol: float = 1e-10) -> LogisticCalibrator:
    """Weighted logistic regression by damped Newton iteration.

    Classes are weighted 1/(2U) and 1/(2V) so the fitted intercept carries no
    prior term and the linear output is the log LR directly.  Perfectly or
    nearly separated scores drive the slope towards infinity; that shows up
    as non-convergence and is flagged rather than raised, since downstream
    code treats it as a failed replication.
    """
    s = np.concatenate([scores.same_origin, scores.different_origin])
    y = np.concatenate([np.ones(scores.n_same), np.zeros(scores.n_different)])
    w = np.concatenate([np.full(scores.n_same, 0.5 / scores.n_same),
                        np.full(scores.n_different, 0.5 / scores.n_different)])

    theta = np.zeros(2)  # (intercept, slope) in natural-log units

    def nll(th):
        z = th[0] + th[1] * s
        # log(1 + e^z) computed stably on both tails
        softplus = np.where(z > 0, z + np.log1p(np.exp(-np.abs(z))),
                            np.log1p(np.exp(z)))
        return float(np.sum(w * (softplus - y * z)))

    current = nll(theta)
    converged = False
    for _ in range(max_iter):
        z = theta[0] + theta[1] * s
        p = 1.0 / (1.0 + np.exp(-z))
        g = np.array([np.sum(w * (p - y)), np.sum(w * (p - y) * s)])
        r = w * p * (1.0 - p)
        h = np.array([[np.sum(r), np.sum(r * s)],
                      [np.sum(r * s), np.sum(r * s * s)]])
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            break
        # halve the step until the objective stops increasing
        scale = 1.0
        for _ in range(50):
            candidate = theta - scale * step
            value = nll(candidate)
            if value <= current + 1e-15:
                break
            scale *= 0.5
        else:
            break
        moved = np.abs(scale * step).max()
        theta, current = candidate, value
        if not np.all(np.isfinite(theta)):
            break
        if moved < tol:
            converged = True
            break

    return LogisticCalibrator(alpha=float(theta[0] / LN10),
                              beta=float(theta[1] / LN10),
                              converged=converged)


# ---------------------------------------------------------------------------
# Gaussian pair (equal or separate variances)


@dataclass(frozen=True)
class GaussianPairCalibrator:
    variant = "gauss_pair"
    mean_same: float
    mean_different: float
    sd_same: float
    sd_different: float
    equal_variance: bool

    def log10_lr(self, scores):
        s = np.asarray(scores, dtype=float)
        num = log_gaussian_pdf(s, self.mean_same, self.sd_same)
        den = log_gaussian_pdf(s, self.mean_different, self.sd_different)
        return (num - den) / LN10


def fit_gaussian_pair(scores: ScoreSet, equal_variance: bool,
                      pooled_sd_rule: str = "equal_weight") -> GaussianPairCalibrator:
    """Gaussian models per class; optionally one common variance.

    pooled_sd_rule picks how the common variance combines the class
    variances: "equal_weight" averages them, "count_weighted" weights by
    degrees of freedom.
    """
    so, do = scores.same_origin, scores.different_origin
    if so.size < 2 or do.size < 2:
        raise ValueError("need >= 2 scores per class")
    m_so, m_do = float(so.mean()), float(do.mean())
    v_so = float(so.var(ddof=1))
    v_do = float(do.var(ddof=1))
    if equal_variance:
        if pooled_sd_rule == "equal_weight":
            v = 0.5 * (v_so + v_do)
        elif pooled_sd_rule == "count_weighted":
            v = ((so.size - 1) * v_so + (do.size - 1) * v_do) / (so.size + do.size - 2)
        else:
            raise ValueError(f"unknown pooled_sd_rule {pooled_sd_rule!r}")
        sd_so = sd_do = float(np.sqrt(v))
    else:
        sd_so, sd_do = float(np.sqrt(v_so)), float(np.sqrt(v_do))
    if min(sd_so, sd_do) <= 0:
        raise ValueError("degenerate (zero-variance) score class")
    return GaussianPairCalibrator(mean_same=m_so, mean_different=m_do,
                                  sd_same=sd_so, sd_different=sd_do,
                                  equal_variance=equal_variance)


# ---------------------------------------------------------------------------
# pool adjacent violators


def pool_adjacent_violators(values) -> np.ndarray:
    """Nondecreasing fit: merge adjacent blocks until means are ordered.

    Equal-weight inputs; returns the fitted value at every input position.
    """
    y = np.asarray(values, dtype=float)
    n = y.size
    if n == 0:
        raise ValueError("empty input")
    sums = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    means = np.empty(n)
    m = 0
    for v in y:
        sums[m] = v
        counts[m] = 1
        means[m] = v
        m += 1
        while m > 1 and means[m - 2] > means[m - 1]:
            sums[m - 2] += sums[m - 1]
            counts[m - 2] += counts[m - 1]
            means[m - 2] = sums[m - 2] / counts[m - 2]
            m -= 1
    return np.repeat(means[:m], counts[:m])


@dataclass(frozen=True)
class PavCalibrator:
    """Monotone score-to-LR table from isotonic posterior probabilities.

    Scores are ranked; labels (1 same-origin, 0 different-origin, ties with
    different-origin first) are pooled to a nondecreasing posterior; the
    posterior is clamped away from 0 and 1, turned into log10 odds, and the
    training prior odds are subtracted.  New scores map to the table entry
    with the nearest score, lower on distance ties, clamped at the ends.
    """

    variant = "pav"
    scores: np.ndarray      # ascending unique training scores
    log10_lrs: np.ndarray   # nondecreasing
    prior_log10_odds: float

    def log10_lr(self, query):
        q = np.asarray(query, dtype=float)
        scalar = q.ndim == 0
        qf = np.atleast_1d(q).astype(float)
        s = self.scores
        pos = np.searchsorted(s, qf)
        pos = np.clip(pos, 0, s.size - 1)
        left = np.clip(pos - 1, 0, s.size - 1)
        # nearest training score wins; exact midpoints go to the lower one
        take_left = (qf - s[left]) <= (s[pos] - qf)
        inside = pos > 0
        idx = np.where(inside & take_left, left, pos)
        out = self.log10_lrs[idx]
        return float(out[0]) if scalar else out


def fit_pav(scores: ScoreSet) -> PavCalibrator:
    so, do = scores.same_origin, scores.different_origin
    u, v = so.size, do.size
    all_scores = np.concatenate([so, do])
    labels = np.concatenate([np.ones(u), np.zeros(v)])

    # ascending scores; at tied scores different-origin sorts first
    order = np.lexsort((labels, all_scores))
    sorted_scores = all_scores[order]
    pooled = pool_adjacent_violators(labels[order])

    eps = 1.0 / (2.0 * (u + v))
    p = np.clip(pooled, eps, 1.0 - eps)
    prior = float(np.log10(u / v))
    llr = np.log10(p) - np.log10(1.0 - p) - prior

    uniq, first = np.unique(sorted_scores, return_index=True)
    return PavCalibrator(scores=uniq, log10_lrs=llr[first], prior_log10_odds=prior)


# ---------------------------------------------------------------------------
# shared entry points


def apply_calibrator(calibrator, scores):
    return calibrator.log10_lr(scores)


@dataclass(frozen=True)
class MonotonicityReport:
    monotone: bool
    worst_drop: float
    violation_at: float | None


def check_monotonic(calibrator, grid) -> MonotonicityReport:
    """Verify the fitted mapping never decreases along an ascending grid."""
    g = np.sort(np.asarray(grid, dtype=float).ravel())
    vals = apply_calibrator(calibrator, g)
    diffs = np.diff(vals)
    worst = float(diffs.min()) if diffs.size else 0.0
    if diffs.size and worst < -1e-12:
        at = float(g[1:][np.argmin(diffs)])
        return MonotonicityReport(monotone=False, worst_drop=worst, violation_at=at)
    return MonotonicityReport(monotone=True, worst_drop=min(worst, 0.0),
                              violation_at=None)
