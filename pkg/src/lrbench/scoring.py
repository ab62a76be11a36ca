"""Evidence scores and cross-validated training score sets.

A score compares an offender value against a suspect model.  Calibration of
scores into likelihood ratios needs training scores with known origin labels,
built from a background sample set:

* same-origin: each token scored against the leave-one-out mean of its own
  source's remaining tokens (no token is compared to a statistic it entered);
* different-origin: every unordered source pair (i < j), scoring each token
  of i against the mean of j.

For S sources of T tokens that yields S*T same-origin and C(S,2)*T
different-origin scores.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .density import LN10, gaussian_pdf, log_gaussian_pdf
from .population import SampleSet, SuspectSpec

SCORE_TYPES = ("difference", "similarity", "st")


@dataclass
class ScoreSet:
    """Labelled training scores for one score family."""

    same_origin: np.ndarray
    different_origin: np.ndarray
    score_type: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.same_origin = np.asarray(self.same_origin, dtype=float).ravel()
        self.different_origin = np.asarray(self.different_origin, dtype=float).ravel()
        if self.same_origin.size < 1 or self.different_origin.size < 1:
            raise ValueError("both score classes must be non-empty")

    @property
    def n_same(self) -> int:
        return self.same_origin.size

    @property
    def n_different(self) -> int:
        return self.different_origin.size


# ---------------------------------------------------------------------------
# evidence scores


def difference_score(x_q, suspect_mean):
    """Signed difference offender-minus-suspect."""
    return np.asarray(x_q, dtype=float) - suspect_mean


def similarity_score(x_q, suspect_mean, pooled_sd):
    """Gaussian density of the offender value under the suspect model."""
    return gaussian_pdf(np.asarray(x_q, dtype=float), suspect_mean, pooled_sd)


def st_score(x_q, suspect_mean, pooled_sd, background_means):
    """Similarity-and-typicality score: already a base-10 log LR estimate.

    log10 of suspect density over the equal-weight mean density across the
    background sources, every source modelled with the shared pooled SD.
    """
    x = np.asarray(x_q, dtype=float)
    scalar = x.ndim == 0
    xf = np.atleast_1d(x)
    m = np.asarray(background_means, dtype=float)
    num = log_gaussian_pdf(xf, suspect_mean, pooled_sd)
    per = log_gaussian_pdf(xf[:, None], m[None, :], pooled_sd)
    den = logsumexp(per, axis=1) - np.log(m.size)
    out = (num - den) / LN10
    return float(out[0]) if scalar else out


def st_score_from_offsets(offsets, suspect_mean, pooled_sd, background_means):
    """st score with the numerator computed from exact offender offsets.

    Mathematically identical to st_score at x = suspect_mean + offsets; using
    the offset directly keeps the numerator exactly symmetric for mirrored
    grid points.
    """
    offs = np.asarray(offsets, dtype=float)
    x = suspect_mean + offs
    m = np.asarray(background_means, dtype=float)
    num = log_gaussian_pdf(offs, 0.0, pooled_sd)
    per = log_gaussian_pdf(x[:, None], m[None, :], pooled_sd)
    den = logsumexp(per, axis=1) - np.log(m.size)
    return (num - den) / LN10


# ---------------------------------------------------------------------------
# training score sets


def _loo_means(sample: SampleSet) -> np.ndarray:
    """Leave-one-out means: entry (j, t) excludes token t of source j."""
    t = sample.n_tokens
    return (t * sample.means[:, None] - sample.tokens) / (t - 1)


def _pair_indices(n_sources: int):
    """Unordered pairs i < j in lexicographic order."""
    return np.triu_indices(n_sources, k=1)


def build_training_scoreset(sample: SampleSet, score_type: str,
                            params: dict | None = None) -> ScoreSet:
    if score_type not in SCORE_TYPES:
        raise ValueError(f"unknown score type {score_type!r}")
    if sample.n_sources < 2:
        raise ValueError("need >= 2 sources for different-origin scores")
    del params  # no per-family knobs today; signature kept stable

    sigma = sample.pooled_sd
    tokens = sample.tokens
    loo = _loo_means(sample)
    i_arr, j_arr = _pair_indices(sample.n_sources)
    meta = {"pooled_sd": sigma}

    if score_type == "difference":
        so = (tokens - loo).ravel()
        do = (tokens[i_arr] - sample.means[j_arr][:, None]).ravel()
        return ScoreSet(so, do, score_type, meta)

    if score_type == "similarity":
        so = gaussian_pdf(tokens, loo, sigma).ravel()
        do = gaussian_pdf(tokens[i_arr], sample.means[j_arr][:, None], sigma).ravel()
        return ScoreSet(so, do, score_type, meta)

    return _build_st_scoreset(sample, loo, i_arr, j_arr, meta)


def _build_st_scoreset(sample: SampleSet, loo, i_arr, j_arr, meta) -> ScoreSet:
    """Cross-validated st scores with per-pair source exclusion.

    Same-origin scores exclude the token's own source from the typicality
    background; different-origin scores exclude both sources of the pair.
    The per-token exclusions are evaluated by subtracting terms from one
    shared log-sum-exp, with an exact fallback when cancellation would bite.
    """
    sigma = sample.pooled_sd
    n_src, n_tok = sample.tokens.shape
    if n_src < 3:
        raise ValueError("st scores need >= 3 sources (pair exclusion)")
    m = sample.means
    x_flat = sample.tokens.ravel()

    log_m = log_gaussian_pdf(x_flat[:, None], m[None, :], sigma)  # (N, S)
    row_max = log_m.max(axis=1)
    w = np.exp(log_m - row_max[:, None])
    w_tot = w.sum(axis=1)
    src_of_row = np.repeat(np.arange(n_src), n_tok)

    def excluded_log_mean(rows, drop_a, drop_b=None):
        """log of mean density over sources excluding one or two of them."""
        d = w_tot[rows] - w[rows, drop_a]
        n_kept = n_src - 1
        if drop_b is not None:
            d = d - w[rows, drop_b]
            n_kept -= 1
        out = row_max[rows] + np.log(np.maximum(d, 1e-300)) - np.log(n_kept)
        # subtraction cancels catastrophically when the dropped sources carry
        # nearly all the mass; recompute those entries exactly
        shaky = d < w_tot[rows] * 1e-6
        if np.any(shaky):
            flat_rows = np.broadcast_to(rows, d.shape)[shaky]
            da = np.broadcast_to(drop_a, d.shape)[shaky]
            if drop_b is None:
                db = np.full(da.shape, -1)
            else:
                db = np.broadcast_to(drop_b, d.shape)[shaky]
            exact = np.empty(da.size)
            for idx, (r, a, b) in enumerate(zip(flat_rows, da, db)):
                keep = np.ones(n_src, dtype=bool)
                keep[a] = False
                if b >= 0:
                    keep[b] = False
                exact[idx] = logsumexp(log_m[r, keep]) - np.log(keep.sum())
            out[shaky] = exact
        return out

    # same-origin: numerator against leave-one-out mean, own source excluded
    rows = np.arange(n_src * n_tok)
    num_so = log_gaussian_pdf(x_flat, loo.ravel(), sigma)
    den_so = excluded_log_mean(rows, src_of_row)
    so = (num_so - den_so) / LN10

    # different-origin: tokens of i against source j, both excluded
    pair_rows = i_arr[:, None] * n_tok + np.arange(n_tok)[None, :]
    num_do = log_m[pair_rows, j_arr[:, None]]
    den_do = excluded_log_mean(pair_rows, i_arr[:, None], j_arr[:, None])
    do = ((num_do - den_do) / LN10).ravel()

    return ScoreSet(so, do, "st", meta)


# ---------------------------------------------------------------------------
# anchored score sets (distributions tied to one suspect / one offender value)


@dataclass
class AnchoredScores:
    """Log10 score samples anchoring similarity and typicality separately."""

    similarity: np.ndarray  # suspect control tokens scored against suspect
    typicality: np.ndarray  # offender value scored against each background source
    evidence: float         # offender value scored against the suspect


def anchored_scores(suspect: SuspectSpec, x_q: float, sample: SampleSet,
                    pooled_sd: float | None = None,
                    offset: float | None = None) -> AnchoredScores:
    """Scores for the offender-anchored similarity/typicality method.

    All scores are log10 Gaussian densities under pooled-SD source models.
    When the offender value is defined as suspect mean plus a grid offset,
    pass the offset so the evidence score uses it exactly.
    """
    sigma = sample.pooled_sd if pooled_sd is None else pooled_sd
    sim = log_gaussian_pdf(suspect.control_tokens, suspect.mean, sigma) / LN10
    typ = log_gaussian_pdf(x_q, sample.means, sigma) / LN10
    dev = (x_q - suspect.mean) if offset is None else offset
    evidence = float(log_gaussian_pdf(dev, 0.0, sigma) / LN10)
    return AnchoredScores(similarity=sim, typicality=typ, evidence=evidence)


def suspect_anchored_denominator_scores(suspect: SuspectSpec, sample: SampleSet,
                                        pooled_sd: float | None = None) -> np.ndarray:
    """Every background token scored against the suspect model (log10)."""
    sigma = sample.pooled_sd if pooled_sd is None else pooled_sd
    return (log_gaussian_pdf(sample.tokens.ravel(), suspect.mean, sigma) / LN10)


# ---------------------------------------------------------------------------
# SVM training scores


def svm_training_scores(model, suspect_tokens, background_tokens) -> ScoreSet:
    """Resubstitution decision values for both training classes."""
    from .density import svm_score
    so = svm_score(model, np.asarray(suspect_tokens, dtype=float))
    do = svm_score(model, np.asarray(background_tokens, dtype=float))
    return ScoreSet(so, do, "svm")


# ---------------------------------------------------------------------------
# multivariate scores


def mv_difference_scores(x, tokens) -> np.ndarray:
    """Mean Euclidean distance from each point in x to a token set."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.asarray(tokens, dtype=float)
    d = np.sqrt(np.sum((X[:, None, :] - t[None, :, :]) ** 2, axis=2))
    return d.mean(axis=1)


def mv_similarity_scores(x, source_model) -> np.ndarray:
    """Log10 density of points under a fitted source mixture model."""
    from .density import gmm_log_pdf
    X = np.atleast_2d(np.asarray(x, dtype=float))
    return gmm_log_pdf(X, source_model) / LN10


def mv_st_scores(x, source_model, pooled_model) -> np.ndarray:
    """Log10 source density minus log10 pooled background density."""
    from .density import gmm_log_pdf
    X = np.atleast_2d(np.asarray(x, dtype=float))
    return (gmm_log_pdf(X, source_model) - gmm_log_pdf(X, pooled_model)) / LN10
