"""Replicated benchmark of LR methods against population ground truth.

One replication draws a background sample set and fresh suspect tokens from a
saved population, evaluates each configured method on a grid of offender
values around each suspect, and records the RMS deviation of the estimated
base-10 log LR curves from the true ones.  Replications are aggregated into
boxplot statistics per method and pointwise percentile bands per offender
value.

Replication r of every method uses sample-set seed base_seed + r, so all
methods see identical data within a replication and adding or removing
methods never changes any other method's numbers.
"""

from dataclasses import dataclass, field

import numpy as np

from . import calibration
from .density import (LN10, KdeModel, kde_log_pdf, log_gaussian_pdf,
                      gaussian_pdf, gmm_fit_em, gmm_log_pdf, mvn_log_pdf,
                      svm_score, svm_train)
from .population import (GmmPopulationSpec, UnivariatePopulationSpec,
                         draw_batch_for_sources, draw_gmm_sample_set,
                         draw_sample_set, draw_source_tokens, draw_suspect,
                         mv_offender_grid, offender_grid)
from .rng import derive_seed, stream_rng
from .scoring import (ScoreSet, build_training_scoreset,
                      mv_difference_scores, mv_similarity_scores,
                      mv_st_scores, st_score_from_offsets,
                      suspect_anchored_denominator_scores,
                      svm_training_scores)
from scipy.special import logsumexp

SUSPECT_MEANS = (0.0, 2.0)
SUSPECT_SD = 1.0


class MethodFailure(Exception):
    """A method could not produce estimates on this replication."""


# ---------------------------------------------------------------------------
# method registry

_UNIVARIATE_DEFAULTS = {
    "direct_pooled": {},
    "direct_separate": {},
    "diff_gauss": {},
    "sim_kde": {"bandwidth": 0.02},
    "st_kde": {"bandwidth": 0.2},
    "st_logistic": {},
    "st_gauss_eq": {"pooled_sd_rule": "equal_weight"},
    "st_gauss_sep": {},
    "st_pav": {},
    "diff_pav": {},
    "sim_pav": {},
    "anchored_sim_typ": {"bandwidth": 0.4},
    "suspect_anchored": {"bandwidth": 0.4},
    "svm_logistic": {"rbf_sd": 1.5, "cost": 1.0},
}

_MULTIVARIATE_DEFAULTS = {
    "mv_direct_gauss": {},
    "mv_direct_gmm": {},
    "mv_diff_pav": {},
    "mv_sim_pav": {},
    "mv_st_pav": {},
}

METHOD_DEFAULTS = {**_UNIVARIATE_DEFAULTS, **_MULTIVARIATE_DEFAULTS}

FIG3_METHODS = ("direct_pooled", "direct_separate", "diff_gauss", "sim_kde",
                "st_kde", "st_logistic", "st_gauss_eq", "st_gauss_sep",
                "st_pav", "anchored_sim_typ", "suspect_anchored",
                "svm_logistic")
PAV_FAMILY_METHODS = ("diff_pav", "sim_pav", "st_pav")
MV_METHODS = ("mv_direct_gauss", "mv_direct_gmm", "mv_diff_pav",
              "mv_sim_pav", "mv_st_pav")


@dataclass
class MethodConfig:
    method_id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        defaults = METHOD_DEFAULTS.get(self.method_id)
        if defaults is None:
            raise ValueError(f"unknown method {self.method_id!r}")
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ValueError(f"unknown params for {self.method_id}: "
                             f"{sorted(unknown)}")
        merged = dict(defaults)
        merged.update(self.params)
        self.params = merged

    @property
    def multivariate(self) -> bool:
        return self.method_id in _MULTIVARIATE_DEFAULTS


def list_method_ids() -> list[str]:
    return list(METHOD_DEFAULTS)


def as_method_configs(methods) -> list[MethodConfig]:
    out = []
    for m in methods:
        if isinstance(m, MethodConfig):
            out.append(m)
        elif isinstance(m, str):
            out.append(MethodConfig(m))
        else:
            out.append(MethodConfig(m["id"], dict(m.get("params", {}))))
    return out


# ---------------------------------------------------------------------------
# per-replication shared state


class ReplicationContext:
    """Sample set, suspects, and lazily built score sets for one replication."""

    def __init__(self, pop: UnivariatePopulationSpec, base_seed: int,
                 replication: int, n_sample_sources: int = 100,
                 n_sample_tokens: int = 30,
                 suspect_means=SUSPECT_MEANS, n_suspect_tokens: int = 30):
        self.replication = replication
        self.seed = base_seed + replication
        self.sample = draw_sample_set(pop, n_sample_sources, n_sample_tokens,
                                      self.seed)
        self.suspects = [draw_suspect(mu, SUSPECT_SD, self.seed, k,
                                      n_suspect_tokens, n_suspect_tokens)
                         for k, mu in enumerate(suspect_means)]
        self.grids = [offender_grid(mu) for mu in suspect_means]
        self._scoresets: dict[str, ScoreSet] = {}

    def scoreset(self, score_type: str) -> ScoreSet:
        ss = self._scoresets.get(score_type)
        if ss is None:
            ss = build_training_scoreset(self.sample, score_type)
            self._scoresets[score_type] = ss
        return ss


def _direct_curve(grid, suspect_mean, suspect_sd, bg_means, bg_sds):
    """Eq.-style direct LR with explicit numerator and denominator models."""
    num = log_gaussian_pdf(grid.offsets, 0.0, suspect_sd)
    per = log_gaussian_pdf(grid.values[:, None], bg_means[None, :],
                           bg_sds[None, :])
    den = logsumexp(per, axis=1) - np.log(bg_means.size)
    return (num - den) / LN10


# ---------------------------------------------------------------------------
# univariate method evaluators (each returns (n_suspects, n_grid) estimates)


def _eval_direct_pooled(ctx: ReplicationContext, params) -> np.ndarray:
    sigma = ctx.sample.pooled_sd
    return np.stack([
        st_score_from_offsets(grid.offsets, grid.suspect_mean, sigma,
                              ctx.sample.means)
        for grid in ctx.grids])


def _eval_direct_separate(ctx: ReplicationContext, params) -> np.ndarray:
    rows = []
    for suspect, grid in zip(ctx.suspects, ctx.grids):
        s_k = float(np.std(suspect.sample_tokens, ddof=1))
        rows.append(_direct_curve(grid, grid.suspect_mean, s_k,
                                  ctx.sample.means, ctx.sample.sds))
    return np.stack(rows)


def _evidence_rows(ctx: ReplicationContext, score_type: str) -> np.ndarray:
    """Evidence scores for every (suspect, offender) pair."""
    sigma = ctx.sample.pooled_sd
    rows = []
    for grid in ctx.grids:
        if score_type == "difference":
            rows.append(grid.offsets.copy())
        elif score_type == "similarity":
            rows.append(gaussian_pdf(grid.offsets, 0.0, sigma))
        else:
            rows.append(st_score_from_offsets(grid.offsets, grid.suspect_mean,
                                              sigma, ctx.sample.means))
    return np.stack(rows)


def _fit_global_calibrator(ctx: ReplicationContext, method: MethodConfig):
    """(score set, evidence transform, fitted calibrator) for one method."""
    mid = method.method_id
    if mid == "diff_gauss":
        ss = ctx.scoreset("difference")
        return ss, _evidence_rows(ctx, "difference"), \
            calibration.fit_zero_mean_gaussians(ss)
    if mid == "sim_kde":
        ss = ctx.scoreset("similarity")
        return ss, _evidence_rows(ctx, "similarity"), \
            calibration.fit_kde_pair(ss, method.params["bandwidth"])
    if mid == "sim_pav":
        ss = ctx.scoreset("similarity")
        return ss, _evidence_rows(ctx, "similarity"), calibration.fit_pav(ss)
    if mid == "diff_pav":
        base = ctx.scoreset("difference")
        # PAV needs higher score = more similar; fold signed differences
        ss = ScoreSet(-np.abs(base.same_origin), -np.abs(base.different_origin),
                      "difference", dict(base.metadata))
        return ss, -np.abs(_evidence_rows(ctx, "difference")), \
            calibration.fit_pav(ss)
    if mid.startswith("st_"):
        ss = ctx.scoreset("st")
        evidence = _evidence_rows(ctx, "st")
        if mid == "st_kde":
            return ss, evidence, calibration.fit_kde_pair(
                ss, method.params["bandwidth"])
        if mid == "st_logistic":
            cal = calibration.fit_logistic(ss)
            if not cal.converged:
                raise MethodFailure("logistic calibration did not converge")
            return ss, evidence, cal
        if mid == "st_gauss_eq":
            return ss, evidence, calibration.fit_gaussian_pair(
                ss, equal_variance=True,
                pooled_sd_rule=method.params["pooled_sd_rule"])
        if mid == "st_gauss_sep":
            return ss, evidence, calibration.fit_gaussian_pair(
                ss, equal_variance=False)
        if mid == "st_pav":
            return ss, evidence, calibration.fit_pav(ss)
    raise ValueError(f"{mid} has no global calibrator")


def _eval_global_calibrated(ctx, method) -> np.ndarray:
    _, evidence, cal = _fit_global_calibrator(ctx, method)
    return cal.log10_lr(evidence)


def _anchor_similarity_scores(suspect, sigma) -> np.ndarray:
    return log_gaussian_pdf(suspect.control_tokens, suspect.mean, sigma) / LN10


def _eval_anchored_sim_typ(ctx: ReplicationContext, params) -> np.ndarray:
    """Offender-anchored similarity vs typicality, KDE per grid point."""
    sigma = ctx.sample.pooled_sd
    bw = params["bandwidth"]
    out = np.empty((len(ctx.suspects), ctx.grids[0].offsets.size))
    for k, (suspect, grid) in enumerate(zip(ctx.suspects, ctx.grids)):
        sim_kde = KdeModel(_anchor_similarity_scores(suspect, sigma), bw)
        evidence = log_gaussian_pdf(grid.offsets, 0.0, sigma) / LN10
        num = kde_log_pdf(evidence, sim_kde)
        typ = log_gaussian_pdf(grid.values[:, None],
                               ctx.sample.means[None, :], sigma) / LN10
        den = np.array([kde_log_pdf(e, KdeModel(t, bw))
                        for e, t in zip(evidence, typ)])
        out[k] = (num - den) / LN10
    return out


def _eval_suspect_anchored(ctx: ReplicationContext, params) -> np.ndarray:
    """Similarity and typicality both anchored to the suspect model."""
    sigma = ctx.sample.pooled_sd
    bw = params["bandwidth"]
    out = np.empty((len(ctx.suspects), ctx.grids[0].offsets.size))
    for k, (suspect, grid) in enumerate(zip(ctx.suspects, ctx.grids)):
        num_kde = KdeModel(_anchor_similarity_scores(suspect, sigma), bw)
        den_kde = KdeModel(
            suspect_anchored_denominator_scores(suspect, ctx.sample), bw)
        evidence = log_gaussian_pdf(grid.offsets, 0.0, sigma) / LN10
        out[k] = (kde_log_pdf(evidence, num_kde)
                  - kde_log_pdf(evidence, den_kde)) / LN10
    return out


def _svm_suspect_fit(ctx: ReplicationContext, suspect, params):
    background = ctx.sample.tokens.ravel()
    model = svm_train(suspect.sample_tokens, background,
                      rbf_sd=params["rbf_sd"], cost=params["cost"])
    ss = svm_training_scores(model, suspect.sample_tokens, background)
    cal = calibration.fit_logistic(ss)
    if not cal.converged:
        raise MethodFailure("logistic calibration of SVM scores did not "
                            "converge")
    return model, ss, cal


def _eval_svm_logistic(ctx: ReplicationContext, params) -> np.ndarray:
    out = np.empty((len(ctx.suspects), ctx.grids[0].offsets.size))
    for k, (suspect, grid) in enumerate(zip(ctx.suspects, ctx.grids)):
        model, _, cal = _svm_suspect_fit(ctx, suspect, params)
        out[k] = cal.log10_lr(svm_score(model, grid.values))
    return out


_GLOBAL_CAL_METHODS = {"diff_gauss", "sim_kde", "st_kde", "st_logistic",
                       "st_gauss_eq", "st_gauss_sep", "st_pav", "diff_pav",
                       "sim_pav"}


def _evaluate_univariate(ctx: ReplicationContext, method: MethodConfig):
    mid = method.method_id
    if mid == "direct_pooled":
        return _eval_direct_pooled(ctx, method.params)
    if mid == "direct_separate":
        return _eval_direct_separate(ctx, method.params)
    if mid in _GLOBAL_CAL_METHODS:
        return _eval_global_calibrated(ctx, method)
    if mid == "anchored_sim_typ":
        return _eval_anchored_sim_typ(ctx, method.params)
    if mid == "suspect_anchored":
        return _eval_suspect_anchored(ctx, method.params)
    if mid == "svm_logistic":
        return _eval_svm_logistic(ctx, method.params)
    raise ValueError(f"unknown univariate method {mid!r}")


# ---------------------------------------------------------------------------
# multivariate contexts and evaluators


class MvReplicationContext:
    """Sample sets, token batches, and cached mixture fits for one replication.

    Same-origin training scores pair each first-set source with a fresh token
    batch from the same source; different-origin scores pair first-set source
    i with second-set source i, a one-to-one pairing over disjoint source
    sets, so each second-set source is used exactly once.
    """

    def __init__(self, pop: GmmPopulationSpec, base_seed: int,
                 replication: int, n_sample_sources: int = 100,
                 n_sample_tokens: int = 30,
                 em_reg: float = 0.001, em_starts: int = 4):
        self.pop = pop
        self.replication = replication
        self.seed = base_seed + replication
        self.em_reg = em_reg
        self.em_starts = em_starts
        self.first = draw_gmm_sample_set(pop, n_sample_sources,
                                         n_sample_tokens, self.seed,
                                         "mv_first")
        self.second_batch = draw_batch_for_sources(
            pop, self.first.source_indices, n_sample_tokens, self.seed,
            "mv_second_batch")
        self.second = draw_gmm_sample_set(pop, n_sample_sources,
                                          n_sample_tokens, self.seed,
                                          "mv_second",
                                          exclude=self.first.source_indices)
        self.suspect_tokens = [
            draw_source_tokens(s, n_sample_tokens,
                               stream_rng(self.seed, "mv_suspect", i))
            for i, s in enumerate(pop.suspects)]
        self.grids = np.stack([mv_offender_grid(s) for s in pop.suspects])
        self._cache: dict = {}

    def _fit(self, data, k, label) -> "object":
        return gmm_fit_em(data, k, regularization=self.em_reg,
                          n_starts=self.em_starts,
                          seed=derive_seed(self.seed, *label))

    def source_models(self, k: int):
        key = ("source_models", k)
        if key not in self._cache:
            self._cache[key] = [self._fit(tok, k, ("fit_source", int(i), k))
                                for i, tok in zip(self.first.source_indices,
                                                  self.first.tokens)]
        return self._cache[key]

    def pooled_model(self):
        key = "pooled_model"
        if key not in self._cache:
            flat = self.first.tokens.reshape(-1, self.pop.dims)
            k = self.pop.config.n_between_components
            self._cache[key] = self._fit(flat, k, ("fit_pooled", k))
        return self._cache[key]

    def suspect_models(self, k: int):
        key = ("suspect_models", k)
        if key not in self._cache:
            self._cache[key] = [self._fit(tok, k, ("fit_suspect", i, k))
                                for i, tok in enumerate(self.suspect_tokens)]
        return self._cache[key]

    def scoreset(self, score_type: str) -> ScoreSet:
        key = ("scores", score_type)
        if key in self._cache:
            return self._cache[key]
        n_src = self.first.n_sources
        if score_type == "mv_difference":
            so = np.concatenate([
                mv_difference_scores(self.second_batch[f], self.first.tokens[f])
                for f in range(n_src)])
            do = np.concatenate([
                mv_difference_scores(self.second.tokens[f], self.first.tokens[f])
                for f in range(n_src)])
            ss = ScoreSet(so, do, score_type)
        elif score_type == "mv_similarity":
            k = self.pop.config.n_within_components
            models = self.source_models(k)
            so = np.concatenate([
                mv_similarity_scores(self.second_batch[f], models[f])
                for f in range(n_src)])
            do = np.concatenate([
                mv_similarity_scores(self.second.tokens[f], models[f])
                for f in range(n_src)])
            ss = ScoreSet(so, do, score_type)
        elif score_type == "mv_st":
            k = self.pop.config.n_within_components
            models = self.source_models(k)
            pooled = self.pooled_model()
            so = np.concatenate([
                mv_st_scores(self.second_batch[f], models[f], pooled)
                for f in range(n_src)])
            do = np.concatenate([
                mv_st_scores(self.second.tokens[f], models[f], pooled)
                for f in range(n_src)])
            ss = ScoreSet(so, do, score_type)
        else:
            raise ValueError(f"unknown multivariate score type {score_type!r}")
        self._cache[key] = ss
        return ss


def _mv_direct_rows(ctx: MvReplicationContext, use_mixture: bool) -> np.ndarray:
    pop = ctx.pop
    n_sus, n_grid = ctx.grids.shape[:2]
    out = np.empty((n_sus, n_grid))
    if use_mixture:
        k = pop.config.n_within_components
        den_models = ctx.source_models(k)
        num_models = ctx.suspect_models(k)

        def num_log(s, X):
            return gmm_log_pdf(X, num_models[s])

        def den_log(X):
            per = np.stack([gmm_log_pdf(X, m) for m in den_models], axis=1)
            return logsumexp(per, axis=1) - np.log(len(den_models))
    else:
        def gauss_fit(tok):
            return tok.mean(axis=0), np.atleast_2d(np.cov(tok, rowvar=False,
                                                          ddof=1))

        fits = [gauss_fit(tok) for tok in ctx.first.tokens]

        def num_log(s, X):
            mean, cov = gauss_fit(ctx.suspect_tokens[s])
            return mvn_log_pdf(X, mean, cov)

        def den_log(X):
            per = np.stack([mvn_log_pdf(X, m, c) for m, c in fits], axis=1)
            return logsumexp(per, axis=1) - np.log(len(fits))

    for s in range(n_sus):
        X = ctx.grids[s]
        out[s] = (num_log(s, X) - den_log(X)) / LN10
    return out


def _mv_fit_global_calibrator(ctx: MvReplicationContext, method: MethodConfig):
    mid = method.method_id
    pop = ctx.pop
    k = pop.config.n_within_components
    if mid == "mv_diff_pav":
        base = ctx.scoreset("mv_difference")
        ss = ScoreSet(-base.same_origin, -base.different_origin,
                      "mv_difference")
        evidence = np.stack([
            -mv_difference_scores(ctx.grids[s], ctx.suspect_tokens[s])
            for s in range(len(pop.suspects))])
        return ss, evidence, calibration.fit_pav(ss)
    if mid == "mv_sim_pav":
        ss = ctx.scoreset("mv_similarity")
        models = ctx.suspect_models(k)
        evidence = np.stack([
            mv_similarity_scores(ctx.grids[s], models[s])
            for s in range(len(pop.suspects))])
        return ss, evidence, calibration.fit_pav(ss)
    if mid == "mv_st_pav":
        ss = ctx.scoreset("mv_st")
        models = ctx.suspect_models(k)
        pooled = ctx.pooled_model()
        evidence = np.stack([
            mv_st_scores(ctx.grids[s], models[s], pooled)
            for s in range(len(pop.suspects))])
        return ss, evidence, calibration.fit_pav(ss)
    raise ValueError(f"{mid} has no global calibrator")


def _evaluate_multivariate(ctx: MvReplicationContext, method: MethodConfig):
    mid = method.method_id
    if mid == "mv_direct_gauss":
        return _mv_direct_rows(ctx, use_mixture=False)
    if mid == "mv_direct_gmm":
        return _mv_direct_rows(ctx, use_mixture=True)
    _, evidence, cal = _mv_fit_global_calibrator(ctx, method)
    return cal.log10_lr(evidence)


# ---------------------------------------------------------------------------
# single-method execution and aggregation


@dataclass
class MethodResult:
    replication: int
    est: np.ndarray | None  # (n_suspects, n_grid) or None on failure
    rms: float
    status: str


@dataclass
class AggregateSummary:
    method_id: str
    n_reps: int
    n_failed: int
    rms_median: float
    rms_q1: float
    rms_q3: float
    rms_lo_whisker: float
    rms_hi_whisker: float
    rms_mean: float
    rms_sd: float
    percentile_curves: dict  # {5|50|95: (n_suspects, n_grid)}


def rms_error(est: np.ndarray, true: np.ndarray) -> float:
    return float(np.sqrt(np.mean((np.asarray(est) - np.asarray(true)) ** 2)))


def make_context(pop, base_seed: int, replication: int,
                 n_sample_sources: int = 100, n_sample_tokens: int = 30):
    if isinstance(pop, GmmPopulationSpec):
        return MvReplicationContext(pop, base_seed, replication,
                                    n_sample_sources, n_sample_tokens)
    return ReplicationContext(pop, base_seed, replication,
                              n_sample_sources, n_sample_tokens)


def true_suite_curves(pop) -> np.ndarray:
    """True log10 LR for every (suspect, offender) pair of the suite."""
    from .truth import true_log10_lr_curve, true_log10_lr_gmm
    if isinstance(pop, GmmPopulationSpec):
        return np.stack([
            true_log10_lr_gmm(mv_offender_grid(s), s, pop)
            for s in pop.suspects])
    return np.stack([
        true_log10_lr_curve(offender_grid(mu).values, mu, SUSPECT_SD, pop)
        for mu in SUSPECT_MEANS])


def run_method_once(pop, method: MethodConfig, base_seed: int,
                    replication: int, ctx=None, true_curves=None,
                    n_sample_sources: int = 100,
                    n_sample_tokens: int = 30) -> MethodResult:
    if isinstance(method, str):
        method = MethodConfig(method)
    if ctx is None:
        ctx = make_context(pop, base_seed, replication,
                           n_sample_sources, n_sample_tokens)
    if true_curves is None:
        true_curves = true_suite_curves(pop)
    try:
        if method.multivariate:
            est = _evaluate_multivariate(ctx, method)
        else:
            est = _evaluate_univariate(ctx, method)
        if not np.all(np.isfinite(est)):
            raise MethodFailure("non-finite estimates")
        return MethodResult(replication=replication, est=est,
                            rms=rms_error(est, true_curves), status="ok")
    except MethodFailure as exc:
        return MethodResult(replication=replication, est=None,
                            rms=float("nan"), status=f"failed: {exc}")


def aggregate_results(method_id: str, results) -> AggregateSummary:
    results = sorted(results, key=lambda r: r.replication)
    ok = [r for r in results if r.status == "ok"]
    if not ok:
        nan = float("nan")
        return AggregateSummary(
            method_id=method_id, n_reps=len(results), n_failed=len(results),
            rms_median=nan, rms_q1=nan, rms_q3=nan, rms_lo_whisker=nan,
            rms_hi_whisker=nan, rms_mean=nan, rms_sd=nan,
            percentile_curves=None)
    rms = np.array([r.rms for r in ok])
    q1, med, q3 = np.percentile(rms, [25, 50, 75])
    iqr = q3 - q1
    in_lo = rms[rms >= q1 - 1.5 * iqr]
    in_hi = rms[rms <= q3 + 1.5 * iqr]
    est = np.stack([r.est for r in ok])
    pct = np.percentile(est, [5, 50, 95], axis=0)
    return AggregateSummary(
        method_id=method_id,
        n_reps=len(results),
        n_failed=len(results) - len(ok),
        rms_median=float(med), rms_q1=float(q1), rms_q3=float(q3),
        rms_lo_whisker=float(in_lo.min()), rms_hi_whisker=float(in_hi.max()),
        rms_mean=float(rms.mean()),
        rms_sd=float(rms.std(ddof=1)) if rms.size > 1 else 0.0,
        percentile_curves={5: pct[0], 50: pct[1], 95: pct[2]})


# ---------------------------------------------------------------------------
# suites


@dataclass
class SuiteResult:
    suite: str
    methods: list[MethodConfig]
    n_reps: int
    base_seed: int
    n_sample_sources: int
    n_sample_tokens: int
    suspect_labels: np.ndarray   # (n_suspects,) mean or index per suspect
    offender_labels: np.ndarray  # (n_suspects, n_grid) value or index
    true_curves: np.ndarray      # (n_suspects, n_grid)
    results: dict
    summaries: dict


def _suite_labels(pop):
    if isinstance(pop, GmmPopulationSpec):
        n_sus = len(pop.suspects)
        n_grid = mv_offender_grid(pop.suspects[0]).shape[0]
        sus = np.arange(n_sus, dtype=float)
        off = np.tile(np.arange(n_grid, dtype=float), (n_sus, 1))
        return sus, off
    sus = np.array(SUSPECT_MEANS, dtype=float)
    off = np.stack([offender_grid(mu).values for mu in SUSPECT_MEANS])
    return sus, off


def run_suite(pop, methods, n_reps: int, base_seed: int,
              n_sample_sources: int = 100, n_sample_tokens: int = 30,
              suite: str = "custom", progress=None) -> SuiteResult:
    methods = as_method_configs(methods)
    mv_flags = {m.multivariate for m in methods}
    if len(mv_flags) > 1:
        raise ValueError("cannot mix univariate and multivariate methods "
                         "in one suite")
    if mv_flags.pop() != isinstance(pop, GmmPopulationSpec):
        raise ValueError("method family does not match population kind")
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")

    true_curves = true_suite_curves(pop)
    results: dict[str, list[MethodResult]] = {m.method_id: [] for m in methods}
    for r in range(n_reps):
        ctx = make_context(pop, base_seed, r, n_sample_sources,
                           n_sample_tokens)
        for m in methods:
            res = run_method_once(pop, m, base_seed, r, ctx=ctx,
                                  true_curves=true_curves)
            results[m.method_id].append(res)
        if progress is not None:
            progress(r + 1, n_reps)

    summaries = {mid: aggregate_results(mid, res)
                 for mid, res in results.items()}
    sus, off = _suite_labels(pop)
    return SuiteResult(suite=suite, methods=methods, n_reps=n_reps,
                       base_seed=base_seed,
                       n_sample_sources=n_sample_sources,
                       n_sample_tokens=n_sample_tokens, suspect_labels=sus,
                       offender_labels=off, true_curves=true_curves,
                       results=results, summaries=summaries)


def run_fig_suite(pop, n_reps: int = 100, base_seed: int = 0,
                  **kw) -> SuiteResult:
    """Main univariate benchmark: all twelve headline methods."""
    return run_suite(pop, FIG3_METHODS, n_reps, base_seed,
                     suite="fig3", **kw)


def run_pav_family_suite(pop, n_reps: int = 100, base_seed: int = 0,
                         **kw) -> SuiteResult:
    """PAV calibration applied to all three score families."""
    return run_suite(pop, PAV_FAMILY_METHODS, n_reps, base_seed,
                     suite="fig17", **kw)


def run_appendix_a(pop: GmmPopulationSpec, n_reps: int = 100,
                   base_seed: int = 0, methods=None, **kw) -> SuiteResult:
    """Multivariate mixture benchmark."""
    if methods is None:
        methods = MV_METHODS
    return run_suite(pop, methods, n_reps, base_seed,
                     suite="appendix_a", **kw)


# ---------------------------------------------------------------------------
# per-method details for score/mapping exports


def method_details(pop, method, base_seed: int, replication: int = 0,
                   ctx=None, n_sample_sources: int = 100,
                   n_sample_tokens: int = 30, mapping_points: int = 201):
    """Training scores and fitted mapping for one method on one replication.

    Returns a dict with "scoreset" (or None for methods without one global
    score set) and, when a single fitted score-to-LR mapping exists,
    "mapping_scores"/"mapping_log10_lrs" spanning the training score range.
    For the SVM method the first suspect's machine is reported as
    representative, since its calibrator is per-suspect.
    """
    if isinstance(method, str):
        method = MethodConfig(method)
    if ctx is None:
        ctx = make_context(pop, base_seed, replication,
                           n_sample_sources, n_sample_tokens)
    out = {"scoreset": None, "mapping_scores": None, "mapping_log10_lrs": None}
    mid = method.method_id

    if mid in _GLOBAL_CAL_METHODS:
        ss, _, cal = _fit_global_calibrator(ctx, method)
    elif mid in ("mv_diff_pav", "mv_sim_pav", "mv_st_pav"):
        ss, _, cal = _mv_fit_global_calibrator(ctx, method)
    elif mid == "svm_logistic":
        _, ss, cal = _svm_suspect_fit(ctx, ctx.suspects[0], method.params)
    else:
        return out

    lo = min(ss.same_origin.min(), ss.different_origin.min())
    hi = max(ss.same_origin.max(), ss.different_origin.max())
    grid = np.linspace(lo, hi, mapping_points)
    out["scoreset"] = ss
    out["mapping_scores"] = grid
    out["mapping_log10_lrs"] = cal.log10_lr(grid)
    return out
