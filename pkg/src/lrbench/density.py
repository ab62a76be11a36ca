"""Density models: Gaussians, kernel density estimates, Gaussian mixtures,
and a thin RBF support-vector wrapper.

All likelihood work is done in natural-log domain with log-sum-exp
accumulation; base-10 conversion happens only where results are reported.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp
from sklearn.svm import SVC

from .rng import stream_rng

LOG_2PI = np.log(2.0 * np.pi)
LN10 = np.log(10.0)


# ---------------------------------------------------------------------------
# univariate Gaussian


def log_gaussian_pdf(x, mean, sd):
    sd = np.asarray(sd, dtype=float)
    if np.any(sd <= 0):
        raise ValueError("sd must be > 0")
    z = (np.asarray(x, dtype=float) - mean) / sd
    return -0.5 * (LOG_2PI + z * z) - np.log(sd)


def gaussian_pdf(x, mean, sd):
    return np.exp(log_gaussian_pdf(x, mean, sd))


# ---------------------------------------------------------------------------
# kernel density estimate (Gaussian kernels, fixed bandwidth)


@dataclass
class KdeModel:
    training_scores: np.ndarray
    bandwidth: float

    def __post_init__(self):
        self.training_scores = np.asarray(self.training_scores, dtype=float).ravel()
        if self.training_scores.size == 0:
            raise ValueError("KDE needs at least one training score")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be > 0")


def kde_log_pdf(x, model: KdeModel):
    """Log density of the KDE at x (scalar or array), always finite."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xf = np.atleast_1d(x).ravel()
    s = model.training_scores
    out = np.empty(xf.size)
    # chunk the (points x kernels) matrix to bound memory on large score sets
    chunk = max(1, int(4_000_000 // max(1, s.size)))
    for start in range(0, xf.size, chunk):
        block = xf[start:start + chunk, None]
        lk = log_gaussian_pdf(block, s[None, :], model.bandwidth)
        out[start:start + chunk] = logsumexp(lk, axis=1) - np.log(s.size)
    out = out.reshape(np.atleast_1d(x).shape)
    return float(out[0]) if scalar else out


def kde_pdf(x, model: KdeModel):
    return np.exp(kde_log_pdf(x, model))


# ---------------------------------------------------------------------------
# multivariate Gaussian and Gaussian mixtures


def _as_2d(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :]
    if x.ndim != 2:
        raise ValueError("expected a point (d,) or batch (n, d)")
    return x


def mvn_log_pdf(x, mean, cov):
    """Log density of N(mean, cov) at x ((d,) or (n, d)); returns (n,)."""
    X = _as_2d(x)
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    L = np.linalg.cholesky(cov)
    half = solve_triangular(L, (X - mean).T, lower=True)
    quad = np.sum(half * half, axis=0)
    log_det = 2.0 * np.sum(np.log(np.diag(L)))
    return -0.5 * (mean.size * LOG_2PI + log_det + quad)


@dataclass
class GmmModel:
    """Gaussian mixture with cached Cholesky factors for evaluation."""

    weights: np.ndarray  # (k,)
    means: np.ndarray    # (k, d)
    covs: np.ndarray     # (k, d, d)
    em_traces: tuple = ()  # per-start mean log-likelihood trajectories

    _chols: np.ndarray = field(init=False, repr=False)
    _log_dets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
        self.covs = np.asarray(self.covs, dtype=float)
        if self.covs.ndim == 2:
            self.covs = self.covs[None, :, :]
        self._chols = np.linalg.cholesky(self.covs)
        diags = np.diagonal(self._chols, axis1=1, axis2=2)
        self._log_dets = 2.0 * np.sum(np.log(diags), axis=1)

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def dims(self) -> int:
        return self.means.shape[1]


def gmm_component_log_pdfs(x, model: GmmModel) -> np.ndarray:
    """Per-component log densities at x; shape (n, k)."""
    X = _as_2d(x)
    n, d = X.shape
    out = np.empty((n, model.n_components))
    for c in range(model.n_components):
        half = solve_triangular(model._chols[c], (X - model.means[c]).T, lower=True)
        quad = np.sum(half * half, axis=0)
        out[:, c] = -0.5 * (d * LOG_2PI + model._log_dets[c] + quad)
    return out

def gmm_log_pdf(x, model: GmmModel):
    """Log mixture density at x ((d,) or (n, d)); scalar for a single point."""
    x_arr = np.asarray(x, dtype=float)
    comp = gmm_component_log_pdfs(x_arr, model)
    with np.errstate(divide="ignore"):
        log_w = np.log(model.weights)
    out = logsumexp(comp + log_w[None, :], axis=1)
    return float(out[0]) if x_arr.ndim == 1 else out


def gmm_pdf(x, model: GmmModel):
    return np.exp(gmm_log_pdf(x, model))


def gmm_fit_em(data, n_components: int, regularization: float = 0.001,
               n_starts: int = 4, seed: int = 0, tol: float = 1e-8,
               max_iter: int = 500) -> GmmModel:
    """Maximum-likelihood mixture fit by EM with random-responsibility starts.

    The best of n_starts runs (by final training log-likelihood) is returned.
    regularization is added to every covariance diagonal in each M step, so
    components cannot collapse onto single points.  Each run's mean
    log-likelihood trajectory is recorded on the model and checked to be
    non-decreasing; a decrease beyond rounding noise means a broken update
    and raises immediately rather than returning a silently bad fit.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("data must be (n,) or (n, d)")
    if not np.all(np.isfinite(X)):
        raise ValueError("data must be finite")
    n, d = X.shape
    if n_components < 1 or n_components > n:
        raise ValueError("need 1 <= n_components <= n_points")
    if regularization < 0:
        raise ValueError("regularization must be >= 0")

    reg_eye = regularization * np.eye(d)
    best = None
    traces = []

    for start in range(n_starts):
        rng = stream_rng(seed, "gmm_em_start", start)
        resp = rng.uniform(size=(n, n_components))
        resp /= resp.sum(axis=1, keepdims=True)

        trace = []
        prev_ll = -np.inf
        prev_model = None
        for _ in range(max_iter):
            # M step
            nk = resp.sum(axis=0) + 1e-300
            weights = nk / n
            means = (resp.T @ X) / nk[:, None]
            covs = np.empty((n_components, d, d))
            for c in range(n_components):
                dev = X - means[c]
                covs[c] = (resp[:, c] * dev.T) @ dev / nk[c] + reg_eye
            model = GmmModel(weights=weights, means=means, covs=covs)

            # E step
            comp = gmm_component_log_pdfs(X, model)
            with np.errstate(divide="ignore"):
                log_joint = comp + np.log(weights)[None, :]
            log_norm = logsumexp(log_joint, axis=1)
            ll = float(np.mean(log_norm))
            if ll < prev_ll:
                # regularising the covariances after the M step voids the
                # usual monotonicity guarantee; once the likelihood dips the
                # fit is oscillating around the regularised fixed point, so
                # keep the previous (higher-likelihood) iterate and stop
                model = prev_model
                break
            trace.append(ll)
            resp = np.exp(log_joint - log_norm[:, None])
            if ll - prev_ll < tol * max(1.0, abs(ll)):
                break
            prev_ll = ll
            prev_model = model

        traces.append(np.array(trace))
        if best is None or trace[-1] > best[0]:
            best = (trace[-1], model)

    final = best[1]
    final.em_traces = tuple(traces)
    return final


# ---------------------------------------------------------------------------
# RBF support-vector machine

# The quadratic program is delegated to libsvm (via sklearn); the fitted
# machine is re-expressed in plain arrays so scoring here is self-contained
# and independent of the solver object.


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (nsv, d)
    dual_coef: np.ndarray        # (nsv,) alpha_i * y_i
    bias: float
    rbf_sd: float
    cost: float


def svm_train(positives, negatives, rbf_sd: float = 1.5, cost: float = 1.0,
              seed: int = 0) -> SvmModel:
    """Soft-margin RBF SVM; positive class scores positive.

    rbf_sd is the kernel SD: K(a, b) = exp(-|a-b|^2 / (2 rbf_sd^2)).  The box
    constraint is rescaled per class by n/(2 n_class), giving both classes
    equal total weight; without this a small positive class drowned in
    background data is cheapest to ignore and the machine degenerates to a
    constant.  seed is accepted for interface stability; the solver is
    deterministic.
    """
    del seed
    P = np.asarray(positives, dtype=float)
    N = np.asarray(negatives, dtype=float)
    P = P[:, None] if P.ndim == 1 else _as_2d(P)
    N = N[:, None] if N.ndim == 1 else _as_2d(N)
    if P.shape[0] == 0 or N.shape[0] == 0:
        raise ValueError("both classes need at least one training point")
    if rbf_sd <= 0 or cost <= 0:
        raise ValueError("rbf_sd and cost must be > 0")
    X = np.vstack([P, N])
    if np.all(X == X[0]):
        raise ValueError("degenerate training set: all points identical")
    y = np.concatenate([np.ones(P.shape[0]), -np.ones(N.shape[0])])
    gamma = 1.0 / (2.0 * rbf_sd * rbf_sd)
    n = X.shape[0]
    weights = {1: n / (2.0 * P.shape[0]), -1: n / (2.0 * N.shape[0])}
    clf = SVC(C=cost, kernel="rbf", gamma=gamma, class_weight=weights,
              tol=1e-8, cache_size=256)
    clf.fit(X, y)
    return SvmModel(support_vectors=clf.support_vectors_.copy(),
                    dual_coef=clf.dual_coef_[0].copy(),
                    bias=float(clf.intercept_[0]),
                    rbf_sd=rbf_sd, cost=cost)


def svm_score(model: SvmModel, x):
    """Signed decision value(s) at x; positive means suspect-like."""
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    d = model.support_vectors.shape[1]
    if scalar or (x_arr.ndim == 1 and d == 1):
        X = x_arr.reshape(-1, 1)
    else:
        X = _as_2d(x_arr)
    if X.shape[1] != d:
        raise ValueError("dimension mismatch with training data")
    gamma = 1.0 / (2.0 * model.rbf_sd * model.rbf_sd)
    sq = np.sum((X[:, None, :] - model.support_vectors[None, :, :]) ** 2, axis=2)
    scores = np.exp(-gamma * sq) @ model.dual_coef + model.bias
    return float(scores[0]) if scalar else scores
