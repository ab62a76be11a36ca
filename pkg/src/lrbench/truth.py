"""Ground-truth log likelihood ratios computed from saved population specs.

The population's saved parameters are, by construction, the true model, so
the true LR for an offender value is the suspect source's density over the
equal-weight average density across all saved sources.  Results are base-10
logs; all accumulation is in natural-log domain.
"""

import numpy as np
from scipy.special import logsumexp

from .density import LN10, gmm_log_pdf, log_gaussian_pdf
from .population import GmmPopulationSpec, SourceGmm, UnivariatePopulationSpec


def true_log10_lr(x_q, suspect_mean: float, suspect_sd: float,
                  pop: UnivariatePopulationSpec):
    """True base-10 log LR at offender value(s) x_q for a known suspect."""
    x = np.asarray(x_q, dtype=float)
    scalar = x.ndim == 0
    xf = np.atleast_1d(x).astype(float)
    num = log_gaussian_pdf(xf, suspect_mean, suspect_sd)
    per_source = log_gaussian_pdf(xf[:, None], pop.means[None, :], pop.sds[None, :])
    den = logsumexp(per_source, axis=1) - np.log(pop.n_sources)
    out = (num - den) / LN10
    return float(out[0]) if scalar else out


def true_log10_lr_curve(grid_values, suspect_mean: float, suspect_sd: float,
                        pop: UnivariatePopulationSpec) -> np.ndarray:
    return true_log10_lr(np.asarray(grid_values, dtype=float),
                         suspect_mean, suspect_sd, pop)


def true_log10_lr_gmm(x_q, suspect: SourceGmm, pop: GmmPopulationSpec):
    """True base-10 log LR for a mixture population.

    Numerator: the suspect's equal-weight mixture density.  Denominator:
    sources weighted equally, components weighted equally within each source.
    """
    X = np.atleast_2d(np.asarray(x_q, dtype=float))
    single = np.asarray(x_q).ndim == 1

    num = gmm_log_pdf(X, _equal_weight_model(suspect))

    per_source = np.empty((X.shape[0], pop.n_sources))
    for j, src in enumerate(pop.sources):
        per_source[:, j] = gmm_log_pdf(X, _equal_weight_model(src))
    den = logsumexp(per_source, axis=1) - np.log(pop.n_sources)

    out = (num - den) / LN10
    return float(out[0]) if single else out


def _equal_weight_model(source: SourceGmm):
    """Evaluation model for a saved source, cached on the source itself."""
    model = getattr(source, "_eval_model", None)
    if model is None:
        from .density import GmmModel
        k = source.n_components
        model = GmmModel(weights=np.full(k, 1.0 / k),
                         means=source.means, covs=source.covs)
        source._eval_model = model
    return model
