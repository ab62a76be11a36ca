"""Benchmark of forensic likelihood-ratio methods on synthetic populations.

Populations with known source parameters are generated, true base-10 log
likelihood ratios are computed from those parameters, and score-based and
direct LR estimation methods are compared against the truth with a
replicated RMS-error harness.
"""

__version__ = "0.1.0"

from .population import (  # noqa: F401
    GmmPopulationSpec, MultivariateGenConfig, OffenderGrid, SampleSet,
    SourceGmm, SourceParams, SuspectSpec, UnivariateGenConfig,
    UnivariatePopulationSpec, build_gmm_population,
    build_univariate_population, draw_sample_set, draw_suspect,
    load_population, offender_grid, pooled_sd_of, save_population)
from .truth import true_log10_lr, true_log10_lr_curve, true_log10_lr_gmm  # noqa: F401
from .experiment import (  # noqa: F401
    FIG3_METHODS, MV_METHODS, PAV_FAMILY_METHODS, MethodConfig,
    MethodResult, SuiteResult, list_method_ids, run_appendix_a,
    run_fig_suite, run_method_once, run_pav_family_suite, run_suite)
