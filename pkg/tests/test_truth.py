"""True-LR computation against hand-built and analytic oracles."""

import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy import stats

from lrbench.population import SourceParams, UnivariateGenConfig, UnivariatePopulationSpec
from lrbench.truth import true_log10_lr, true_log10_lr_curve, true_log10_lr_gmm


def tiny_pop():
    config = UnivariateGenConfig(n_sources=2, seed=0)
    return UnivariatePopulationSpec(config=config,
                                    sources=[SourceParams(0.0, 1.0),
                                             SourceParams(3.0, 2.0)])


def test_two_source_oracle():
    pop = tiny_pop()
    x = 1.0
    num = stats.norm.pdf(x, 0.0, 1.0)
    den = 0.5 * (stats.norm.pdf(x, 0.0, 1.0) + stats.norm.pdf(x, 3.0, 2.0))
    expected = math.log10(num / den)
    assert true_log10_lr(x, 0.0, 1.0, pop) == pytest.approx(expected, abs=1e-12)


def test_vector_matches_scalar():
    pop = tiny_pop()
    xs = np.array([-1.0, 0.0, 0.5, 2.0])
    curve = true_log10_lr_curve(xs, 0.0, 1.0, pop)
    assert curve.shape == (4,)
    for x, v in zip(xs, curve):
        assert true_log10_lr(float(x), 0.0, 1.0, pop) == pytest.approx(v, abs=1e-14)


def test_extreme_tail_stays_finite():
    pop = tiny_pop()
    v = true_log10_lr(60.0, 0.0, 1.0, pop)
    assert np.isfinite(v)


def test_full_population_near_analytic_value(pop):
    # with the population marginal close to N(0, sqrt(5)), the LR for a
    # centred unit-SD suspect at x = 0 is near sqrt(5) in density ratio
    v = true_log10_lr(0.0, 0.0, 1.0, pop)
    assert v == pytest.approx(math.log10(math.sqrt(5.0)), abs=0.08)


def test_centered_suspect_curve_symmetric(pop):
    xs = np.arange(-2.0, 2.01, 0.1)
    curve = true_log10_lr_curve(xs, 0.0, 1.0, pop)
    assert np.max(np.abs(curve - curve[::-1])) < 0.05


def test_offcenter_suspect_curve_asymmetric(pop):
    # analytic asymmetry for suspect mean 2: about +0.695 between x=4 and x=0
    gap = true_log10_lr(4.0, 2.0, 1.0, pop) - true_log10_lr(0.0, 2.0, 1.0, pop)
    assert gap == pytest.approx(0.695, abs=0.15)


def test_gmm_truth_against_brute_force(small_gmm_pop):
    sus = small_gmm_pop.suspects[1]
    x = sus.means.mean(axis=0) + 0.3

    def mix_pdf(src):
        k = src.means.shape[0]
        return sum(stats.multivariate_normal.pdf(x, src.means[c], src.covs[c])
                   for c in range(k)) / k

    num = mix_pdf(sus)
    den = np.mean([mix_pdf(s) for s in small_gmm_pop.sources])
    expected = math.log10(num / den)
    assert true_log10_lr_gmm(x, sus, small_gmm_pop) == pytest.approx(expected, abs=1e-10)


def test_gmm_truth_batch_shape(small_gmm_pop):
    sus = small_gmm_pop.suspects[0]
    X = np.stack([sus.means[0], sus.means[1], sus.means.mean(axis=0)])
    out = true_log10_lr_gmm(X, sus, small_gmm_pop)
    assert out.shape == (3,)
    assert np.all(np.isfinite(out))
    one = true_log10_lr_gmm(X[2], sus, small_gmm_pop)
    assert one == pytest.approx(out[2], abs=1e-12)
