"""Population generation, sample sets, suspects, offender grids."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from lrbench.population import (
    GmmPopulationSpec,
    MultivariateGenConfig,
    SampleSet,
    UnivariateGenConfig,
    UnivariatePopulationSpec,
    build_gmm_population,
    build_univariate_population,
    draw_batch_for_sources,
    draw_gmm_sample_set,
    draw_sample_set,
    draw_source_tokens,
    draw_suspect,
    load_population,
    mv_offender_grid,
    offender_grid,
    pooled_sd_of,
    save_population,
)
from lrbench.rng import stream_rng

POP_SEED = 20240701  # must match conftest.pop


def c4(n: int) -> float:
    # expected value of the unbiased-variance SD estimator for unit-SD data
    return math.sqrt(2.0 / (n - 1)) * math.gamma(n / 2) / math.gamma((n - 1) / 2)


# ---------------------------------------------------------------------------
# univariate population


def test_build_univariate_is_deterministic(pop):
    again = build_univariate_population(UnivariateGenConfig(seed=POP_SEED))
    npt.assert_array_equal(pop.means, again.means)
    npt.assert_array_equal(pop.sds, again.sds)


def test_different_seeds_differ():
    a = build_univariate_population(UnivariateGenConfig(n_sources=50, seed=1))
    b = build_univariate_population(UnivariateGenConfig(n_sources=50, seed=2))
    assert not np.allclose(a.means, b.means)


def test_population_shape_and_positivity(pop):
    assert pop.n_sources == 1000
    assert pop.means.shape == (1000,)
    assert np.all(pop.sds > 0)


def test_saved_means_spread(pop):
    # saved means are 10-token sample means of sources with means ~ N(0, 2),
    # so their SD is sqrt(2^2 + 1/10)
    expected = math.sqrt(4.0 + 1.0 / 10.0)
    assert abs(np.std(pop.means, ddof=1) - expected) < 0.15
    assert abs(np.mean(pop.means)) < 0.2


def test_saved_sds_center(pop):
    # unbiased-SD estimates from 10 unit-SD tokens average c4(10), not 1
    assert abs(np.mean(pop.sds) - c4(10)) < 0.03


@pytest.mark.parametrize("bad", [
    dict(n_sources=0),
    dict(tokens_per_source_init=1),
    dict(between_sd=0.0),
    dict(within_sd=-1.0),
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        build_univariate_population(UnivariateGenConfig(**bad))


def test_univariate_json_round_trip(pop):
    back = UnivariatePopulationSpec.from_json(pop.to_json())
    assert back.config == pop.config
    npt.assert_array_equal(back.means, pop.means)
    npt.assert_array_equal(back.sds, pop.sds)


def test_from_json_rejects_wrong_kind(small_gmm_pop):
    with pytest.raises(ValueError):
        UnivariatePopulationSpec.from_json(small_gmm_pop.to_json())


def test_population_file_round_trip(pop, small_gmm_pop, tmp_path):
    p = tmp_path / "uni.json"
    save_population(pop, p)
    loaded = load_population(p)
    npt.assert_array_equal(loaded.means, pop.means)

    g = tmp_path / "gmm.json"
    save_population(small_gmm_pop, g)
    loaded = load_population(g)
    assert isinstance(loaded, GmmPopulationSpec)
    npt.assert_array_equal(loaded.sources[0].means, small_gmm_pop.sources[0].means)


# ---------------------------------------------------------------------------
# pooled SD


def test_pooled_sd_hand_computed():
    tokens = np.array([[1.0, 2.0, 3.0],
                       [4.0, 6.0, 8.0]])
    # per-source unbiased variances are 1 and 4
    assert pooled_sd_of(tokens) == pytest.approx(math.sqrt(2.5), abs=1e-15)


def test_pooled_sd_rejects_bad_shapes():
    with pytest.raises(ValueError):
        pooled_sd_of(np.ones(5))
    with pytest.raises(ValueError):
        pooled_sd_of(np.ones((4, 1)))


def test_sample_set_from_tokens_matches_pooled_sd(rng):
    tokens = rng.normal(0.0, 1.0, (8, 5))
    s = SampleSet.from_tokens(tokens)
    assert s.pooled_sd == pooled_sd_of(tokens)
    npt.assert_allclose(s.means, tokens.mean(axis=1))
    npt.assert_allclose(s.sds, tokens.std(axis=1, ddof=1))


# ---------------------------------------------------------------------------
# sample sets


def test_draw_sample_set_shapes(pop):
    s = draw_sample_set(pop, 100, 30, seed=5)
    assert s.tokens.shape == (100, 30)
    assert s.source_indices.shape == (100,)
    assert len(np.unique(s.source_indices)) == 100  # without replacement


def test_draw_sample_set_deterministic(pop):
    a = draw_sample_set(pop, 100, 30, seed=5)
    b = draw_sample_set(pop, 100, 30, seed=5)
    npt.assert_array_equal(a.tokens, b.tokens)
    npt.assert_array_equal(a.source_indices, b.source_indices)
    assert not np.array_equal(a.tokens, draw_sample_set(pop, 100, 30, seed=6).tokens)


def test_sample_tokens_track_saved_sources(pop):
    s = draw_sample_set(pop, 100, 30, seed=5)
    saved_means = pop.means[s.source_indices]
    saved_sds = pop.sds[s.source_indices]
    z = (s.means - saved_means) / (saved_sds / math.sqrt(30))
    assert np.max(np.abs(z)) < 5.0
    # pooled variance estimates the mean saved variance of the chosen sources
    assert abs(s.pooled_sd ** 2 - np.mean(saved_sds ** 2)) < 0.1


def test_draw_sample_set_limits(pop):
    with pytest.raises(ValueError):
        draw_sample_set(pop, pop.n_sources + 1, 30, seed=0)
    with pytest.raises(ValueError):
        draw_sample_set(pop, 10, 1, seed=0)


# ---------------------------------------------------------------------------
# suspects and offender grids


def test_draw_suspect_deterministic_streams():
    a = draw_suspect(2.0, 1.0, seed=9, label=0)
    b = draw_suspect(2.0, 1.0, seed=9, label=0)
    npt.assert_array_equal(a.sample_tokens, b.sample_tokens)
    npt.assert_array_equal(a.control_tokens, b.control_tokens)
    # sample and control are independent draws, not copies
    assert not np.array_equal(a.sample_tokens, a.control_tokens)
    assert not np.array_equal(a.sample_tokens,
                              draw_suspect(2.0, 1.0, seed=9, label=1).sample_tokens)


def test_draw_suspect_token_counts_and_stats():
    s = draw_suspect(0.0, 1.0, seed=3, label="x", n_sample_tokens=30,
                     n_control_tokens=30)
    assert s.sample_tokens.shape == (30,)
    assert s.control_tokens.shape == (30,)
    assert abs(s.sample_tokens.mean()) < 5.0 / math.sqrt(30)


def test_draw_suspect_rejects_bad_sd():
    with pytest.raises(ValueError):
        draw_suspect(0.0, 0.0, seed=1, label=0)


def test_offender_grid_geometry():
    g = offender_grid(2.0)
    assert g.offsets.shape == (41,)
    assert g.values.shape == (41,)
    npt.assert_allclose(np.diff(g.offsets), 0.1, atol=1e-12)
    assert g.offsets[0] == -2.0 and g.offsets[-1] == 2.0
    assert g.offsets[20] == 0.0
    assert g.values[20] == 2.0


def test_offender_grid_offsets_exactly_antisymmetric():
    g = offender_grid(0.0)
    # bitwise mirror symmetry, not merely approximate
    assert np.array_equal(g.offsets, -g.offsets[::-1])


# ---------------------------------------------------------------------------
# mixture populations


def test_gmm_population_counts(small_gmm_pop):
    cfg = small_gmm_pop.config
    assert small_gmm_pop.n_sources == cfg.n_between_components * cfg.sources_per_between_component
    assert len(small_gmm_pop.suspects) == cfg.n_between_components * cfg.suspects_per_between_component
    assert small_gmm_pop.between_means.shape == (2, 2)
    assert small_gmm_pop.between_covs.shape == (2, 2, 2)
    assert small_gmm_pop.within_offsets.shape == (3, 2)


def test_gmm_within_offsets_separated(small_gmm_pop):
    from scipy.spatial.distance import pdist

    cfg = small_gmm_pop.config
    assert pdist(small_gmm_pop.within_offsets).min() >= cfg.min_within_separation
    assert np.all(np.abs(small_gmm_pop.within_offsets) <= cfg.within_range)


def test_gmm_sources_have_valid_covariances(small_gmm_pop):
    for src in small_gmm_pop.sources[:25]:
        assert src.means.shape == (3, 2)
        assert src.covs.shape == (3, 2, 2)
        npt.assert_allclose(src.covs, np.swapaxes(src.covs, 1, 2), atol=1e-12)
        for c in src.covs:
            assert np.linalg.eigvalsh(c).min() > 0


def test_gmm_build_deterministic(small_gmm_pop):
    again = build_gmm_population(small_gmm_pop.config)
    npt.assert_array_equal(again.sources[7].means, small_gmm_pop.sources[7].means)
    npt.assert_array_equal(again.suspects[1].covs, small_gmm_pop.suspects[1].covs)


def test_gmm_json_round_trip(small_gmm_pop):
    back = GmmPopulationSpec.from_json(small_gmm_pop.to_json())
    assert back.config == small_gmm_pop.config
    npt.assert_array_equal(back.within_offsets, small_gmm_pop.within_offsets)
    npt.assert_array_equal(back.sources[3].covs, small_gmm_pop.sources[3].covs)
    npt.assert_array_equal(back.suspects[0].means, small_gmm_pop.suspects[0].means)


def test_draw_source_tokens_stats(small_gmm_pop):
    src = small_gmm_pop.sources[0]
    tokens = draw_source_tokens(src, 6000, stream_rng(77, "t"))
    assert tokens.shape == (6000, 2)
    # equal-weight mixture mean
    npt.assert_allclose(tokens.mean(axis=0), src.means.mean(axis=0), atol=0.15)


def test_draw_gmm_sample_set_disjoint(small_gmm_pop):
    first = draw_gmm_sample_set(small_gmm_pop, 50, 12, seed=8, label="a")
    second = draw_gmm_sample_set(small_gmm_pop, 50, 12, seed=8, label="b",
                                 exclude=first.source_indices)
    assert first.tokens.shape == (50, 12, 2)
    assert len(np.unique(first.source_indices)) == 50
    assert not set(first.source_indices) & set(second.source_indices)
    with pytest.raises(ValueError):
        draw_gmm_sample_set(small_gmm_pop, 120, 5, seed=1,
                            exclude=first.source_indices)


def test_draw_batch_matches_indices(small_gmm_pop):
    idx = np.array([4, 9, 2])
    batch = draw_batch_for_sources(small_gmm_pop, idx, 10, seed=3)
    assert batch.shape == (3, 10, 2)
    again = draw_batch_for_sources(small_gmm_pop, idx, 10, seed=3)
    npt.assert_array_equal(batch, again)


def test_mv_offender_grid_spans_occupied_region(small_gmm_pop):
    sus = small_gmm_pop.suspects[0]
    grid = mv_offender_grid(sus)
    assert grid.shape == (12, 2)
    sds = np.sqrt(np.diagonal(sus.covs, axis1=1, axis2=2))
    lo = (sus.means - sds).min(axis=0)
    hi = (sus.means + sds).max(axis=0)
    npt.assert_allclose(grid[0], lo, atol=1e-12)
    npt.assert_allclose(grid[-1], hi, atol=1e-12)
    # straight line: second differences vanish
    npt.assert_allclose(np.diff(grid, n=2, axis=0), 0.0, atol=1e-9)
