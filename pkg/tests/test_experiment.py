"""Replication harness: method registry, contexts, aggregation, suites."""

import numpy as np
import numpy.testing as npt
import pytest

from lrbench import calibration
from lrbench.experiment import (
    FIG3_METHODS,
    MV_METHODS,
    MethodConfig,
    MethodResult,
    PAV_FAMILY_METHODS,
    ReplicationContext,
    aggregate_results,
    as_method_configs,
    list_method_ids,
    make_context,
    method_details,
    rms_error,
    run_method_once,
    run_suite,
    true_suite_curves,
)


# ---------------------------------------------------------------------------
# registry and config


def test_method_registry_covers_suites():
    ids = set(list_method_ids())
    assert set(FIG3_METHODS) <= ids
    assert set(PAV_FAMILY_METHODS) <= ids
    assert set(MV_METHODS) <= ids
    assert len(FIG3_METHODS) == 12


def test_method_config_defaults_and_overrides():
    m = MethodConfig("sim_kde")
    assert m.params == {"bandwidth": 0.02}
    m = MethodConfig("sim_kde", {"bandwidth": 0.5})
    assert m.params == {"bandwidth": 0.5}
    assert not m.multivariate
    assert MethodConfig("mv_st_pav").multivariate


def test_method_config_rejects_unknown():
    with pytest.raises(ValueError):
        MethodConfig("no_such_method")
    with pytest.raises(ValueError):
        MethodConfig("st_kde", {"bandwith": 0.2})  # typo must not pass silently


def test_as_method_configs_forms():
    out = as_method_configs(["st_pav",
                             {"id": "sim_kde", "params": {"bandwidth": 0.1}},
                             MethodConfig("diff_gauss")])
    assert [m.method_id for m in out] == ["st_pav", "sim_kde", "diff_gauss"]
    assert out[1].params["bandwidth"] == 0.1


def test_rms_error_hand_case():
    assert rms_error(np.array([1.0, 2.0]), np.array([0.0, 0.0])) == \
        pytest.approx(np.sqrt(2.5), abs=1e-15)


# ---------------------------------------------------------------------------
# replication context


def test_context_deterministic_and_seeded(pop):
    a = make_context(pop, 100, 3)
    b = make_context(pop, 100, 3)
    assert a.seed == 103
    npt.assert_array_equal(a.sample.tokens, b.sample.tokens)
    npt.assert_array_equal(a.suspects[1].sample_tokens,
                           b.suspects[1].sample_tokens)
    c = make_context(pop, 100, 4)
    assert not np.array_equal(a.sample.tokens, c.sample.tokens)


def test_context_layout(pop):
    ctx = make_context(pop, 0, 0)
    assert ctx.sample.tokens.shape == (100, 30)
    assert len(ctx.suspects) == 2
    assert [s.mean for s in ctx.suspects] == [0.0, 2.0]
    assert len(ctx.grids) == 2
    assert ctx.grids[1].values[20] == 2.0


def test_scoreset_cache_returns_same_object(pop):
    ctx = make_context(pop, 0, 0)
    assert ctx.scoreset("st") is ctx.scoreset("st")


# ---------------------------------------------------------------------------
# single-method runs


def test_direct_pooled_equals_st_evidence(pop):
    # the direct pooled estimate and the st evidence score are the same
    # quantity computed through the same code path
    from lrbench.experiment import _eval_direct_pooled, _evidence_rows

    ctx = make_context(pop, 7, 0)
    direct = _eval_direct_pooled(ctx, {})
    evidence = _evidence_rows(ctx, "st")
    assert np.array_equal(direct, evidence)


def test_blind_methods_estimate_symmetric_curves(pop):
    # difference and similarity scores see only |offender - suspect|, so
    # their estimated curves must mirror around each suspect mean
    ctx = make_context(pop, 7, 0)
    for mid in ("diff_gauss", "sim_kde"):
        res = run_method_once(pop, mid, base_seed=7, replication=0, ctx=ctx)
        assert res.status == "ok"
        for row in res.est:
            npt.assert_allclose(row, row[::-1], atol=1e-12)


def test_run_method_once_shapes_and_status(pop):
    res = run_method_once(pop, "st_pav", base_seed=3, replication=1)
    assert res.status == "ok"
    assert res.replication == 1
    assert res.est.shape == (2, 41)
    assert np.isfinite(res.rms) and res.rms >= 0


def test_run_method_once_failure_path(pop, monkeypatch):
    diverged = calibration.LogisticCalibrator(alpha=0.0, beta=0.0,
                                              converged=False)
    monkeypatch.setattr(calibration, "fit_logistic", lambda ss: diverged)
    res = run_method_once(pop, "st_logistic", base_seed=3, replication=0)
    assert res.status.startswith("failed:")
    assert res.est is None
    assert np.isnan(res.rms)


# ---------------------------------------------------------------------------
# aggregation


def fake_result(r, rms, status="ok"):
    est = None if status != "ok" else np.full((2, 41), rms)
    return MethodResult(replication=r, est=est, rms=rms, status=status)


def test_aggregate_tukey_stats():
    vals = [0.1, 0.2, 0.3, 0.4, 10.0]  # 10.0 is an outlier
    results = [fake_result(r, v) for r, v in enumerate(vals)]
    agg = aggregate_results("m", results)
    q1, med, q3 = np.percentile(vals, [25, 50, 75])
    assert agg.rms_median == pytest.approx(med)
    assert agg.rms_q1 == pytest.approx(q1)
    assert agg.rms_q3 == pytest.approx(q3)
    iqr = q3 - q1
    assert agg.rms_lo_whisker == min(v for v in vals if v >= q1 - 1.5 * iqr)
    assert agg.rms_hi_whisker == max(v for v in vals if v <= q3 + 1.5 * iqr)
    assert agg.rms_hi_whisker < 10.0
    assert agg.n_failed == 0
    assert set(agg.percentile_curves) == {5, 50, 95}
    assert agg.percentile_curves[50].shape == (2, 41)


def test_aggregate_counts_failures():
    results = [fake_result(0, 0.1), fake_result(1, np.nan, "failed: x"),
               fake_result(2, 0.3)]
    agg = aggregate_results("m", results)
    assert agg.n_reps == 3
    assert agg.n_failed == 1
    assert agg.rms_median == pytest.approx(0.2)


def test_aggregate_all_failed():
    results = [fake_result(r, np.nan, "failed: x") for r in range(3)]
    agg = aggregate_results("m", results)
    assert agg.n_failed == 3
    assert np.isnan(agg.rms_median)
    assert agg.percentile_curves is None


# ---------------------------------------------------------------------------
# suites


def test_run_suite_validation(pop, small_gmm_pop):
    with pytest.raises(ValueError):
        run_suite(pop, ["direct_pooled", "mv_st_pav"], 1, 0)
    with pytest.raises(ValueError):
        run_suite(pop, ["mv_st_pav"], 1, 0)
    with pytest.raises(ValueError):
        run_suite(small_gmm_pop, ["st_pav"], 1, 0)
    with pytest.raises(ValueError):
        run_suite(pop, ["st_pav"], 0, 0)


def test_small_suite_runs_and_reproduces(pop):
    methods = ["direct_pooled", "st_pav"]
    a = run_suite(pop, methods, n_reps=3, base_seed=11)
    b = run_suite(pop, methods, n_reps=3, base_seed=11)
    assert a.true_curves.shape == (2, 41)
    assert a.suspect_labels.tolist() == [0.0, 2.0]
    assert a.offender_labels.shape == (2, 41)
    for mid in ("direct_pooled", "st_pav"):
        assert len(a.results[mid]) == 3
        rms_a = [r.rms for r in a.results[mid]]
        rms_b = [r.rms for r in b.results[mid]]
        assert rms_a == rms_b
        assert np.isfinite(a.summaries[mid].rms_median)


def test_method_numbers_independent_of_suite_composition(pop):
    alone = run_suite(pop, ["direct_pooled"], n_reps=2, base_seed=21)
    together = run_suite(pop, ["direct_pooled", "diff_gauss", "st_kde"],
                         n_reps=2, base_seed=21)
    for r in range(2):
        assert alone.results["direct_pooled"][r].rms == \
            together.results["direct_pooled"][r].rms


def test_progress_callback(pop):
    seen = []
    run_suite(pop, ["direct_pooled"], n_reps=2, base_seed=0,
              progress=lambda done, total: seen.append((done, total)))
    assert seen == [(1, 2), (2, 2)]


# ---------------------------------------------------------------------------
# per-method details


def test_method_details_global_calibrated(pop):
    d = method_details(pop, "st_kde", base_seed=5)
    ss = d["scoreset"]
    assert ss.n_same == 3000 and ss.n_different == 148500
    assert d["mapping_scores"].shape == (201,)
    assert np.all(np.isfinite(d["mapping_log10_lrs"]))
    assert d["mapping_scores"][0] == min(ss.same_origin.min(),
                                         ss.different_origin.min())


def test_method_details_absent_for_direct(pop):
    d = method_details(pop, "direct_pooled", base_seed=5)
    assert d["scoreset"] is None
    assert d["mapping_scores"] is None


# ---------------------------------------------------------------------------
# multivariate harness (shrunken population for runtime)


@pytest.fixture(scope="module")
def mv_ctx(small_gmm_pop):
    return make_context(small_gmm_pop, 50, 0, n_sample_sources=20,
                        n_sample_tokens=12)


def test_mv_context_sampling(small_gmm_pop, mv_ctx):
    assert mv_ctx.first.tokens.shape == (20, 12, 2)
    assert mv_ctx.second_batch.shape == (20, 12, 2)
    assert mv_ctx.second.tokens.shape == (20, 12, 2)
    assert not set(mv_ctx.first.source_indices) & set(mv_ctx.second.source_indices)
    assert len(mv_ctx.suspect_tokens) == len(small_gmm_pop.suspects)
    assert mv_ctx.grids.shape == (len(small_gmm_pop.suspects), 12, 2)


def test_mv_context_caches_models(mv_ctx):
    k = mv_ctx.pop.config.n_within_components
    assert mv_ctx.source_models(k) is mv_ctx.source_models(k)
    assert mv_ctx.pooled_model() is mv_ctx.pooled_model()
    assert len(mv_ctx.source_models(k)) == 20


def test_mv_scoreset_counts_and_labels(mv_ctx):
    ss = mv_ctx.scoreset("mv_difference")
    assert ss.n_same == 20 * 12
    assert ss.n_different == 20 * 12
    # difference scores are distances: same-origin ones sit lower
    assert ss.same_origin.mean() < ss.different_origin.mean()
    st = mv_ctx.scoreset("mv_st")
    assert st.same_origin.mean() > st.different_origin.mean()


def test_mv_methods_run_on_small_population(small_gmm_pop, mv_ctx):
    true_curves = true_suite_curves(small_gmm_pop)
    n_sus = len(small_gmm_pop.suspects)
    assert true_curves.shape == (n_sus, 12)
    for mid in ("mv_direct_gauss", "mv_st_pav"):
        res = run_method_once(small_gmm_pop, mid, base_seed=50, replication=0,
                              ctx=mv_ctx, true_curves=true_curves)
        assert res.status == "ok"
        assert res.est.shape == (n_sus, 12)
        assert np.isfinite(res.rms)
