import numpy as np
import pytest

from gazeais import (EmbeddingConfig, SymbolSequence,
                     conditional_mutual_information, derive_seed, embed,
                     generate, lagged_copy_spec, max_statistic_test,
                     optimize_past_state, persistence_spec,
                     table_from_series, uniform_iid_spec)
from gazeais.embedding import _candidate_cmis, _selected_code, _series_columns


class TestEmbeddingConfig:
    def test_defaults(self):
        cfg = EmbeddingConfig()
        assert cfg.k_max == 5 and cfg.alpha == 0.05 and cfg.n_perm == 200

    def test_nperm_must_reach_alpha(self):
        # Minimum attainable p is 1/(n_perm + 1), so n_perm >= 1/alpha - 1.
        with pytest.raises(ValueError, match="cannot reach"):
            EmbeddingConfig(alpha=0.05, n_perm=10)
        EmbeddingConfig(alpha=0.05, n_perm=19)  # boundary is fine

    def test_alpha_range(self):
        with pytest.raises(ValueError, match="alpha"):
            EmbeddingConfig(alpha=1.5)


class TestCandidateCmis:
    def test_matches_table_estimator(self):
        # The hot-path coded CMI must agree with the contingency-table route.
        rng = np.random.default_rng(31)
        seq = SymbolSequence(rng.integers(0, 3, size=200), 3)
        series = embed(seq, (1, 2, 3), 3)
        cols = _series_columns(series)
        sel_code, sel_size = _selected_code(cols, (2,), 3)
        cmis = _candidate_cmis(series.targets, cols, (1, 3), sel_code, sel_size, 3)
        table = table_from_series(series)  # axes: target, lag1, lag2, lag3
        for lag, axis in ((1, 1), (3, 3)):
            ref = conditional_mutual_information(table, (0,), (axis,), (2,))
            assert cmis[lag] == pytest.approx(ref.plugin_value, abs=1e-12)


class TestMaxStatisticTest:
    @pytest.fixture
    def series(self):
        rng = np.random.default_rng(7)
        seq = SymbolSequence(rng.integers(0, 2, size=300), 2)
        return embed(seq, (1, 2, 3), 3)

    def test_extreme_statistic(self, series):
        p = max_statistic_test(10.0, (1, 2, 3), series, n_perm=99, seed=1)
        assert p == pytest.approx(1.0 / 100.0)

    def test_null_consistent_statistic(self, series):
        p = max_statistic_test(-1.0, (1, 2, 3), series, n_perm=99, seed=1)
        assert p == 1.0

    def test_deterministic_and_parallel_identical(self, series):
        p1 = max_statistic_test(0.01, (1, 2), series, 50, seed=4, n_jobs=1)
        p2 = max_statistic_test(0.01, (1, 2), series, 50, seed=4, n_jobs=1)
        p8 = max_statistic_test(0.01, (1, 2), series, 50, seed=4, n_jobs=8)
        assert p1 == p2 == p8

    def test_unknown_lag_rejected(self, series):
        with pytest.raises(ValueError, match="not present"):
            max_statistic_test(0.1, (9,), series, 10, seed=0)


class TestOptimizePastState:
    def test_too_short(self):
        cfg = EmbeddingConfig(seed=0)
        with pytest.raises(ValueError, match="at least 10"):
            optimize_past_state(SymbolSequence([0, 1] * 7, 2), cfg)

    def test_deterministic_cycle_selects_lag_one(self):
        seq = SymbolSequence(np.arange(200) % 4, 4)
        cfg = EmbeddingConfig(k_max=5, n_perm=100, seed=3)
        lags, trace = optimize_past_state(seq, cfg)
        assert lags.lags == (1,)
        assert trace.steps[0].accepted and not trace.steps[-1].accepted
        assert trace.n_rows == 195

    def test_trace_is_bounded(self):
        seq = generate(persistence_spec(0.9), 1500, seed=5)
        cfg = EmbeddingConfig(k_max=5, n_perm=100, seed=5)
        lags, trace = optimize_past_state(seq, cfg)
        assert len(trace.steps) <= cfg.k_max + 1
        assert set(lags.lags) <= set(range(1, cfg.k_max + 1))
        # Accepted candidates carry strictly positive plug-in CMI.
        for step in trace.steps:
            if step.accepted:
                assert step.observed_cmi > 0.0

    def test_identical_inputs_identical_outputs(self):
        seq = generate(persistence_spec(0.8), 800, seed=9)
        cfg = EmbeddingConfig(k_max=4, n_perm=60, seed=21)
        out1 = optimize_past_state(seq, cfg)
        out2 = optimize_past_state(seq, cfg)
        assert out1[0] == out2[0]
        assert [s.p_value for s in out1[1].steps] == [s.p_value for s in out2[1].steps]

    def test_recovers_order_one_memory(self):
        cfg = EmbeddingConfig(k_max=5, n_perm=200, seed=0)
        hits = 0
        for s in range(5):
            seq = generate(persistence_spec(0.9), 5000,
                           seed=derive_seed(101, s))
            lags, _ = optimize_past_state(seq, cfg)
            hits += lags.lags == (1,)
        assert hits >= 4

    def test_recovers_planted_lag_two(self):
        cfg = EmbeddingConfig(k_max=5, n_perm=200, seed=0)
        hits = 0
        for s in range(5):
            seq = generate(lagged_copy_spec(2, 0.9), 5000,
                           seed=derive_seed(202, s))
            lags, _ = optimize_past_state(seq, cfg)
            hits += 2 in lags.lags
        assert hits >= 4

    def test_memoryless_mostly_empty(self):
        cfg = EmbeddingConfig(k_max=5, n_perm=200, seed=0)
        nonempty = 0
        for s in range(10):
            seq = generate(uniform_iid_spec(4), 3000, seed=derive_seed(303, s))
            lags, _ = optimize_past_state(seq, cfg)
            nonempty += bool(lags)
        assert nonempty <= 2
