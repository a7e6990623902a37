import numpy as np
import pytest

from latred.data import ClassLabels, ExpressionMatrix
from latred.model_select import DEFAULT_K_GRID, select_k


def _em(values):
    values = np.asarray(values, dtype=float)
    n, p = values.shape
    return ExpressionMatrix(
        values,
        tuple(f"s{i}" for i in range(n)),
        tuple(f"g{j}" for j in range(p)),
    )


def _separable(n_per=8, p=10, gap=8.0, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(2 * n_per, p))
    x[n_per:, :] += gap  # shift on every gene: one factor carries the signal
    y = ClassLabels(np.repeat([0, 1], n_per), ("a", "b"))
    return _em(x), y


class TestSelectK:
    def test_separable_data_ties_resolve_to_smallest_k(self):
        m, y = _separable()
        res = select_k("PCA", m, y, k_grid=(1, 2, 3), seed=0)
        assert res.cv_errors[0] == 0.0
        assert res.k_star == 1  # later K also hit zero error; smallest wins

    def test_error_curve_len_matches_grid(self):
        m, y = _separable(seed=1)
        res = select_k("PCA", m, y, k_grid=(1, 3, 5), seed=0)
        assert res.k_grid == (1, 3, 5)
        assert len(res.cv_errors) == 3
        assert res.error_by_k() == {1: res.cv_errors[0],
                                    3: res.cv_errors[1],
                                    5: res.cv_errors[2]}

    def test_fit_accounting_without_fallbacks(self):
        m, y = _separable(n_per=5, seed=2)
        res = select_k("PCA", m, y, k_grid=(1, 2), seed=0)
        assert res.fallback_folds == 0
        assert res.n_fits == 2 * m.n_samples

    def test_fallback_when_class_has_two_members(self):
        # class b has exactly 2 samples, so holding one out leaves 1 and the
        # fold falls back to the majority vote for both such folds per k
        rng = np.random.default_rng(3)
        x = rng.normal(size=(10, 6))
        y = ClassLabels([0] * 8 + [1] * 2, ("a", "b"))
        res = select_k("PCA", _em(x), y, k_grid=(1, 2), seed=0)
        assert res.fallback_folds == 4
        assert res.n_fits == 2 * 10 - 4

    def test_rm_runs_and_is_deterministic(self):
        m, y = _separable(n_per=6, p=8, seed=4)
        a = select_k("RM", m, y, k_grid=(1, 2), seed=7)
        b = select_k("RM", m, y, k_grid=(1, 2), seed=7)
        assert a == b
        assert a.k_star in (1, 2)

    def test_default_grid(self):
        assert DEFAULT_K_GRID == (1, 2, 3, 4, 5)

    def test_seed_affects_rm_partitions_only_not_validity(self):
        m, y = _separable(n_per=6, p=8, gap=10.0, seed=5)
        res = select_k("RM", m, y, k_grid=(1,), seed=123)
        assert res.cv_errors[0] <= 0.5


class TestGridValidation:
    def test_empty_grid(self):
        m, y = _separable()
        with pytest.raises(ValueError, match="non-empty"):
            select_k("PCA", m, y, k_grid=(), seed=0)

    def test_non_increasing_grid(self):
        m, y = _separable()
        with pytest.raises(ValueError, match="strictly increasing"):
            select_k("PCA", m, y, k_grid=(2, 2), seed=0)
        with pytest.raises(ValueError, match="strictly increasing"):
            select_k("PCA", m, y, k_grid=(3, 1), seed=0)

    def test_pca_rank_cap_counts_fold_size(self):
        # folds hold n - 1 samples, so PCA rank there is n - 2
        m, y = _separable(n_per=3, p=10)  # n = 6
        with pytest.raises(ValueError, match="infeasible"):
            select_k("PCA", m, y, k_grid=(1, 5), seed=0)
        select_k("PCA", m, y, k_grid=(1, 4), seed=0)

    def test_rm_cap_is_gene_count(self):
        m, y = _separable(n_per=4, p=3)
        with pytest.raises(ValueError, match="infeasible"):
            select_k("RM", m, y, k_grid=(4,), seed=0)

    def test_too_few_samples(self):
        m, y = _separable(n_per=1)
        with pytest.raises(ValueError, match="at least 3"):
            select_k("PCA", m, y, k_grid=(1,), seed=0)

    def test_label_length_mismatch(self):
        m, y = _separable()
        with pytest.raises(ValueError, match="labels"):
            select_k("PCA", m.take_samples(range(10)), y, k_grid=(1,), seed=0)
