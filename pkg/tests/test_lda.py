import numpy as np
import pytest
from scipy.special import logsumexp
from scipy.stats import multivariate_normal
from sklearn.discriminant_analysis import LinearDiscriminantAnalysis

from latred.data import ClassLabels, FactorMatrix
from latred.lda import discriminants, fit_lda, posterior_lda, predict_lda, score_class1


def _blobs(n_per=40, k=3, gap=4.0, seed=0, classes=2):
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for c in range(classes):
        center = np.zeros(k)
        center[c % k] = gap * c
        xs.append(rng.normal(size=(n_per, k)) + center)
        ys.append(np.full(n_per, c))
    x = np.vstack(xs)
    y = ClassLabels(np.concatenate(ys), tuple(f"c{c}" for c in range(classes)))
    return x, y


class TestFitLDA:
    def test_hand_worked_pooled_covariance(self):
        x = np.array([
            [0.0, 0.0],
            [2.0, 0.0],
            [1.0, 2.0],
            [5.0, 4.0],
            [7.0, 4.0],
        ])
        y = ClassLabels([0, 0, 0, 1, 1], ("a", "b"))
        model = fit_lda(x, y)
        assert np.allclose(model.means, [[1.0, 2.0 / 3.0], [6.0, 4.0]])
        s0 = np.array([[2.0, 0.0], [0.0, 8.0 / 3.0]])
        s1 = np.array([[2.0, 0.0], [0.0, 0.0]])
        # pooled scatter over n - G = 3, plus whatever ridge was needed
        want = (s0 + s1) / 3.0
        assert np.allclose(model.cov - np.eye(2) * model.ridge, want, atol=1e-12)
        assert np.allclose(model.priors, [0.6, 0.4])

    def test_no_ridge_on_well_conditioned_data(self):
        x, y = _blobs(seed=1)
        model = fit_lda(x, y)
        assert model.ridge == 0.0
        assert np.allclose(model.precision @ model.cov, np.eye(3), atol=1e-8)

    def test_ridge_triggers_on_singular_covariance(self):
        # second factor is a copy of the first, pooled covariance is singular
        x, y = _blobs(k=1, seed=2)
        x = np.column_stack([x, x])
        model = fit_lda(x, y)
        assert model.ridge > 0.0
        assert np.all(np.isfinite(model.precision))

    def test_label_count_mismatch(self):
        x, y = _blobs(seed=3)
        with pytest.raises(ValueError, match="labels"):
            fit_lda(x[:-1], y)

    def test_accepts_factor_matrix(self):
        x, y = _blobs(seed=4)
        a = fit_lda(FactorMatrix(x, "PCA"), y)
        b = fit_lda(x, y)
        assert np.array_equal(a.means, b.means)


class TestPredict:
    def test_separated_blobs_classified_correctly(self):
        x, y = _blobs(gap=6.0, seed=5)
        model = fit_lda(x, y)
        assert np.array_equal(predict_lda(model, x), y.labels)

    def test_matches_sklearn_on_balanced_data(self):
        x, y = _blobs(n_per=60, gap=2.0, seed=6)
        model = fit_lda(x, y)
        ref = LinearDiscriminantAnalysis(solver="lsqr").fit(x, y.labels)
        assert np.array_equal(predict_lda(model, x), ref.predict(x))
        # sklearn divides the pooled covariance by n, this model by n - G;
        # probabilities therefore agree only approximately at n = 120
        assert np.allclose(posterior_lda(model, x), ref.predict_proba(x),
                           atol=5e-3)

    def test_posteriors_match_gaussian_bayes_oracle(self):
        x, y = _blobs(n_per=40, gap=1.5, seed=16)
        model = fit_lda(x, y)

        # independent route: explicit class densities under a pooled
        # covariance with divisor n - G, composed via Bayes' rule
        n, g = x.shape[0], y.n_classes
        means = np.array([x[y.labels == c].mean(axis=0) for c in range(g)])
        scatter = sum((x[y.labels == c] - means[c]).T
                      @ (x[y.labels == c] - means[c]) for c in range(g))
        pooled = scatter / (n - g)
        logp = np.column_stack(
            [multivariate_normal(means[c], pooled).logpdf(x)
             + np.log(np.mean(y.labels == c)) for c in range(g)])
        expected = np.exp(logp - logsumexp(logp, axis=1, keepdims=True))

        assert np.allclose(posterior_lda(model, x), expected, atol=1e-10)

    def test_three_classes(self):
        x, y = _blobs(gap=6.0, seed=7, classes=3)
        model = fit_lda(x, y)
        pred = predict_lda(model, x)
        assert np.mean(pred == y.labels) > 0.95

    def test_prior_shifts_boundary(self):
        # same geometry, unbalanced classes: the boundary moves toward the
        # rarer class, so a midpoint sample goes to the common one
        rng = np.random.default_rng(8)
        x0 = rng.normal(size=(90, 1)) - 2.0
        x1 = rng.normal(size=(10, 1)) + 2.0
        x = np.vstack([x0, x1])
        y = ClassLabels(np.r_[np.zeros(90, int), np.ones(10, int)], ("a", "b"))
        model = fit_lda(x, y)
        assert predict_lda(model, np.array([[0.0]]))[0] == 0

    def test_equal_priors_ignore_class_imbalance(self):
        # same unbalanced geometry, equal priors: the midpoint sample now
        # goes to whichever centroid is nearer, not the common class
        rng = np.random.default_rng(8)
        x0 = rng.normal(size=(90, 1)) - 2.0
        x1 = rng.normal(size=(10, 1)) + 2.0
        x = np.vstack([x0, x1])
        y = ClassLabels(np.r_[np.zeros(90, int), np.ones(10, int)], ("a", "b"))
        model = fit_lda(x, y, priors="equal")
        assert np.allclose(model.priors, [0.5, 0.5])
        mid = (x0.mean() + x1.mean()) / 2.0
        assert predict_lda(model, np.array([[mid + 0.05]]))[0] == 1
        with pytest.raises(ValueError, match="priors"):
            fit_lda(x, y, priors="flat")
        with pytest.raises(ValueError, match="ridge_eps"):
            fit_lda(x, y, ridge_eps=0.0)

    def test_discriminants_agree_with_argmax(self):
        x, y = _blobs(gap=1.0, seed=9)
        model = fit_lda(x, y)
        d = discriminants(model, x)
        assert d.shape == (x.shape[0], 2)
        assert np.array_equal(np.argmax(d, axis=1), predict_lda(model, x))


class TestScores:
    def test_posterior_rows_sum_to_one(self):
        x, y = _blobs(gap=2.0, seed=10)
        model = fit_lda(x, y)
        post = posterior_lda(model, x)
        assert np.allclose(post.sum(axis=1), 1.0, atol=1e-12)
        assert np.all((post >= 0) & (post <= 1))

    def test_score_class1_is_second_column(self):
        x, y = _blobs(gap=2.0, seed=11)
        model = fit_lda(x, y)
        assert np.allclose(score_class1(model, x),
                           posterior_lda(model, x)[:, 1], atol=0)

    def test_scores_monotone_along_discriminant_axis(self):
        x, y = _blobs(k=1, gap=4.0, seed=12)
        model = fit_lda(x, y)
        grid = np.linspace(-4, 8, 50)[:, None]
        s = score_class1(model, grid)
        assert np.all(np.diff(s) > 0)

    def test_extreme_points_do_not_overflow(self):
        x, y = _blobs(k=2, gap=3.0, seed=13)
        model = fit_lda(x, y)
        with np.errstate(over="raise"):
            s = score_class1(model, np.array([[1e6, -1e6], [-1e6, 1e6]]))
        assert np.all(np.isfinite(s))
