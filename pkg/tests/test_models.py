import numpy as np
import pytest

from popseq.models import (
    ForestClassifier,
    ForestRegressor,
    ModelParams,
    RidgeClassifier,
    RidgeRegressor,
)


def make_blobs(n=120, seed=0):
    """Two well-separated point clouds with noise features."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    X = rng.normal(size=(n, 6))
    X[:, 0] += 6.0 * y
    return X, y


class TestModelParams:
    def test_defaults(self):
        p = ModelParams()
        assert p.n_trees == 100
        assert p.max_depth is None
        assert p.bootstrap is True

    @pytest.mark.parametrize("bad", [
        dict(n_trees=0),
        dict(max_depth=0),
        dict(min_samples_leaf=0),
        dict(feature_subset="sqrt"),
        dict(feature_subset=0),
        dict(ridge_lambda=-1.0),
    ])
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            ModelParams(**bad)

    def test_resolve_subset(self):
        assert ModelParams().resolve_subset(37, "classification") == 6
        assert ModelParams().resolve_subset(37, "regression") == 12
        assert ModelParams(feature_subset="all").resolve_subset(37, "classification") == 37
        assert ModelParams(feature_subset=5).resolve_subset(37, "regression") == 5
        assert ModelParams(feature_subset=50).resolve_subset(37, "regression") == 37
        assert ModelParams().resolve_subset(2, "regression") == 1

    def test_dict_round_trip(self):
        p = ModelParams(n_trees=7, max_depth=3, feature_subset="all")
        assert ModelParams.from_dict(p.to_dict()) == p


class TestForestClassifier:
    def test_single_tree_zero_training_error(self):
        # unlimited depth, no bagging: every distinct point gets its own leaf
        rng = np.random.default_rng(1)
        X = rng.random((80, 4))
        y = rng.integers(0, 3, size=80)
        model = ForestClassifier(ModelParams(n_trees=1, bootstrap=False), seed=0)
        model.fit(X, y)
        np.testing.assert_array_equal(model.predict(X), y)

    def test_learns_separable_data(self):
        X, y = make_blobs(seed=2)
        Xt, yt = make_blobs(seed=3)
        model = ForestClassifier(ModelParams(n_trees=20), seed=0).fit(X, y)
        assert (model.predict(Xt) == yt).mean() >= 0.95

    def test_proba_rows_sum_to_one(self):
        X, y = make_blobs(seed=4)
        model = ForestClassifier(ModelParams(n_trees=10), seed=1).fit(X, y)
        probs = model.predict_proba(X)
        assert probs.shape == (X.shape[0], 2)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(probs >= 0)

    def test_deterministic(self):
        X, y = make_blobs(seed=5)
        a = ForestClassifier(ModelParams(n_trees=5), seed=7).fit(X, y)
        b = ForestClassifier(ModelParams(n_trees=5), seed=7).fit(X, y)
        np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))

    def test_seed_changes_model(self):
        X, y = make_blobs(seed=5)
        a = ForestClassifier(ModelParams(n_trees=5), seed=7).fit(X, y)
        b = ForestClassifier(ModelParams(n_trees=5), seed=8).fit(X, y)
        assert not np.array_equal(a.predict_proba(X), b.predict_proba(X))

    def test_label_validation(self):
        X = np.zeros((4, 2))
        model = ForestClassifier()
        with pytest.raises(ValueError):
            model.fit(X, np.array([0.0, 0.5, 1.0, 1.0]))
        with pytest.raises(ValueError):
            model.fit(X, np.array([-1, 0, 1, 1]))
        with pytest.raises(ValueError):
            model.fit(X, np.array(["a", "b", "a", "b"]))

    def test_float_integral_labels_accepted(self):
        X, y = make_blobs(seed=6)
        model = ForestClassifier(ModelParams(n_trees=3), seed=0)
        model.fit(X, y.astype(np.float64))
        assert model.n_classes_ == 2

    def test_input_validation(self):
        X, y = make_blobs(seed=6)
        model = ForestClassifier(ModelParams(n_trees=2), seed=0).fit(X, y)
        with pytest.raises(ValueError):
            model.predict(np.zeros((2, 5)))
        with pytest.raises(ValueError):
            model.predict(np.array([[np.nan] * 6]))
        with pytest.raises(RuntimeError):
            ForestClassifier().predict(X)

    def test_serialization_round_trip(self):
        X, y = make_blobs(seed=8)
        model = ForestClassifier(ModelParams(n_trees=4, max_depth=5), seed=3).fit(X, y)
        clone = ForestClassifier.from_dict(model.to_dict())
        np.testing.assert_array_equal(clone.predict_proba(X), model.predict_proba(X))
        assert clone.params == model.params

    def test_predict_one(self):
        X, y = make_blobs(seed=9)
        model = ForestClassifier(ModelParams(n_trees=5), seed=0).fit(X, y)
        label, probs = model.predict_one(X[0])
        assert label == model.predict(X[:1])[0]
        np.testing.assert_array_equal(probs, model.predict_proba(X[:1])[0])

    def test_importances_favor_signal_feature(self):
        X, y = make_blobs(n=200, seed=10)
        model = ForestClassifier(ModelParams(n_trees=20), seed=0).fit(X, y)
        imp = model.feature_importances()
        assert imp.shape == (6,)
        assert imp.sum() == pytest.approx(1.0)
        assert np.argmax(imp) == 0

    def test_importances_all_zero_for_constant_target(self):
        rng = np.random.default_rng(11)
        X = rng.random((30, 4))
        model = ForestClassifier(ModelParams(n_trees=3), seed=0).fit(X, np.zeros(30, dtype=int))
        np.testing.assert_array_equal(model.feature_importances(), np.zeros(4))


class TestForestRegressor:
    def test_single_tree_zero_training_error(self):
        rng = np.random.default_rng(12)
        X = rng.random((60, 3))
        y = rng.normal(size=60)
        model = ForestRegressor(ModelParams(n_trees=1, bootstrap=False), seed=0)
        model.fit(X, y)
        np.testing.assert_allclose(model.predict(X), y, atol=1e-12)

    def test_learns_linear_function(self):
        rng = np.random.default_rng(13)
        X = rng.uniform(0, 1, size=(400, 1))
        y = 3.0 * X[:, 0] + rng.normal(0, 0.1, size=400)
        Xt = rng.uniform(0.05, 0.95, size=(100, 1))
        model = ForestRegressor(ModelParams(n_trees=30), seed=0).fit(X, y)
        rmse = np.sqrt(np.mean((model.predict(Xt) - 3.0 * Xt[:, 0]) ** 2))
        assert rmse <= 0.25

    def test_deterministic(self):
        rng = np.random.default_rng(14)
        X = rng.random((50, 4))
        y = rng.normal(size=50)
        a = ForestRegressor(ModelParams(n_trees=5), seed=2).fit(X, y)
        b = ForestRegressor(ModelParams(n_trees=5), seed=2).fit(X, y)
        np.testing.assert_array_equal(a.predict(X), b.predict(X))

    def test_rejects_non_finite_targets(self):
        with pytest.raises(ValueError):
            ForestRegressor().fit(np.zeros((3, 2)), np.array([0.0, np.inf, 1.0]))

    def test_serialization_round_trip(self):
        rng = np.random.default_rng(15)
        X = rng.random((40, 3))
        y = X[:, 0] * 2 + X[:, 1]
        model = ForestRegressor(ModelParams(n_trees=4), seed=1).fit(X, y)
        clone = ForestRegressor.from_dict(model.to_dict())
        np.testing.assert_array_equal(clone.predict(X), model.predict(X))

    def test_min_samples_leaf_caps_tree_size(self):
        rng = np.random.default_rng(16)
        X = rng.random((64, 2))
        y = rng.normal(size=64)
        model = ForestRegressor(ModelParams(n_trees=1, bootstrap=False, min_samples_leaf=8),
                                seed=0).fit(X, y)
        tree = model.trees_[0]
        leaf_sizes = tree.n_samples[tree.feature == -1]
        assert np.all(leaf_sizes >= 8)

    def test_max_depth_limits_tree(self):
        rng = np.random.default_rng(17)
        X = rng.random((100, 2))
        y = rng.normal(size=100)
        model = ForestRegressor(ModelParams(n_trees=1, bootstrap=False, max_depth=2),
                                seed=0).fit(X, y)

        def depth(node):
            if node.is_leaf:
                return 0
            return 1 + max(depth(node.left), depth(node.right))

        assert depth(model.trees_[0].root()) <= 2


class TestRidgeRegressor:
    def test_recovers_exact_linear_map(self):
        rng = np.random.default_rng(20)
        X = rng.normal(size=(200, 3))
        w = np.array([2.0, -1.0, 0.5])
        y = X @ w + 4.0
        model = RidgeRegressor(lam=0.0).fit(X, y)
        np.testing.assert_allclose(model.coef_, w, atol=1e-8)
        assert model.intercept_ == pytest.approx(4.0, abs=1e-8)

    def test_matches_direct_solve_oracle(self):
        rng = np.random.default_rng(21)
        X = rng.normal(size=(80, 4))
        y = rng.normal(size=80)
        lam = 2.5
        model = RidgeRegressor(lam=lam).fit(X, y)
        # independent closed-form solve on centered data
        Xc = X - X.mean(axis=0)
        yc = y - y.mean()
        w = np.linalg.solve(Xc.T @ Xc + lam * np.eye(4), Xc.T @ yc)
        np.testing.assert_allclose(model.coef_, w, atol=1e-10)

    def test_shrinkage_monotone(self):
        rng = np.random.default_rng(22)
        X = rng.normal(size=(50, 3))
        y = X[:, 0] + rng.normal(0, 0.1, size=50)
        norms = [np.linalg.norm(RidgeRegressor(lam=lam).fit(X, y).coef_)
                 for lam in (0.0, 1.0, 100.0)]
        assert norms[0] >= norms[1] >= norms[2]

    def test_rank_deficient_fallback(self):
        # duplicated column with lam=0 is singular; lstsq path must still fit
        rng = np.random.default_rng(23)
        base = rng.normal(size=(30, 1))
        X = np.hstack([base, base])
        y = base[:, 0] * 3
        model = RidgeRegressor(lam=0.0).fit(X, y)
        np.testing.assert_allclose(model.predict(X), y, atol=1e-8)

    def test_serialization_round_trip(self):
        rng = np.random.default_rng(24)
        X = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        model = RidgeRegressor(lam=0.5).fit(X, y)
        clone = RidgeRegressor.from_dict(model.to_dict())
        np.testing.assert_allclose(clone.predict(X), model.predict(X), atol=1e-12)

    def test_importances(self):
        rng = np.random.default_rng(25)
        X = rng.normal(size=(100, 3))
        y = 5.0 * X[:, 1]
        imp = RidgeRegressor(lam=0.1).fit(X, y).feature_importances()
        assert imp.sum() == pytest.approx(1.0)
        assert np.argmax(imp) == 1

    def test_validation(self):
        with pytest.raises(ValueError):
            RidgeRegressor(lam=-1.0)
        with pytest.raises(ValueError):
            RidgeRegressor().fit(np.zeros((3, 2)), np.zeros(4))
        with pytest.raises(RuntimeError):
            RidgeRegressor().predict(np.zeros((1, 2)))


class TestRidgeClassifier:
    def test_learns_separable_data(self):
        X, y = make_blobs(seed=30)
        Xt, yt = make_blobs(seed=31)
        model = RidgeClassifier(lam=1.0).fit(X, y)
        assert (model.predict(Xt) == yt).mean() >= 0.95

    def test_multiclass_shapes(self):
        rng = np.random.default_rng(32)
        y = rng.integers(0, 4, size=90)
        X = rng.normal(size=(90, 5))
        X[:, 0] += 4.0 * y
        model = RidgeClassifier().fit(X, y)
        assert model.coef_.shape == (4, 5)
        assert model.decision_scores(X).shape == (90, 4)
        assert set(model.predict(X).tolist()) <= {0, 1, 2, 3}

    def test_serialization_round_trip(self):
        X, y = make_blobs(seed=33)
        model = RidgeClassifier(lam=2.0).fit(X, y)
        clone = RidgeClassifier.from_dict(model.to_dict())
        np.testing.assert_allclose(clone.decision_scores(X), model.decision_scores(X),
                                   atol=1e-12)
        np.testing.assert_array_equal(clone.predict(X), model.predict(X))

    def test_kind_mismatch_rejected(self):
        X, y = make_blobs(seed=34)
        reg = RidgeRegressor().fit(X, y.astype(float))
        with pytest.raises(ValueError):
            RidgeClassifier.from_dict(reg.to_dict())

    def test_predict_one(self):
        X, y = make_blobs(seed=35)
        model = RidgeClassifier().fit(X, y)
        assert model.predict_one(X[3]) == model.predict(X[3:4])[0]
