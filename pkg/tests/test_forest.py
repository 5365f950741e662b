import math
import warnings

import numpy as np
import pytest

from fraudwood.errors import EmptyTrainingSet, SingleClassWarning, WidthMismatch
from fraudwood.forest import ForestParams, fit_forest, predict_proba, tree_rng
from fraudwood.tree import TreeParams, fit_tree


@pytest.fixture
def data(rng):
    X = rng.standard_normal((400, 9))
    y = (X[:, 0] + 0.5 * X[:, 4] + 0.3 * rng.standard_normal(400) > 0).astype(float)
    return X, y


class TestFit:
    def test_scores_are_mean_of_trees(self, backend, data, rng):
        X, y = data
        model = fit_forest(X, y, ForestParams(n_trees=7, max_depth=3, seed=1))
        Z = rng.standard_normal((100, 9))
        per_tree = np.array([t.predict(Z) for t in model.trees])
        s = predict_proba(model, Z)
        assert np.all((s >= 0) & (s <= 1))
        assert np.allclose(s, per_tree.mean(axis=0), atol=1e-12, rtol=0)

    def test_determinism(self, backend, data):
        X, y = data
        p = ForestParams(n_trees=5, max_depth=4, seed=11)
        a, b = fit_forest(X, y, p), fit_forest(X, y, p)
        assert all(s.structurally_equal(t) for s, t in zip(a.trees, b.trees))

    def test_tree_depends_only_on_seed_and_index(self, backend, data):
        X, y = data
        small = fit_forest(X, y, ForestParams(n_trees=3, seed=5))
        big = fit_forest(X, y, ForestParams(n_trees=9, seed=5))
        assert all(s.structurally_equal(t) for s, t in zip(small.trees, big.trees))
        other = fit_forest(X, y, ForestParams(n_trees=3, seed=6))
        assert not all(s.structurally_equal(t) for s, t in zip(small.trees, other.trees))

    def test_no_bootstrap_all_features_gives_identical_trees(self, backend, data):
        X, y = data
        model = fit_forest(X, y, ForestParams(n_trees=4, max_depth=3, bootstrap=False,
                                              feature_fraction_rule="all"))
        single = fit_tree(X, y, TreeParams(3))
        assert all(t.structurally_equal(single) for t in model.trees)

    def test_sqrt_rule_feature_count(self, backend, rng):
        # 10 columns, ceil(sqrt(10)) = 4 candidates per node: count distinct draws.
        X = rng.standard_normal((50, 10))
        y = (rng.random(50) < 0.5).astype(float)
        seen = []
        import fraudwood.forest as forest_mod
        orig = forest_mod.fit_tree

        def spy(m, targets, params, rows, sampler):
            def wrapped(w):
                out = sampler(w)
                seen.append(len(set(np.asarray(out).tolist())))
                return out
            return orig(m, targets, params, rows, wrapped)

        forest_mod.fit_tree = spy
        try:
            fit_forest(X, y, ForestParams(n_trees=3, max_depth=3, seed=0))
        finally:
            forest_mod.fit_tree = orig
        assert seen and set(seen) == {math.ceil(math.sqrt(10))}

    def test_tree_rng_streams_independent(self):
        a = tree_rng(3, 0).random(5)
        b = tree_rng(3, 1).random(5)
        assert not np.array_equal(a, b)
        assert np.array_equal(a, tree_rng(3, 0).random(5))

    def test_learns_signal(self, backend, data):
        X, y = data
        model = fit_forest(X, y, ForestParams(n_trees=30, max_depth=4, seed=2))
        acc = ((model.predict_proba(X) > 0.5) == (y == 1)).mean()
        assert acc > 0.85


class TestErrors:
    def test_single_class_warns_and_is_constant(self, backend, rng):
        X = rng.standard_normal((20, 3))
        with pytest.warns(SingleClassWarning):
            model = fit_forest(X, np.ones(20), ForestParams(n_trees=3))
        assert np.all(model.predict_proba(rng.standard_normal((5, 3))) == 1.0)

    def test_empty(self, backend):
        with pytest.raises(EmptyTrainingSet):
            fit_forest(np.zeros((0, 3)), np.zeros(0), ForestParams(n_trees=2))

    def test_width_mismatch(self, backend, data):
        X, y = data
        with warnings.catch_warnings():
            model = fit_forest(X, y, ForestParams(n_trees=2, max_depth=2))
        with pytest.raises(WidthMismatch):
            model.predict_proba(np.zeros((3, 8)))

    @pytest.mark.parametrize("kw", [dict(n_trees=0), dict(max_depth=0),
                                    dict(feature_fraction_rule="log2"), dict(seed=-1)])
    def test_bad_params(self, kw):
        with pytest.raises(ValueError):
            ForestParams(**kw)
