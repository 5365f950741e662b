import numpy as np
import pytest

from fraudwood.errors import EmptyNode, EmptyTrainingSet, WidthMismatch
from fraudwood.tree import Tree, TreeParams, best_split, fit_tree, gini, predict

from oracles import brute_force_split, definitional_gini_gain, random_increasing_map


class TestGini:
    @pytest.mark.parametrize("pos,neg,expected", [(5, 5, 0.5), (10, 0, 0.0), (3, 1, 0.375)])
    def test_values(self, pos, neg, expected):
        assert gini(pos, neg) == pytest.approx(expected, abs=1e-15)

    def test_empty(self):
        with pytest.raises(EmptyNode):
            gini(0, 0)


class TestBestSplit:
    def test_four_points(self, backend):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        c = best_split(X, [0, 0, 1, 1])
        assert (c.feature_index, c.threshold, c.gain) == (0, 2.5, 0.5)

    def test_pure_labels(self, backend):
        X = np.arange(8.0).reshape(4, 2)
        assert best_split(X, [1, 1, 1, 1]) is None

    def test_constant_column_loses(self, backend):
        X = np.array([[7.0, 1.0], [7.0, 2.0], [7.0, 3.0], [7.0, 4.0]])
        c = best_split(X, [0, 0, 1, 1])
        assert c.feature_index == 1

    def test_tie_prefers_lower_feature_then_threshold(self, backend):
        X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
        c = best_split(X, [0, 1, 1, 0], impurity="gini")
        ref = brute_force_split(X, np.array([0.0, 1, 1, 0]), range(4), [0, 1], "gini")
        assert (c.feature_index, c.threshold) == ref[:2] == (0, 1.5)

    def test_subsets(self, backend, rng):
        X = rng.integers(0, 5, (30, 5)).astype(float)
        y = rng.integers(0, 2, 30).astype(float)
        rows = rng.choice(30, 20, replace=True)
        feats = [4, 1, 3]
        c = best_split(X, y, rows, feats)
        ref = brute_force_split(X, y, rows, feats, "gini")
        assert (c.feature_index, c.threshold, c.gain) == ref

    def test_random_against_brute_force(self, backend, rng):
        for _ in range(100):
            n, p = rng.integers(2, 13), rng.integers(1, 5)
            X = rng.integers(0, 6, (n, p)).astype(float) * rng.choice([0.1, 1.0, 1e5])
            for impurity in ("gini", "variance"):
                y = rng.integers(0, 2 if impurity == "gini" else 9, n).astype(float)
                c = best_split(X, y, impurity=impurity)
                ref = brute_force_split(X, y, range(n), range(p), impurity)
                if ref is None:
                    assert c is None
                else:
                    assert (c.feature_index, c.threshold, c.gain) == ref
                    if impurity == "gini":
                        d = definitional_gini_gain(X, y, range(n), c.feature_index, c.threshold)
                        assert c.gain == pytest.approx(d, abs=1e-12)


class TestFitTree:
    def test_pure_input_single_leaf(self, backend):
        X = np.arange(10.0).reshape(5, 2)
        t = fit_tree(X, np.ones(5), TreeParams(3))
        assert t.n_nodes == 1 and t.value[0] == 1.0

    def test_stump(self, backend):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        t = fit_tree(X, [0, 0, 1, 1], TreeParams(1))
        assert t.feature[0] == 0 and t.threshold[0] == 2.5
        assert t.value[t.left[0]] == 0.0 and t.value[t.right[0]] == 1.0
        assert predict(t, np.array([2.5])) == 0.0  # boundary goes left
        assert predict(t, np.array([2.5000001])) == 1.0

    @pytest.mark.parametrize("impurity", ["gini", "variance"])
    def test_xor(self, backend, impurity):
        # (0, 0) appears twice; with all four cells equally weighted every root
        # split has zero gain and the greedy rule refuses to split at all.
        X = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0, 0.0])
        deep = fit_tree(X, y, TreeParams(2, impurity=impurity))
        assert ((deep.predict(X) > 0.5) == (y == 1)).mean() == 1.0
        cells = X[1:]
        shallow = fit_tree(X, y, TreeParams(1, impurity=impurity))
        assert ((shallow.predict(cells) > 0.5) == (y[1:] == 1)).mean() == 0.5

    @pytest.mark.parametrize("impurity", ["gini", "variance"])
    def test_balanced_xor_has_no_greedy_split(self, backend, impurity):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0.0, 1.0, 1.0, 0.0])
        assert best_split(X, y, impurity=impurity) is None
        assert fit_tree(X, y, TreeParams(2, impurity=impurity)).n_nodes == 1

    def test_empty(self, backend):
        with pytest.raises(EmptyTrainingSet):
            fit_tree(np.zeros((3, 2)), np.zeros(3), TreeParams(2), row_subset=[])

    def test_fully_grown_reproduces_labels(self, backend, rng):
        for _ in range(20):
            X = rng.permutation(16).reshape(16, 1).astype(float)
            X = np.hstack([X, rng.standard_normal((16, 2))])
            y = rng.integers(0, 2, 16).astype(float)
            t = fit_tree(X, y, TreeParams(20))
            assert np.array_equal(t.predict(X), y)

    def test_depth_bound_and_leaf_values(self, backend, rng):
        X = rng.standard_normal((200, 4))
        y = (X[:, 0] * X[:, 1] > 0).astype(float)
        for d in (1, 2, 3, 5):
            t = fit_tree(X, y, TreeParams(d))
            assert t.depth <= d
            leaves = t.feature < 0
            assert ((t.value[leaves] >= 0) & (t.value[leaves] <= 1)).all()

    def test_variance_leaf_is_mean(self, backend, rng):
        X = rng.standard_normal((150, 3))
        y = rng.standard_normal(150)
        t = fit_tree(X, y, TreeParams(3, impurity="variance"))
        leaf = t.apply(X)
        for node in np.unique(leaf):
            assert abs(t.value[node] - y[leaf == node].mean()) <= 1e-12

    def test_bootstrap_duplicates_count(self, backend):
        X = np.array([[1.0], [2.0], [3.0]])
        y = np.array([0.0, 1.0, 1.0])
        t = fit_tree(X, y, TreeParams(1), row_subset=[0, 0, 0, 1])
        assert t.threshold[0] == 1.5
        t0 = fit_tree(X, y, TreeParams(1), row_subset=[0, 0, 0])
        assert t0.n_nodes == 1

    def test_feature_sampler_called_per_node(self, backend, rng):
        X = rng.standard_normal((100, 6))
        y = (X[:, 2] > 0).astype(float)
        seen = []

        def sampler(w):
            seen.append(w)
            return [2, 0]

        t = fit_tree(X, y, TreeParams(2), feature_sampler=sampler)
        assert set(t.feature[t.feature >= 0].tolist()) <= {0, 2}
        assert seen and all(w == 6 for w in seen)

    def test_determinism(self, backend, rng):
        X = rng.standard_normal((300, 5))
        y = (X[:, 0] + rng.standard_normal(300) > 0).astype(float)
        a = fit_tree(X, y, TreeParams(4))
        b = fit_tree(X, y, TreeParams(4))
        assert a.structurally_equal(b)

    def test_monotone_invariance(self, backend, rng):
        for _ in range(30):
            n, p = rng.integers(5, 40), rng.integers(1, 5)
            X = rng.integers(0, 8, (n, p)).astype(float)
            y = rng.integers(0, 2, n).astype(float)
            Xt = np.column_stack([random_increasing_map(X[:, j], rng) for j in range(p)])
            params = TreeParams(int(rng.integers(1, 5)))
            a, b = fit_tree(X, y, params), fit_tree(Xt, y, params)
            assert np.array_equal(a.apply(X), b.apply(Xt))
            assert np.array_equal(a.predict(X), b.predict(Xt))


class TestTreeObject:
    def test_width_mismatch(self, backend):
        t = fit_tree(np.array([[1.0, 0.0], [2.0, 0.0]]), [0, 1], TreeParams(1))
        with pytest.raises(WidthMismatch):
            t.predict(np.zeros((1, 3)))

    def test_single_leaf_predicts_constant(self, backend):
        t = fit_tree(np.zeros((4, 2)), [0, 1, 0, 1], TreeParams(3))
        assert t.n_nodes == 1
        assert np.all(t.predict(np.random.default_rng(0).standard_normal((9, 2))) == 0.5)

    def test_dict_round_trip(self, backend, rng):
        X = rng.standard_normal((120, 4))
        y = (X[:, 1] > 0.3).astype(float)
        t = fit_tree(X, y, TreeParams(4))
        back = Tree.from_dict(t.to_dict())
        assert back.structurally_equal(t)

    def test_predict_row_vs_matrix(self, backend, rng):
        X = rng.standard_normal((50, 3))
        y = (X[:, 0] > 0).astype(float)
        t = fit_tree(X, y, TreeParams(3))
        for i in range(5):
            assert predict(t, X[i]) == t.predict(X)[i]
