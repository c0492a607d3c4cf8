"""Forest engine: split finding, training, prediction, importance."""

import numpy as np
import pytest

from helpers import (count_internal_nodes, make_dataset, oracle_best_split,
                     random_split_instance)
from rfscreen import (ForestParams, TreeNode, best_split, bootstrap_indices,
                      dump_forest, forest_predict, forest_predict_batch,
                      gini_impurity, selection_frequency, train_forest)


class TestGiniImpurity:
    def test_pure_node(self):
        assert gini_impurity([4, 0]) == 0.0

    def test_balanced_binary(self):
        assert gini_impurity([2, 2]) == 0.5

    def test_uniform_four_class(self):
        assert gini_impurity([1, 1, 1, 1]) == 0.75

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            gini_impurity([0, 0, 0])


class TestBestSplit:
    def test_perfect_balanced_split(self):
        ds = make_dataset([[1.0], [2.0], [3.0], [4.0]], [1, 1, 2, 2])
        feature, threshold, decrease = best_split(ds, range(4), [0])
        assert feature == 0
        assert threshold == 2.5
        assert decrease == 0.5

    def test_pure_node_has_no_split(self):
        ds = make_dataset([[1.0], [2.0], [3.0]], [2, 2, 2])
        assert best_split(ds, range(3), [0]) is None

    def test_matches_bruteforce_on_fixed_instance(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(12, 3))
        y = rng.integers(1, 4, size=12)
        y[:3] = [1, 2, 3]
        ds = make_dataset(X, y)
        got = best_split(ds, range(12), range(3))
        want = oracle_best_split(X, y, range(3))
        assert got == want

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_bruteforce_on_random_instances(self, seed):
        rng = np.random.default_rng(1000 + seed)
        X, y, msl, mpi = random_split_instance(rng)
        ds = make_dataset(X, y)
        got = best_split(ds, range(X.shape[0]), range(X.shape[1]), msl, mpi)
        want = oracle_best_split(X, y, range(X.shape[1]), msl, mpi)
        assert got == want

    def test_respects_min_samples_leaf(self):
        ds = make_dataset([[1.0], [2.0], [3.0]], [1, 1, 2])
        # every cut leaves a 1-sample child; msl=2 forbids them all
        assert best_split(ds, range(3), [0], min_samples_leaf=2) is None

    def test_respects_min_purity_increase(self):
        ds = make_dataset([[1.0], [2.0], [3.0], [4.0]], [1, 1, 2, 2])
        assert best_split(ds, range(4), [0], min_purity_increase=0.6) is None


def _params(**overrides):
    base = dict(n_trees=5, n_subfeatures=2, min_samples_leaf=1,
                min_purity_increase=0.0, partial_sampling=0.7, seed=42)
    base.update(overrides)
    return ForestParams(**base)


def _random_training_set(seed, n=40, f=6, k=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, f))
    y = rng.integers(1, k + 1, size=n)
    y[:k] = np.arange(1, k + 1)
    X[:, 0] += y * 1.5  # one informative feature keeps trees non-trivial
    return make_dataset(X, y)


class TestTrainForest:
    def test_dominant_feature_wins_root(self):
        rng = np.random.default_rng(3)
        n = 30
        X = np.zeros((n, 5))
        X[:, 3] = np.arange(n, dtype=float)
        y = np.where(X[:, 3] < n / 2, 1, 2)
        ds = make_dataset(X, y)
        model = train_forest(ds, _params(n_trees=1, n_subfeatures=5,
                                         partial_sampling=1.0))
        root = model.trees[0]
        assert not root.is_leaf
        assert root.feature == 3
        assert root.left.is_leaf and root.right.is_leaf

    def test_deterministic_across_workers(self):
        ds = _random_training_set(9)
        a = train_forest(ds, _params(n_trees=8), n_threads=1)
        b = train_forest(ds, _params(n_trees=8), n_threads=4)
        assert dump_forest(a) == dump_forest(b)

    def test_deterministic_across_calls(self):
        ds = _random_training_set(10)
        assert dump_forest(train_forest(ds, _params())) == \
            dump_forest(train_forest(ds, _params()))

    def test_beats_majority_on_covered_samples(self):
        ds = _random_training_set(11, n=60)
        params = _params(n_trees=10, n_subfeatures=6)
        model = train_forest(ds, params)
        covered = np.unique(np.concatenate([
            bootstrap_indices(params, ds.n_samples, t) for t in range(params.n_trees)
        ]))
        predictions = forest_predict_batch(model, ds.features[covered])
        forest_acc = np.mean(predictions == ds.labels[covered])
        majority = np.argmax(np.bincount(ds.labels[covered]))
        majority_acc = np.mean(ds.labels[covered] == majority)
        assert forest_acc >= majority_acc

    def test_too_many_subfeatures_rejected(self):
        ds = _random_training_set(12)
        with pytest.raises(ValueError):
            train_forest(ds, _params(n_subfeatures=ds.n_features + 1))

    def test_leaf_sizes_and_purity_gains_respected(self):
        ds = _random_training_set(13, n=50)
        msl, mpi = 3, 0.02
        model = train_forest(ds, _params(n_trees=6, n_subfeatures=4,
                                         min_samples_leaf=msl,
                                         min_purity_increase=mpi))
        for t in range(len(model.trees)):
            idx = bootstrap_indices(model.params, ds.n_samples, t)
            stack = [(model.trees[t], idx)]
            while stack:
                node, members = stack.pop()
                if node.is_leaf:
                    assert members.shape[0] >= msl
                    continue
                got = best_split(ds, members, [node.feature],
                                 min_samples_leaf=msl, min_purity_increase=mpi)
                assert got is not None and got[2] >= mpi
                mask = ds.features[members, node.feature] <= node.threshold
                stack.append((node.left, members[mask]))
                stack.append((node.right, members[~mask]))


def _stump(feature, threshold, left_class, right_class, k=2):
    def leaf(c):
        counts = np.zeros(k, dtype=np.int64)
        counts[c - 1] = 1
        return TreeNode(klass=c, counts=counts)
    return TreeNode(feature=feature, threshold=threshold,
                    left=leaf(left_class), right=leaf(right_class))


def _leaf_only_model(classes, n_features=4):
    from rfscreen import ForestModel
    k = max(classes)
    trees = []
    for c in classes:
        counts = np.zeros(k, dtype=np.int64)
        counts[c - 1] = 1
        trees.append(TreeNode(klass=c, counts=counts))
    return ForestModel(trees=trees, n_features=n_features, n_classes=k,
                       params=_params(n_trees=len(classes)))


class TestForestPredict:
    def test_stump_routes_left(self):
        from rfscreen import ForestModel
        model = ForestModel(trees=[_stump(0, 1.0, left_class=1, right_class=2)],
                            n_features=2, n_classes=2, params=_params(n_trees=1))
        assert forest_predict(model, [0.5, 9.9]) == 1
        assert forest_predict(model, [1.5, 9.9]) == 2

    def test_majority_vote(self):
        model = _leaf_only_model([2, 2, 5])
        assert forest_predict(model, [0.0] * 4) == 2

    def test_vote_tie_prefers_smaller_class(self):
        model = _leaf_only_model([1, 2])
        assert forest_predict(model, [0.0] * 4) == 1

    def test_length_mismatch_rejected(self):
        model = _leaf_only_model([1, 2])
        with pytest.raises(ValueError):
            forest_predict(model, [0.0] * 5)


class TestSelectionFrequency:
    def test_single_stump(self):
        from rfscreen import ForestModel
        model = ForestModel(trees=[_stump(3, 0.0, 1, 2)], n_features=6, n_classes=2,
                            params=_params(n_trees=1))
        counts = selection_frequency(model)
        assert counts[3] == 1
        assert counts.sum() == 1

    def test_all_pure_forest_is_zero(self):
        model = _leaf_only_model([1, 2, 1])
        assert selection_frequency(model).sum() == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_sum_matches_traversal_oracle(self, seed):
        ds = _random_training_set(100 + seed)
        model = train_forest(ds, _params(seed=seed))
        counts = selection_frequency(model)
        assert np.all(counts >= 0)
        assert counts.sum() == count_internal_nodes(model)
