import mpmath
import numpy as np
import pytest

from privsynth.classifiers import (
    DecisionTreeClassifier,
    KnnClassifier,
    LinearSvmModel,
    NaiveBayesClassifier,
    SvmClassifier,
    dt_classify,
    dt_train,
    knn_classify,
    make_classifier,
    nb_classify,
    nb_train,
    svm_decision,
    svm_train,
)
from privsynth.data import Dataset, Schema
from privsynth.errors import (
    ConfigInvalid,
    DegenerateClass,
    DimensionMismatch,
    EmptyTrainSet,
    NonBinaryLabels,
)
from privsynth.smote import minkowski_distance


def table(feats, labels):
    feats = np.atleast_2d(np.asarray(feats, dtype=float))
    schema = Schema(
        tuple((f"f{i}", "numeric") for i in range(feats.shape[1])) + (("label", "label"),)
    )
    return Dataset(schema, feats, np.array(labels, dtype=object))


class TestKnn:
    def test_training_point_returns_own_label(self):
        train = table([[0.0, 0.0], [5.0, 5.0], [9.0, 0.0]], ["a", "b", "c"])
        assert knn_classify(train, [5.0, 5.0], k=1) == "b"

    def test_five_point_oracle(self):
        points = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [4.0, 4.0], [5.0, 4.0]]
        labels = ["a", "a", "a", "b", "b"]
        train = table(points, labels)
        rng = np.random.default_rng(3)
        for _ in range(50):
            query = rng.uniform(-1, 6, size=2)
            ranked = sorted(
                range(5), key=lambda i: (minkowski_distance(query, points[i], 2), i)
            )[:3]
            votes = [labels[i] for i in ranked]
            best = max(set(votes), key=votes.count)
            # hand-designed set has no vote ties at k=3 (two classes)
            assert knn_classify(train, query, k=3) == best

    def test_vote_tie_broken_by_nearest_tied_class(self):
        # k=2: one 'a' at distance 1, one 'b' at distance 2 -> 1-1 tie,
        # nearest tied neighbour is the 'a'
        train = table([[1.0], [2.0], [10.0]], ["a", "b", "b"])
        assert knn_classify(train, [0.0], k=2) == "a"

    def test_distance_tie_prefers_lower_index(self):
        train = table([[1.0], [-1.0]], ["b", "a"])
        # both at distance 1; stable order keeps index 0 first
        assert knn_classify(train, [0.0], k=1) == "b"

    def test_paper_setting_k3(self):
        rng = np.random.default_rng(8)
        left = rng.normal(-4, 0.5, size=(30, 2))
        right = rng.normal(4, 0.5, size=(30, 2))
        train = table(np.vstack([left, right]), ["L"] * 30 + ["R"] * 30)
        clf = KnnClassifier(k=3)
        clf.fit(train)
        preds = clf.predict(np.array([[-4.0, 0.0], [4.0, 0.0]]))
        assert preds == ["L", "R"]

    def test_empty_train(self):
        empty = table(np.empty((0, 1)), [])
        with pytest.raises(EmptyTrainSet):
            KnnClassifier(k=1).fit(empty)


class TestNaiveBayes:
    def test_separated_classes(self):
        rng = np.random.default_rng(1)
        feats = np.concatenate([rng.normal(0, 1, 40), rng.normal(20, 1, 40)])[:, None]
        train = table(feats, ["lo"] * 40 + ["hi"] * 40)
        model = nb_train(train)
        assert nb_classify(model, [0.0]) == "lo"
        assert nb_classify(model, [20.0]) == "hi"

    def test_midpoint_tie_goes_to_lower_class(self):
        # symmetric classes, equal priors: scores tie at the midpoint
        train = table([[-1.0], [-3.0], [5.0], [7.0]], [1, 1, 2, 2])
        model = nb_train(train)
        assert nb_classify(model, [2.0]) == 1

    def test_against_high_precision_oracle(self):
        rng = np.random.default_rng(5)
        feats = np.vstack([rng.normal(0, 1, size=(10, 2)), rng.normal(2.5, 1.5, size=(10, 2))])
        labels = ["a"] * 10 + ["b"] * 10
        train = table(feats, labels)
        model = nb_train(train)

        mpmath.mp.dps = 60

        def oracle(z):
            best, best_label = None, None
            for label in ("a", "b"):
                rows = feats[:10] if label == "a" else feats[10:]
                score = mpmath.mpf(rows.shape[0]) / 20
                for j in range(2):
                    mu = mpmath.mpf(float(rows[:, j].mean()))
                    var = mpmath.mpf(float(rows[:, j].var()))
                    diff = mpmath.mpf(float(z[j])) - mu
                    score *= mpmath.exp(-diff ** 2 / (2 * var)) / mpmath.sqrt(2 * mpmath.pi * var)
                if best is None or score > best:
                    best, best_label = score, label
            return best_label

        for _ in range(60):
            z = rng.uniform(-2, 5, size=2)
            assert nb_classify(model, z) == oracle(z)

    def test_shift_invariance(self):
        # adding a constant to one attribute everywhere shifts means only
        rng = np.random.default_rng(9)
        feats = rng.normal(size=(60, 3))
        labels = (["a"] * 20 + ["b"] * 20 + ["c"] * 20)
        train = table(feats, labels)
        shifted_feats = feats.copy()
        shifted_feats[:, 1] += 100.0
        shifted = table(shifted_feats, labels)
        queries = rng.normal(size=(30, 3))
        base_model = nb_train(train)
        shift_model = nb_train(shifted)
        for q in queries:
            q_shift = q.copy()
            q_shift[1] += 100.0
            assert nb_classify(base_model, q) == nb_classify(shift_model, q_shift)

    def test_degenerate_class(self):
        train = table([[0.0], [1.0], [2.0]], ["a", "a", "b"])
        with pytest.raises(DegenerateClass):
            nb_train(train)

    def test_constant_attribute_harmless(self):
        feats = np.column_stack([np.full(40, 3.0), np.random.default_rng(2).normal(size=40)])
        labels = ["a"] * 20 + ["b"] * 20
        model = nb_train(table(feats, labels))
        assert nb_classify(model, [3.0, 0.0]) in ("a", "b")


class TestSvm:
    def test_sign_examples(self):
        model = LinearSvmModel(np.array([1.0, 0.0]), 0.0)
        assert svm_decision(model, [3.0, 7.0]) == 1
        assert svm_decision(model, [-2.0, 7.0]) == -1

    def test_boundary_maps_to_plus_one(self):
        model = LinearSvmModel(np.array([1.0, 1.0]), -2.0)
        assert svm_decision(model, [1.0, 1.0]) == 1

    def test_random_triples_match_dot_product(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            u = rng.normal(size=3)
            c = float(rng.normal())
            z = rng.normal(size=3)
            model = LinearSvmModel(u, c)
            expected = 1 if float(u @ z + c) >= 0 else -1
            assert svm_decision(model, z) == expected

    def test_dimension_mismatch(self):
        model = LinearSvmModel(np.array([1.0, 0.0]), 0.0)
        with pytest.raises(DimensionMismatch):
            svm_decision(model, [1.0])

    def test_separable_clusters_perfect_training_accuracy(self):
        rng = np.random.default_rng(6)
        left = rng.normal(-5, 0.5, size=(40, 2))
        right = rng.normal(5, 0.5, size=(40, 2))
        train = table(np.vstack([left, right]), [-1] * 40 + [1] * 40)
        model = svm_train(train, epochs=40, reg=1e-3, seed=0)
        preds = [svm_decision(model, row) for row in train.features]
        actual = [-1] * 40 + [1] * 40
        assert preds == actual

    def test_loss_never_worse_than_zero_model(self):
        rng = np.random.default_rng(7)
        feats = rng.normal(size=(50, 2))
        labels = ["a" if x[0] + x[1] > 0 else "b" for x in feats]
        if len(set(labels)) == 1:
            labels[0] = "a" if labels[0] == "b" else "b"
        train = table(feats, labels)
        model = svm_train(train, epochs=10, reg=1e-2, seed=1)
        y = np.array([1.0 if l == "b" else -1.0 for l in labels])
        hinge = np.maximum(0.0, 1.0 - y * (train.features @ model.weights + model.offset)).mean()
        assert hinge <= 1.0 + 1e-12  # zero-weight loss is exactly 1

    def test_single_class_rejected(self):
        train = table([[0.0], [1.0]], ["a", "a"])
        with pytest.raises(NonBinaryLabels):
            svm_train(train)

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        train = table(rng.normal(size=(30, 2)), ["a", "b"] * 15)
        m1 = svm_train(train, epochs=5, reg=1e-2, seed=42)
        m2 = svm_train(train, epochs=5, reg=1e-2, seed=42)
        assert np.array_equal(m1.weights, m2.weights)
        assert m1.offset == m2.offset


class TestDecisionTree:
    def test_pure_data_single_leaf(self):
        train = table([[0.0], [1.0], [2.0]], ["a", "a", "a"])
        model = dt_train(train, max_depth=5, min_leaf=1)
        assert model.root.is_leaf
        assert dt_classify(model, [99.0]) == "a"

    def test_1d_split_between_clusters(self):
        train = table([[0.0], [1.0], [10.0], [11.0]], ["A", "A", "B", "B"])
        model = dt_train(train, max_depth=3, min_leaf=1)
        assert 1.0 < model.root.threshold < 10.0
        preds = [dt_classify(model, row) for row in train.features]
        assert preds == ["A", "A", "B", "B"]

    def test_stump_cannot_fit_xor(self):
        feats = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]
        labels = ["a", "a", "b", "b"]
        train = table(feats, labels)

        # exhaustive stump oracle: every axis threshold, majority leaves
        best = 0.0
        for attr in range(2):
            for thresh in (-0.5, 0.5, 1.5):
                for left_lab in ("a", "b"):
                    for right_lab in ("a", "b"):
                        acc = np.mean([
                            (left_lab if f[attr] <= thresh else right_lab) == l
                            for f, l in zip(feats, labels)
                        ])
                        best = max(best, float(acc))
        assert best <= 0.75

        model = dt_train(train, max_depth=1, min_leaf=1)
        acc = np.mean([dt_classify(model, f) == l for f, l in zip(feats, labels)])
        assert acc <= best

    def test_deeper_tree_fits_xor(self):
        feats = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]
        labels = ["a", "a", "b", "b"]
        model = dt_train(table(feats, labels), max_depth=3, min_leaf=1)
        assert all(dt_classify(model, f) == l for f, l in zip(feats, labels))

    def test_min_leaf_respected(self):
        rng = np.random.default_rng(10)
        train = table(rng.normal(size=(40, 2)), ["a", "b"] * 20)
        model = dt_train(train, max_depth=8, min_leaf=5)

        def leaf_depth_sizes(node, feats, labels):
            if node.is_leaf:
                return [len(labels)]
            mask = feats[:, node.attribute] <= node.threshold
            return (leaf_depth_sizes(node.left, feats[mask], labels[mask])
                    + leaf_depth_sizes(node.right, feats[~mask], labels[~mask]))

        sizes = leaf_depth_sizes(model.root, train.features, train.labels)
        assert min(sizes) >= 5

    def test_invalid_config(self):
        train = table([[0.0]], ["a"])
        with pytest.raises(ConfigInvalid):
            dt_train(train, max_depth=0)
        with pytest.raises(EmptyTrainSet):
            dt_train(table(np.empty((0, 1)), []))


class TestFactory:
    def test_known_names(self):
        assert isinstance(make_classifier("knn"), KnnClassifier)
        assert isinstance(make_classifier("nb"), NaiveBayesClassifier)
        assert isinstance(make_classifier("dt"), DecisionTreeClassifier)
        assert isinstance(make_classifier("svm"), SvmClassifier)

    def test_unknown_name(self):
        with pytest.raises(ConfigInvalid):
            make_classifier("xgboost")

    def test_defaults_mirror_protocol(self):
        knn = make_classifier("knn")
        assert knn.k == 3 and knn.q == 2.0
        dt = make_classifier("dt")
        assert dt.max_depth == 12 and dt.min_leaf == 2
