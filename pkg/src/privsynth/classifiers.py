"""Reference classifiers used to measure utility retention.

Four classic models, each written directly against its textbook decision
rule so results are easy to verify by hand:

- k-nearest neighbours under the Minkowski metric,
- Gaussian naive Bayes,
- a linear SVM decision rule ``sign(u . z + c)`` with a stochastic
  subgradient trainer for the hinge loss,
- a CART-style decision tree on Gini impurity.

Every classifier exposes ``fit(train)`` / ``predict(features)`` plus the
functional train/classify forms. Deterministic tie rules throughout: equal
distances prefer the lower record index, equal scores prefer the lower class
id, equal splits prefer the lower attribute index then the lower threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, class_mask
from .errors import (
    ConfigInvalid,
    DegenerateClass,
    DimensionMismatch,
    EmptyTrainSet,
    NonBinaryLabels,
    ValidationError,
)

_CHUNK = 256


def _cross_minkowski(queries: np.ndarray, points: np.ndarray, q: float) -> np.ndarray:
    """Distance matrix between two point sets, chunked to bound memory."""
    out = np.empty((queries.shape[0], points.shape[0]), dtype=np.float64)
    for start in range(0, queries.shape[0], _CHUNK):
        block = queries[start:start + _CHUNK]
        diff = np.abs(block[:, None, :] - points[None, :, :])
        if q == 2.0:
            np.multiply(diff, diff, out=diff)
            out[start:start + _CHUNK] = np.sum(diff, axis=2)
        else:
            out[start:start + _CHUNK] = np.sum(diff ** q, axis=2)
    if q == 2.0:
        np.sqrt(out, out=out)
    else:
        np.power(out, 1.0 / q, out=out)
    return out


# ---------------------------------------------------------------------------
# k-nearest neighbours
# ---------------------------------------------------------------------------

class KnnClassifier:
    """Majority vote among the k nearest training records.

    Vote ties are broken by the label of the nearest record belonging to a
    tied class, which makes predictions fully deterministic.
    """

    def __init__(self, k: int = 3, q: float = 2.0):
        if k < 1:
            raise ConfigInvalid(f"k must be >= 1, got {k}")
        if q < 1:
            raise ConfigInvalid(f"q must be >= 1, got {q}")
        self.k = k
        self.q = q
        self.name = "knn"
        self._train: Dataset | None = None

    def fit(self, train: Dataset) -> "KnnClassifier":
        if len(train) == 0:
            raise EmptyTrainSet("knn needs at least one training record")
        if self.k > len(train):
            raise ValidationError(f"k={self.k} exceeds the training size {len(train)}")
        self._train = train
        return self

    def predict(self, features: np.ndarray) -> list:
        if self._train is None:
            raise ValidationError("fit before predict")
        feats = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if feats.shape[1] != self._train.dim:
            raise DimensionMismatch(
                f"queries have {feats.shape[1]} attributes, training data {self._train.dim}"
            )
        dist = _cross_minkowski(feats, self._train.features, self.q)
        # stable sort: equal distances keep the lower training index first
        order = np.argsort(dist, axis=1, kind="stable")[:, : self.k]
        labels = self._train.labels
        out = []
        for row in order:
            ranked = [labels[i] for i in row]
            counts: dict = {}
            for lab in ranked:
                counts[lab] = counts.get(lab, 0) + 1
            best = max(counts.values())
            out.append(next(lab for lab in ranked if counts[lab] == best))
        return out


def knn_classify(train: Dataset, query, k: int, q: float = 2.0):
    """Label of a single query point under k-nearest-neighbour voting."""
    return KnnClassifier(k=k, q=q).fit(train).predict(np.atleast_2d(query))[0]


# ---------------------------------------------------------------------------
# Gaussian naive Bayes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NaiveBayesModel:
    """Class priors and per-class per-attribute Gaussian parameters."""

    classes: tuple
    priors: np.ndarray      # (c,)
    means: np.ndarray       # (c, d)
    variances: np.ndarray   # (c, d), floored, strictly positive

    def __post_init__(self):
        if abs(float(self.priors.sum()) - 1.0) > 1e-12:
            raise ValidationError("priors must sum to 1")
        if (self.variances <= 0).any():
            raise ValidationError("variances must be strictly positive")


def nb_train(train: Dataset) -> NaiveBayesModel:
    """Fit Gaussian likelihoods per class and attribute.

    Variances are floored at ``1e-9 * global_variance`` per attribute so a
    within-class constant attribute cannot produce a singular likelihood;
    attributes constant across the whole training set get unit variance,
    which contributes the same term to every class and so never moves the
    argmax.

    Raises:
        DegenerateClass: some class has fewer than 2 records.
    """
    if len(train) == 0:
        raise EmptyTrainSet("naive Bayes needs training records")
    classes = tuple(train.classes())
    feats = train.features
    n, d = feats.shape
    global_var = feats.var(axis=0, ddof=0)
    floor = np.where(global_var > 0, 1e-9 * global_var, 1.0)

    priors = np.empty(len(classes))
    means = np.empty((len(classes), d))
    variances = np.empty((len(classes), d))
    for i, label in enumerate(classes):
        mask = class_mask(train.labels, label)
        count = int(mask.sum())
        if count < 2:
            raise DegenerateClass(label, count)
        sub = feats[mask]
        priors[i] = count / n
        means[i] = sub.mean(axis=0)
        variances[i] = np.maximum(sub.var(axis=0, ddof=0), floor)
    return NaiveBayesModel(classes, priors, means, variances)


def _nb_log_scores(model: NaiveBayesModel, feats: np.ndarray) -> np.ndarray:
    """(n, c) matrix of log prior + sum of log Gaussian likelihoods."""
    log_prior = np.log(model.priors)
    const = -0.5 * np.sum(np.log(2.0 * np.pi * model.variances), axis=1)
    scores = np.empty((feats.shape[0], len(model.classes)))
    for i in range(len(model.classes)):
        quad = np.sum((feats - model.means[i]) ** 2 / (2.0 * model.variances[i]), axis=1)
        scores[:, i] = log_prior[i] + const[i] - quad
    return scores


def nb_classify(model: NaiveBayesModel, z):
    """argmax over classes of the posterior score; ties go to the lower class id."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.means.shape[1],):
        raise DimensionMismatch(f"point of shape {z.shape}, model dimension {model.means.shape[1]}")
    scores = _nb_log_scores(model, z[None, :])
    return model.classes[int(np.argmax(scores[0]))]  # first maximum = lower class id


class NaiveBayesClassifier:
    def __init__(self):
        self.name = "nb"
        self._model: NaiveBayesModel | None = None

    def fit(self, train: Dataset) -> "NaiveBayesClassifier":
        self._model = nb_train(train)
        return self

    def predict(self, features: np.ndarray) -> list:
        if self._model is None:
            raise ValidationError("fit before predict")
        feats = np.atleast_2d(np.asarray(features, dtype=np.float64))
        scores = _nb_log_scores(self._model, feats)
        picks = np.argmax(scores, axis=1)
        return [self._model.classes[i] for i in picks]


# ---------------------------------------------------------------------------
# linear SVM
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearSvmModel:
    """Separating hyperplane: weights u and offset c."""

    weights: np.ndarray
    offset: float
    negative_label: object = -1
    positive_label: object = 1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if not np.isfinite(w).all() or not np.isfinite(self.offset):
            raise ValidationError("model parameters must be finite")
        object.__setattr__(self, "weights", w)


def svm_decision(model: LinearSvmModel, z) -> int:
    """``sign(u . z + c)`` in {-1, +1}; an exact zero maps to +1."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != model.weights.shape:
        raise DimensionMismatch(f"point of shape {z.shape}, weights {model.weights.shape}")
    return 1 if float(model.weights @ z + model.offset) >= 0.0 else -1


def _hinge_loss(weights, offset, feats, y) -> float:
    margins = y * (feats @ weights + offset)
    return float(np.mean(np.maximum(0.0, 1.0 - margins)))


def svm_train(train: Dataset, epochs: int = 30, reg: float = 1e-3, seed: int = 0) -> LinearSvmModel:
    """Stochastic subgradient descent on the regularized hinge loss.

    Binary only; the lower class id maps to -1. The returned parameters are
    the best iterate by training hinge loss, so the result never does worse
    than the zero model it starts from.

    Raises:
        NonBinaryLabels: the training data does not have exactly two classes.
    """
    if len(train) == 0:
        raise EmptyTrainSet("svm needs training records")
    classes = train.classes()
    if len(classes) != 2:
        raise NonBinaryLabels(f"expected 2 classes, got {len(classes)}")
    neg, pos = classes
    y = np.where(class_mask(train.labels, pos), 1.0, -1.0)
    feats = train.features
    n, d = feats.shape

    rng = np.random.default_rng(seed)
    u = np.zeros(d)
    c = 0.0
    best = (np.zeros(d), 0.0, _hinge_loss(np.zeros(d), 0.0, feats, y))
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (reg * t)
            if y[i] * (u @ feats[i] + c) < 1.0:
                u = (1.0 - eta * reg) * u + eta * y[i] * feats[i]
                c = c + eta * y[i]
            else:
                u = (1.0 - eta * reg) * u
        loss = _hinge_loss(u, c, feats, y)
        if loss < best[2]:
            best = (u.copy(), c, loss)
    return LinearSvmModel(best[0], best[1], negative_label=neg, positive_label=pos)


class SvmClassifier:
    def __init__(self, epochs: int = 30, reg: float = 1e-3, seed: int = 0):
        self.epochs = epochs
        self.reg = reg
        self.seed = seed
        self.name = "svm"
        self._model: LinearSvmModel | None = None

    def fit(self, train: Dataset) -> "SvmClassifier":
        self._model = svm_train(train, self.epochs, self.reg, self.seed)
        return self

    def predict(self, features: np.ndarray) -> list:
        if self._model is None:
            raise ValidationError("fit before predict")
        feats = np.atleast_2d(np.asarray(features, dtype=np.float64))
        raw = feats @ self._model.weights + self._model.offset
        return [self._model.positive_label if v >= 0.0 else self._model.negative_label for v in raw]


# ---------------------------------------------------------------------------
# decision tree (CART, Gini impurity)
# ---------------------------------------------------------------------------

@dataclass
class _TreeNode:
    attribute: int = -1
    threshold: float = 0.0
    left: "_TreeNode | None" = None
    right: "_TreeNode | None" = None
    prediction: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(frozen=True)
class DecisionTreeModel:
    classes: tuple
    root: _TreeNode = field(repr=False)
    max_depth: int = 0
    min_leaf: int = 0


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


def _best_split(feats: np.ndarray, codes: np.ndarray, n_classes: int, min_leaf: int):
    """Best (gain, attribute, threshold) over all axis-aligned splits.

    Candidates are midpoints between consecutive distinct sorted values.
    Attributes are scanned in ascending order and equal gains keep the first
    candidate found, so ties resolve to the lower attribute index and then
    the lower threshold.
    """
    n = feats.shape[0]
    parent = _gini(np.bincount(codes, minlength=n_classes))
    # zero-gain splits stay eligible: structure like XOR only pays off a
    # level deeper, and depth / min_leaf / purity bound the growth
    best_gain = -np.inf
    best_attr = -1
    best_thresh = 0.0
    for attr in range(feats.shape[1]):
        col = feats[:, attr]
        order = np.argsort(col, kind="stable")
        vals = col[order]
        boundaries = np.flatnonzero(vals[:-1] != vals[1:])
        if boundaries.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), codes[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        left_counts = cum[boundaries]
        total = cum[-1]
        right_counts = total - left_counts
        n_left = boundaries + 1
        n_right = n - n_left
        valid = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue
        gini_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
        gini_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
        weighted = (n_left * gini_left + n_right * gini_right) / n
        gains = np.where(valid, parent - weighted, -np.inf)
        pos = int(np.argmax(gains))  # first max = lowest threshold
        if gains[pos] > best_gain:
            best_gain = float(gains[pos])
            best_attr = attr
            b = boundaries[pos]
            best_thresh = float((vals[b] + vals[b + 1]) / 2.0)
    return best_gain, best_attr, best_thresh


def _grow(feats, codes, n_classes, depth, max_depth, min_leaf) -> _TreeNode:
    counts = np.bincount(codes, minlength=n_classes)
    majority = int(np.argmax(counts))  # tie -> lower class id
    if depth >= max_depth or counts.max() == len(codes) or len(codes) < 2 * min_leaf:
        return _TreeNode(prediction=majority)
    gain, attr, thresh = _best_split(feats, codes, n_classes, min_leaf)
    if attr < 0 or gain < 0.0:
        return _TreeNode(prediction=majority)
    mask = feats[:, attr] <= thresh
    left = _grow(feats[mask], codes[mask], n_classes, depth + 1, max_depth, min_leaf)
    right = _grow(feats[~mask], codes[~mask], n_classes, depth + 1, max_depth, min_leaf)
    return _TreeNode(attribute=attr, threshold=thresh, left=left, right=right,
                     prediction=majority)


def dt_train(train: Dataset, max_depth: int = 12, min_leaf: int = 2) -> DecisionTreeModel:
    """Grow a binary CART tree by maximal Gini decrease.

    Raises:
        EmptyTrainSet: no training records.
        ConfigInvalid: max_depth or min_leaf below 1.
    """
    if len(train) == 0:
        raise EmptyTrainSet("decision tree needs training records")
    if max_depth < 1 or min_leaf < 1:
        raise ConfigInvalid("max_depth and min_leaf must be >= 1")
    classes = tuple(train.classes())
    lookup = {label: i for i, label in enumerate(classes)}
    codes = np.array([lookup[l] for l in train.labels.tolist()], dtype=np.intp)
    root = _grow(train.features, codes, len(classes), 0, max_depth, min_leaf)
    return DecisionTreeModel(classes, root, max_depth, min_leaf)


def dt_classify(model: DecisionTreeModel, z):
    z = np.asarray(z, dtype=np.float64)
    node = model.root
    while not node.is_leaf:
        node = node.left if z[node.attribute] <= node.threshold else node.right
    return model.classes[node.prediction]


class DecisionTreeClassifier:
    def __init__(self, max_depth: int = 12, min_leaf: int = 2):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.name = "dt"
        self._model: DecisionTreeModel | None = None

    def fit(self, train: Dataset) -> "DecisionTreeClassifier":
        self._model = dt_train(train, self.max_depth, self.min_leaf)
        return self

    def predict(self, features: np.ndarray) -> list:
        if self._model is None:
            raise ValidationError("fit before predict")
        feats = np.atleast_2d(np.asarray(features, dtype=np.float64))
        return [dt_classify(self._model, row) for row in feats]

    @property
    def model(self) -> DecisionTreeModel:
        if self._model is None:
            raise ValidationError("fit before inspecting the model")
        return self._model


def make_classifier(name: str, seed: int = 0, **overrides):
    """Classifier instances by short name: knn, nb, dt, svm."""
    if name == "knn":
        return KnnClassifier(k=overrides.get("k", 3), q=overrides.get("q", 2.0))
    if name == "nb":
        return NaiveBayesClassifier()
    if name == "dt":
        return DecisionTreeClassifier(
            max_depth=overrides.get("max_depth", 12), min_leaf=overrides.get("min_leaf", 2)
        )
    if name == "svm":
        return SvmClassifier(
            epochs=overrides.get("epochs", 30), reg=overrides.get("reg", 1e-3), seed=seed
        )
    raise ConfigInvalid(f"unknown classifier {name!r}; pick from knn, nb, dt, svm")
