"""Benchmark-difficulty evaluation of (augmented) datasets.

Information-gain ranking with MDL discretisation, k-NN and Gaussian naive
Bayes classifiers, sequential floating forward selection with a k-NN
wrapper, and k-means++ clustering scored by the adjusted Rand index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

__all__ = [
    "SplitSpec",
    "RankingReport",
    "SelectionReport",
    "ClusterReport",
    "split_indices",
    "mdl_cut_points",
    "info_gain",
    "rank_features",
    "knn_classify",
    "nb_classify",
    "accuracy",
    "sffs",
    "sfs",
    "kmeans",
    "adjusted_rand_index",
    "kmeans_ari",
    "classify_report",
    "ClassificationReport",
    "KMeansResult",
]

NB_VAR_FLOOR = 1e-9


def _entropy_counts(counts: np.ndarray) -> float:
    """Shannon entropy (bits) of a vector of class counts."""
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _conditional_entropy(rows: np.ndarray) -> float:
    """Weighted class entropy of a (bins x classes) contingency table."""
    total = rows.sum()
    if total <= 0:
        return 0.0
    return sum(r.sum() / total * _entropy_counts(r) for r in rows)


def _encode(labels) -> tuple[np.ndarray, np.ndarray]:
    classes, codes = np.unique(np.asarray(labels), return_inverse=True)
    return classes, codes.astype(np.int64)


def mdl_cut_points(values, labels, better_encoding: bool = True) -> list[float]:
    """Fayyad-Irani recursive entropy discretisation with the MDL stopping rule.

    Candidate cuts lie midway between adjacent distinct values.  A cut is
    accepted when its information gain exceeds ``(log2(C) + delta) / N``,
    where C is the number of candidate cuts in the subset when
    ``better_encoding`` is set (WEKA's setting for attribute ranking) and
    N - 1 otherwise.
    """
    values = np.asarray(values, dtype=float)
    _, codes = _encode(labels)
    n_classes = int(codes.max()) + 1 if codes.size else 0
    order = np.argsort(values, kind="mergesort")
    v = values[order]
    c = codes[order]
    cuts: list[float] = []

    def split(first: int, stop: int):
        n = stop - first
        if n < 2:
            return
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), c[first:stop]] = 1.0
        left = np.cumsum(onehot, axis=0)[:-1]
        prior = onehot.sum(axis=0)
        right = prior - left
        boundary = v[first:stop - 1] < v[first + 1:stop]
        if not boundary.any():
            return
        prior_ent = _entropy_counts(prior)
        best_ent = prior_ent
        best_i = -1
        for i in np.flatnonzero(boundary):
            ent = _conditional_entropy(np.stack([left[i], right[i]]))
            if ent < best_ent:
                best_ent = ent
                best_i = i
        gain = prior_ent - best_ent
        if best_i < 0 or gain <= 0:
            return
        lc, rc = left[best_i], right[best_i]
        k = np.count_nonzero(prior)
        k1 = np.count_nonzero(lc)
        k2 = np.count_nonzero(rc)
        delta = np.log2(3.0**k - 2) - (
            k * prior_ent - k1 * _entropy_counts(lc) - k2 * _entropy_counts(rc)
        )
        n_cut = np.count_nonzero(boundary) if better_encoding else n - 1
        if gain <= (np.log2(n_cut) + delta) / n:
            return
        mid = first + best_i + 1
        cuts.append(0.5 * (v[first + best_i] + v[first + best_i + 1]))
        split(first, mid)
        split(mid, stop)

    split(0, v.shape[0])
    return sorted(cuts)


def info_gain(feature, labels) -> float:
    """Information gain (bits) of the MDL-discretised feature about the labels."""
    if labels is None:
        raise ValueError("information gain needs class labels")
    feature = np.asarray(feature, dtype=float)
    classes, codes = _encode(labels)
    if feature.shape[0] != codes.shape[0]:
        raise ValueError("feature and labels differ in length")
    cuts = mdl_cut_points(feature, labels)
    if not cuts:
        return 0.0
    bins = np.searchsorted(np.asarray(cuts), feature, side="right")
    table = np.zeros((len(cuts) + 1, classes.shape[0]))
    np.add.at(table, (bins, codes), 1.0)
    ig = _entropy_counts(table.sum(axis=0)) - _conditional_entropy(table)
    return max(ig, 0.0)


# --------------------------------------------------------------------------
# Splitting

@dataclass(frozen=True)
class SplitSpec:
    """Train/validation/test fractions and the shuffle seed."""

    fractions: tuple = (0.7, 0.0, 0.3)
    shuffle_seed: int = 0
    stratify: bool = True

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        if len(fr) == 2:
            fr = (fr[0], 0.0, fr[1])
        if len(fr) != 3 or any(f < 0 for f in fr):
            raise ValueError("fractions must be three non-negative numbers")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {sum(fr)}")
        object.__setattr__(self, "fractions", fr)

    @classmethod
    def parse(cls, text: str, shuffle_seed: int = 0) -> "SplitSpec":
        """``"60,20,20"`` or ``"70,30"`` (percentages or fractions)."""
        parts = [float(p) for p in text.split(",") if p.strip()]
        total = sum(parts)
        if total > 1.0 + 1e-9:
            parts = [p / 100.0 for p in parts]
        return cls(tuple(parts), shuffle_seed)


def _largest_remainder(n: int, fractions) -> list[int]:
    exact = [n * f for f in fractions]
    counts = [int(np.floor(e)) for e in exact]
    order = sorted(range(len(exact)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def split_indices(n_or_labels, spec: SplitSpec | None = None) -> tuple:
    """(train, validation, test) index arrays, each sorted ascending.

    With labels and ``spec.stratify`` every class is shuffled and divided
    separately, so class proportions carry over to each partition.
    """
    spec = spec or SplitSpec()
    if np.ndim(n_or_labels) == 0:
        groups = [np.arange(int(n_or_labels))]
    else:
        labels = np.asarray(n_or_labels)
        if spec.stratify:
            _, codes = _encode(labels)
            groups = [np.flatnonzero(codes == c) for c in range(int(codes.max()) + 1)]
        else:
            groups = [np.arange(labels.shape[0])]
    rng = np.random.default_rng(spec.shuffle_seed & 0xFFFFFFFFFFFFFFFF)
    parts = ([], [], [])
    for g in groups:
        g = rng.permutation(g)
        start = 0
        for p, count in zip(parts, _largest_remainder(g.shape[0], spec.fractions)):
            p.append(g[start:start + count])
            start += count
    return tuple(np.sort(np.concatenate(p)).astype(np.int64) for p in parts)


# --------------------------------------------------------------------------
# Ranking

@dataclass(frozen=True)
class RankingReport:
    rows: tuple  # ((name, ig_bits), ...), best first

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.rows]

    def rank_of(self, name: str) -> int:
        return self.names.index(name)

    def to_dict(self) -> dict:
        return {"ranking": [{"feature": n, "info_gain": g} for n, g in self.rows]}

    def as_text(self) -> str:
        width = max([len(n) for n, _ in self.rows] + [7])
        lines = [f"{'rank':>4}  {'feature':<{width}}  info_gain"]
        for i, (name, ig) in enumerate(self.rows, 1):
            lines.append(f"{i:>4}  {name:<{width}}  {ig:.3f}")
        return "\n".join(lines)


def rank_features(data: Dataset) -> RankingReport:
    if data.labels is None:
        raise ValueError("ranking needs class labels")
    gains = [(name, info_gain(data.X[:, j], data.labels))
             for j, name in enumerate(data.feature_names)]
    gains.sort(key=lambda r: (-r[1], r[0]))
    return RankingReport(tuple(gains))


# --------------------------------------------------------------------------
# Classifiers

def _check_train(train_X, train_y):
    train_X = np.asarray(train_X, dtype=float)
    if train_X.ndim == 1:
        train_X = train_X[:, None]
    train_y = np.asarray(train_y)
    if train_X.shape[0] == 0:
        raise ValueError("empty training set")
    if train_X.shape[0] != train_y.shape[0]:
        raise ValueError("training rows and labels differ in length")
    return train_X, train_y


def _as_rows(test_X, d: int) -> np.ndarray:
    test_X = np.asarray(test_X, dtype=float)
    if test_X.ndim == 1:
        test_X = test_X[:, None] if d == 1 else test_X[None, :]
    if test_X.shape[1] != d:
        raise ValueError(f"test rows have {test_X.shape[1]} columns, expected {d}")
    return test_X


def knn_classify(train_X, train_y, test_X, k: int = 3, normalize: bool = True) -> np.ndarray:
    """k-nearest-neighbour majority vote under Euclidean distance.

    With ``normalize`` every column is min-max scaled by its range on the
    training rows.  Equidistant neighbours resolve to the lower training
    index; a tied vote goes to the class most frequent in training, then
    to the first in sorted label order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    train_X, train_y = _check_train(train_X, train_y)
    test_X = _as_rows(test_X, train_X.shape[1])
    if normalize:
        lo = train_X.min(axis=0)
        span = train_X.max(axis=0) - lo
        span[span == 0] = 1.0
        train_X = (train_X - lo) / span
        test_X = (test_X - lo) / span
    classes, codes = _encode(train_y)
    n_classes = classes.shape[0]
    prior = np.bincount(codes, minlength=n_classes)
    # Lexicographic preference: votes, then training frequency, then label order.
    tiebreak = prior * n_classes + (n_classes - 1 - np.arange(n_classes))
    k = min(k, train_X.shape[0])
    out = np.empty(test_X.shape[0], dtype=np.int64)
    for start in range(0, test_X.shape[0], 256):
        block = test_X[start:start + 256]
        d2 = ((block[:, None, :] - train_X[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        for r, idx in enumerate(nearest):
            votes = np.bincount(codes[idx], minlength=n_classes)
            score = votes * (tiebreak.max() + 1) + tiebreak
            out[start + r] = int(np.argmax(score))
    return classes[out]


def nb_classify(train_X, train_y, test_X, classes=None) -> np.ndarray:
    """Gaussian naive Bayes, computed in log space.

    Each class-conditional variance gets ``NB_VAR_FLOOR`` added so that a
    feature constant within a class does not divide by zero.
    """
    train_X, train_y = _check_train(train_X, train_y)
    test_X = _as_rows(test_X, train_X.shape[1])
    classes = np.unique(train_y) if classes is None else np.asarray(classes)
    log_post = np.empty((test_X.shape[0], classes.shape[0]))
    for c, cls in enumerate(classes):
        rows = train_X[train_y == cls]
        if rows.shape[0] == 0:
            raise ValueError(f"class {cls!r} has no training instances")
        mean = rows.mean(axis=0)
        var = rows.var(axis=0) + NB_VAR_FLOOR
        ll = -0.5 * (np.log(2 * np.pi * var) + (test_X - mean) ** 2 / var).sum(axis=1)
        log_post[:, c] = np.log(rows.shape[0] / train_X.shape[0]) + ll
    return classes[np.argmax(log_post, axis=1)]


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays differ in shape")
    if y_true.size == 0:
        raise ValueError("no predictions to score")
    return float(np.mean(y_true == y_pred))


def _classifier(name: str, k: int = 3):
    if name == "knn":
        return lambda tx, ty, vx: knn_classify(tx, ty, vx, k)
    if name == "nb":
        return nb_classify
    raise ValueError(f"unknown classifier {name!r} (expected knn or nb)")


@dataclass(frozen=True)
class ClassificationReport:
    accuracies: dict
    split: SplitSpec
    n_train: int
    n_test: int

    def to_dict(self) -> dict:
        return {"accuracies": dict(self.accuracies), "split": list(self.split.fractions),
                "shuffle_seed": self.split.shuffle_seed, "n_train": self.n_train,
                "n_test": self.n_test}

    def as_text(self) -> str:
        lines = [f"{'classifier':<10}  test_accuracy"]
        lines += [f"{name:<10}  {acc:.4f}" for name, acc in self.accuracies.items()]
        return "\n".join(lines)


def classify_report(data: Dataset, split: SplitSpec | None = None, k: int = 3) -> ClassificationReport:
    """Test accuracy of KNN (k=3) and Gaussian NB trained on the same split.

    The validation fraction, if any, is left unused.
    """
    if data.labels is None:
        raise ValueError("classification needs class labels")
    split = split or SplitSpec()
    train, _, test = split_indices(data.labels, split)
    if test.shape[0] == 0:
        raise ValueError("split leaves no test instances")
    accs = {}
    for name in ("knn", "nb"):
        pred = _classifier(name, k)(data.X[train], data.labels[train], data.X[test])
        accs[name] = accuracy(data.labels[test], pred)
    return ClassificationReport(accs, split, int(train.shape[0]), int(test.shape[0]))


# --------------------------------------------------------------------------
# Wrapper feature selection

WRAPPER_NOTE = "k-NN (k=3) wrapper used in place of an SVM wrapper"


@dataclass(frozen=True)
class SelectionReport:
    selected: tuple
    trace: tuple  # ((action, feature, validation_accuracy), ...) of accepted steps
    validation_accuracy: float
    test_accuracy: float
    wrapper: str = "knn"
    method: str = "sffs"
    note: str = WRAPPER_NOTE

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "wrapper": self.wrapper,
            "note": self.note,
            "selected": list(self.selected),
            "trace": [{"action": a, "feature": f, "validation_accuracy": v}
                      for a, f, v in self.trace],
            "validation_accuracy": self.validation_accuracy,
            "test_accuracy": self.test_accuracy,
        }

    def as_text(self) -> str:
        lines = [f"{a:<6} {f:<12} {v:.4f}" for a, f, v in self.trace]
        lines.append(f"selected: {', '.join(self.selected)}")
        lines.append(f"validation accuracy: {self.validation_accuracy:.4f}")
        lines.append(f"test accuracy: {self.test_accuracy:.4f}")
        lines.append(f"note: {self.note}")
        return "\n".join(lines)


class _Wrapper:
    """Memoised validation accuracy of feature subsets."""

    def __init__(self, data: Dataset, split: SplitSpec, wrapper: str, k: int):
        if data.labels is None:
            raise ValueError("feature selection needs class labels")
        self.data = data
        self.train, self.val, self.test = split_indices(data.labels, split)
        if self.train.shape[0] == 0 or self.val.shape[0] == 0:
            raise ValueError("selection needs non-empty train and validation partitions")
        self.clf = _classifier(wrapper, k)
        self.cache: dict = {}
        # Preference order for ties: IG on the training rows, then name.
        y = data.labels[self.train]
        ig = {n: info_gain(data.X[self.train, j], y) for j, n in enumerate(data.feature_names)}
        pref = sorted(data.feature_names, key=lambda n: (-ig[n], n))
        self.priority = {n: i for i, n in enumerate(pref)}
        self.index = {n: j for j, n in enumerate(data.feature_names)}

    def _cols(self, subset) -> list[int]:
        return [self.index[n] for n in sorted(subset, key=self.priority.__getitem__)]

    def score(self, subset, rows=None, fit_rows=None) -> float:
        key = frozenset(subset)
        if rows is None and key in self.cache:
            return self.cache[key]
        cols = self._cols(subset)
        fit = self.train if fit_rows is None else fit_rows
        at = self.val if rows is None else rows
        X = self.data.X[:, cols]
        acc = accuracy(self.data.labels[at], self.clf(X[fit], self.data.labels[fit], X[at]))
        if rows is None:
            self.cache[key] = acc
        return acc

    def best_addition(self, selected: list):
        cands = [n for n in self.data.feature_names if n not in selected]
        cands.sort(key=self.priority.__getitem__)
        best, best_acc = None, -1.0
        for n in cands:
            acc = self.score(selected + [n])
            if acc > best_acc:
                best, best_acc = n, acc
        return best, best_acc

    def best_removal(self, selected: list):
        # Prefer dropping the least-preferred feature when accuracies tie.
        cands = sorted(selected, key=self.priority.__getitem__, reverse=True)
        best, best_acc = None, -1.0
        for n in cands:
            acc = self.score([m for m in selected if m != n])
            if acc > best_acc:
                best, best_acc = n, acc
        return best, best_acc

    def report(self, selected, trace, method, wrapper) -> SelectionReport:
        ordered = tuple(sorted(selected, key=self.index.__getitem__))
        test_acc = self.score(selected, rows=self.test) if self.test.shape[0] else float("nan")
        return SelectionReport(ordered, tuple(trace), self.score(selected), test_acc,
                               wrapper, method)


def sffs(data: Dataset, split: SplitSpec | None = None, wrapper: str = "knn",
         k: int = 3) -> SelectionReport:
    """Sequential floating forward selection.

    From the empty set, add the feature giving the best validation
    accuracy as long as that strictly beats the best so far; after each
    addition, drop features while a removal strictly improves accuracy.
    The classifier trains on the train partition and is scored on the
    validation partition; the reported test accuracy uses the same
    training rows.
    """
    w = _Wrapper(data, split or SplitSpec((0.6, 0.2, 0.2)), wrapper, k)
    selected: list = []
    trace = []
    best = -1.0
    while len(selected) < data.n_features:
        name, acc = w.best_addition(selected)
        if acc <= best:
            break
        selected.append(name)
        best = acc
        trace.append(("add", name, acc))
        while len(selected) > 1:
            name, acc = w.best_removal(selected)
            if acc <= best:
                break
            selected.remove(name)
            best = acc
            trace.append(("remove", name, acc))
    return w.report(selected, trace, "sffs", wrapper)


def sfs(data: Dataset, split: SplitSpec | None = None, wrapper: str = "knn",
        k: int = 3) -> SelectionReport:
    """Plain sequential forward selection (no floating step)."""
    w = _Wrapper(data, split or SplitSpec((0.6, 0.2, 0.2)), wrapper, k)
    selected: list = []
    trace = []
    best = -1.0
    while len(selected) < data.n_features:
        name, acc = w.best_addition(selected)
        if acc <= best:
            break
        selected.append(name)
        best = acc
        trace.append(("add", name, acc))
    return w.report(selected, trace, "sfs", wrapper)


# --------------------------------------------------------------------------
# Clustering

@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int
    restart_inertias: tuple = ()


def _sq_dist(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _kmeanspp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _lloyd(X, centers, max_iter, tol, history=None):
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dist(X, centers)
        labels = np.argmin(d2, axis=1)
        if history is not None:
            history.append(float(d2[np.arange(X.shape[0]), labels].sum()))
        new = centers.copy()
        for c in range(centers.shape[0]):
            members = X[labels == c]
            if members.shape[0]:
                new[c] = members.mean(axis=0)
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift < tol:
            break
    d2 = _sq_dist(X, centers)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(X.shape[0]), labels].sum())
    if history is not None:
        history.append(inertia)
    return labels, centers, inertia, it


def kmeans(X, k: int, restarts: int = 30, seed: int = 0, max_iter: int = 300,
           tol: float = 1e-9, history: list | None = None) -> KMeansResult:
    """k-means++ seeding plus Lloyd iterations; the lowest-inertia restart wins.

    ``history``, if given, receives one list of per-iteration inertias per
    restart.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if k < 1 or k > X.shape[0]:
        raise ValueError(f"k must lie in [1, {X.shape[0]}]")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = None
    inertias = []
    for child in np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF).spawn(restarts):
        rng = np.random.default_rng(child)
        trace = [] if history is not None else None
        labels, centers, inertia, it = _lloyd(X, _kmeanspp(X, k, rng), max_iter, tol, trace)
        if history is not None:
            history.append(trace)
        inertias.append(inertia)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia, it)
    return KMeansResult(best[0], best[1], best[2], best[3], tuple(inertias))


def _comb2(x) -> float:
    x = np.asarray(x, dtype=float)
    return float((x * (x - 1) / 2).sum())


def adjusted_rand_index(labels_true, labels_pred) -> float:
    """Pair-counting Rand index corrected for chance (Hubert and Arabie)."""
    a = np.asarray(labels_true)
    b = np.asarray(labels_pred)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("label vectors must be 1-D and of equal length")
    n = a.shape[0]
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1.0)
    index = _comb2(table)
    sum_a = _comb2(table.sum(axis=1))
    sum_b = _comb2(table.sum(axis=0))
    total = n * (n - 1) / 2
    expected = sum_a * sum_b / total if total else 0.0
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        # Both partitions trivial (one cluster or all singletons).
        return 1.0 if index == max_index else 0.0
    return float((index - expected) / (max_index - expected))


@dataclass(frozen=True)
class ClusterReport:
    assignment: np.ndarray
    ari: float
    inertia: float
    k: int
    restarts: tuple  # ((inertia, ari), ...) per restart, in seed order

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "ari": self.ari,
            "inertia": self.inertia,
            "restarts": [{"inertia": i, "ari": a} for i, a in self.restarts],
            "assignment": self.assignment.tolist(),
        }

    def as_text(self) -> str:
        lines = [f"k={self.k}  best inertia={self.inertia:.6g}  ARI={self.ari:.4f}",
                 f"{'restart':>7}  {'inertia':>12}  ARI"]
        lines += [f"{i:>7}  {inertia:>12.6g}  {ari:.4f}"
                  for i, (inertia, ari) in enumerate(self.restarts)]
        return "\n".join(lines)


def kmeans_ari(data: Dataset, k: int, restarts: int = 30, seed: int = 0) -> ClusterReport:
    """Cluster all feature columns with k-means++ and score against the labels."""
    if data.labels is None:
        raise ValueError("ARI needs ground-truth labels")
    if k < 2:
        raise ValueError("k must be >= 2")
    per = []
    best = None
    for r, child in enumerate(np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF).spawn(restarts)):
        res = kmeans(data.X, k, restarts=1, seed=int(child.generate_state(1, np.uint64)[0]))
        ari = adjusted_rand_index(data.labels, res.labels)
        per.append((res.inertia, ari))
        if best is None or res.inertia < best.inertia:
            best = res
    return ClusterReport(best.labels, adjusted_rand_index(data.labels, best.labels),
                         best.inertia, k, tuple(per))
