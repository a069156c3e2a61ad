import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from redgp.dataset import Dataset, load_iris
from redgp.evaluation import (
    SplitSpec,
    _Wrapper,
    accuracy,
    adjusted_rand_index,
    classify_report,
    info_gain,
    kmeans,
    kmeans_ari,
    knn_classify,
    mdl_cut_points,
    nb_classify,
    rank_features,
    sffs,
    sfs,
    split_indices,
)

import oracles


@pytest.fixture(scope="module")
def iris():
    return load_iris()


def _entropy_bits(labels) -> float:
    _, counts = np.unique(labels, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


# -- splitting -------------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.integers(3, 300), st.integers(0, 2**63 - 1))
def test_split_partitions_exactly(n, seed):
    labels = np.random.default_rng(seed).integers(0, 3, n)
    parts = split_indices(labels, SplitSpec((0.6, 0.2, 0.2), seed))
    joined = np.concatenate(parts)
    np.testing.assert_array_equal(np.sort(joined), np.arange(n))
    again = split_indices(labels, SplitSpec((0.6, 0.2, 0.2), seed))
    for a, b in zip(parts, again):
        np.testing.assert_array_equal(a, b)


def test_split_sizes_and_stratification(iris):
    train, val, test = split_indices(iris.labels, SplitSpec((0.7, 0.3)))
    assert (len(train), len(val), len(test)) == (105, 0, 45)
    for part in (train, test):
        _, counts = np.unique(iris.labels[part], return_counts=True)
        assert counts.max() - counts.min() == 0
    train, val, test = split_indices(iris.labels, SplitSpec.parse("60,20,20"))
    assert (len(train), len(val), len(test)) == (90, 30, 30)


def test_split_seed_matters():
    a = split_indices(100, SplitSpec(shuffle_seed=1))
    b = split_indices(100, SplitSpec(shuffle_seed=2))
    assert not np.array_equal(a[0], b[0])


@pytest.mark.parametrize("fractions", [(0.5, 0.6), (0.5, -0.1, 0.6), (1.0,)])
def test_split_spec_validation(fractions):
    with pytest.raises(ValueError):
        SplitSpec(fractions)


def test_split_parse_forms():
    assert SplitSpec.parse("70,30").fractions == (0.7, 0.0, 0.3)
    assert SplitSpec.parse("0.6,0.2,0.2").fractions == (0.6, 0.2, 0.2)


# -- information gain ------------------------------------------------------------

def test_balanced_binary_label_is_one_bit():
    y = np.repeat([0, 1], 50)
    assert info_gain(y.astype(float), y) == pytest.approx(1.0, abs=1e-12)


def test_shuffled_feature_gets_zero():
    rng = np.random.default_rng(0)
    y = np.repeat([0, 1, 2], 50)
    assert info_gain(rng.normal(size=150), y) == 0.0
    assert mdl_cut_points(rng.normal(size=150), y) == []


def test_iris_values(iris):
    expected = {"F0": 0.698, "F1": 0.376, "F2": 1.418, "F3": 1.378}
    for name, ig in expected.items():
        assert info_gain(iris.column(name), iris.labels) == pytest.approx(ig, abs=0.05)
    assert rank_features(iris).names == ["F2", "F3", "F0", "F1"]


def test_one_feature_report(iris):
    d = Dataset(("F2",), iris.X[:, 2:3], iris.labels)
    assert len(rank_features(d).rows) == 1


def test_duplicate_columns_tie_and_sort_by_name(iris):
    d = Dataset(("b", "a"), np.column_stack([iris.column("F3")] * 2), iris.labels)
    rows = rank_features(d).rows
    assert rows[0][1] == rows[1][1] and [n for n, _ in rows] == ["a", "b"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_gain_bounded_by_label_entropy(seed, n_classes):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, n_classes, 120)
    x = y + rng.normal(scale=rng.uniform(0.01, 2.0), size=120)
    ig = info_gain(x, y)
    assert 0.0 <= ig <= _entropy_bits(y) + 1e-12


def test_info_gain_needs_labels():
    with pytest.raises(ValueError):
        info_gain(np.arange(5.0), None)


# -- classifiers -----------------------------------------------------------------

def test_knn_identical_point():
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(30, 3)), rng.integers(0, 4, 30)
    np.testing.assert_array_equal(knn_classify(X, y, X, k=1), y)


def test_knn_distance_tie_prefers_lower_index():
    X = np.array([[0.0], [2.0]])
    assert knn_classify(X, ["a", "b"], [[1.0]], k=1, normalize=False)[0] == "a"
    assert knn_classify(X, ["b", "a"], [[1.0]], k=1, normalize=False)[0] == "b"


def test_knn_vote_tie_prefers_frequent_class():
    X = np.array([[0.0], [1.0], [10.0], [11.0], [12.0]])
    y = np.array(["a", "b", "c", "c", "c"])
    # k=2 gives one vote each to a and b; equal training frequency -> label order
    assert knn_classify(X, y, [[0.5]], k=2, normalize=False)[0] == "a"
    y2 = np.array(["b", "a", "b", "c", "c"])
    assert knn_classify(X, y2, [[0.5]], k=2, normalize=False)[0] == "b"


def _blobs(seed, sep=10.0, n=60):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n, 2)), rng.normal(sep, 1, (n, 2))])
    y = np.repeat([0, 1], n)
    return X, y


def test_separable_blobs():
    X, y = _blobs(2)
    tr, _, te = split_indices(y, SplitSpec((0.7, 0.3)))
    assert accuracy(y[te], knn_classify(X[tr], y[tr], X[te])) == 1.0
    assert accuracy(y[te], nb_classify(X[tr], y[tr], X[te])) == 1.0


def test_nb_single_feature_two_gaussians():
    rng = np.random.default_rng(3)
    x = np.concatenate([rng.normal(0, 1, 100), rng.normal(10, 1, 100)])
    y = np.repeat(["lo", "hi"], 100)
    tr, _, te = split_indices(y, SplitSpec((0.5, 0.5)))
    assert accuracy(y[te], nb_classify(x[tr], y[tr], x[te])) >= 0.99


def test_nb_zero_variance_feature():
    X = np.array([[1.0, 0.1], [1.0, 0.2], [2.0, 5.0], [2.0, 5.3]])
    y = np.array([0, 0, 1, 1])
    pred = nb_classify(X, y, [[1.0, 0.15], [2.0, 5.1]])
    np.testing.assert_array_equal(pred, [0, 1])


def test_nb_empty_class():
    with pytest.raises(ValueError, match="no training"):
        nb_classify([[0.0], [1.0]], [0, 0], [[0.5]], classes=[0, 1])


def test_empty_train_rejected():
    with pytest.raises(ValueError):
        knn_classify(np.zeros((0, 2)), [], [[0.0, 0.0]])
    with pytest.raises(ValueError):
        knn_classify([[0.0]], [0], [[0.0]], k=0)


def test_iris_classifiers(iris):
    rep = classify_report(iris, SplitSpec((0.7, 0.3)))
    assert rep.n_train == 105 and rep.n_test == 45
    assert rep.accuracies["knn"] >= 0.90 and rep.accuracies["nb"] >= 0.90


def test_single_class_dataset():
    rng = np.random.default_rng(4)
    d = Dataset(("a", "b"), rng.normal(size=(20, 2)), np.array(["only"] * 20))
    assert classify_report(d).accuracies == {"knn": 1.0, "nb": 1.0}


# -- wrapper selection -----------------------------------------------------------

def _toy(seed=0, n=150):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = (X[:, 0] > 0).astype(int) + 2 * (X[:, 2] > 0).astype(int)
    return Dataset(("f1", "f2", "f3"), X, y)


def test_toy_matches_exhaustive_and_greedy_oracles():
    d = _toy()
    split = SplitSpec((0.6, 0.2, 0.2))
    w = _Wrapper(d, split, "knn", 3)
    best, best_acc = oracles.best_subset(d.feature_names, w.score)
    greedy, greedy_acc = oracles.greedy_forward(d.feature_names, w.score)
    assert best == {"f1", "f3"} and greedy == best
    rep = sffs(d, split)
    assert set(rep.selected) == {"f1", "f3"}
    assert rep.validation_accuracy == best_acc == greedy_acc


def test_perfect_predictor_selected_alone():
    rng = np.random.default_rng(5)
    y = rng.integers(0, 3, 120)
    X = np.column_stack([rng.normal(size=120), y * 5.0, rng.normal(size=120)])
    rep = sffs(Dataset(("n1", "p", "n2"), X, y))
    assert rep.selected == ("p",) and rep.validation_accuracy == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_trace_strictly_increasing_and_beats_forward_only(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(80, 6))
    y = (X[:, 0] + X[:, 1] * X[:, 2] + 0.5 * rng.normal(size=80) > 0).astype(int)
    d = Dataset(tuple(f"f{i}" for i in range(6)), X, y)
    rep = sffs(d)
    accs = [v for _, _, v in rep.trace]
    assert all(b > a for a, b in zip(accs, accs[1:]))
    assert rep.selected and rep.validation_accuracy == accs[-1]
    assert rep.validation_accuracy >= sfs(d).validation_accuracy


def test_iris_selection_is_small(iris):
    rep = sffs(iris)
    assert 1 <= len(rep.selected) <= 2 and rep.test_accuracy >= 0.90
    assert "k-NN" in rep.note and rep.to_dict()["wrapper"] == "knn"


def test_nb_wrapper_and_errors(iris):
    assert sffs(iris, wrapper="nb").method == "sffs"
    with pytest.raises(ValueError):
        sffs(iris, wrapper="svm")
    with pytest.raises(ValueError):
        sffs(iris, SplitSpec((0.7, 0.3)))  # no validation partition
    with pytest.raises(ValueError):
        sffs(Dataset(("a",), iris.X[:, :1]))


# -- clustering ------------------------------------------------------------------

def test_ari_trivial_cases():
    y = np.repeat([0, 1, 2], 10)
    assert adjusted_rand_index(y, y) == 1.0
    assert adjusted_rand_index(y, np.zeros(30)) <= 1e-9
    assert adjusted_rand_index(y, (y + 1) % 3) == 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(2, 6))
def test_ari_matches_reference_and_permutation(seed, ka, kb):
    rng = np.random.default_rng(seed)
    a, b = rng.integers(0, ka, 50), rng.integers(0, kb, 50)
    ours = adjusted_rand_index(a, b)
    assert ours == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)
    relabel = rng.permutation(kb)
    assert adjusted_rand_index(a, relabel[b]) == pytest.approx(ours, abs=1e-12)


def test_ari_one_iff_same_partition():
    a = np.array([0, 0, 1, 1, 2])
    assert adjusted_rand_index(a, [5, 5, 7, 7, 9]) == 1.0
    assert adjusted_rand_index(a, [5, 5, 7, 9, 9]) < 1.0


def test_inertia_non_increasing():
    X, _ = _blobs(6, sep=3.0)
    history = []
    kmeans(X, 4, restarts=5, seed=1, history=history)
    assert len(history) == 5
    for trace in history:
        assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(trace, trace[1:]))


def test_kmeans_recovers_blobs_and_is_deterministic():
    X, y = _blobs(7)
    a = kmeans(X, 2, restarts=3, seed=9)
    assert adjusted_rand_index(y, a.labels) == 1.0
    b = kmeans(X, 2, restarts=3, seed=9)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.inertia == min(a.restart_inertias)


def test_kmeans_errors():
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), 4)
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), 2, restarts=0)


def test_kmeans_ari_report(iris):
    rep = kmeans_ari(iris, 3, restarts=10)
    assert len(rep.restarts) == 10
    assert rep.inertia == min(i for i, _ in rep.restarts)
    assert 0.5 < rep.ari <= 1.0
    assert len(rep.to_dict()["assignment"]) == 150
    with pytest.raises(ValueError):
        kmeans_ari(iris, 1)
    with pytest.raises(ValueError):
        kmeans_ari(Dataset(iris.feature_names, iris.X), 3)


def test_accuracy_errors():
    with pytest.raises(ValueError):
        accuracy([], [])
    with pytest.raises(ValueError):
        accuracy([1, 2], [1])
    assert math.isclose(accuracy([1, 2, 3, 4], [1, 2, 0, 0]), 0.5)


def test_regenerated_columns_rank_identically(iris, tmp_path):
    from redgp.dataset import augment, read_augmented, regenerate_rf, write_augmented
    from redgp.evolution import EvolutionConfig, run
    cfg = EvolutionConfig(population_size=20, generations=1, elitism_count=2)
    results = {n: run(iris.column(n), cfg, source=n) for n in iris.feature_names}
    csv_path, _ = write_augmented(augment(iris, results), tmp_path / "a")
    back = read_augmented(csv_path, label_col="class")
    X = back.data.X.copy()
    for name, prov in back.provenance.items():
        X[:, back.data.feature_names.index(name)] = regenerate_rf(
            prov.tree, back.data.column(prov.source))
    regen = Dataset(back.data.feature_names, X, back.data.labels)
    assert rank_features(regen).rows == rank_features(back.data).rows
