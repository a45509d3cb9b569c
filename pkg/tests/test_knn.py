import numpy as np
import pytest

from cpeff.errors import ConstantObject, DimensionMismatch, InsufficientNeighbors, ParseError
from cpeff.knn import (
    KnnScorer,
    check_k,
    euclidean_distance,
    example_keys,
    gaussian_blobs,
    knn_cp_scores,
    knn_ratio_scores,
    knn_sp_scores,
    load_usps,
    normalize_object,
    normalize_rows,
    pairwise_distances,
    ratio_score,
    save_usps,
    sp_choice,
)


def test_normalize_object():
    v = normalize_object([1.0, 2.0, 3.0, 6.0])
    assert v.mean() == pytest.approx(0)
    assert v.std() == pytest.approx(1)
    with pytest.raises(ConstantObject):
        normalize_object([2.0, 2.0])
    with pytest.raises(ValueError):
        normalize_object([1.0, np.nan])
    assert normalize_rows([[1, 2], [4, 0]]).shape == (2, 2)


def test_distances():
    assert euclidean_distance([0, 0], [3, 4]) == 5.0
    with pytest.raises(DimensionMismatch):
        euclidean_distance([0, 0], [1, 2, 3])
    rng = np.random.default_rng(0)
    A, B = rng.normal(size=(7, 3)), rng.normal(size=(5, 3))
    D = pairwise_distances(A, B, chunk=2)
    assert D == pytest.approx(np.linalg.norm(A[:, None] - B[None], axis=2))
    # bitwise identical whichever chunk it was computed in
    assert np.array_equal(D, pairwise_distances(A, B, chunk=256))
    assert np.array_equal(D.T, pairwise_distances(B, A))


def test_example_keys_depend_on_content_only():
    X = np.array([[0.0, 1.0], [2.0, 3.0], [0.0, 1.0]])
    y = np.array([0, 1, 1])
    tie, pick = example_keys(X, y, seed=4)
    tie2, _ = example_keys(X[::-1], y[::-1], seed=4)
    assert np.array_equal(tie[::-1], tie2)
    assert tie[0] != tie[2]  # same object, different label
    assert not np.array_equal(tie, example_keys(X, y, seed=5)[0])
    assert np.all((0 <= pick) & (pick < 1))


def test_check_k():
    check_k("cp", 2, 5)
    with pytest.raises(ValueError):
        check_k("cp", 1, 5)
    with pytest.raises(ValueError):
        check_k("ratio", 0, 5)
    with pytest.raises(ValueError):
        check_k("tangent", 3, 5)
    with pytest.raises(InsufficientNeighbors):
        check_k("sp", 5, 5)


def test_sp_choice():
    assert sp_choice(np.array([1, 3, 0]), 0.9) == 1
    assert sp_choice(np.array([2, 2, 0]), 0.1) == 0
    assert sp_choice(np.array([2, 2, 0]), 0.6) == 1


def test_cp_scores_by_hand():
    X = np.array([[0.0], [1.0], [2.0], [10.0]])
    y = np.array([0, 0, 1, 1])
    s = knn_cp_scores(X, y, K=2)
    # nearest two: 0 -> {1, 2}; 1 -> {0, 2}; 2 -> {1, 0}; 3 -> {2, 1}
    assert s.tolist() == [0.5, 0.5, 0.0, 0.5]


def test_sp_scores_sign():
    X = np.array([[0.0], [0.1], [0.2], [5.0], [5.1]])
    y = np.array([0, 0, 0, 1, 1])
    s = knn_sp_scores(X, y, K=2)
    assert s[0] == 1.0
    assert s[3] == pytest.approx(-0.5) or s[3] == 0.5


def test_ratio_scores():
    X = np.array([[0.0], [1.0], [3.0], [7.0]])
    y = np.array([0, 0, 1, 1])
    s = knn_ratio_scores(X, y, K=1)
    assert s[0] == pytest.approx(3.0 / 1.0)
    assert s[3] == pytest.approx(6.0 / 4.0)
    assert ratio_score(1.0, 0.0) == float("inf")
    dup = knn_ratio_scores(np.array([[0.0], [0.0], [2.0], [2.0]]), y, K=1)
    assert np.all(np.isinf(dup))
    with pytest.raises(InsufficientNeighbors):
        knn_ratio_scores(X, np.array([0, 1, 1, 1]), K=2)


@pytest.mark.parametrize("variant", ["ratio", "cp", "sp"])
def test_scores_permutation_equivariant_with_ties(variant):
    rng = np.random.default_rng(1)
    X = rng.integers(0, 3, size=(25, 2)).astype(float)
    y = rng.integers(0, 3, size=25)
    scorer = KnnScorer(3, variant, seed=7, n_labels=3)
    s = scorer.scores(X, y)
    for _ in range(5):
        perm = rng.permutation(25)
        assert np.array_equal(scorer.scores(X[perm], y[perm]), s[perm])


def test_usps_round_trip(tmp_path):
    X, y = gaussian_blobs(20, 0, [[0, 0, 0], [1, 1, 1]])
    path = tmp_path / "d.txt"
    save_usps(path, X, y)
    X2, y2 = load_usps(path, dim=3)
    assert np.array_equal(X, X2) and np.array_equal(y, y2)
    assert load_usps(path, dim=None)[0].shape == (20, 3)


@pytest.mark.parametrize("line, msg", [
    ("11 0 0", "label"),
    ("1.5 0 0", "label"),
    ("1 0", "expected 2"),
    ("1 0 nan", "non-finite"),
    ("x 0 0", ":1:"),
])
def test_usps_errors(tmp_path, line, msg):
    path = tmp_path / "bad.txt"
    path.write_text(line + "\n")
    with pytest.raises(ParseError, match=msg):
        load_usps(path, dim=2)


def test_usps_default_dimension(tmp_path):
    path = tmp_path / "short.txt"
    path.write_text("3 " + " ".join(["0"] * 255) + "\n")
    with pytest.raises(ParseError):
        load_usps(path)
