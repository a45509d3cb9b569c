"""Finite-sample smoothed conformal transducers and predictors.

A scorer maps a bag of examples to conformity scores (higher is more
conforming) and must be permutation-equivariant.  p-values follow the
smoothed rank formula, unconditional or label-conditional; one tau per
test object is shared by all candidate labels unless asked otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InsufficientNeighbors
from .knn import RATIO, SP, KnnScorer, check_k, example_keys, pairwise_distances


class ConformityScorer(Protocol):
    def scores(self, X: np.ndarray, y: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class ConstantScorer:
    """Every example gets the same score."""

    value: float = 0.0

    def scores(self, X, y) -> np.ndarray:
        return np.full(len(y), self.value, dtype=float)


@dataclass(frozen=True)
class Example:
    object: np.ndarray
    label: int


def _as_objects(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def _bag(train_X, train_y, x, y):
    train_X = _as_objects(train_X)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if len(train_X) and train_X.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"object has dimension {x.shape[0]}, training set {train_X.shape[1]}")
    X = np.vstack([train_X.reshape(len(train_X), x.shape[0]), x[None]])
    labels = np.append(np.asarray(train_y, dtype=np.int64), np.int64(y))
    return X, labels


def conformity_scores(scorer: ConformityScorer, train_X, train_y, x, y) -> np.ndarray:
    """Scores of z_1..z_l and the candidate (x, y), computed on the joint bag."""
    X, labels = _bag(train_X, train_y, x, y)
    return np.asarray(scorer.scores(X, labels), dtype=float)


def p_from_scores(alpha: Sequence[float], tau: float) -> float:
    """Smoothed p-value of the last score; both counts run over the whole bag."""
    alpha = np.asarray(alpha)
    last = alpha[-1]
    return (np.count_nonzero(alpha < last) + tau * np.count_nonzero(alpha == last)) / len(alpha)


def p_from_scores_label_conditional(alpha: Sequence[float], labels: Sequence[int], tau: float) -> float:
    """Smoothed p-value of the last score against earlier examples with its label."""
    alpha, labels = np.asarray(alpha), np.asarray(labels)
    last, y = alpha[-1], labels[-1]
    rel = alpha[:-1][labels[:-1] == y]
    return (np.count_nonzero(rel < last) + tau * np.count_nonzero(rel == last) + tau) / (len(rel) + 1)


def p_value(train_X, train_y, x, y, scorer: ConformityScorer, tau: float) -> float:
    _check_tau(tau)
    return p_from_scores(conformity_scores(scorer, train_X, train_y, x, y), tau)


def p_value_label_conditional(train_X, train_y, x, y, scorer: ConformityScorer, tau: float) -> float:
    _check_tau(tau)
    alpha = conformity_scores(scorer, train_X, train_y, x, y)
    labels = np.append(np.asarray(train_y, dtype=np.int64), y)
    return p_from_scores_label_conditional(alpha, labels, tau)


def _check_tau(tau):
    if not 0 <= tau <= 1:
        raise ValueError(f"tau must lie in [0, 1], got {tau!r}")


def prediction_set(pvalues: Sequence[float], epsilon: float) -> frozenset[int]:
    """Labels whose p-value is strictly above epsilon."""
    return frozenset(y for y, p in enumerate(pvalues) if p > epsilon)


@dataclass
class PValueTable:
    p: np.ndarray
    tau: np.ndarray
    seed: int
    sets: list | None = None

    def prediction_sets(self, epsilon: float) -> list[frozenset[int]]:
        return [prediction_set(row, epsilon) for row in self.p]


def draw_tau(seed: int, n_objects: int, n_labels: int, independent: bool = False) -> np.ndarray:
    """tau per (test object, label); test object t uses the stream (seed, t)."""
    tau = np.empty((n_objects, n_labels))
    for t in range(n_objects):
        rng = np.random.default_rng([seed, t])
        tau[t] = rng.random(n_labels) if independent else rng.random()
    return tau


def predict_batch(
    scorer: ConformityScorer,
    train_X,
    train_y,
    test_X,
    n_labels: int,
    seed: int,
    epsilon: float | None = None,
    conditional: bool = False,
    independent_tau: bool = False,
    fast: bool = True,
) -> PValueTable:
    """p-values of every candidate label for every test object.

    KNN scorers go through the incremental kernels unless ``fast=False``.
    """
    test_X = _as_objects(test_X)
    tau = draw_tau(seed, len(test_X), n_labels, independent_tau)
    if fast and isinstance(scorer, KnnScorer):
        sweep = KnnSweep(train_X, train_y, test_X, n_labels, scorer.seed)
        p = sweep.pvalues(scorer.variant, scorer.K, tau, conditional)
    else:
        p = np.empty((len(test_X), n_labels))
        labels_of = np.asarray(train_y, dtype=np.int64)
        for t, x in enumerate(test_X):
            for y in range(n_labels):
                alpha = conformity_scores(scorer, train_X, train_y, x, y)
                if conditional:
                    p[t, y] = p_from_scores_label_conditional(alpha, np.append(labels_of, y), tau[t, y])
                else:
                    p[t, y] = p_from_scores(alpha, tau[t, y])
    sets = None if epsilon is None else [prediction_set(row, epsilon) for row in p]
    return PValueTable(p, tau, seed, sets)


class KnnSweep:
    """Transductive KNN p-values for one train/test split, reused across K.

    Each bag differs from the training set by one example, so every
    training score changes only if the test example enters its K-neighbour
    list; the per-training-example tables below make that an O(1) update.
    """

    def __init__(self, train_X, train_y, test_X, n_labels: int, seed: int = 0):
        self.train_X = _as_objects(train_X)
        self.train_y = np.asarray(train_y, dtype=np.int64)
        self.test_X = _as_objects(test_X)
        if self.train_X.shape[1] != self.test_X.shape[1]:
            raise DimensionMismatch("training and test objects differ in dimension")
        self.n_labels = n_labels
        self.seed = seed
        m = len(self.test_X)
        self.tie, self.pick = example_keys(self.train_X, self.train_y, seed)
        tk = np.empty((m, n_labels))
        tp = np.empty((m, n_labels))
        for y in range(n_labels):
            tk[:, y], tp[:, y] = example_keys(self.test_X, np.full(m, y), seed)
        self.test_tie, self.test_pick = tk, tp
        D = pairwise_distances(self.train_X, self.train_X)
        np.fill_diagonal(D, -np.inf)
        order = np.lexsort((np.broadcast_to(self.tie, D.shape), D), axis=1)[:, 1:]
        np.fill_diagonal(D, 0.0)
        self.nn = order
        self.nn_d = np.take_along_axis(D, order, axis=1)
        self.nn_y = self.train_y[order]
        self.D_test = pairwise_distances(self.test_X, self.train_X)
        t_order = np.lexsort((np.broadcast_to(self.tie, self.D_test.shape), self.D_test), axis=1)
        self.test_nn_y = self.train_y[t_order]
        self.test_nn_d = np.take_along_axis(self.D_test, t_order, axis=1)

    def pvalues(self, variant: str, K: int, tau: np.ndarray, conditional: bool = False) -> np.ndarray:
        check_k(variant, K, len(self.train_y))
        tau = np.ascontiguousarray(tau, dtype=float)
        if variant == RATIO:
            return self._ratio(K, tau, conditional)
        return self._counts(variant == SP, K, tau, conditional)

    def _counts(self, sp, K, tau, conditional):
        n = len(self.train_y)
        rows = np.arange(n)
        first = self.nn_y[:, :K]
        counts = np.zeros((n, self.n_labels), dtype=np.int64)
        np.add.at(counts, (np.repeat(rows, K), first.ravel()), 1)
        kth = self.nn[:, K - 1]
        test_counts = np.zeros((len(self.test_X), self.n_labels), dtype=np.int64)
        np.add.at(test_counts, (np.repeat(np.arange(len(self.test_X)), K), self.test_nn_y[:, :K].ravel()), 1)
        return _kernels.count_pvalues(
            sp, self.D_test, self.train_y, np.ascontiguousarray(self.nn_d[:, K - 1]),
            np.ascontiguousarray(self.tie[kth]), np.ascontiguousarray(self.train_y[kth]), counts,
            self.pick, self.test_tie, self.test_pick, test_counts, tau, conditional,
        )

    def _ratio(self, K, tau, conditional):
        same = self.nn_y == self.train_y[:, None]
        same_near = _k_smallest(self.nn_d, same, K)
        diff_near = _k_smallest(self.nn_d, ~same, K)
        m = len(self.test_X)
        test_same = np.empty((m, self.n_labels))
        test_diff = np.empty((m, self.n_labels))
        for y in range(self.n_labels):
            is_y = self.test_nn_y == y
            test_same[:, y] = _sequential_sum(_k_smallest(self.test_nn_d, is_y, K))
            test_diff[:, y] = _sequential_sum(_k_smallest(self.test_nn_d, ~is_y, K))
        return _kernels.ratio_pvalues(
            self.D_test, self.train_y, same_near, _sequential_sum(same_near),
            diff_near, _sequential_sum(diff_near), test_same, test_diff, tau, conditional,
        )


def _k_smallest(sorted_d: np.ndarray, mask: np.ndarray, K: int) -> np.ndarray:
    """Per row: the K smallest masked distances, ascending."""
    if np.any(mask.sum(axis=1) < K):
        raise InsufficientNeighbors(f"KNN-ratio needs {K} same-label and {K} other-label neighbours")
    pos = np.argsort(~mask, axis=1, kind="stable")[:, :K]
    return np.ascontiguousarray(np.take_along_axis(sorted_d, pos, axis=1))


def _sequential_sum(near: np.ndarray) -> np.ndarray:
    return np.cumsum(near, axis=1)[:, -1]
