import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from cpeff import _kernels
from cpeff._kernels import _numba, _numpy
from cpeff.errors import DimensionMismatch, InsufficientNeighbors
from cpeff.knn import KnnScorer, gaussian_blobs
from cpeff.transducer import (
    ConstantScorer,
    KnnSweep,
    conformity_scores,
    draw_tau,
    p_from_scores,
    p_from_scores_label_conditional,
    p_value,
    p_value_label_conditional,
    predict_batch,
    prediction_set,
)


def test_p_from_scores_by_hand():
    alpha = [0.1, 0.5, 0.5, 0.9, 0.5]
    assert p_from_scores(alpha, 0.5) == pytest.approx((1 + 0.5 * 3) / 5)
    labels = [0, 1, 0, 1, 1]
    # same label as the candidate: 0.5 and 0.9 -> one equal, none below
    assert p_from_scores_label_conditional(alpha, labels, 0.5) == pytest.approx((0 + 0.5 + 0.5) / 3)


def test_constant_scorer_gives_tau():
    X = np.zeros((6, 1))
    y = np.array([0, 1, 0, 1, 0, 1])
    assert p_value(X, y, [0.0], 1, ConstantScorer(), 0.3) == pytest.approx(0.3)
    assert p_value_label_conditional(X, y, [0.0], 1, ConstantScorer(), 0.3) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        p_value(X, y, [0.0], 1, ConstantScorer(), 1.5)


def test_candidate_joins_the_bag():
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([0, 0, 1])
    s = conformity_scores(KnnScorer(2, "cp"), X, y, [1.9], 1)
    assert len(s) == 4
    with pytest.raises(DimensionMismatch):
        conformity_scores(ConstantScorer(), X, y, [1.0, 2.0], 0)


def test_prediction_set_strict():
    assert prediction_set([0.1, 0.2, 0.05], 0.1) == {1}


def test_draw_tau():
    a, b = draw_tau(3, 4, 3), draw_tau(3, 4, 3)
    assert np.array_equal(a, b)
    assert np.all(a == a[:, :1])
    ind = draw_tau(3, 4, 3, independent=True)
    assert not np.all(ind == ind[:, :1])
    # prefix stable: object t's tau does not depend on the test set size
    assert np.array_equal(draw_tau(3, 2, 3), a[:2])


def tie_heavy(seed, n, m, labels=3):
    rng = np.random.default_rng(seed)
    trX = rng.integers(0, 4, size=(n, 2)).astype(float)
    teX = rng.integers(0, 4, size=(m, 2)).astype(float)
    return trX, rng.integers(0, labels, size=n), teX


@pytest.mark.parametrize("conditional", [False, True])
@pytest.mark.parametrize("variant, K", [("cp", 2), ("cp", 5), ("sp", 1), ("sp", 4), ("ratio", 1), ("ratio", 3)])
def test_fast_route_matches_bag_route(variant, K, conditional):
    trX, trY, teX = tie_heavy(K + 10 * conditional, 40, 8)
    scorer = KnnScorer(K, variant, seed=2, n_labels=3)
    fast = predict_batch(scorer, trX, trY, teX, 3, seed=9, conditional=conditional)
    slow = predict_batch(scorer, trX, trY, teX, 3, seed=9, conditional=conditional, fast=False)
    assert np.allclose(fast.p, slow.p, rtol=0, atol=1e-12)


def test_fast_route_on_continuous_data():
    X, y = gaussian_blobs(60, 3, [[0, 0], [1, 1], [2, 0]])
    teX, _ = gaussian_blobs(10, 4, [[0, 0], [1, 1], [2, 0]])
    for variant in ("cp", "sp", "ratio"):
        s = KnnScorer(4, variant, seed=1, n_labels=3)
        a = predict_batch(s, X, y, teX, 3, seed=0)
        b = predict_batch(s, X, y, teX, 3, seed=0, fast=False)
        assert np.allclose(a.p, b.p, rtol=0, atol=1e-12)


def test_prediction_sets_from_table():
    trX, trY, teX = tie_heavy(0, 30, 5)
    t = predict_batch(KnnScorer(3, "cp"), trX, trY, teX, 3, seed=1, epsilon=0.2)
    assert t.sets == t.prediction_sets(0.2)


def test_insufficient_neighbours():
    X = np.array([[0.0], [1.0], [2.0]])
    sweep = KnnSweep(X, np.array([0, 0, 1]), np.array([[0.5]]), 2)
    tau = draw_tau(0, 1, 2)
    with pytest.raises(InsufficientNeighbors):
        sweep.pvalues("cp", 3, tau)
    with pytest.raises(InsufficientNeighbors):
        sweep.pvalues("ratio", 2, tau)


@pytest.mark.parametrize("variant", ["cp", "sp", "ratio"])
@pytest.mark.parametrize("conditional", [False, True])
def test_backends_agree(variant, conditional):
    trX, trY, teX = tie_heavy(5, 80, 12)
    sweep = KnnSweep(trX, trY, teX, 3, seed=3)
    tau = draw_tau(1, 12, 3)
    out = []
    for backend in (_numba, _numpy):
        saved = _kernels.count_pvalues, _kernels.ratio_pvalues
        _kernels.count_pvalues, _kernels.ratio_pvalues = backend.count_pvalues, backend.ratio_pvalues
        try:
            out.append(sweep.pvalues(variant, 3, tau, conditional))
        finally:
            _kernels.count_pvalues, _kernels.ratio_pvalues = saved
    assert np.allclose(out[0], out[1], rtol=0, atol=1e-12)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, CPEFF_DISABLE_NUMBA="1")
    code = "import cpeff._kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@pytest.mark.parametrize("conditional", [False, True])
def test_knn_p_values_are_uniform_under_exchangeability(conditional):
    rng = np.random.default_rng(11 + conditional)
    centers = [[0, 0], [1, 0]]
    ps = []
    for s in range(1500):
        X, y = gaussian_blobs(25, int(rng.integers(2**31)), centers)
        X = np.round(X, 1)  # ties on purpose
        tau = draw_tau(s, 1, 2)
        sweep = KnnSweep(X[:-1], y[:-1], X[-1:], 2, seed=s)
        ps.append(sweep.pvalues("cp", 3, tau, conditional)[0, y[-1]])
    assert stats.kstest(ps, "uniform").pvalue > 0.001
