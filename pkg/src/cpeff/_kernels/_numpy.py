"""Reference backend: loop over (test object, label), vectorise over training."""

import numpy as np


def _p(score_train, score_test, train_y, y, tau, conditional):
    if conditional:
        rel = train_y == y
        lt = np.count_nonzero(rel & (score_train < score_test))
        eq = np.count_nonzero(rel & (score_train == score_test))
        n = np.count_nonzero(rel)
    else:
        lt = np.count_nonzero(score_train < score_test)
        eq = np.count_nonzero(score_train == score_test)
        n = len(score_train)
    return (lt + tau * (eq + 1)) / (n + 1)


def count_pvalues(sp, D, train_y, kth_d, kth_key, kth_lab, counts, pick_train,
                  test_key, test_pick, test_counts, tau, conditional):
    """p-values for KNN-CP (``sp=False``) or KNN-SP scores kept as integer counts.

    ``counts[i]`` are label counts among the K nearest training neighbours
    of training example i; the test example displaces the K-th of them when
    it is nearer (ties broken by key).
    """
    m, n_labels = test_key.shape
    n = len(train_y)
    rows = np.arange(n)
    out = np.empty((m, n_labels))
    for t in range(m):
        d = D[t]
        for y in range(n_labels):
            k = test_key[t, y]
            enter = (d < kth_d) | ((d == kth_d) & (k < kth_key))
            c = counts.copy()
            c[enter, y] += 1
            c[rows[enter], kth_lab[enter]] -= 1
            if sp:
                f = c.max(axis=1)
                choice = _choices(c, f, pick_train)
                score = np.where(choice == train_y, f, -f)
                tc = test_counts[t]
                tf = tc.max()
                best = np.flatnonzero(tc == tf)
                tchoice = best[min(int(test_pick[t, y] * len(best)), len(best) - 1)]
                tscore = tf if tchoice == y else -tf
            else:
                score = c[rows, train_y]
                tscore = test_counts[t, y]
            out[t, y] = _p(score, tscore, train_y, y, tau[t, y], conditional)
    return out


def _choices(c, f, pick):
    is_best = c == f[:, None]
    n_best = is_best.sum(axis=1)
    idx = np.minimum((pick * n_best).astype(np.int64), n_best - 1)
    # position of the idx-th True in each row
    rank = np.cumsum(is_best, axis=1) - 1
    hit = is_best & (rank == idx[:, None])
    return hit.argmax(axis=1)


def _sums_with(near, d):
    """Ascending sequential sums of each row's first K-1 entries with d merged in."""
    merged = np.sort(np.concatenate([near[:, :-1], d[:, None]], axis=1), axis=1)
    return np.cumsum(merged, axis=1)[:, -1]


def ratio_pvalues(D, train_y, same_near, same_sum, diff_near, diff_sum,
                  test_same, test_diff, tau, conditional):
    """p-values for KNN-ratio scores (other-label over same-label distance sums).

    ``*_near`` hold each training example's K nearest same- and other-label
    distances in ascending order; sums are sequential so that both routes
    round identically.
    """
    m, n_labels = test_same.shape
    out = np.empty((m, n_labels))
    for t in range(m):
        d = D[t]
        for y in range(n_labels):
            same = train_y == y
            ss = same_sum.copy()
            ds = diff_sum.copy()
            e = same & (d < same_near[:, -1])
            ss[e] = _sums_with(same_near[e], d[e])
            e = ~same & (d < diff_near[:, -1])
            ds[e] = _sums_with(diff_near[e], d[e])
            with np.errstate(divide="ignore", invalid="ignore"):
                score = np.where(ss > 0, ds / np.where(ss > 0, ss, 1.0), np.inf)
            ts = test_same[t, y]
            tscore = test_diff[t, y] / ts if ts > 0 else np.inf
            out[t, y] = _p(score, tscore, train_y, y, tau[t, y], conditional)
    return out
