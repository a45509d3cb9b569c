"""Compiled backend; same contract as the numpy one, plain loops."""

import numpy as np
from numba import njit


@njit(cache=True)
def _pick(c, f, u):
    n_best = 0
    for j in range(c.shape[0]):
        if c[j] == f:
            n_best += 1
    idx = min(int(u * n_best), n_best - 1)
    for j in range(c.shape[0]):
        if c[j] == f:
            if idx == 0:
                return j
            idx -= 1
    return -1


@njit(cache=True)
def count_pvalues(sp, D, train_y, kth_d, kth_key, kth_lab, counts, pick_train,
                  test_key, test_pick, test_counts, tau, conditional):
    m, n_labels = test_key.shape
    n = train_y.shape[0]
    out = np.empty((m, n_labels))
    c = np.empty(n_labels, dtype=counts.dtype)
    for t in range(m):
        for y in range(n_labels):
            k = test_key[t, y]
            if sp:
                tc = test_counts[t]
                tf = tc.max()
                tscore = tf if _pick(tc, tf, test_pick[t, y]) == y else -tf
            else:
                tscore = test_counts[t, y]
            lt = 0
            eq = 0
            rel = 0
            for i in range(n):
                yi = train_y[i]
                if conditional and yi != y:
                    continue
                d = D[t, i]
                enter = d < kth_d[i] or (d == kth_d[i] and k < kth_key[i])
                for j in range(n_labels):
                    c[j] = counts[i, j]
                if enter:
                    c[y] += 1
                    c[kth_lab[i]] -= 1
                if sp:
                    f = c.max()
                    s = f if _pick(c, f, pick_train[i]) == yi else -f
                else:
                    s = c[yi]
                rel += 1
                if s < tscore:
                    lt += 1
                elif s == tscore:
                    eq += 1
            out[t, y] = (lt + tau[t, y] * (eq + 1)) / (rel + 1)
    return out


@njit(cache=True)
def _sum_with(near, d):
    # ascending sequential sum of near[:-1] with d merged in
    acc = 0.0
    inserted = False
    for j in range(near.shape[0] - 1):
        v = near[j]
        if not inserted and d < v:
            acc += d
            inserted = True
        acc += v
    if not inserted:
        acc += d
    return acc


@njit(cache=True)
def ratio_pvalues(D, train_y, same_near, same_sum, diff_near, diff_sum,
                  test_same, test_diff, tau, conditional):
    m, n_labels = test_same.shape
    n = train_y.shape[0]
    K = same_near.shape[1]
    out = np.empty((m, n_labels))
    for t in range(m):
        for y in range(n_labels):
            ts = test_same[t, y]
            tscore = test_diff[t, y] / ts if ts > 0 else np.inf
            lt = 0
            eq = 0
            rel = 0
            for i in range(n):
                yi = train_y[i]
                if conditional and yi != y:
                    continue
                d = D[t, i]
                ss = same_sum[i]
                ds = diff_sum[i]
                if yi == y:
                    if d < same_near[i, K - 1]:
                        ss = _sum_with(same_near[i], d)
                elif d < diff_near[i, K - 1]:
                    ds = _sum_with(diff_near[i], d)
                s = ds / ss if ss > 0 else np.inf
                rel += 1
                if s < tscore:
                    lt += 1
                elif s == tscore:
                    eq += 1
            out[t, y] = (lt + tau[t, y] * (eq + 1)) / (rel + 1)
    return out
