"""Nearest-neighbour conformity measures, distances and data loading.

Three scorers are provided: KNN-ratio, KNN-CP (fraction of the K nearest
neighbours sharing the label) and KNN-SP (signed neighbourhood
predictability).  Random choices (ties at the K-th distance, ties in the
arg max) are driven by a per-example key hashed from the seed and the
example's content, so every scorer is exactly permutation-equivariant and
deterministic for a fixed seed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConstantObject, DimensionMismatch, InsufficientNeighbors, ParseError

RATIO = "ratio"
CP = "cp"
SP = "sp"
VARIANTS = (RATIO, CP, SP)

_MIN_K = {RATIO: 1, CP: 2, SP: 1}
_TWO_POW_53 = float(2**53)


def normalize_object(v) -> np.ndarray:
    """Shift to mean 0 and scale to population standard deviation 1."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("feature vector has non-finite entries")
    sd = v.std()
    if sd == 0:
        raise ConstantObject("cannot normalise a constant feature vector")
    return (v - v.mean()) / sd


def normalize_rows(X) -> np.ndarray:
    return np.array([normalize_object(row) for row in np.asarray(X, dtype=float)])


def euclidean_distance(u, v) -> float:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimensions differ: {u.shape} vs {v.shape}")
    return float(pairwise_distances(u[None], v[None])[0, 0])


def pairwise_distances(A, B, chunk: int = 256) -> np.ndarray:
    """Euclidean distances between the rows of A and B.

    Computed from explicit differences so that d(u, v) is bit-for-bit the
    same whichever batch it is computed in; exact ties matter downstream.
    """
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"incompatible shapes {A.shape} and {B.shape}")
    out = np.empty((len(A), len(B)))
    for s in range(0, len(A), chunk):
        diff = A[s:s + chunk, None, :] - B[None, :, :]
        out[s:s + chunk] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def example_keys(X, y, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two uniforms in [0, 1) per example, hashed from (seed, object, label).

    The first orders tied neighbours, the second picks among tied labels.
    """
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=np.int64)
    tie = np.empty(len(X))
    pick = np.empty(len(X))
    prefix = int(seed).to_bytes(8, "little", signed=True)
    for i in range(len(X)):
        h = hashlib.blake2b(prefix + X[i].tobytes() + int(y[i]).to_bytes(8, "little", signed=True), digest_size=16).digest()
        tie[i] = (int.from_bytes(h[:8], "little") >> 11) / _TWO_POW_53
        pick[i] = (int.from_bytes(h[8:], "little") >> 11) / _TWO_POW_53
    return tie, pick


def check_k(variant: str, K: int, n: int) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if K < _MIN_K[variant]:
        raise ValueError(f"K must be at least {_MIN_K[variant]} for KNN-{variant}")
    if K >= n:
        raise InsufficientNeighbors(f"K={K} needs more than {K} examples, got {n}")


def sp_choice(counts: np.ndarray, pick: float) -> int:
    """Arg max of ``counts``, ties broken by the uniform ``pick``."""
    best = np.flatnonzero(counts == counts.max())
    return int(best[min(int(pick * len(best)), len(best) - 1)])


@dataclass(frozen=True)
class KnnScorer:
    """Bag scorer: all scores of a bag of examples computed jointly.

    This is the reference implementation; :mod:`cpeff.transducer` uses a
    faster incremental route for the same scores.
    """

    K: int
    variant: str = CP
    seed: int = 0
    n_labels: int | None = None

    def scores(self, X, y) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        n = len(X)
        check_k(self.variant, self.K, n)
        D = pairwise_distances(X, X)
        tie, pick = example_keys(X, y, self.seed)
        n_labels = self.n_labels or int(y.max()) + 1
        out = np.empty(n)
        for i in range(n):
            others = np.array([j for j in range(n) if j != i], dtype=np.int64)
            if self.variant == RATIO:
                out[i] = _ratio(D[i, others], y[others] == y[i], self.K)
                continue
            order = others[np.lexsort((tie[others], D[i, others]))]
            counts = np.bincount(y[order[: self.K]], minlength=n_labels)
            if self.variant == CP:
                out[i] = counts[y[i]] / self.K
            else:
                f = counts.max() / self.K
                out[i] = f if sp_choice(counts, pick[i]) == y[i] else -f
        return out


def _ratio(d: np.ndarray, same: np.ndarray, K: int) -> float:
    ds, dd = np.sort(d[same]), np.sort(d[~same])
    if len(ds) < K or len(dd) < K:
        raise InsufficientNeighbors(f"KNN-ratio needs {K} same-label and {K} other-label neighbours")
    # ascending sequential sums, matching the incremental route bit for bit
    num, den = float(np.cumsum(dd[:K])[-1]), float(np.cumsum(ds[:K])[-1])
    return ratio_score(num, den)


def ratio_score(num: float, den: float) -> float:
    """sum of other-label distances over same-label ones; +inf when the latter is 0."""
    return num / den if den > 0 else float("inf")


def knn_ratio_scores(X, y, K: int) -> np.ndarray:
    return KnnScorer(K, RATIO).scores(X, y)


def knn_cp_scores(X, y, K: int, seed: int = 0, n_labels: int | None = None) -> np.ndarray:
    return KnnScorer(K, CP, seed, n_labels).scores(X, y)


def knn_sp_scores(X, y, K: int, seed: int = 0, n_labels: int | None = None) -> np.ndarray:
    return KnnScorer(K, SP, seed, n_labels).scores(X, y)


# ------------------------------------------------------------------ data files


def load_usps(path, dim: int | None = 256, n_labels: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Read ``label v1 ... v_dim`` lines.  ``dim=None`` accepts any fixed width."""
    labels, rows = [], []
    width = dim
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        try:
            label = int(float(parts[0]))
            values = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        if float(parts[0]) != label or not 0 <= label < n_labels:
            raise ParseError(f"{path}:{lineno}: label {parts[0]} outside 0..{n_labels - 1}")
        if width is None:
            width = len(values)
        if len(values) != width:
            raise ParseError(f"{path}:{lineno}: expected {width} features, got {len(values)}")
        if not np.all(np.isfinite(values)):
            raise ParseError(f"{path}:{lineno}: non-finite feature")
        labels.append(label)
        rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no examples")
    return np.array(rows), np.array(labels, dtype=np.int64)


def save_usps(path, X, y) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for label, row in zip(y, X):
            fh.write(" ".join([str(int(label))] + [format(float(v), ".17g") for v in row]) + "\n")


def gaussian_blobs(n: int, seed: int, centers, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """i.i.d. labelled points: uniform label, isotropic Gaussian around its centre."""
    centers = np.asarray(centers, dtype=float)
    rng = np.random.default_rng(seed)
    y = rng.integers(0, len(centers), size=n)
    X = centers[y] + scale * rng.standard_normal((n, centers.shape[1]))
    return X, y.astype(np.int64)
