"""The ten efficiency criteria, empirical and idealised.

Idealised values are exact expectations over the object (or example) drawn
from Q and the smoothing variable tau ~ U[0, 1].  Per object the p-values
are affine in tau, so every order statistic is piecewise linear in tau and
every prediction-set count is a step function of tau with thresholds
``(epsilon - a) / b``; both integrate in closed form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate

from .core import LARGER, SMALLER, CriterionValue, FiniteJoint, Number, check_epsilon
from .errors import MissingEpsilon, MissingLabels, TooFewLabels
from .idealized import AffinePValue, IdealizedTransducer


class Criterion(str, enum.Enum):
    S = "S"
    N = "N"
    U = "U"
    F = "F"
    M = "M"
    E = "E"
    OU = "OU"
    OF = "OF"
    OM = "OM"
    OE = "OE"

    @property
    def needs_epsilon(self) -> bool:
        return self in _EPS_DEPENDENT

    @property
    def observed(self) -> bool:
        return self.value.startswith("O")

    @property
    def needs_two_labels(self) -> bool:
        return self in (Criterion.U, Criterion.F, Criterion.OU)


_EPS_DEPENDENT = frozenset({Criterion.N, Criterion.M, Criterion.E, Criterion.OM, Criterion.OE})

ALL_CRITERIA = tuple(Criterion)
EPSILON_FREE = tuple(c for c in Criterion if not c.needs_epsilon)
EPSILON_DEPENDENT = tuple(c for c in Criterion if c.needs_epsilon)


@dataclass(frozen=True)
class SPhi:
    """Sum of phi(p) for a strictly increasing C^1 phi; ``phi=None`` is the identity."""

    phi: Callable[[float], float] | None = None
    name: str = "S_PHI"

    needs_epsilon = False
    observed = False
    needs_two_labels = False
    value = "S_PHI"


CriterionLike = Union[Criterion, SPhi, str]


def as_criterion(c: CriterionLike) -> Criterion | SPhi:
    if isinstance(c, (Criterion, SPhi)):
        return c
    if str(c).upper() == "S_PHI":
        return SPhi()
    return Criterion(str(c).upper())


def _value(criterion, primary, secondary=None) -> CriterionValue:
    if criterion in (Criterion.U, Criterion.F):
        return CriterionValue(primary, secondary, SMALLER, SMALLER)
    if criterion in (Criterion.M, Criterion.E):
        return CriterionValue(primary, secondary, SMALLER, LARGER)
    return CriterionValue(primary)


# ------------------------------------------------------ piecewise linear in tau


@dataclass(frozen=True)
class PiecewiseLinear:
    """f on [0, 1]: ``pieces[i] = (intercept, slope)`` on [breakpoints[i], breakpoints[i+1])."""

    breakpoints: tuple
    pieces: tuple

    def __post_init__(self):
        if len(self.breakpoints) != len(self.pieces) + 1:
            raise ValueError("need one more breakpoint than pieces")
        if self.breakpoints[0] != 0 or self.breakpoints[-1] != 1:
            raise ValueError("domain must be exactly [0, 1]")

    def __call__(self, tau: Number) -> Number:
        for i, (c0, c1) in enumerate(self.pieces):
            if tau < self.breakpoints[i + 1] or i == len(self.pieces) - 1:
                return c0 + c1 * tau
        raise AssertionError("unreachable")

    @classmethod
    def line(cls, intercept: Number, slope: Number) -> "PiecewiseLinear":
        return cls((0, 1), ((intercept, slope),))

    @classmethod
    def from_sorted_lines(
        cls,
        lines: Sequence[tuple[Number, Number]],
        combine: Callable[[list[tuple[Number, Number]]], tuple[Number, Number]],
    ) -> "PiecewiseLinear":
        """Apply ``combine`` to the lines sorted in decreasing value, interval by interval.

        ``combine`` must return a linear combination of its inputs, e.g.
        ``lambda s: s[1]`` for the second largest.
        """
        cuts = {0, 1}
        for i in range(len(lines)):
            a1, b1 = lines[i]
            for j in range(i + 1, len(lines)):
                a2, b2 = lines[j]
                if b1 != b2:
                    t = (a2 - a1) / (b1 - b2)
                    if 0 < t < 1:
                        cuts.add(t)
        bps = sorted(cuts)
        pieces = []
        for lo, hi in zip(bps, bps[1:]):
            mid = (lo + hi) / 2
            ranked = sorted(lines, key=lambda ln: ln[0] + ln[1] * mid, reverse=True)
            pieces.append(combine(ranked))
        return cls(tuple(bps), tuple(pieces))


def tau_expectation(f: PiecewiseLinear) -> Number:
    """Exact integral of f over [0, 1]."""
    total = 0
    for (lo, hi), (c0, c1) in zip(zip(f.breakpoints, f.breakpoints[1:]), f.pieces):
        total = total + c0 * (hi - lo) + c1 * (hi * hi - lo * lo) / 2
    return total


def _sum_lines(lines):
    return (sum(ln[0] for ln in lines), sum(ln[1] for ln in lines))


def kth_largest_mean(pvs: Sequence[AffinePValue], k: int) -> Number:
    """E_tau of the k-th largest (1-based) of the affine p-values."""
    return tau_expectation(PiecewiseLinear.from_sorted_lines(pvs, lambda s: s[k - 1]))


def fuzziness_mean(pvs: Sequence[AffinePValue]) -> Number:
    return tau_expectation(PiecewiseLinear.from_sorted_lines(pvs, lambda s: _sum_lines(s[1:])))


# ------------------------------------------------------ thresholds in tau


def exceed_probability(p: AffinePValue, epsilon: Number, side: int = 0) -> Number:
    """Prob over tau of a + tau * b > epsilon.

    ``side`` = +1 / -1 gives the limit as epsilon is approached from the
    right / left; only cells with b = 0 are discontinuous in epsilon.
    """
    a, b = p
    if b > 0:
        return min(1, max(0, (a + b - epsilon) / b))
    if side < 0:
        return 1 if a >= epsilon else 0
    return 1 if a > epsilon else 0


def threshold(p: AffinePValue, epsilon: Number, side: int = 0) -> Number:
    """t in [0, 1] with p(tau) > epsilon iff tau > t (up to a null set)."""
    return 1 - exceed_probability(p, epsilon, side)


def count_tail_probabilities(pvs: Sequence[AffinePValue], epsilon: Number, side: int = 0) -> list[Number]:
    """[Prob(|Gamma| >= k) for k = 1..|Y|]; memberships are nested in tau."""
    ts = sorted(threshold(p, epsilon, side) for p in pvs)
    return [1 - t for t in ts]


# ------------------------------------------------------ idealised criteria


def _require(criterion, epsilon, n_labels):
    if criterion.needs_epsilon and epsilon is None:
        raise MissingEpsilon(f"criterion {criterion.value} needs a significance level")
    if criterion.needs_two_labels and n_labels < 2:
        raise TooFewLabels(f"criterion {criterion.value} needs at least two labels")
    if epsilon is not None:
        check_epsilon(epsilon)


def _phi_mean(phi, p: AffinePValue) -> float:
    a, b = float(p.a), float(p.b)
    if b == 0:
        return phi(a)
    val, _ = integrate.quad(lambda t: phi(a + t * b), 0.0, 1.0, epsrel=1e-10, epsabs=1e-13, limit=200)
    return val


def object_statistic(pvs: Sequence[AffinePValue], criterion, epsilon=None, true_label=None, side=0):
    """E_tau of the per-object statistic; returns (primary, secondary-or-None).

    ``true_label`` must be given for observed criteria.
    """
    c = criterion
    if isinstance(c, SPhi):
        if c.phi is None:
            return sum(p.mean() for p in pvs), None
        return sum(_phi_mean(c.phi, p) for p in pvs), None
    if c is Criterion.S:
        return sum(p.mean() for p in pvs), None
    if c is Criterion.U:
        return kth_largest_mean(pvs, 2), kth_largest_mean(pvs, 1)
    if c is Criterion.F:
        return fuzziness_mean(pvs), kth_largest_mean(pvs, 1)
    if c is Criterion.N:
        return sum(exceed_probability(p, epsilon, side) for p in pvs), None
    if c in (Criterion.M, Criterion.E):
        tails = count_tail_probabilities(pvs, epsilon, side)
        empty = 1 - tails[0]
        if c is Criterion.M:
            return (tails[1] if len(tails) > 1 else 0 * empty), empty
        return sum(tails[1:], 0 * empty), empty
    others = [p for y, p in enumerate(pvs) if y != true_label]
    if c is Criterion.OF:
        return sum((p.mean() for p in others), 0), None
    if c is Criterion.OU:
        return kth_largest_mean(others, 1), None
    if c is Criterion.OE:
        return sum((exceed_probability(p, epsilon, side) for p in others), 0), None
    if c is Criterion.OM:
        if not others:
            return 0, None
        return 1 - min(threshold(p, epsilon, side) for p in others), None
    raise ValueError(f"unknown criterion {criterion!r}")


def idealized_value(
    Q: FiniteJoint,
    pvalues: Sequence[Sequence[AffinePValue]],
    criterion: CriterionLike,
    epsilon: Number | None = None,
) -> CriterionValue:
    """Exact criterion value for a p-value matrix (see :func:`evaluate_idealized`)."""
    c = as_criterion(criterion)
    _require(c, epsilon, Q.n_labels)
    prim, sec = 0, 0
    has_sec = False
    for x, row in enumerate(pvalues):
        if c.observed:
            for y in range(Q.n_labels):
                w = Q.probs[x][y]
                if w == 0:
                    continue
                p, _ = object_statistic(row, c, epsilon, true_label=y)
                prim = prim + w * p
        else:
            w = sum(Q.probs[x])
            p, s = object_statistic(row, c, epsilon)
            prim = prim + w * p
            if s is not None:
                has_sec = True
                sec = sec + w * s
    return _value(c, prim, sec if has_sec else None)


def evaluate_idealized(
    transducer: IdealizedTransducer,
    criterion: CriterionLike,
    epsilon: Number | None = None,
) -> CriterionValue:
    """Exact expectation of the criterion under Q and tau ~ U[0, 1].

    Secondary (tie-break) components are always filled in for U, F, M, E.
    """
    return idealized_value(transducer.Q, transducer.pvalues, criterion, epsilon)


# ------------------------------------------------------ Monte Carlo oracle


def _per_draw(c: Criterion, p: np.ndarray, labels: np.ndarray | None, epsilon):
    if c is Criterion.S:
        return p.sum(axis=1)
    if c is Criterion.U:
        return np.sort(p, axis=1)[:, -2]
    if c is Criterion.F:
        return p.sum(axis=1) - p.max(axis=1)
    member = None
    if c.needs_epsilon:
        member = p > epsilon
    if c is Criterion.N:
        return member.sum(axis=1).astype(float)
    if c is Criterion.M:
        return (member.sum(axis=1) > 1).astype(float)
    if c is Criterion.E:
        return np.maximum(member.sum(axis=1) - 1, 0).astype(float)
    rows = np.arange(len(p))
    if c is Criterion.OF:
        return p.sum(axis=1) - p[rows, labels]
    if c is Criterion.OU:
        q = p.copy()
        q[rows, labels] = -np.inf
        return q.max(axis=1)
    m = member.copy()
    m[rows, labels] = False
    if c is Criterion.OE:
        return m.sum(axis=1).astype(float)
    if c is Criterion.OM:
        return m.any(axis=1).astype(float)
    raise ValueError(c)


def evaluate_idealized_mc(
    transducer: IdealizedTransducer,
    criterion: CriterionLike,
    epsilon: Number | None = None,
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate of the primary component and its standard error."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    c = as_criterion(criterion)
    if isinstance(c, SPhi):
        raise ValueError("Monte Carlo oracle covers the ten named criteria only")
    Q = transducer.Q
    _require(c, epsilon, Q.n_labels)
    a = np.array([[float(p.a) for p in row] for row in transducer.pvalues])
    b = np.array([[float(p.b) for p in row] for row in transducer.pvalues])
    q = np.array(Q.probs, dtype=float)
    rng = np.random.default_rng(seed)
    labels = None
    if c.observed:
        flat = rng.choice(q.size, size=n_samples, p=q.ravel() / q.sum())
        xs, labels = np.divmod(flat, Q.n_labels)
    else:
        qx = q.sum(axis=1)
        xs = rng.choice(len(qx), size=n_samples, p=qx / qx.sum())
    tau = rng.random(n_samples)
    p = a[xs] + tau[:, None] * b[xs]
    eps = None if epsilon is None else float(epsilon)
    stat = _per_draw(c, p, labels, eps)
    se = float(stat.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else float("inf")
    return float(stat.mean()), se


# ------------------------------------------------------ empirical criteria


def evaluate_empirical(
    criterion: CriterionLike,
    pvals,
    observed_labels: Sequence[int] | None = None,
    epsilon: float | None = None,
) -> CriterionValue:
    """Average criterion over a test sequence of p-value vectors.

    ``pvals`` is a (k, |Y|) array or anything with a ``.p`` array attribute.
    """
    c = as_criterion(criterion)
    p = np.asarray(getattr(pvals, "p", pvals), dtype=float)
    if p.ndim != 2:
        raise ValueError("p-values must form a (k, |Y|) array")
    k, n_labels = p.shape
    _require(c, epsilon, n_labels)
    labels = None
    if c.observed:
        if observed_labels is None:
            raise MissingLabels(f"criterion {c.value} needs the observed labels")
        labels = np.asarray(observed_labels, dtype=int)
        if labels.shape != (k,):
            raise ValueError("one observed label per test object required")
    if isinstance(c, SPhi):
        phi = c.phi or (lambda t: t)
        return CriterionValue(float(np.mean([sum(phi(v) for v in row) for row in p])))
    if c is Criterion.U:
        srt = np.sort(p, axis=1)
        return _value(c, float(srt[:, -2].mean()), float(srt[:, -1].mean()))
    if c is Criterion.F:
        return _value(c, float((p.sum(axis=1) - p.max(axis=1)).mean()), float(p.max(axis=1).mean()))
    if c in (Criterion.M, Criterion.E):
        size = (p > epsilon).sum(axis=1)
        empty = float((size == 0).mean())
        if c is Criterion.M:
            return _value(c, float((size > 1).mean()), empty)
        return _value(c, float(np.maximum(size - 1, 0).mean()), empty)
    return _value(c, float(_per_draw(c, p, labels, epsilon).mean()))


def criterion_needs(criterion: CriterionLike) -> tuple[bool, bool]:
    """(needs epsilon, needs observed labels)."""
    c = as_criterion(criterion)
    return bool(c.needs_epsilon), bool(c.observed)

