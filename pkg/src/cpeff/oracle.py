"""Brute-force optimality oracle over every conformity order of a small Z.

An idealised conformity measure matters only through the weak order it
induces, so optimality can be decided by enumerating all weak orders.
Criterion values are exact (gmpy2 rationals internally).  A vectorised
float pass narrows each minimisation to the orders within 1e-9 of the
float minimum; the decision itself is always made on exact values.

For criteria that depend on the significance level, optimality must hold
for every epsilon in (0, 1).  All curves are piecewise linear in epsilon
with kinks only at grid breakpoints, so it suffices to check every
breakpoint and both one-sided limits of every open interval between them.
"""

from __future__ import annotations

import functools
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import gmpy2
import numpy as np

from .core import FiniteJoint, WeakOrder, as_fraction, load_joint, load_scores, validate_joint
from .criteria import (
    Criterion,
    CriterionLike,
    as_criterion,
    idealized_value,
    exceed_probability,
    object_statistic,
)
from .errors import CapExceeded, PreconditionViolated, UnknownExampleId
from .idealized import (
    LABEL_CONDITIONAL,
    UNCONDITIONAL,
    AffinePValue,
    IdealizedTransducer,
    cp_measure,
    cp_refinement_witness,
    in_R_CP,
    in_R_doubleprime_MSP,
    in_R_doubleprime_MSP_tight,
    in_R_lc_CP,
    in_R_MCP,
    in_R_prime_SP,
    mcp_measures,
    msp_measure,
    p_value_matrix,
    prediction_set_at,
    sp_measures,
)

DEFAULT_CAP = 7
DEFAULT_DELTA = Fraction(1, 1000)
DELTA_SLACK = 50
FLOAT_TOL = 1e-9

mpq = gmpy2.mpq


def ordered_bell(n: int) -> int:
    """Number of weak orders on n elements."""
    a = [1]
    for m in range(1, n + 1):
        a.append(sum(math.comb(m, k) * a[m - k] for k in range(1, m + 1)))
    return a[n]


def enumerate_weak_orders(n: int, cap: int = DEFAULT_CAP) -> Iterator[tuple[int, ...]]:
    """Every weak order on range(n) as dense ranks (0 = lowest), each once."""
    if n > cap:
        raise CapExceeded(f"{n} elements exceed the enumeration cap of {cap}")
    ranks = [0] * n

    def rec(remaining: tuple[int, ...], level: int):
        if not remaining:
            yield tuple(ranks)
            return
        for size in range(1, len(remaining) + 1):
            for chosen in itertools.combinations(remaining, size):
                for i in chosen:
                    ranks[i] = level
                rest = tuple(i for i in remaining if i not in chosen)
                yield from rec(rest, level + 1)

    yield from rec(tuple(range(n)), 0)


def order_space(shape: tuple[int, int], mode: str = UNCONDITIONAL, cap: int = DEFAULT_CAP) -> list[WeakOrder]:
    """All conformity orders relevant in ``mode``.

    Label-conditional p-values depend only on the order inside each label
    column, so there the space is the product of per-column weak orders.
    """
    n_x, n_y = shape
    if mode == UNCONDITIONAL:
        return [WeakOrder.from_flat(r, n_y) for r in enumerate_weak_orders(n_x * n_y, cap)]
    if mode == LABEL_CONDITIONAL:
        column = list(enumerate_weak_orders(n_x, cap))
        return [
            WeakOrder(tuple(tuple(cols[y][x] for y in range(n_y)) for x in range(n_x)))
            for cols in itertools.product(column, repeat=n_y)
        ]
    raise ValueError(f"unknown mode {mode!r}")


def _to_mpq(Q: FiniteJoint) -> FiniteJoint:
    return FiniteJoint(tuple(tuple(_mpq(v) for v in row) for row in Q.probs))


def _mpq(v) -> "mpq":
    f = as_fraction(v)
    return mpq(f.numerator, f.denominator)


def _require_rational(Q: FiniteJoint) -> None:
    if not Q.exact:
        raise ValueError("the oracle needs a rational Q")


# ------------------------------------------------------------ specifications


FOR_ALL_EPSILON = None


@dataclass(frozen=True)
class OptimalitySpec:
    """Criterion, mode and epsilon policy (None means every epsilon)."""

    criterion: Criterion
    mode: str = UNCONDITIONAL
    epsilon: Fraction | None = FOR_ALL_EPSILON

    def __post_init__(self):
        c = as_criterion(self.criterion)
        object.__setattr__(self, "criterion", c)
        if not isinstance(c, Criterion):
            raise ValueError("optimal sets are defined for the ten named criteria")
        if self.epsilon is not None:
            if not c.needs_epsilon:
                raise ValueError(f"criterion {c.value} does not take a significance level")
            if not 0 < self.epsilon < 1:
                raise ValueError("significance level must lie in (0, 1)")
        if self.mode not in (UNCONDITIONAL, LABEL_CONDITIONAL):
            raise ValueError(f"unknown mode {self.mode!r}")


def _secondary_sign(c: Criterion) -> int:
    # key sign for the secondary component: +1 smaller-better, -1 larger-better
    return -1 if c in (Criterion.M, Criterion.E) else 1


def _has_secondary(c: Criterion) -> bool:
    return c in (Criterion.U, Criterion.F, Criterion.M, Criterion.E)


# ------------------------------------------------------------ the search space


class OrderSpace:
    """Every order of Q's example space with its exact p-values.

    Optimal sets for several criteria share this (expensive) setup.
    Criteria that are sums over cells, or order statistics within an
    object, are evaluated for all orders at once: each distinct affine
    p-value is mapped to an exact rational once per significance level,
    everything is scaled to a common denominator and the rest is integer
    arithmetic in numpy.
    """

    def __init__(self, Q: FiniteJoint, mode: str = UNCONDITIONAL, cap: int = DEFAULT_CAP):
        _require_rational(Q)
        validate_joint(Q, label_conditional=(mode == LABEL_CONDITIONAL))
        self.Q = Q
        self.mode = mode
        self.Qq = _to_mpq(Q)
        self.orders = order_space(Q.shape, mode, cap)
        self.pvalues = [self._pvalues(o) for o in self.orders]
        ids: dict = {}
        self.pair_id = np.array(
            [[[ids.setdefault(p, len(ids)) for p in row] for row in pv] for pv in self.pvalues],
            dtype=np.int64,
        ).reshape(len(self.orders), *Q.shape)
        self.pairs = list(ids)
        scale = math.lcm(*(as_fraction(v).denominator for row in Q.probs for v in row))
        self.weights = np.array([[int(as_fraction(v) * scale) for v in row] for row in Q.probs], dtype=object)
        self._grid = None
        self._cache: dict = {}

    def __len__(self):
        return len(self.orders)

    def _pvalues(self, order: WeakOrder):
        if self.mode == LABEL_CONDITIONAL:
            return p_value_matrix(self.Qq, order, self.mode)
        # unconditional fast path: level masses from dense ranks
        flat = order.flat()
        q = [v for row in self.Qq.probs for v in row]
        mass = [mpq(0)] * (max(flat) + 1)
        for r, v in zip(flat, q):
            mass[r] += v
        below, acc = [], mpq(0)
        for m in mass:
            below.append(acc)
            acc += m
        n_y = self.Q.n_labels
        cells = [AffinePValue(below[r], mass[r]) for r in flat]
        return tuple(tuple(cells[i:i + n_y]) for i in range(0, len(cells), n_y))

    # ----- exact values, one order at a time

    def exact_value(self, i: int, c: Criterion, eps=None, side: int = 0) -> tuple:
        """(primary key, secondary key) of order i; smaller keys are better."""
        if eps is not None:
            eps = _mpq(eps)
        prim, sec = mpq(0), mpq(0)
        for x, row in enumerate(self.pvalues[i]):
            key = (x, row, c, eps, side)
            hit = self._cache.get(key)
            if hit is None:
                hit = self._object_contribution(x, row, c, eps, side)
                self._cache[key] = hit
            prim += hit[0]
            sec += hit[1]
        return prim, _secondary_sign(c) * sec

    def _object_contribution(self, x, row, c, eps, side):
        probs = self.Qq.probs[x]
        if c.observed:
            total = mpq(0)
            for y, w in enumerate(probs):
                if w:
                    total += w * object_statistic(row, c, eps, true_label=y, side=side)[0]
            return total, mpq(0)
        w = sum(probs)
        p, s = object_statistic(row, c, eps, side=side)
        return w * p, (w * s if s is not None else mpq(0))

    # ----- exact values, all orders at once

    def _scaled_cells(self, f) -> tuple[np.ndarray, int]:
        """f(pair) for every cell of every order times a common denominator,
        and that denominator.  Only values from one call are comparable."""
        vals = [mpq(f(p)) for p in self.pairs]
        den = functools.reduce(gmpy2.lcm, (v.denominator for v in vals), gmpy2.mpz(1))
        ints = [int(v.numerator * (den // v.denominator)) for v in vals]
        den = int(den)
        bound = den * int(self.weights.sum()) * (self.Q.n_labels + 1)
        dtype = np.int64 if bound < 2**62 else object
        return np.array(ints, dtype=dtype)[self.pair_id], den

    def _weights(self, like: np.ndarray) -> np.ndarray:
        return self.weights.astype(like.dtype) if like.dtype != object else self.weights

    def batch_keys(self, c: Criterion, eps=None, side: int = 0):
        """Integer (primary, secondary) keys of every order, or None if the
        criterion has no integer form (U, F, OU); smaller is better."""
        if c in (Criterion.S, Criterion.OF):
            cells, den = self._scaled_cells(lambda p: p.a + p.b / 2)
        elif c.needs_epsilon:
            cells, den = self._scaled_cells(lambda p: exceed_probability(p, eps, side))
        else:
            return None
        w = self._weights(cells)
        wx = w.sum(axis=1)
        if c in (Criterion.S, Criterion.N):
            return (cells.sum(axis=2) * wx).sum(axis=1), None
        if c in (Criterion.OF, Criterion.OE):
            return (cells * (wx[:, None] - w)).sum(axis=(1, 2)), None
        # exceed probabilities sorted decreasingly are Prob(|Gamma| >= k)
        tails = -np.sort(-cells, axis=2)
        if c is Criterion.OM:
            n_y = cells.shape[2]
            if n_y == 1:
                return np.zeros(len(cells), dtype=cells.dtype), None
            total = sum(np.delete(cells, y, axis=2).max(axis=2) * w[:, y] for y in range(n_y))
            return total.sum(axis=1), None
        empty = ((den - tails[..., 0]) * wx).sum(axis=1)
        if c is Criterion.M:
            multi = tails[..., 1] if tails.shape[2] > 1 else 0 * tails[..., 0]
        else:
            multi = tails[..., 1:].sum(axis=2)
        return (multi * wx).sum(axis=1), -empty

    # ----- epsilon grid

    def breakpoints(self) -> list:
        """Exact kink locations in (0, 1) of every criterion curve, sorted."""
        if self._grid is None:
            rows = {row for pv in self.pvalues for row in pv}
            pts = set()
            for p in self.pairs:
                pts.add(p.a)
                pts.add(p.a + p.b)
            for row in rows:
                pts.update(_crossings(row))
            self._grid = sorted(v for v in pts if 0 < v < 1)
        return self._grid

    # ----- optimal sets

    def optimal(self, criterion: CriterionLike, epsilon=FOR_ALL_EPSILON) -> frozenset[WeakOrder]:
        spec = OptimalitySpec(criterion, self.mode, epsilon)
        c = spec.criterion
        if not c.needs_epsilon:
            return self._optimal_eps_free(c)
        if epsilon is not None:
            units = [[(_mpq(epsilon), 0)]]
        else:
            grid = self.breakpoints()
            edges = [mpq(0)] + grid + [mpq(1)]
            units = [[(g, 0)] for g in grid]
            units += [[(lo, 1), (hi, -1)] for lo, hi in zip(edges, edges[1:])]
        return self._optimal_over_units(c, units)

    def _optimal_eps_free(self, c: Criterion) -> frozenset[WeakOrder]:
        batch = self.batch_keys(c)
        if batch is not None:
            prim = batch[0]
            best = prim.min()
            return frozenset(self.orders[i] for i in np.flatnonzero(prim == best))
        keys = [idealized_value(self.Qq, pv, c).key() for pv in self.pvalues]
        best = min(keys)
        return frozenset(o for o, k in zip(self.orders, keys) if k == best)

    def _optimal_over_units(self, c: Criterion, units) -> frozenset[WeakOrder]:
        keys = {}
        for unit in units:
            for pt in unit:
                if pt not in keys:
                    keys[pt] = self.batch_keys(c, *pt)
        survivors = np.ones(len(self.orders), dtype=bool)
        for unit in units:
            keep = np.ones_like(survivors)
            for pt in unit:
                prim = keys[pt][0]
                keep &= prim == prim.min()
            if keys[unit[0]][1] is not None and keep.any():
                tie = keep.copy()
                for pt in unit:
                    sec = keys[pt][1]
                    keep &= sec == sec[tie].min()
            survivors &= keep
            if not survivors.any():
                break
        return frozenset(self.orders[i] for i in np.flatnonzero(survivors))


def _crossings(row: Sequence[AffinePValue]) -> set:
    """Epsilons where two thresholds of one object cross while both are active."""
    out = set()
    for p1, p2 in itertools.combinations(row, 2):
        (a1, b1), (a2, b2) = p1, p2
        if b1 == b2 or b1 == 0 or b2 == 0:
            continue
        e = (a1 * b2 - a2 * b1) / (b2 - b1)
        if max(a1, a2) < e < min(a1 + b1, a2 + b2):
            out.add(e)
    return out


def optimal_set(Q: FiniteJoint, spec: OptimalitySpec, cap: int = DEFAULT_CAP) -> frozenset[WeakOrder]:
    """Exact set of optimal weak orders for one criterion."""
    space = OrderSpace(Q, spec.mode, cap)
    return space.optimal(spec.criterion, spec.epsilon)


def epsilon_test_grid(Q: FiniteJoint, orders: Sequence, mode: str = UNCONDITIONAL) -> list[Fraction]:
    """Breakpoints in (0, 1) of the given orders' curves plus all midpoints.

    Midpoints include those of (0, first) and (last, 1).
    """
    _require_rational(Q)
    pts = set()
    for A in orders:
        for row in p_value_matrix(Q, A, mode):
            for p in row:
                pts.add(as_fraction(p.a))
                pts.add(as_fraction(p.a + p.b))
            pts.update(as_fraction(v) for v in _crossings(row))
    bps = sorted(v for v in pts if 0 < v < 1)
    edges = [Fraction(0)] + bps + [Fraction(1)]
    mids = [(lo + hi) / 2 for lo, hi in zip(edges, edges[1:])]
    return sorted(set(bps) | set(mids))


# ------------------------------------------------------------ theorems

THEOREM_CRITERIA = {
    1: (Criterion.S, Criterion.OF, Criterion.N, Criterion.OE),
    2: (Criterion.U, Criterion.M),
    3: (Criterion.F, Criterion.E),
    4: (Criterion.OU, Criterion.OM),
    5: (Criterion.S, Criterion.OF, Criterion.N, Criterion.OE),
    6: (Criterion.U, Criterion.M, Criterion.F, Criterion.E, Criterion.OU, Criterion.OM),
}

_EXPECTED = {
    1: in_R_CP,
    2: in_R_prime_SP,
    3: in_R_MCP,
    4: in_R_doubleprime_MSP,
    5: in_R_lc_CP,
}


def _fmt_order(o: WeakOrder) -> str:
    return "/".join("".join(str(v) for v in row) for row in o.rank)


@dataclass
class VerificationReport:
    """Outcome of one theorem or example check."""

    theorem: str
    source: str
    passed: bool
    computed: dict = field(default_factory=dict)
    expected: frozenset | None = None
    witnesses: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "FAIL"

    def detail(self) -> str:
        if self.witnesses:
            return "; ".join(self.witnesses)
        sizes = " ".join(f"{k}={len(v)}" for k, v in self.computed.items())
        return sizes or "ok"

    def to_line(self) -> str:
        return f"{self.theorem},{self.source},{self.status},{self.detail()}"


def verify_theorem(
    Q: FiniteJoint,
    theorem: int,
    source: str = "Q",
    cap: int = DEFAULT_CAP,
    space: OrderSpace | None = None,
    tight_msp: bool = False,
) -> VerificationReport:
    """Compare brute-force optimal sets with the predicted classes.

    ``tight_msp`` swaps the OU/OM class for the boundary-corrected one.
    """
    if theorem not in THEOREM_CRITERIA:
        raise ValueError(f"no theorem {theorem}")
    _require_rational(Q)
    mode = LABEL_CONDITIONAL if theorem >= 5 else UNCONDITIONAL
    if theorem == 6:
        _check_binary_distinct(Q)
    if space is None or space.mode != mode:
        space = OrderSpace(Q, mode, cap)
    computed = {c.value: space.optimal(c) for c in THEOREM_CRITERIA[theorem]}
    witnesses = []
    expected = None
    if theorem in _EXPECTED:
        pred = in_R_doubleprime_MSP_tight if (theorem == 4 and tight_msp) else _EXPECTED[theorem]
        expected = frozenset(o for o in space.orders if pred(o, Q))
        for name, got in computed.items():
            for o in sorted(got - expected, key=_fmt_order)[:3]:
                witnesses.append(f"{name}: optimal but not predicted {_fmt_order(o)}")
            for o in sorted(expected - got, key=_fmt_order)[:3]:
                witnesses.append(f"{name}: predicted but not optimal {_fmt_order(o)}")
    else:
        for name, got in computed.items():
            if not any(cp_refinement_witness(o, Q) is not None for o in got):
                witnesses.append(f"{name}: no CP refinement among {len(got)} optimal orders")
    return VerificationReport(f"T{theorem}", source, not witnesses, computed, expected, witnesses)


def _check_binary_distinct(Q: FiniteJoint) -> None:
    if Q.n_labels != 2:
        raise PreconditionViolated("this check needs exactly two labels")
    cond = [Fraction(row[1]) / Fraction(sum(row)) for row in Q.probs]
    if len(set(cond)) != len(cond):
        raise PreconditionViolated("Q(1|x) must differ across objects")


def multi_empty_product_vanishes(Q: FiniteJoint, order, mode: str = UNCONDITIONAL) -> bool:
    """Prob(|Gamma| > 1) * Prob(|Gamma| = 0) vanishes on the whole test grid."""
    _require_rational(Q)
    pv = p_value_matrix(Q, order, mode)
    for eps in epsilon_test_grid(Q, [order], mode):
        v = idealized_value(Q, pv, Criterion.M, eps)
        if v.primary * v.secondary != 0:
            return False
    return True


def random_joint(seed: int, shape: tuple[int, int], max_weight: int = 9, distinct_binary: bool = False) -> FiniteJoint:
    """Random rational Q with positive entries; integer weights over their sum.

    With ``distinct_binary`` the conditional Q(1|x) differs across objects.
    """
    rng = random.Random(seed)
    n_x, n_y = shape
    while True:
        w = [[rng.randint(1, max_weight) for _ in range(n_y)] for _ in range(n_x)]
        total = sum(map(sum, w))
        Q = FiniteJoint(tuple(tuple(Fraction(v, total) for v in row) for row in w))
        if not distinct_binary:
            return Q
        cond = [Fraction(row[-1], sum(row)) for row in w]
        if len(set(cond)) == len(cond):
            return Q


# ------------------------------------------------------------ worked examples


def _from_conditionals(marginal, rows) -> FiniteJoint:
    return FiniteJoint.from_conditionals([Fraction(v) for v in marginal], [[Fraction(v) for v in r] for r in rows])


def example_joint(name: str, delta: Fraction = DEFAULT_DELTA) -> FiniteJoint:
    """The tables of the worked counterexamples (0-based ids)."""
    t, d = Fraction(1, 3), Fraction(delta)
    if name == "single-object":
        return _from_conditionals([1], [["1/5", "3/10", "1/2"]])
    if name == "two-object-delta":
        return _from_conditionals(["1/2", "1/2"], [[t - d, t, t + d], [t - 5 * d, t + 2 * d, t + 3 * d]])
    if name == "lc-two-object":
        return _from_conditionals(["1/2", "1/2"], [["1/5", "3/10", "1/5", "3/10"], ["3/10", "1/5", "3/10", "1/5"]])
    if name == "lc-three-object-delta":
        return _from_conditionals([t, t, t], [[t + d, t - 2 * d, t + d], [t - d, t + 2 * d, t - d], [t, t, t]])
    raise UnknownExampleId(name)


def example_measure(name: str) -> tuple[tuple[int, ...], ...]:
    """Scores for the hand-built measures of the label-conditional examples."""
    if name == "object-separating":
        return ((0, 0, 0, 0), (1, 1, 1, 1))
    if name == "top-cell":
        # CP order with the all-thirds object's last label lifted to the top
        return ((3, 0, 3), (1, 4, 1), (2, 2, 5))
    raise UnknownExampleId(name)


def data_path(filename: str):
    from importlib.resources import files

    return files("cpeff").joinpath("data", filename)


@dataclass(frozen=True)
class Check:
    name: str
    computed: Fraction
    target: Fraction
    tolerance: Fraction
    ok: bool
    op: str | None = None

    def __str__(self):
        mark = "ok" if self.ok else "MISMATCH"
        if self.op:
            return f"{self.name}: {self.computed} {self.op} {self.target} {mark}"
        tol = "" if self.tolerance == 0 else f"+-{self.tolerance}"
        return f"{self.name}={self.computed} (target {self.target}{tol}) {mark}"


def _check(name, computed, target, tol=Fraction(0)) -> Check:
    computed, target, tol = as_fraction(computed), as_fraction(target), as_fraction(tol)
    return Check(name, computed, target, tol, abs(computed - target) <= tol)


def _relation(name, lhs, op, rhs) -> Check:
    lhs, rhs = as_fraction(lhs), as_fraction(rhs)
    ok = lhs < rhs if op == "<" else lhs > rhs
    return Check(name, lhs, rhs, Fraction(0), ok, op)


def _load_example(name: str, filename: str, delta) -> FiniteJoint:
    if delta == DEFAULT_DELTA:
        return load_joint(data_path(filename))
    return example_joint(name, delta)


def _prim(Q, A, c, mode=UNCONDITIONAL, eps=None):
    t = IdealizedTransducer(Q, A, mode)
    return idealized_value(Q, t.pvalues, c, eps).primary


COUNTEREXAMPLES = ("U-M", "F-E", "OU-OM", "lc-U-M", "lc-F-E", "lc-OU-OM")


def verify_counterexample(example_id: str, delta: Fraction = DEFAULT_DELTA) -> VerificationReport:
    """Recompute every quoted value of one worked counterexample."""
    delta = as_fraction(delta)
    slack = DELTA_SLACK * delta
    checks: list[Check] = []
    if example_id in ("U-M", "OU-OM"):
        Q = load_joint(data_path("single_object.q"))
        cp = cp_measure(Q)
        if example_id == "U-M":
            (sp,) = sp_measures(Q)
            u_cp, u_sp = _prim(Q, cp, Criterion.U), _prim(Q, sp, Criterion.U)
            m_cp = _prim(Q, cp, Criterion.M, eps=Fraction(1, 5))
            m_sp = _prim(Q, sp, Criterion.M, eps=Fraction(1, 5))
            checks += [
                _check("U(CP)", u_cp, Fraction(7, 20)),
                _check("U(SP)", u_sp, Fraction(1, 4)),
                _relation("U(SP) vs U(CP)", u_sp, "<", u_cp),
                _check("M(CP)@1/5", m_cp, 1),
                _check("M(SP)@1/5", m_sp, Fraction(3, 5)),
                _relation("M(CP) vs M(SP)", m_cp, ">", m_sp),
            ]
            t = IdealizedTransducer(Q, cp)
            checks.append(_check("CP set at 1/5 is {1,2}", int(prediction_set_at(t, 0, Fraction(1, 5), Fraction(1, 2)) == {1, 2}), 1))
        else:
            msp = msp_measure(Q)
            ou_cp, ou_msp = _prim(Q, cp, Criterion.OU), _prim(Q, msp, Criterion.OU)
            om_cp = _prim(Q, cp, Criterion.OM, eps=Fraction(1, 5))
            om_msp = _prim(Q, msp, Criterion.OM, eps=Fraction(1, 5))
            checks += [
                _check("OU(CP)", ou_cp, Fraction(11, 20)),
                _check("OU(MSP)", ou_msp, Fraction(1, 2)),
                _relation("OU(MSP) vs OU(CP)", ou_msp, "<", ou_cp),
                _check("OM(CP)@1/5", om_cp, 1),
                _check("OM(MSP)@1/5", om_msp, Fraction(4, 5)),
                _relation("OM(CP) vs OM(MSP)", om_cp, ">", om_msp),
            ]
    elif example_id == "F-E":
        Q = _load_example("two-object-delta", "two_object_delta.q", delta)
        cp = cp_measure(Q)
        mcps = mcp_measures(Q)
        checks.append(_check("number of MCP measures", len(mcps), 1))
        mcp = mcps[0]
        f_cp, f_mcp = _prim(Q, cp, Criterion.F), _prim(Q, mcp, Criterion.F)
        e_cp = _prim(Q, cp, Criterion.E, eps=Fraction(2, 3))
        e_mcp = _prim(Q, mcp, Criterion.E, eps=Fraction(2, 3))
        checks += [
            _check("F(CP)", f_cp, Fraction(3, 4), slack),
            _check("F(MCP)", f_mcp, Fraction(2, 3), slack),
            _relation("F(MCP) vs F(CP)", f_mcp, "<", f_cp),
            _check("E(CP)@2/3", e_cp, Fraction(1, 2), slack),
            _check("E(MCP)@2/3", e_mcp, 0),
            _relation("E(CP) vs E(MCP)", e_cp, ">", e_mcp),
        ]
    elif example_id in ("lc-U-M", "lc-OU-OM"):
        Q = load_joint(data_path("lc_two_object.q"))
        cp = cp_measure(Q)
        A = load_scores(data_path("lc_object_separating.scores"), shape=Q.shape)
        mode = LABEL_CONDITIONAL
        e = Fraction(2, 5)
        if example_id == "lc-U-M":
            u_cp, u_a = _prim(Q, cp, Criterion.U, mode), _prim(Q, A, Criterion.U, mode)
            m_cp, m_a = _prim(Q, cp, Criterion.M, mode, e), _prim(Q, A, Criterion.M, mode, e)
            t = IdealizedTransducer(Q, cp, mode)
            sets_ok = all(
                prediction_set_at(t, 0, e, tau) == {1, 3} and prediction_set_at(t, 1, e, tau) == {0, 2}
                for tau in (Fraction(1, 100), Fraction(1, 2), Fraction(99, 100))
            )
            checks += [
                _check("U(CP)", u_cp, Fraction(7, 10)),
                _check("U(A)", u_a, Fraction(11, 20)),
                _relation("U(A) vs U(CP)", u_a, "<", u_cp),
                _check("M(CP)@2/5", m_cp, 1),
                _check("M(A)@2/5", m_a, Fraction(2, 3)),
                _relation("M(CP) vs M(A)", m_cp, ">", m_a),
                _check("CP sets at 2/5 are {1,3} and {0,2}", int(sets_ok), 1),
            ]
        else:
            ou_cp, ou_a = _prim(Q, cp, Criterion.OU, mode), _prim(Q, A, Criterion.OU, mode)
            om_cp, om_a = _prim(Q, cp, Criterion.OM, mode, e), _prim(Q, A, Criterion.OM, mode, e)
            checks += [
                _check("OU(CP)", ou_cp, Fraction(7, 10)),
                _check("OU(A)", ou_a, Fraction(11, 20)),
                _relation("OU(A) vs OU(CP)", ou_a, "<", ou_cp),
                _check("OM(CP)@2/5", om_cp, 1),
                _check("OM(A)@2/5", om_a, Fraction(2, 3)),
                _relation("OM(CP) vs OM(A)", om_cp, ">", om_a),
            ]
    elif example_id == "lc-F-E":
        Q = _load_example("lc-three-object-delta", "lc_three_object_delta.q", delta)
        cp = cp_measure(Q)
        A = load_scores(data_path("lc_top_cell.scores"), shape=Q.shape)
        mode = LABEL_CONDITIONAL
        e = Fraction(2, 3)
        f_cp, f_a = _prim(Q, cp, Criterion.F, mode), _prim(Q, A, Criterion.F, mode)
        e_cp, e_a = _prim(Q, cp, Criterion.E, mode, e), _prim(Q, A, Criterion.E, mode, e)
        checks += [
            _check("F(CP)", f_cp, Fraction(7, 9), slack),
            _check("F(A)", f_a, Fraction(2, 3), slack),
            _relation("F(A) vs F(CP)", f_a, "<", f_cp),
            _check("E(CP)@2/3", e_cp, Fraction(1, 3), slack),
            _check("E(A)@2/3", e_a, 0),
            _relation("E(CP) vs E(A)", e_cp, ">", e_a),
        ]
    else:
        raise UnknownExampleId(example_id)
    witnesses = [str(c) for c in checks if not c.ok]
    return VerificationReport(f"example:{example_id}", f"delta={delta}", not witnesses, witnesses=witnesses, checks=checks)
