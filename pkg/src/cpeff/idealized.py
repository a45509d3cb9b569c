"""Idealised conformal transducers over a known finite distribution.

Every p-value is kept symbolic in the smoothing variable: ``a + tau * b``
where ``a`` is the mass strictly below the cell in the conformity order and
``b`` the mass of its equality class (both normalised by the class mass in
label-conditional mode).  Downstream expectations over ``tau`` are then
exact whenever Q is rational.
"""

from __future__ import annotations

import functools
import itertools
from fractions import Fraction
from typing import NamedTuple, Sequence

from .core import (
    FiniteJoint,
    Number,
    ScoreLike,
    ScoreTable,
    WeakOrder,
    choice_functions,
    conditional,
    predictability,
    table_of,
    validate_joint,
)
from .errors import DegenerateMarginal

UNCONDITIONAL = "unconditional"
LABEL_CONDITIONAL = "label-conditional"
MODES = (UNCONDITIONAL, LABEL_CONDITIONAL)


class AffinePValue(NamedTuple):
    """p(tau) = a + tau * b."""

    a: Number
    b: Number

    def __call__(self, tau: Number) -> Number:
        return self.a + tau * self.b

    def mean(self) -> Number:
        return self.a + self.b / 2


def _half(v: Number) -> Number:
    return v / 2


def _mass_below_equal(cells: Sequence[tuple[Number, Number]]) -> list[tuple[Number, Number]]:
    """For (score, mass) pairs return (mass strictly below, mass equal) per pair."""
    order = sorted(range(len(cells)), key=lambda i: cells[i][0])
    out: list = [None] * len(cells)
    below = 0
    i = 0
    while i < len(order):
        j = i
        score = cells[order[i]][0]
        equal = 0
        while j < len(order) and cells[order[j]][0] == score:
            equal = equal + cells[order[j]][1]
            j += 1
        for k in order[i:j]:
            out[k] = (below, equal)
        below = below + equal
        i = j
    return out


def p_value_matrix(Q: FiniteJoint, A: ScoreLike, mode: str = UNCONDITIONAL) -> tuple[tuple[AffinePValue, ...], ...]:
    """Affine p-values for every cell of X x Y."""
    table = table_of(A)
    n_x, n_y = Q.shape
    if (len(table), len(table[0])) != (n_x, n_y):
        raise ValueError(f"score table shape {(len(table), len(table[0]))} does not match Q {Q.shape}")
    out = [[None] * n_y for _ in range(n_x)]
    if mode == UNCONDITIONAL:
        cells = [(table[x][y], Q.probs[x][y]) for x in range(n_x) for y in range(n_y)]
        for k, (below, equal) in enumerate(_mass_below_equal(cells)):
            out[k // n_y][k % n_y] = AffinePValue(below, equal)
    elif mode == LABEL_CONDITIONAL:
        for y in range(n_y):
            cells = [(table[x][y], Q.probs[x][y]) for x in range(n_x)]
            qy = sum(c[1] for c in cells)
            if qy <= 0:
                raise DegenerateMarginal(f"label {y} has zero marginal probability")
            for x, (below, equal) in enumerate(_mass_below_equal(cells)):
                out[x][y] = AffinePValue(below / qy, equal / qy)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return tuple(tuple(r) for r in out)


def idealized_p_value(Q: FiniteJoint, A: ScoreLike, x: int, y: int) -> AffinePValue:
    table = table_of(A)
    s = table[x][y]
    below = sum(Q.probs[i][j] for i, j in Q.cells() if table[i][j] < s)
    equal = sum(Q.probs[i][j] for i, j in Q.cells() if table[i][j] == s)
    return AffinePValue(below, equal)


def idealized_p_value_label_conditional(Q: FiniteJoint, A: ScoreLike, x: int, y: int) -> AffinePValue:
    table = table_of(A)
    qy = Q.marginal_y()[y]
    if qy <= 0:
        raise DegenerateMarginal(f"label {y} has zero marginal probability")
    s = table[x][y]
    below = sum(Q.probs[i][y] for i in range(Q.n_objects) if table[i][y] < s)
    equal = sum(Q.probs[i][y] for i in range(Q.n_objects) if table[i][y] == s)
    return AffinePValue(below / qy, equal / qy)


class IdealizedTransducer:
    """Q, a score table and a mode, with the p-value matrix cached."""

    def __init__(self, Q: FiniteJoint, A: ScoreLike, mode: str = UNCONDITIONAL, validate: bool = True):
        if validate:
            validate_joint(Q, label_conditional=(mode == LABEL_CONDITIONAL))
        self.Q = Q
        self.A = A
        self.mode = mode
        self.pvalues = p_value_matrix(Q, A, mode)

    @property
    def n_labels(self) -> int:
        return self.Q.n_labels

    def p(self, x: int, y: int, tau: Number) -> Number:
        return self.pvalues[x][y](tau)

    def __repr__(self):
        return f"IdealizedTransducer(shape={self.Q.shape}, mode={self.mode!r})"


def prediction_set_at(transducer: IdealizedTransducer, x: int, epsilon: Number, tau: Number) -> frozenset[int]:
    """Labels whose p-value strictly exceeds epsilon at this tau."""
    return frozenset(y for y, pv in enumerate(transducer.pvalues[x]) if pv(tau) > epsilon)


# ------------------------------------------------------------- constructions


@functools.lru_cache(maxsize=64)
def cp_measure(Q: FiniteJoint) -> ScoreTable:
    """A(x, y) = Q(y|x)."""
    return ScoreTable(tuple(conditional(Q, x) for x in range(Q.n_objects)))


@functools.lru_cache(maxsize=64)
def sp_measures(Q: FiniteJoint) -> tuple[ScoreTable, ...]:
    """Signed predictability, one table per choice function."""
    f = [predictability(Q, x) for x in range(Q.n_objects)]
    return tuple(
        ScoreTable(tuple(
            tuple(f[x] if y == choice[x] else -f[x] for y in range(Q.n_labels))
            for x in range(Q.n_objects)
        ))
        for choice in choice_functions(Q)
    )


@functools.lru_cache(maxsize=64)
def mcp_measures(Q: FiniteJoint) -> tuple[ScoreTable, ...]:
    """Modified conditional probability, one table per choice function."""
    rows = [conditional(Q, x) for x in range(Q.n_objects)]
    return tuple(
        ScoreTable(tuple(
            tuple(rows[x][y] if y == choice[x] else rows[x][y] - 1 for y in range(Q.n_labels))
            for x in range(Q.n_objects)
        ))
        for choice in choice_functions(Q)
    )


@functools.lru_cache(maxsize=64)
def msp_measure(Q: FiniteJoint) -> ScoreTable:
    """Modified signed predictability; independent of the choice function."""
    half = Fraction(1, 2)
    choice = choice_functions(Q)[0]
    rows = []
    for x in range(Q.n_objects):
        f = predictability(Q, x)
        if f > half:
            rows.append(tuple(f if y == choice[x] else -f for y in range(Q.n_labels)))
        else:
            rows.append(tuple(0 * f for _ in range(Q.n_labels)))
    return ScoreTable(tuple(rows))


# ------------------------------------------------------------- refinements


def _flat(A: ScoreLike) -> list[Number]:
    return [v for row in table_of(A) for v in row]


def is_refinement(A: ScoreLike, B: ScoreLike) -> bool:
    """True iff B(z1) < B(z2) implies A(z1) < A(z2) for all pairs of cells."""
    a, b = _flat(A), _flat(B)
    if len(a) != len(b):
        raise ValueError("shape mismatch")
    # sort by B; every strict step in B must be a strict step in A, which
    # holds iff max of A over each B-level is below min of A over the next.
    levels: dict = {}
    for av, bv in zip(a, b):
        lo, hi = levels.get(bv, (av, av))
        levels[bv] = (min(lo, av), max(hi, av))
    prev_hi = None
    for bv in sorted(levels):
        lo, hi = levels[bv]
        if prev_hi is not None and not prev_hi < lo:
            return False
        prev_hi = hi if prev_hi is None else max(prev_hi, hi)
    return True


def is_label_conditional_refinement(A: ScoreLike, B: ScoreLike) -> bool:
    """Refinement checked separately inside each label column."""
    ta, tb = table_of(A), table_of(B)
    n_y = len(ta[0])
    return all(
        is_refinement([[row[y]] for row in ta], [[row[y]] for row in tb])
        for y in range(n_y)
    )


def _preserves_row_ties(A: ScoreLike, B: ScoreLike) -> bool:
    """B(x, y1) = B(x, y2) implies A(x, y1) = A(x, y2)."""
    ta, tb = table_of(A), table_of(B)
    for ra, rb in zip(ta, tb):
        for y1, y2 in itertools.combinations(range(len(ra)), 2):
            if rb[y1] == rb[y2] and ra[y1] != ra[y2]:
                return False
    return True


def in_R_prime_SP(A: ScoreLike, Q: FiniteJoint) -> bool:
    """Some SP table is refined by A with its within-object ties kept."""
    return any(is_refinement(A, B) and _preserves_row_ties(A, B) for B in sp_measures(Q))


def in_R_MCP(A: ScoreLike, Q: FiniteJoint) -> bool:
    return any(is_refinement(A, B) for B in mcp_measures(Q))


def in_R_doubleprime_MSP(A: ScoreLike, Q: FiniteJoint) -> bool:
    """Refines MSP and ties the labels below one half within each object
    (all labels, when the predictability is below one half)."""
    if not is_refinement(A, msp_measure(Q)):
        return False
    half = Fraction(1, 2)
    ta = table_of(A)
    for x in range(Q.n_objects):
        row = conditional(Q, x)
        f = max(row)
        for y1, y2 in itertools.combinations(range(Q.n_labels), 2):
            if ta[x][y1] == ta[x][y2]:
                continue
            if f < half:
                return False
            if row[y1] < half and row[y2] < half:
                return False
    return True


def in_R_doubleprime_MSP_tight(A: ScoreLike, Q: FiniteJoint) -> bool:
    """:func:`in_R_doubleprime_MSP` plus one boundary condition.

    When f(x) = 1/2 exactly, a label with Q(y|x) = 1/2 must not score below
    the labels with Q(y|x) < 1/2.  Without this the literal class admits
    orders that are strictly worse on OU and OM.
    """
    if not in_R_doubleprime_MSP(A, Q):
        return False
    half = Fraction(1, 2)
    ta = table_of(A)
    for x in range(Q.n_objects):
        row = conditional(Q, x)
        if max(row) != half:
            continue
        top = [y for y, q in enumerate(row) if q == half]
        rest = [y for y, q in enumerate(row) if q < half]
        if any(ta[x][t] < ta[x][r] for t in top for r in rest):
            return False
    return True


def in_R_CP(A: ScoreLike, Q: FiniteJoint) -> bool:
    return is_refinement(A, cp_measure(Q))


def in_R_lc_CP(A: ScoreLike, Q: FiniteJoint) -> bool:
    return is_label_conditional_refinement(A, cp_measure(Q))


def cp_refinement_witness(W: ScoreLike, Q: FiniteJoint) -> WeakOrder | None:
    """A full refinement of CP that is equivalent within classes to W, if any.

    Ordering cells by (CP score, W rank) works exactly when W refines CP
    inside every class.
    """
    from .core import order_of, within_class_order

    if not in_R_lc_CP(W, Q):
        return None
    cp = table_of(cp_measure(Q))
    tw = table_of(within_class_order(W))
    keyed = tuple(tuple((cp[x][y], tw[x][y]) for y in range(Q.n_labels)) for x in range(Q.n_objects))
    witness = order_of(keyed)
    if not (is_refinement(witness, cp) and within_class_order(witness) == within_class_order(W)):
        return None
    return witness
