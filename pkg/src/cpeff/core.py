"""Domain types: finite joint distributions, score tables, weak orders and
lexicographic criterion values.

Numbers are kept generic.  A :class:`FiniteJoint` built from
:class:`fractions.Fraction` entries runs every downstream idealised
computation in exact rational arithmetic; float entries give ordinary
double precision.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Sequence, Union

import gmpy2

from .errors import DegenerateMarginal, NormalizationError, ParseError

Number = Union[Fraction, float, int]

FLOAT_SUM_TOL = 1e-9

RATIONAL_TYPES = (Fraction, int, type(gmpy2.mpq()))


def _freeze(rows: Iterable[Iterable[Number]]) -> tuple[tuple[Number, ...], ...]:
    out = tuple(tuple(r) for r in rows)
    if not out or not out[0]:
        raise ValueError("table must have at least one row and one column")
    width = len(out[0])
    if any(len(r) != width for r in out):
        raise ValueError("ragged table")
    return out


@dataclass(frozen=True)
class FiniteJoint:
    """Probability table ``Q[x][y]`` over a finite example space X x Y."""

    probs: tuple[tuple[Number, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", _freeze(self.probs))

    @classmethod
    def from_conditionals(cls, marginal: Sequence[Number], rows: Sequence[Sequence[Number]]) -> "FiniteJoint":
        """Build Q from Q_X and the rows Q(.|x)."""
        return cls(tuple(tuple(qx * c for c in row) for qx, row in zip(marginal, rows)))

    @property
    def n_objects(self) -> int:
        return len(self.probs)

    @property
    def n_labels(self) -> int:
        return len(self.probs[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_objects, self.n_labels

    @property
    def exact(self) -> bool:
        return all(isinstance(v, RATIONAL_TYPES) for row in self.probs for v in row)

    def __getitem__(self, xy: tuple[int, int]) -> Number:
        x, y = xy
        return self.probs[x][y]

    def cells(self) -> Iterator[tuple[int, int]]:
        """All (x, y) in canonical x-major order."""
        return itertools.product(range(self.n_objects), range(self.n_labels))

    def marginal_x(self) -> tuple[Number, ...]:
        return tuple(sum(row) for row in self.probs)

    def marginal_y(self) -> tuple[Number, ...]:
        return tuple(sum(row[y] for row in self.probs) for y in range(self.n_labels))

    def to_float(self) -> "FiniteJoint":
        return FiniteJoint(tuple(tuple(float(v) for v in row) for row in self.probs))


def validate_joint(Q: FiniteJoint, label_conditional: bool = False) -> None:
    """Raise unless Q is a probability table with positive object marginals
    (and positive label marginals when ``label_conditional``)."""
    for row in Q.probs:
        for v in row:
            if not isinstance(v, (Real,) + RATIONAL_TYPES) or v < 0 or v > 1 or (isinstance(v, float) and not math.isfinite(v)):
                raise NormalizationError(f"entry {v!r} is not a probability")
    total = sum(sum(row) for row in Q.probs)
    if Q.exact:
        if total != 1:
            raise NormalizationError(f"entries sum to {total}, not 1")
    elif abs(float(total) - 1.0) > FLOAT_SUM_TOL:
        raise NormalizationError(f"entries sum to {float(total)!r}, not 1")
    for x, qx in enumerate(Q.marginal_x()):
        if qx <= 0:
            raise DegenerateMarginal(f"object {x} has zero marginal probability")
    if label_conditional:
        for y, qy in enumerate(Q.marginal_y()):
            if qy <= 0:
                raise DegenerateMarginal(f"label {y} has zero marginal probability")


def conditional(Q: FiniteJoint, x: int) -> tuple[Number, ...]:
    """Q(.|x)."""
    row = Q.probs[x]
    qx = sum(row)
    return tuple(v / qx for v in row)


def predictability(Q: FiniteJoint, x: int) -> Number:
    """f(x) = max_y Q(y|x)."""
    return max(conditional(Q, x))


def choice_functions(Q: FiniteJoint) -> list[tuple[int, ...]]:
    """Every map x -> y attaining the row maximum of Q(.|x).

    Each map is a tuple indexed by object; the list is in lexicographic
    order (x-major, then label id).
    """
    argmax_sets = []
    for x in range(Q.n_objects):
        row = conditional(Q, x)
        best = max(row)
        argmax_sets.append([y for y, v in enumerate(row) if v == best])
    return [tuple(c) for c in itertools.product(*argmax_sets)]


@dataclass(frozen=True)
class ScoreTable:
    """An idealised conformity measure given by an explicit score per cell."""

    scores: tuple[tuple[Number, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "scores", _freeze(self.scores))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.scores), len(self.scores[0])

    def __getitem__(self, xy: tuple[int, int]) -> Number:
        x, y = xy
        return self.scores[x][y]


@dataclass(frozen=True)
class WeakOrder:
    """Dense ranks of the cells of X x Y; rank 0 is least conforming."""

    rank: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rank", _freeze(self.rank))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rank), len(self.rank[0])

    def __getitem__(self, xy: tuple[int, int]) -> int:
        x, y = xy
        return self.rank[x][y]

    def flat(self) -> tuple[int, ...]:
        return tuple(v for row in self.rank for v in row)

    @classmethod
    def from_flat(cls, ranks: Sequence[int], n_labels: int) -> "WeakOrder":
        return cls(tuple(tuple(ranks[i:i + n_labels]) for i in range(0, len(ranks), n_labels)))


ScoreLike = Union[ScoreTable, WeakOrder, Sequence[Sequence[Number]]]


def table_of(A: ScoreLike) -> tuple[tuple[Number, ...], ...]:
    """The raw score matrix behind a ScoreTable, WeakOrder or nested sequence."""
    if isinstance(A, ScoreTable):
        return A.scores
    if isinstance(A, WeakOrder):
        return A.rank
    return _freeze(A)


def dense_ranks(values: Sequence[Number]) -> list[int]:
    levels = {v: i for i, v in enumerate(sorted(set(values)))}
    return [levels[v] for v in values]


def order_of(A: ScoreLike) -> WeakOrder:
    """The conformity order induced by a score table (ties by exact equality)."""
    table = table_of(A)
    width = len(table[0])
    flat = dense_ranks([v for row in table for v in row])
    return WeakOrder.from_flat(flat, width)


def within_class_order(A: ScoreLike) -> WeakOrder:
    """Ranks computed separately inside each label column.

    Two tables are equivalent within classes iff this is identical.
    """
    table = table_of(A)
    cols = [dense_ranks([row[y] for row in table]) for y in range(len(table[0]))]
    return WeakOrder(tuple(tuple(cols[y][x] for y in range(len(cols))) for x in range(len(table))))


def check_epsilon(epsilon: Number) -> Number:
    """Significance levels live in the open interval (0, 1)."""
    if not 0 < epsilon < 1:
        raise ValueError(f"significance level must lie in (0, 1), got {epsilon!r}")
    return epsilon


SMALLER = "min"
LARGER = "max"


@dataclass(frozen=True)
class CriterionValue:
    """One- or two-component efficiency value compared lexicographically."""

    primary: Number
    secondary: Number | None = None
    primary_dir: str = SMALLER
    secondary_dir: str = SMALLER

    def key(self) -> tuple:
        """Sort key: smaller key is better."""
        p = self.primary if self.primary_dir == SMALLER else -self.primary
        if self.secondary is None:
            return (p,)
        s = self.secondary if self.secondary_dir == SMALLER else -self.secondary
        return (p, s)

    def compare(self, other: "CriterionValue") -> int:
        """-1 if self is better, 1 if worse, 0 if equally good."""
        a, b = self.key(), other.key()
        return (a > b) - (a < b)

    def better_or_equal(self, other: "CriterionValue") -> bool:
        return self.compare(other) <= 0


# ---------------------------------------------------------------- file formats


def parse_number(text: str, rational: bool) -> Number:
    text = text.strip()
    if rational:
        return Fraction(text)
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def _parse_cells(lines: Iterable[str], rational: bool, source: str) -> dict[tuple[int, int], Number]:
    cells: dict[tuple[int, int], Number] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ParseError(f"{source}:{lineno}: expected 'x_id,y_id,value', got {line!r}")
        try:
            x, y = int(parts[0]), int(parts[1])
            value = parse_number(parts[2], rational)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{source}:{lineno}: {exc}") from None
        if x < 0 or y < 0:
            raise ParseError(f"{source}:{lineno}: negative id")
        if (x, y) in cells:
            raise ParseError(f"{source}:{lineno}: duplicate cell ({x}, {y})")
        cells[(x, y)] = value
    if not cells:
        raise ParseError(f"{source}: no records")
    return cells


def _cells_to_rows(cells: dict[tuple[int, int], Number], zero: Number, shape=None):
    n_x = 1 + max(x for x, _ in cells)
    n_y = 1 + max(y for _, y in cells)
    if shape is not None:
        n_x, n_y = max(n_x, shape[0]), max(n_y, shape[1])
    return tuple(tuple(cells.get((x, y), zero) for y in range(n_y)) for x in range(n_x))


def parse_joint(text: str, rational: bool = True, source: str = "<string>") -> FiniteJoint:
    """Parse ``x_id,y_id,prob`` records; missing cells are 0."""
    cells = _parse_cells(text.splitlines(), rational, source)
    return FiniteJoint(_cells_to_rows(cells, Fraction(0) if rational else 0.0))


def parse_scores(text: str, rational: bool = True, source: str = "<string>", shape=None) -> ScoreTable:
    cells = _parse_cells(text.splitlines(), rational, source)
    return ScoreTable(_cells_to_rows(cells, Fraction(0) if rational else 0.0, shape))


def load_joint(path, rational: bool = True) -> FiniteJoint:
    with open(path, encoding="utf-8") as fh:
        return parse_joint(fh.read(), rational, str(path))


def load_scores(path, rational: bool = True, shape=None) -> ScoreTable:
    with open(path, encoding="utf-8") as fh:
        return parse_scores(fh.read(), rational, str(path), shape)


def as_fraction(v) -> Fraction:
    """Exact Fraction with plain int parts (``Fraction(mpq)`` keeps mpz parts)."""
    if isinstance(v, (Fraction, type(gmpy2.mpq()))):
        return Fraction(int(v.numerator), int(v.denominator))
    return Fraction(v)


def format_number(v: Number) -> str:
    """Rationals as ``p/q``, floats with 17 significant digits."""
    if isinstance(v, RATIONAL_TYPES) and not isinstance(v, int):
        v = as_fraction(v)
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def dump_joint(Q: FiniteJoint) -> str:
    lines = [f"{x},{y},{format_number(Q[x, y])}" for x, y in Q.cells()]
    return "\n".join(lines) + "\n"


def dump_scores(A: ScoreLike) -> str:
    table = table_of(A)
    lines = [f"{x},{y},{format_number(v)}" for x, row in enumerate(table) for y, v in enumerate(row)]
    return "\n".join(lines) + "\n"
