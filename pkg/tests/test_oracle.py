import itertools
from fractions import Fraction as F

import numpy as np
import pytest

from cpeff.core import FiniteJoint, WeakOrder, as_fraction, load_joint
from cpeff.criteria import Criterion
from cpeff.errors import CapExceeded, PreconditionViolated, UnknownExampleId
from cpeff.idealized import LABEL_CONDITIONAL, UNCONDITIONAL, cp_measure, in_R_CP, sp_measures
from cpeff.oracle import (
    COUNTEREXAMPLES,
    OptimalitySpec,
    OrderSpace,
    multi_empty_product_vanishes,
    data_path,
    enumerate_weak_orders,
    epsilon_test_grid,
    example_joint,
    optimal_set,
    order_space,
    ordered_bell,
    random_joint,
    verify_counterexample,
    verify_theorem,
)


def test_ordered_bell_numbers():
    assert [ordered_bell(n) for n in range(9)] == [1, 1, 3, 13, 75, 541, 4683, 47293, 545835]


@pytest.mark.parametrize("n", range(0, 6))
def test_enumeration_is_complete_and_duplicate_free(n):
    orders = list(enumerate_weak_orders(n))
    assert len(orders) == len(set(orders)) == ordered_bell(n)
    for r in orders:
        assert set(r) == set(range(max(r, default=-1) + 1))


def test_cap():
    with pytest.raises(CapExceeded):
        next(enumerate_weak_orders(8))
    with pytest.raises(CapExceeded):
        order_space((2, 4))


def test_label_conditional_space_is_a_product():
    assert len(order_space((3, 2), LABEL_CONDITIONAL)) == 13 ** 2
    assert len(order_space((2, 4), LABEL_CONDITIONAL)) == 3 ** 4


def test_optimality_spec_validation():
    OptimalitySpec("M", epsilon=F(1, 2))
    with pytest.raises(ValueError):
        OptimalitySpec("U", epsilon=F(1, 2))
    with pytest.raises(ValueError):
        OptimalitySpec("M", epsilon=F(1))
    with pytest.raises(ValueError):
        OptimalitySpec("S", mode="bogus")
    with pytest.raises(ValueError):
        OptimalitySpec("S_PHI")


def test_single_object_s_optimum_is_cp_order():
    Q = example_joint("single-object")
    assert optimal_set(Q, OptimalitySpec("S")) == {WeakOrder(((0, 1, 2),))}


def test_float_q_rejected():
    with pytest.raises(ValueError):
        OrderSpace(example_joint("single-object").to_float())


@pytest.mark.parametrize("c", [Criterion.S, Criterion.OF, Criterion.N, Criterion.OE, Criterion.M, Criterion.E, Criterion.OM])
@pytest.mark.parametrize("mode", [UNCONDITIONAL, LABEL_CONDITIONAL])
def test_batch_keys_rank_like_exact_route(c, mode):
    Q = random_joint(11, (2, 2))
    space = OrderSpace(Q, mode)
    eps = F(3, 7) if c.needs_epsilon else None
    prim, sec = space.batch_keys(c, eps)
    exact = [space.exact_value(i, c, eps) for i in range(len(space))]
    for i, j in itertools.combinations(range(len(space)), 2):
        assert np.sign(prim[i] - prim[j]) == np.sign(exact[i][0] - exact[j][0])
        if sec is not None:
            assert np.sign(sec[i] - sec[j]) == np.sign(exact[i][1] - exact[j][1])


def per_epsilon_optimum(space, c, eps):
    keys = [space.exact_value(i, c, eps) for i in range(len(space))]
    best = min(keys)
    return {i for i, k in enumerate(keys) if k == best}


def dense_grid(space):
    bps = [as_fraction(v) for v in space.breakpoints()]
    edges = [F(0)] + bps + [F(1)]
    pts = set(bps)
    for lo, hi in zip(edges, edges[1:]):
        w = hi - lo
        pts.update({lo + w / 10**6, (lo + hi) / 2, hi - w / 10**6})
    return sorted(pts)


@pytest.mark.parametrize("c", [Criterion.N, Criterion.M, Criterion.E, Criterion.OM, Criterion.OE])
@pytest.mark.parametrize("shape, mode", [((1, 3), UNCONDITIONAL), ((2, 2), UNCONDITIONAL), ((2, 2), LABEL_CONDITIONAL)])
def test_for_all_epsilon_matches_intersection_of_pointwise_optima(c, shape, mode):
    Q = random_joint(21, shape)
    space = OrderSpace(Q, mode)
    survivors = set(range(len(space)))
    for eps in dense_grid(space):
        survivors &= per_epsilon_optimum(space, c, eps)
    assert space.optimal(c) == frozenset(space.orders[i] for i in survivors)


def test_single_epsilon_optimum_contains_for_all_optimum():
    Q = random_joint(5, (1, 3))
    space = OrderSpace(Q)
    allc = space.optimal("M")
    for eps in epsilon_test_grid(Q, space.orders[:5]):
        assert allc <= space.optimal("M", eps)


@pytest.mark.parametrize("example", COUNTEREXAMPLES)
def test_counterexamples_hold(example):
    r = verify_counterexample(example)
    assert r.passed, r.to_line()
    assert all(ch.ok for ch in r.checks)


@pytest.mark.parametrize("example", ["F-E", "lc-F-E"])
def test_delta_examples_hold_for_other_delta(example):
    assert verify_counterexample(example, F(1, 400)).passed


def test_unknown_example():
    with pytest.raises(UnknownExampleId):
        verify_counterexample("nope")
    with pytest.raises(UnknownExampleId):
        example_joint("nope")


@pytest.mark.parametrize("name, filename", [
    ("single-object", "single_object.q"),
    ("two-object-delta", "two_object_delta.q"),
    ("lc-two-object", "lc_two_object.q"),
    ("lc-three-object-delta", "lc_three_object_delta.q"),
])
def test_data_files_match_built_in_tables(name, filename):
    assert load_joint(data_path(filename)) == example_joint(name)


def test_multi_empty_product_vanishes_for_cp_and_sp():
    Q = example_joint("single-object")
    assert multi_empty_product_vanishes(Q, cp_measure(Q))
    assert multi_empty_product_vanishes(Q, sp_measures(Q)[0])


def test_multi_empty_product_can_survive_for_other_orders():
    Q = example_joint("single-object")
    assert not all(multi_empty_product_vanishes(Q, o) for o in order_space(Q.shape))


def test_binary_check_preconditions():
    Q = random_joint(1, (2, 3))
    with pytest.raises(PreconditionViolated):
        verify_theorem(Q, 6)
    same = FiniteJoint(((F(1, 8), F(1, 8)), (F(3, 8), F(3, 8))))
    with pytest.raises(PreconditionViolated):
        verify_theorem(same, 6)
    with pytest.raises(ValueError):
        verify_theorem(Q, 7)


def test_report_line():
    Q = example_joint("single-object")
    line = verify_theorem(Q, 2, "single").to_line()
    assert line == "T2,single,pass,U=1 M=1"
    bad = verify_theorem(Q, 4, "single")
    assert not bad.passed and "110" in bad.to_line()
    assert verify_theorem(Q, 4, "single", tight_msp=True).passed


def test_random_joint():
    a, b = random_joint(3, (3, 2)), random_joint(3, (3, 2))
    assert a == b and sum(map(sum, a.probs)) == 1
    Q = random_joint(4, (3, 2), distinct_binary=True)
    cond = [row[1] / sum(row) for row in Q.probs]
    assert len(set(cond)) == 3


@pytest.mark.slow
def test_binary_criteria_pair_up_and_admit_cp_refinements():
    pairs = (("U", "F"), ("OU", "OF"), ("M", "E"), ("OM", "OE"))
    for k in range(50):
        Q = random_joint(5170 + k, ((1, 2), (2, 2), (3, 2))[k % 3])
        space = OrderSpace(Q)
        opt = {c.value: space.optimal(c) for c in Criterion if c.value != "S_PHI"}
        for a, b in pairs:
            assert opt[a] == opt[b], (k, a, b)
        for name, orders in opt.items():
            assert any(in_R_CP(o, Q) for o in orders), (k, name)
