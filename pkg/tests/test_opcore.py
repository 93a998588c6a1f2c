import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from grc.errors import (
    EnumerationCapError,
    InvalidDistributionError,
    InvalidOperationError,
    NondeterministicOperationError,
    NoWitnessError,
    PreconditionError,
    SpaceTooLargeError,
    UnsupportedClassificationError,
)
from grc.gates import FactorizedSpace, GateKind, build
from grc.opcore import (
    BOLTZMANN,
    Computation,
    ConditionedOperation,
    Distribution,
    Operation,
    Precondition,
    StateSpace,
    compose,
    construct_precondition,
    count_maximal_preconditions,
    entropy_ejected,
    enumerate_maximal_preconditions,
    heat_dissipation,
    identity,
    image_of,
    is_deterministic,
    is_entropy_ejecting,
    is_reversible_under,
    is_unconditionally_reversible,
    merge_entropy_asymptotic,
    merge_entropy_exact,
    precondition_probability,
    push_forward,
    reversal,
    transition_relation,
    witness_context,
)

LN2 = math.log(2)
BIT = StateSpace(("0", "1"))


def fn(targets, n_final=None):
    m = len(targets)
    return Operation.from_function(
        StateSpace.of_size(m), StateSpace.of_size(n_final or m), targets
    )


ERASE = Operation.from_function(BIT, BIT, [0, 0])
COIN = Operation(StateSpace(("s",)), BIT, [[0.5, 0.5]])
CNOT = fn([0, 1, 3, 2])


def ccnot_op():
    return build(FactorizedSpace.binary("x", "y", "z"), "ccNOT", "x", "y", "z").op


def and_into_z():
    space = FactorizedSpace.binary("x", "y", "z")
    return build(space, "rFUNC", "x", "y", "z", v=0, table=_and_table()).op


def _and_table():
    from grc.gates import boolean_table

    return boolean_table("AND")


def comp(op, probs):
    return Computation(op, Distribution(op.initial, probs))


# ------------------------------------------------------------------ types

def test_distribution_support_is_exact():
    d = Distribution(BIT, [1.0, 0.0])
    assert dict(d.support) == {0: 1.0}
    assert d[1] == 0.0
    assert d.probs == (1.0, 0.0)


def test_distribution_validation():
    with pytest.raises(InvalidDistributionError):
        Distribution(BIT, [0.6, 0.5])
    with pytest.raises(InvalidDistributionError):
        Distribution.from_support(BIT, {2: 1.0})


def test_operation_rows_must_be_stochastic():
    with pytest.raises(InvalidOperationError):
        Operation(BIT, BIT, [[0.5, 0.6], [1, 0]])
    with pytest.raises(InvalidOperationError):
        Operation(BIT, BIT, [[1, 0]])


def test_dense_rule_roundtrip():
    op = Operation(BIT, BIT, [[0, 1], [1, 0]])
    assert op.deterministic
    np.testing.assert_array_equal(op.rule, [[0, 1], [1, 0]])
    assert Operation(BIT, BIT, op.rule) == op


def test_dense_rule_refused_for_large_spaces():
    big = StateSpace.of_size(2**12 + 1)
    with pytest.raises(SpaceTooLargeError):
        identity(big).rule


def test_precondition_must_be_nonempty():
    with pytest.raises(PreconditionError):
        Precondition(frozenset())


def test_conditioned_operation_requires_injectivity():
    with pytest.raises(PreconditionError):
        ConditionedOperation(ERASE, Precondition(frozenset({0, 1})))
    with pytest.raises(NondeterministicOperationError):
        ConditionedOperation(Operation(BIT, BIT, [[0.5, 0.5], [0, 1]]), Precondition(frozenset({0})))


# ------------------------------------------------------------ classification

def test_is_deterministic_examples():
    assert is_deterministic(identity(StateSpace.of_size(3)))
    assert not is_deterministic(COIN)
    assert is_deterministic(ccnot_op())


def test_determinism_tolerance():
    assert is_deterministic(Operation(BIT, BIT, [[1 - 1e-13, 0], [0, 1]]))
    # a 1e-13 leak on another entry is not an exact zero
    assert not is_deterministic(Operation(BIT, BIT, [[1 - 1e-13, 1e-13], [0, 1]]))


def test_transition_relation_examples():
    assert transition_relation(identity(BIT)) == {(0, 0), (1, 1)}
    assert transition_relation(ERASE) == {(0, 0), (1, 0)}
    assert transition_relation(COIN) == {(0, 0), (0, 1)}


def test_unconditional_reversibility_examples():
    assert is_unconditionally_reversible(CNOT)
    assert not is_unconditionally_reversible(ERASE)
    assert is_unconditionally_reversible(fn([2, 0, 3, 1]))
    assert is_unconditionally_reversible(COIN)
    assert not is_unconditionally_reversible(Operation(BIT, BIT, [[0.5, 0.5], [0, 1]]))


def test_push_forward_examples():
    d = Distribution(BIT, [0.3, 0.7])
    assert push_forward(Computation(identity(BIT), d)) == d
    assert push_forward(comp(ERASE, [0.5, 0.5])).probs == (1.0, 0.0)
    assert push_forward(comp(COIN, [1.0])).probs == (0.5, 0.5)


def test_push_forward_matches_matrix_product():
    rng = np.random.default_rng(3)
    rule = rng.dirichlet(np.ones(4), size=3)
    op = Operation(StateSpace.of_size(3), StateSpace.of_size(4), rule)
    ctx = rng.dirichlet(np.ones(3))
    out = push_forward(comp(op, ctx))
    np.testing.assert_allclose(out.probs, ctx @ rule, atol=1e-15)


def test_entropy_ejected_examples():
    assert entropy_ejected(comp(ERASE, [0.5, 0.5])) == pytest.approx(LN2, abs=1e-15)
    rset = Operation.from_function(BIT, BIT, [1, 1])
    assert entropy_ejected(comp(rset, [1.0, 0.0])) == 0.0
    assert entropy_ejected(comp(COIN, [1.0])) == pytest.approx(-LN2, abs=1e-15)


def test_is_entropy_ejecting_examples():
    assert is_entropy_ejecting(ERASE)
    assert not is_entropy_ejecting(CNOT)
    assert not is_entropy_ejecting(identity(BIT))
    with pytest.raises(UnsupportedClassificationError):
        is_entropy_ejecting(COIN)


def test_witness_context_examples():
    assert witness_context(ERASE).probs == (0.5, 0.5)
    assert dict(witness_context(fn([0, 0, 0])).support) == {0: 0.5, 1: 0.5}
    with pytest.raises(NoWitnessError):
        witness_context(CNOT)
    with pytest.raises(NoWitnessError):
        witness_context(COIN)


def test_witness_context_and_overwrite_brute_force():
    space = FactorizedSpace.binary("x", "y", "z")
    overwrite = and_into_z()
    # brute-force oracle: lexicographically smallest colliding pair of assignments
    states = list(itertools.product((0, 1), repeat=3))
    image = {s: (s[0], s[1], s[0] & s[1]) for s in states}
    pairs = sorted(
        (space.index(a), space.index(b))
        for a, b in itertools.combinations(states, 2)
        if image[a] == image[b]
    )
    a, b = pairs[0]
    w = witness_context(overwrite)
    assert dict(w.support) == {a: 0.5, b: 0.5}
    assert entropy_ejected(Computation(overwrite, w)) == pytest.approx(LN2, abs=1e-12)


# ------------------------------------------------------------ preconditions

def test_image_of_examples():
    assert image_of(identity(BIT), Precondition(frozenset({0, 1}))) == {0, 1}
    assert image_of(ERASE, Precondition(frozenset({1}))) == {0}
    space = FactorizedSpace.binary("x", "y")
    copy = build(space, "rCOPY", "x", "y", v=0)
    y_zero = Precondition(frozenset(space.index((x, 0)) for x in (0, 1)))
    assert image_of(copy.op, y_zero) == {space.index((x, x)) for x in (0, 1)}
    with pytest.raises(NondeterministicOperationError):
        image_of(COIN, Precondition(frozenset({0})))


def test_is_reversible_under_examples():
    assert is_reversible_under(ERASE, Precondition(frozenset({1})))
    assert not is_reversible_under(ERASE, Precondition(frozenset({0, 1})))


@given(st.lists(st.integers(0, 4), min_size=1, max_size=5), st.data())
def test_singleton_preconditions_always_reversible(targets, data):
    op = fn(targets, 5)
    i = data.draw(st.integers(0, len(targets) - 1))
    assert is_reversible_under(op, Precondition(frozenset({i})))


def test_construct_precondition_examples():
    assert construct_precondition(ERASE).members == {0}
    assert construct_precondition(identity(StateSpace.of_size(4))).members == {0, 1, 2, 3}
    pre = construct_precondition(and_into_z())
    assert len(pre) == 4


@given(st.lists(st.integers(0, 5), min_size=1, max_size=6))
def test_construct_precondition_size_k(targets):
    op = fn(targets, 6)
    pre = construct_precondition(op)
    assert len(pre) == len(set(targets))
    assert is_reversible_under(op, pre)


def test_enumerate_examples():
    assert [p.members for p in enumerate_maximal_preconditions(ERASE)] == [{0}, {1}]
    assert len(enumerate_maximal_preconditions(identity(StateSpace.of_size(5)))) == 1
    all_pre = enumerate_maximal_preconditions(and_into_z())
    assert len(all_pre) == 16 == count_maximal_preconditions(and_into_z())
    assert len({p.members for p in all_pre}) == 16


def test_enumerate_order_is_lexicographic():
    op = fn([0, 1, 0, 1])
    assert [p.sorted() for p in enumerate_maximal_preconditions(op)] == [[0, 1], [0, 3], [1, 2], [2, 3]]


def test_enumerate_cap_reports_count(monkeypatch):
    with pytest.raises(EnumerationCapError) as err:
        enumerate_maximal_preconditions(and_into_z(), limit=10)
    assert err.value.count == 16
    monkeypatch.setenv("GRC_ENUM_LIMIT", "3")
    with pytest.raises(EnumerationCapError):
        enumerate_maximal_preconditions(and_into_z())


def test_precondition_probability_examples():
    a = Precondition(frozenset({0}))
    assert precondition_probability(comp(ERASE, [0.5, 0.5]), a) == 0.5
    assert precondition_probability(comp(ERASE, [1.0, 0.0]), a) == 1.0
    assert precondition_probability(comp(ERASE, [0.99, 0.01]), a) == 0.99
    with pytest.raises(PreconditionError):
        precondition_probability(comp(ERASE, [1.0, 0.0]), Precondition(frozenset({2})))


# ------------------------------------------------------------------ reversal

def test_reversal_of_copy_is_uncopy_on_image():
    space = FactorizedSpace.binary("x", "y")
    copy = build(space, "rCOPY", "x", "y", v=0)
    uncopy = build(space, "rUnCOPY", "x", "y", v=0)
    rev = reversal(copy)
    assert rev.assumed.members == image_of(copy.op, copy.assumed)
    for b in rev.assumed.members:
        assert rev(b) == uncopy(b)


def test_reversal_of_identity():
    a = Precondition(frozenset({1, 2}))
    rev = reversal(ConditionedOperation(identity(StateSpace.of_size(4)), a))
    assert rev.op == identity(StateSpace.of_size(4))
    assert rev.assumed == a


def test_reversal_between_distinct_spaces():
    src, dst = StateSpace(("a", "b", "c")), StateSpace(("p", "b", "q"))
    op = Operation.from_function(src, dst, [2, 2, 0])
    rev = reversal(ConditionedOperation(op, Precondition(frozenset({1, 2}))))
    # image {2, 0} goes back; label "b" is shared, so state 1 keeps its label
    assert list(rev.op.targets) == [2, 1, 1]


@given(st.lists(st.integers(0, 4), min_size=1, max_size=5), st.data())
def test_double_reversal_agrees_on_assumed_set(targets, data):
    op = fn(targets, 5)
    pre = data.draw(st.sampled_from(enumerate_maximal_preconditions(op)))
    co = ConditionedOperation(op, pre)
    rev = reversal(co)
    for c in pre.members:
        assert rev(co(c)) == c
    back = reversal(rev)
    for c in pre.members:
        assert back(c) == co(c)


# ---------------------------------------------------------- merge entropy

def test_merge_entropy_exact_examples():
    assert merge_entropy_exact(0.5, 0.5) == pytest.approx(LN2, abs=1e-15)
    # mpmath: 0.0560015343548473...
    assert merge_entropy_exact(0.99, 0.01) == pytest.approx(0.0560015343548473, abs=1e-12)
    assert merge_entropy_exact(0.5, 1e-12) < 1e-10


def test_merge_entropy_asymptotic_examples():
    # mpmath: 0.0559511985013459 and 0.0560517018598809
    assert merge_entropy_asymptotic(0.99, 99) == pytest.approx(0.0559511985013459, abs=1e-12)
    assert merge_entropy_asymptotic(1.0, 100) == pytest.approx(0.0560517018598809, abs=1e-12)
    rel = abs(merge_entropy_asymptotic(0.99, 99) - merge_entropy_exact(0.99, 0.01)) / 0.056002
    assert rel < 1e-3
    assert merge_entropy_asymptotic(1.0, 1e12) < 1e-10


@pytest.mark.parametrize("args", [(0, 0.5), (0.7, 0.7), (0.5, -0.1)])
def test_merge_entropy_exact_domain(args):
    with pytest.raises(ValueError):
        merge_entropy_exact(*args)


@pytest.mark.parametrize("args", [(0.5, 1.0), (0.0, 10), (1.5, 10)])
def test_merge_entropy_asymptotic_domain(args):
    with pytest.raises(ValueError):
        merge_entropy_asymptotic(*args)


def test_heat_dissipation_examples():
    assert heat_dissipation(LN2, 300) == pytest.approx(2.870978885078724e-21, rel=1e-12)
    assert heat_dissipation(0.0, 300) == 0.0
    assert heat_dissipation(1.0, 1.0) == BOLTZMANN
    with pytest.raises(ValueError):
        heat_dissipation(1.0, 0.0)


# ------------------------------------------------------------- properties

@st.composite
def op_and_context(draw, max_states=4):
    m = draw(st.integers(1, max_states))
    n = draw(st.integers(1, max_states))
    targets = draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))
    weights = draw(st.lists(st.floats(0.01, 1), min_size=m, max_size=m))
    mask = draw(st.lists(st.booleans(), min_size=m, max_size=m))
    if not any(mask):
        mask[0] = True
    w = [x if keep else 0.0 for x, keep in zip(weights, mask)]
    total = sum(w)
    op = fn(targets, n)
    return op, Distribution(op.initial, [x / total for x in w])


@given(op_and_context())
def test_landauer_properties(pair):
    op, ctx = pair
    ds = entropy_ejected(Computation(op, ctx))
    assert ds >= -1e-12
    support = Precondition(frozenset(ctx.support))
    # zero ejection exactly when the support maps one-to-one
    assert (ds <= 1e-9) == is_reversible_under(op, support)
    if is_unconditionally_reversible(op):
        assert abs(ds) <= 1e-9
    else:
        assert entropy_ejected(Computation(op, witness_context(op))) == pytest.approx(LN2, abs=1e-9)


@given(op_and_context(), st.lists(st.integers(0, 3), min_size=1, max_size=4))
def test_compose_matches_sequential_push_forward(pair, second_targets):
    op, ctx = pair
    n = len(op.final)
    second = Operation.from_function(op.final, StateSpace.of_size(4), [second_targets[j % len(second_targets)] for j in range(n)])
    direct = push_forward(Computation(compose(op, second), ctx))
    staged = push_forward(Computation(second, push_forward(Computation(op, ctx))))
    assert direct.space == staged.space
    for j in range(4):
        assert direct[j] == pytest.approx(staged[j], abs=1e-15)
