"""Computational operations, operating contexts and Landauer accounting.

State indices are 0-based throughout. Ties are always broken towards the
lowest index in the declared state order.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    EnumerationCapError,
    InvalidDistributionError,
    InvalidOperationError,
    NondeterministicOperationError,
    NoWitnessError,
    PreconditionError,
    SpaceMismatchError,
    SpaceTooLargeError,
    UnsupportedClassificationError,
)
from .physical import SUM_TOL, entropy_of

#: Boltzmann constant, J/K (exact SI value).
BOLTZMANN = 1.380649e-23

#: Largest state count for which a dense transition matrix is materialised.
DENSE_LIMIT = 2**12

DEFAULT_ENUM_LIMIT = 10**6

DETERMINISM_TOL = 1e-12


def default_enum_limit() -> int:
    """Enumeration cap, overridable through ``GRC_ENUM_LIMIT``."""
    value = os.environ.get("GRC_ENUM_LIMIT")
    if value:
        try:
            return int(value)
        except ValueError:
            pass
    return DEFAULT_ENUM_LIMIT


@dataclass(frozen=True)
class StateSpace:
    """Ordered set of computational state names."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if not labels:
            raise ValueError("a state space needs at least one state")
        if len(set(labels)) != len(labels):
            raise ValueError("state labels must be distinct")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, n: int, prefix: str = "c") -> StateSpace:
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    def __len__(self) -> int:
        return len(self.labels)

    def label(self, index: int) -> str:
        return self.labels[index]

    def index(self, label: str) -> int:
        return self.labels.index(label)


class Distribution:
    """Probability distribution over a state space.

    Only strictly positive entries are stored (``support``); any state not in
    the support has probability exactly 0.
    """

    __slots__ = ("space", "_support")

    def __init__(self, space, probs: Iterable[float]):
        probs = list(probs)
        if len(probs) != len(space):
            raise SpaceMismatchError(f"{len(probs)} probabilities for {len(space)} states")
        self._init(space, {i: p for i, p in enumerate(probs)})

    @classmethod
    def from_support(cls, space, mapping: Mapping[int, float]) -> Distribution:
        self = cls.__new__(cls)
        self._init(space, mapping)
        return self

    def _init(self, space, mapping: Mapping[int, float]) -> None:
        n = len(space)
        support = {}
        values = []
        for i, p in mapping.items():
            i, p = int(i), float(p)
            if not 0 <= i < n:
                raise InvalidDistributionError(f"state index {i} out of range for {n} states")
            if not 0.0 <= p <= 1.0 + SUM_TOL:
                raise InvalidDistributionError(f"probability {p!r} outside [0, 1]")
            p = min(p, 1.0)
            values.append(p)
            if p > 0.0:
                support[i] = p
        total = math.fsum(values)
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
        self.space = space
        self._support = MappingProxyType(dict(sorted(support.items())))

    @classmethod
    def point(cls, space, index: int) -> Distribution:
        return cls.from_support(space, {index: 1.0})

    @classmethod
    def uniform(cls, space, indices: Iterable[int] | None = None) -> Distribution:
        idx = list(range(len(space)) if indices is None else indices)
        return cls.from_support(space, {i: 1.0 / len(idx) for i in idx})

    @property
    def support(self) -> Mapping[int, float]:
        return self._support

    @property
    def probs(self) -> tuple[float, ...]:
        if len(self.space) > DENSE_LIMIT:
            raise SpaceTooLargeError("dense probability vector requested for a large space")
        out = [0.0] * len(self.space)
        for i, p in self._support.items():
            out[i] = p
        return tuple(out)

    def __getitem__(self, index: int) -> float:
        return self._support.get(index, 0.0)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.space == other.space and dict(self._support) == dict(other._support)

    def __hash__(self):
        return hash((self.space, tuple(self._support.items())))

    def __repr__(self):
        return f"Distribution({dict(self._support)!r}, n={len(self.space)})"


class Operation:
    """Stochastic transition rule from ``initial`` to ``final`` states.

    Deterministic operations are held as a target index per initial state;
    general ones as sparse rows of ``(final_index, probability)`` pairs.
    """

    __slots__ = ("initial", "final", "_rows", "_targets")

    def __init__(self, initial, final, rule):
        rows = []
        for row in rule:
            rows.append({j: p for j, p in enumerate(row)})
        if len(rows) != len(initial):
            raise InvalidOperationError(f"{len(rows)} rows for {len(initial)} initial states")
        self._init_rows(initial, final, rows)

    @classmethod
    def from_rows(cls, initial, final, rows: Sequence[Mapping[int, float]]) -> Operation:
        if len(rows) != len(initial):
            raise InvalidOperationError(f"{len(rows)} rows for {len(initial)} initial states")
        self = cls.__new__(cls)
        self._init_rows(initial, final, rows)
        return self

    @classmethod
    def from_function(cls, initial, final, targets) -> Operation:
        """Deterministic operation sending initial state ``i`` to ``targets[i]``."""
        t = np.array(targets, dtype=np.int64).reshape(-1)
        if t.size != len(initial):
            raise InvalidOperationError(f"{t.size} targets for {len(initial)} initial states")
        if t.size and (t.min() < 0 or t.max() >= len(final)):
            raise InvalidOperationError("target index out of range")
        t.setflags(write=False)
        self = cls.__new__(cls)
        self.initial, self.final = initial, final
        self._rows = None
        self._targets = t
        return self

    def _init_rows(self, initial, final, rows) -> None:
        n = len(final)
        clean = []
        for i, row in enumerate(rows):
            entries = []
            for j, p in sorted(row.items()):
                j, p = int(j), float(p)
                if not 0 <= j < n:
                    raise InvalidOperationError(f"final index {j} out of range in row {i}")
                if not 0.0 <= p <= 1.0 + SUM_TOL:
                    raise InvalidOperationError(f"entry {p!r} outside [0, 1] in row {i}")
                p = min(p, 1.0)
                if p > 0.0:
                    entries.append((j, p))
            total = math.fsum(p for _, p in entries)
            if abs(total - 1.0) > SUM_TOL:
                raise InvalidOperationError(f"row {i} sums to {total!r}, not 1")
            clean.append(tuple(entries))
        self.initial, self.final = initial, final
        if all(len(r) == 1 and abs(r[0][1] - 1.0) <= DETERMINISM_TOL for r in clean):
            t = np.array([r[0][0] for r in clean], dtype=np.int64)
            t.setflags(write=False)
            self._targets, self._rows = t, None
        else:
            self._targets, self._rows = None, tuple(clean)

    @property
    def deterministic(self) -> bool:
        return self._targets is not None

    @property
    def targets(self) -> np.ndarray:
        """Read-only array of target indices (deterministic operations only)."""
        if self._targets is None:
            raise NondeterministicOperationError("operation is not deterministic")
        return self._targets

    def row(self, i: int) -> tuple[tuple[int, float], ...]:
        if self._targets is not None:
            return ((int(self._targets[i]), 1.0),)
        return self._rows[i]

    def rows(self) -> Iterator[tuple[tuple[int, float], ...]]:
        for i in range(len(self.initial)):
            yield self.row(i)

    @property
    def rule(self) -> np.ndarray:
        """Dense ``m x n`` transition matrix."""
        m, n = len(self.initial), len(self.final)
        if max(m, n) > DENSE_LIMIT:
            raise SpaceTooLargeError(f"dense matrix refused above {DENSE_LIMIT} states")
        out = np.zeros((m, n))
        for i in range(m):
            for j, p in self.row(i):
                out[i, j] = p
        return out

    def __call__(self, i: int) -> int:
        return int(self.targets[i])

    def __eq__(self, other):
        if not isinstance(other, Operation):
            return NotImplemented
        if self.initial != other.initial or self.final != other.final:
            return False
        if self.deterministic and other.deterministic:
            return bool(np.array_equal(self._targets, other._targets))
        return list(self.rows()) == list(other.rows())

    def __hash__(self):
        return hash((self.initial, self.final, len(self.initial)))

    def __repr__(self):
        kind = "deterministic" if self.deterministic else "stochastic"
        return f"<Operation {kind} {len(self.initial)}->{len(self.final)}>"


def identity(space) -> Operation:
    return Operation.from_function(space, space, np.arange(len(space)))


def compose(first: Operation, second: Operation) -> Operation:
    """Operation that applies ``first`` and then ``second``."""
    if first.final != second.initial:
        raise SpaceMismatchError("cannot compose: final space of first != initial space of second")
    if first.deterministic and second.deterministic:
        return Operation.from_function(first.initial, second.final, second.targets[first.targets])
    rows = []
    for row in first.rows():
        acc: dict[int, list[float]] = {}
        for j, p in row:
            for k, q in second.row(j):
                acc.setdefault(k, []).append(p * q)
        rows.append({k: math.fsum(v) for k, v in acc.items()})
    return Operation.from_rows(first.initial, second.final, rows)


@dataclass(frozen=True)
class Computation:
    """An operation together with its operating context."""

    op: Operation
    context: Distribution

    def __post_init__(self):
        if self.context.space != self.op.initial:
            raise SpaceMismatchError("context is not over the operation's initial states")


@dataclass(frozen=True)
class Precondition:
    """Assumed set of initial states (0-based indices)."""

    members: frozenset[int]

    def __post_init__(self):
        members = frozenset(int(i) for i in self.members)
        if not members:
            raise PreconditionError("a precondition must be non-empty")
        if min(members) < 0:
            raise PreconditionError("negative state index in precondition")
        object.__setattr__(self, "members", members)

    def __contains__(self, index: int) -> bool:
        return index in self.members

    def __len__(self) -> int:
        return len(self.members)

    def sorted(self) -> list[int]:
        return sorted(self.members)


@dataclass(frozen=True)
class ConditionedOperation:
    """A deterministic operation paired with an assumed precondition it is injective on."""

    op: Operation
    assumed: Precondition

    def __post_init__(self):
        if not self.op.deterministic:
            raise NondeterministicOperationError("conditioned operations must be deterministic")
        if max(self.assumed.members) >= len(self.op.initial):
            raise PreconditionError("precondition refers to a state outside the initial space")
        if not is_reversible_under(self.op, self.assumed):
            raise PreconditionError("operation is not injective on its assumed set")

    def __call__(self, i: int) -> int:
        return self.op(i)


def _require_deterministic(op: Operation) -> None:
    if not op.deterministic:
        raise NondeterministicOperationError("operation is not deterministic")


def is_deterministic(op: Operation) -> bool:
    return op.deterministic


def transition_relation(op: Operation) -> set[tuple[int, int]]:
    """Pairs ``(i, j)`` with strictly positive transition probability."""
    return {(i, j) for i in range(len(op.initial)) for j, _ in op.row(i)}


def is_unconditionally_reversible(op: Operation) -> bool:
    """True iff no final state is reachable from two distinct initial states."""
    if op.deterministic:
        t = op.targets
        return len(np.unique(t)) == t.size
    seen: set[int] = set()
    for row in op.rows():
        for j, _ in row:
            if j in seen:
                return False
        seen.update(j for j, _ in row)
    return True


def push_forward(comp: Computation) -> Distribution:
    op, ctx = comp.op, comp.context
    acc: dict[int, list[float]] = {}
    if op.deterministic:
        t = op.targets
        for i, p in ctx.support.items():
            acc.setdefault(int(t[i]), []).append(p)
    else:
        for i, p in ctx.support.items():
            for j, q in op.row(i):
                acc.setdefault(j, []).append(p * q)
    return Distribution.from_support(op.final, {j: math.fsum(v) for j, v in acc.items()})


def entropy_ejected(comp: Computation) -> float:
    """Decrease of computational entropy across the computation, in nats."""
    h_in = entropy_of(comp.context.support.values())
    h_out = entropy_of(push_forward(comp).support.values())
    return h_in - h_out


def is_entropy_ejecting(op: Operation) -> bool:
    """Whether some operating context makes the operation eject entropy.

    Decided for deterministic operations only: they eject entropy exactly
    when they are not unconditionally reversible.
    """
    if not op.deterministic:
        raise UnsupportedClassificationError(
            "entropy-ejection classification of nondeterministic operations is not supported"
        )
    return not is_unconditionally_reversible(op)


def preimages(op: Operation) -> dict[int, list[int]]:
    """Reachable final state -> sorted list of initial states mapping to it."""
    _require_deterministic(op)
    out: dict[int, list[int]] = {}
    for i, j in enumerate(op.targets.tolist()):
        out.setdefault(j, []).append(i)
    return dict(sorted(out.items()))


def witness_context(op: Operation) -> Distribution:
    """Context splitting mass evenly over the lowest-index colliding pair."""
    if not op.deterministic:
        raise NoWitnessError("no witness for a nondeterministic operation")
    pairs = [tuple(pre[:2]) for pre in preimages(op).values() if len(pre) > 1]
    if not pairs:
        raise NoWitnessError("operation is unconditionally reversible")
    a, b = min(pairs)
    return Distribution.from_support(op.initial, {a: 0.5, b: 0.5})


def image_of(op: Operation, a: Precondition) -> frozenset[int]:
    _require_deterministic(op)
    t = op.targets
    return frozenset(int(t[i]) for i in a.members)


def is_reversible_under(op: Operation, a: Precondition) -> bool:
    return len(image_of(op, a)) == len(a.members)


def construct_precondition(op: Operation) -> Precondition:
    """Maximal precondition: lowest-index preimage of every reachable final state."""
    return Precondition(frozenset(pre[0] for pre in preimages(op).values()))


def count_maximal_preconditions(op: Operation) -> int:
    return math.prod(len(pre) for pre in preimages(op).values())


def iter_maximal_preconditions(op: Operation) -> Iterator[Precondition]:
    """Lazily yield every maximal precondition in lexicographic order."""
    for choice in itertools.product(*preimages(op).values()):
        yield Precondition(frozenset(choice))


def enumerate_maximal_preconditions(op: Operation, limit: int | None = None) -> list[Precondition]:
    """Every choice of one preimage per reachable final state, lexicographically.

    Raises :class:`EnumerationCapError` when the count exceeds ``limit``.
    """
    limit = default_enum_limit() if limit is None else limit
    count = count_maximal_preconditions(op)
    if count > limit:
        raise EnumerationCapError(count, limit)
    return list(iter_maximal_preconditions(op))


def precondition_probability(comp: Computation, a: Precondition) -> float:
    n = len(comp.op.initial)
    if max(a.members) >= n:
        raise PreconditionError(f"precondition index out of range for {n} states")
    support = comp.context.support
    return math.fsum(support[i] for i in a.members if i in support)


def satisfies(context: Distribution, a: Precondition) -> bool:
    """True iff every state with positive probability lies in ``a``."""
    return all(i in a.members for i in context.support)


def reversal(co: ConditionedOperation) -> ConditionedOperation:
    """Conditioned operation that undoes ``co`` on the image of its assumed set.

    Off the image, final states keep their index when both spaces coincide,
    keep their label when it exists in the initial space, and otherwise go to
    initial state 0.
    """
    op = co.op
    t = op.targets
    back = {int(t[i]): i for i in co.assumed.members}
    n_final, n_init = len(op.final), len(op.initial)
    if op.initial == op.final:
        targets = np.arange(n_final, dtype=np.int64)
    else:
        by_label = {op.initial.label(i): i for i in range(n_init)}
        targets = np.array(
            [by_label.get(op.final.label(j), 0) for j in range(n_final)], dtype=np.int64
        )
    for j, i in back.items():
        targets[j] = i
    return ConditionedOperation(
        Operation.from_function(op.final, op.initial, targets), Precondition(frozenset(back))
    )


def merge_entropy_exact(p: float, q: float) -> float:
    """Entropy (nats) ejected by merging two states of probabilities ``p`` and ``q``."""
    if not (p > 0.0 and q > 0.0 and p + q <= 1.0 + SUM_TOL):
        raise ValueError("need p, q > 0 and p + q <= 1")
    s = p + q
    return p * math.log(1.0 / p) + q * math.log(1.0 / q) - s * math.log(1.0 / s)


def merge_entropy_asymptotic(p: float, r: float) -> float:
    """Large-ratio approximation ``(p/r)(1 + ln r)`` of the merge entropy, in nats."""
    if not (0.0 < p <= 1.0 and r > 1.0):
        raise ValueError("need 0 < p <= 1 and r > 1")
    return (p / r) * (1.0 + math.log(r))


def heat_dissipation(delta_s_nc: float, temperature: float) -> float:
    """Heat in joules released when ``delta_s_nc`` nats are ejected at ``temperature`` K."""
    if not temperature > 0.0:
        raise ValueError("temperature must be positive")
    return delta_s_nc * BOLTZMANN * temperature
