"""Factorized variable spaces and the library of conditioned reversible gates.

Joint states are enumerated lexicographically, first-declared variable most
significant, value 0 first. Every gate acts on the whole joint space
(identity on variables it does not touch) and is total: the precondition
only marks where it is reversible.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import GateSpecError, SpaceMismatchError, SpaceTooLargeError
from .opcore import (
    ConditionedOperation,
    Operation,
    Precondition,
    image_of,
)

#: Largest joint space any gate is built on.
MAX_JOINT_STATES = 2**20

Assignment = tuple[int, ...]


@dataclass(frozen=True)
class VariableDecl:
    name: str
    arity: int = 2

    def __post_init__(self):
        if not self.name.isidentifier():
            raise GateSpecError(f"invalid variable name {self.name!r}")
        if int(self.arity) < 2:
            raise GateSpecError(f"variable {self.name} needs arity >= 2")


@dataclass(frozen=True)
class FactorizedSpace:
    """Joint state space of independent discrete variables."""

    variables: tuple[VariableDecl, ...]

    def __post_init__(self):
        vars_ = tuple(self.variables)
        if not vars_:
            raise GateSpecError("a factorized space needs at least one variable")
        names = [v.name for v in vars_]
        if len(set(names)) != len(names):
            raise GateSpecError("variable names must be unique")
        object.__setattr__(self, "variables", vars_)

    @classmethod
    def binary(cls, *names: str) -> FactorizedSpace:
        return cls(tuple(VariableDecl(n, 2) for n in names))

    @classmethod
    def of(cls, **arities: int) -> FactorizedSpace:
        return cls(tuple(VariableDecl(n, a) for n, a in arities.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(v.arity for v in self.variables)

    def __len__(self) -> int:
        return math.prod(self.arities)

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise GateSpecError(f"unknown variable {name!r}") from None

    def arity(self, name: str) -> int:
        return self.variables[self.position(name)].arity

    def index(self, assignment: Sequence[int] | Mapping[str, int]) -> int:
        if isinstance(assignment, Mapping):
            assignment = [assignment[n] for n in self.names]
        if len(assignment) != len(self.variables):
            raise GateSpecError("assignment length does not match the variables")
        for value, arity in zip(assignment, self.arities):
            if not 0 <= value < arity:
                raise GateSpecError(f"value {value} out of range for arity {arity}")
        return int(np.ravel_multi_index(tuple(assignment), self.arities))

    def assignment(self, index: int) -> Assignment:
        return tuple(int(v) for v in np.unravel_index(index, self.arities))

    def label(self, index: int) -> str:
        return " ".join(f"{n}={v}" for n, v in zip(self.names, self.assignment(index)))

    def assignments(self):
        return itertools.product(*(range(a) for a in self.arities))

    def sub(self, names: Sequence[str]) -> FactorizedSpace:
        return FactorizedSpace(tuple(self.variables[self.position(n)] for n in names))

    @cached_property
    def value_arrays(self) -> tuple[np.ndarray, ...]:
        """Per-variable value of every joint state, in joint order."""
        if len(self) > MAX_JOINT_STATES:
            raise SpaceTooLargeError(f"joint space of {len(self)} states exceeds {MAX_JOINT_STATES}")
        return tuple(np.unravel_index(np.arange(len(self)), self.arities))


@dataclass(frozen=True)
class TruthTable:
    """Total function from input assignments to an output value.

    ``outputs`` lists the value for every input assignment in lexicographic
    order.
    """

    inputs: tuple[str, ...]
    input_arities: tuple[int, ...]
    outputs: tuple[int, ...]
    output_arity: int = 2

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "input_arities", tuple(int(a) for a in self.input_arities))
        object.__setattr__(self, "outputs", tuple(int(v) for v in self.outputs))
        if len(self.inputs) != len(self.input_arities):
            raise GateSpecError("one arity per truth-table input required")
        if len(self.outputs) != math.prod(self.input_arities):
            raise GateSpecError(
                f"truth table has {len(self.outputs)} rows, expected {math.prod(self.input_arities)}"
            )
        if any(not 0 <= v < self.output_arity for v in self.outputs):
            raise GateSpecError("truth-table output out of range")

    @classmethod
    def from_function(
        cls,
        inputs: Sequence[str],
        fn: Callable[..., int],
        input_arities: Sequence[int] | None = None,
        output_arity: int = 2,
    ) -> TruthTable:
        arities = tuple(input_arities or (2,) * len(inputs))
        outs = tuple(int(fn(*vals)) for vals in itertools.product(*(range(a) for a in arities)))
        return cls(tuple(inputs), arities, outs, output_arity)

    @classmethod
    def from_mapping(
        cls,
        inputs: Sequence[str],
        mapping: Mapping[Assignment, int],
        input_arities: Sequence[int] | None = None,
        output_arity: int = 2,
    ) -> TruthTable:
        arities = tuple(input_arities or (2,) * len(inputs))
        missing = [k for k in itertools.product(*(range(a) for a in arities)) if k not in mapping]
        if missing:
            raise GateSpecError(f"truth table is not total: missing {missing[0]}")
        return cls.from_function(inputs, lambda *k: mapping[k], arities, output_arity)

    @property
    def mapping(self) -> dict[Assignment, int]:
        keys = itertools.product(*(range(a) for a in self.input_arities))
        return dict(zip(keys, self.outputs))

    def __call__(self, *values: int) -> int:
        return self.outputs[int(np.ravel_multi_index(values, self.input_arities))]

    @property
    def injective(self) -> bool:
        return len(set(self.outputs)) == len(self.outputs)


BOOLEAN_FUNCTIONS: dict[str, Callable[[int, int], int]] = {
    "AND": lambda x, y: x & y,
    "OR": lambda x, y: x | y,
    "XOR": lambda x, y: x ^ y,
    "NAND": lambda x, y: 1 - (x & y),
    "NOR": lambda x, y: 1 - (x | y),
    "CONST0": lambda x, y: 0,
}


def boolean_table(name: str, inputs: Sequence[str] = ("x", "y")) -> TruthTable:
    return TruthTable.from_function(inputs, BOOLEAN_FUNCTIONS[name.upper()])


class GateKind(enum.Enum):
    RSET = "rSET"
    RCLR = "rCLR"
    RSETI = "rSETi"
    RCOPY = "rCOPY"
    RUNCOPY = "rUnCOPY"
    RFUNC = "rFUNC"
    RUNFUNC = "rUnFUNC"
    CNOT = "cNOT"
    CCNOT = "ccNOT"
    # Copy variant realised by the dual-rail transmission-gate circuit: y := x OR y.
    RCOPY_PRIME = "rCOPY'"


@dataclass(frozen=True)
class GateSpec:
    """Gate kind plus operands and parameters.

    ``i`` is the value written by rSETi and ``j`` its assumed initial value;
    ``v`` is the known constant of the copy/function families.
    """

    kind: GateKind
    operands: tuple[str, ...]
    i: int | None = None
    j: int | None = None
    v: int | None = None
    table: TruthTable | None = field(default=None, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "operands", tuple(self.operands))


_OPERAND_COUNT = {
    GateKind.RSET: 1,
    GateKind.RCLR: 1,
    GateKind.RSETI: 1,
    GateKind.RCOPY: 2,
    GateKind.RUNCOPY: 2,
    GateKind.CNOT: 2,
    GateKind.CCNOT: 3,
    GateKind.RCOPY_PRIME: 2,
}

_BINARY_ONLY = {GateKind.RSET, GateKind.RCLR, GateKind.CNOT, GateKind.CCNOT, GateKind.RCOPY_PRIME}


def check_spec(spec: GateSpec, space: FactorizedSpace) -> tuple[int, ...]:
    ops = spec.operands
    if len(set(ops)) != len(ops):
        raise GateSpecError("gate operands must be distinct variables")
    arities = tuple(space.arity(n) for n in ops)
    kind = spec.kind
    expected = _OPERAND_COUNT.get(kind)
    if expected is not None and len(ops) != expected:
        raise GateSpecError(f"{kind.value} takes {expected} operand(s), got {len(ops)}")
    if kind in _BINARY_ONLY and any(a != 2 for a in arities):
        raise GateSpecError(f"{kind.value} acts on binary variables only")
    if kind is GateKind.RSETI:
        if spec.i is None or spec.j is None:
            raise GateSpecError("rSETi needs both the target value i and the assumed value j")
        if not (0 <= spec.i < arities[0] and 0 <= spec.j < arities[0]):
            raise GateSpecError("rSETi values out of range")
        if spec.i == spec.j:
            raise GateSpecError("rSETi with i == j is vacuous")
    if kind in (GateKind.RCOPY, GateKind.RUNCOPY):
        if arities[0] != arities[1]:
            raise GateSpecError(f"{kind.value} needs source and destination of equal arity")
    if kind in (GateKind.RFUNC, GateKind.RUNFUNC):
        table = spec.table
        if table is None:
            raise GateSpecError(f"{kind.value} needs a truth table")
        if len(ops) != len(table.inputs) + 1:
            raise GateSpecError(
                f"{kind.value} needs {len(table.inputs)} input operand(s) plus one output"
            )
        if tuple(arities[:-1]) != table.input_arities:
            raise GateSpecError("truth-table input arities do not match the operands")
        if table.output_arity != arities[-1]:
            raise GateSpecError("truth-table output arity does not match the output variable")
    if kind in (GateKind.RCOPY, GateKind.RUNCOPY, GateKind.RFUNC, GateKind.RUNFUNC):
        v = 0 if spec.v is None else spec.v
        if not 0 <= v < arities[-1]:
            raise GateSpecError(f"v={v} out of range for arity {arities[-1]}")
    return arities


def _local_rule(spec: GateSpec) -> tuple[Callable[..., tuple[int, ...]], Callable[..., bool]]:
    """Transition and precondition predicate on the operand values."""
    kind, v = spec.kind, (0 if spec.v is None else spec.v)
    if kind is GateKind.RSET:
        return (lambda x: (1,)), (lambda x: x == 0)
    if kind is GateKind.RCLR:
        return (lambda x: (0,)), (lambda x: x == 1)
    if kind is GateKind.RSETI:
        return (lambda x: (spec.i,)), (lambda x: x == spec.j)
    if kind is GateKind.RCOPY:
        return (lambda x, y: (x, x)), (lambda x, y: y == v)
    if kind is GateKind.RUNCOPY:
        return (lambda x, y: (x, v)), (lambda x, y: y == x)
    if kind is GateKind.RFUNC:
        f = spec.table
        return (lambda *a: (*a[:-1], f(*a[:-1]))), (lambda *a: a[-1] == v)
    if kind is GateKind.RUNFUNC:
        f = spec.table
        return (lambda *a: (*a[:-1], v)), (lambda *a: a[-1] == f(*a[:-1]))
    if kind is GateKind.CNOT:
        return (lambda c, t: (c, t ^ c)), (lambda c, t: True)
    if kind is GateKind.CCNOT:
        return (lambda a, b, t: (a, b, t ^ (a & b))), (lambda a, b, t: True)
    if kind is GateKind.RCOPY_PRIME:
        return (lambda x, y: (x, x | y)), (lambda x, y: not (x and y))
    raise GateSpecError(f"unsupported gate kind {kind}")


def _joint_to_local(space: FactorizedSpace, names: Sequence[str]) -> np.ndarray:
    """Index of the operand sub-assignment for every joint state."""
    vals = space.value_arrays
    pos = [space.position(n) for n in names]
    return np.ravel_multi_index([vals[p] for p in pos], [space.arities[p] for p in pos])


def lift_to_space(op: Operation, variables: Sequence[str], space: FactorizedSpace) -> Operation:
    """Extend an operation on ``variables`` to the joint space, identity elsewhere."""
    sub = space.sub(variables)
    if len(op.initial) != len(sub) or len(op.final) != len(sub):
        raise SpaceMismatchError("operation size does not match the listed variables")
    if len(space) > MAX_JOINT_STATES:
        raise SpaceTooLargeError(f"joint space of {len(space)} states exceeds {MAX_JOINT_STATES}")
    vals = space.value_arrays
    pos = [space.position(n) for n in variables]
    local = _joint_to_local(space, variables)
    if op.deterministic:
        new_local = np.unravel_index(op.targets[local], sub.arities)
        new_vals = list(vals)
        for k, p in enumerate(pos):
            new_vals[p] = new_local[k]
        targets = np.ravel_multi_index(new_vals, space.arities)
        return Operation.from_function(space, space, targets)
    rows = []
    for joint in range(len(space)):
        base = [int(a[joint]) for a in vals]
        row = {}
        for j, p in op.row(int(local[joint])):
            state = list(base)
            for k, val in zip(pos, sub.assignment(j)):
                state[k] = val
            row[space.index(state)] = p
        rows.append(row)
    return Operation.from_rows(space, space, rows)


def build_gate(spec: GateSpec, space: FactorizedSpace) -> ConditionedOperation:
    arities = check_spec(spec, space)
    sub = space.sub(spec.operands)
    step, holds = _local_rule(spec)
    local_targets = []
    local_ok = []
    for values in itertools.product(*(range(a) for a in arities)):
        local_targets.append(sub.index(step(*values)))
        local_ok.append(bool(holds(*values)))
    local_op = Operation.from_function(sub, sub, local_targets)
    op = lift_to_space(local_op, spec.operands, space)
    ok = np.asarray(local_ok)[_joint_to_local(space, spec.operands)]
    members = np.flatnonzero(ok)
    return ConditionedOperation(op, Precondition(frozenset(members.tolist())))


def build(space: FactorizedSpace, kind: GateKind | str, *operands: str, **params) -> ConditionedOperation:
    """Shorthand for ``build_gate(GateSpec(kind, operands, **params), space)``."""
    if isinstance(kind, str):
        kind = GateKind(kind)
    return build_gate(GateSpec(kind, operands, **params), space)


def is_reversal_pair(g1: ConditionedOperation, g2: ConditionedOperation) -> bool:
    """Whether ``g2`` undoes ``g1`` on every member of ``g1``'s assumed set."""
    if g1.op.final != g2.op.initial:
        raise SpaceMismatchError("gates act on different spaces")
    image = image_of(g1.op, g1.assumed)
    if not image <= g2.assumed.members:
        return False
    t1, t2 = g1.op.targets, g2.op.targets
    return all(int(t2[t1[c]]) == c for c in g1.assumed.members)
