"""Sequential circuits of conditioned gates: propagation and Landauer reports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import GateSpecError, SpaceMismatchError, SpaceTooLargeError
from .gates import MAX_JOINT_STATES, FactorizedSpace, GateKind, GateSpec, TruthTable, build_gate
from .opcore import (
    Computation,
    ConditionedOperation,
    Distribution,
    entropy_ejected,
    precondition_probability,
    push_forward,
    reversal,
    satisfies,
)
from .physical import entropy_of, to_bits


@dataclass(frozen=True)
class Circuit:
    """Gates applied left to right over a shared joint space."""

    space: FactorizedSpace
    gates: tuple[ConditionedOperation, ...] = ()
    names: tuple[str, ...] = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        for k, g in enumerate(gates):
            if g.op.initial != self.space or g.op.final != self.space:
                raise SpaceMismatchError(f"gate {k} does not act on the circuit space")
        names = tuple(self.names) or tuple(f"g{k}" for k in range(len(gates)))
        if len(names) != len(gates):
            raise ValueError("one name per gate required")
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, other: Circuit) -> Circuit:
        if other.space != self.space:
            raise SpaceMismatchError("circuits act on different spaces")
        return Circuit(self.space, self.gates + other.gates, self.names + other.names)


@dataclass(frozen=True)
class GateReport:
    index: int
    name: str
    precondition_probability: float
    satisfied: bool
    delta_s_nats: float
    entropy_in_nats: float
    entropy_out_nats: float

    @property
    def delta_s_bits(self) -> float:
        return to_bits(self.delta_s_nats)


@dataclass(frozen=True)
class CircuitReport:
    gates: tuple[GateReport, ...]
    entropy_in_nats: float
    entropy_out_nats: float
    stages: tuple[Distribution, ...] = field(repr=False, default=())

    @property
    def total_nats(self) -> float:
        return self.entropy_in_nats - self.entropy_out_nats

    @property
    def total_bits(self) -> float:
        return to_bits(self.total_nats)

    @property
    def flagged(self) -> tuple[int, ...]:
        """Indices of gates whose precondition is not certain at their stage."""
        return tuple(r.index for r in self.gates if not r.satisfied)

    @property
    def all_satisfied(self) -> bool:
        return not self.flagged


def _check_input(circ: Circuit, dist: Distribution) -> None:
    if len(circ.space) > MAX_JOINT_STATES:
        raise SpaceTooLargeError(f"joint space of {len(circ.space)} states exceeds {MAX_JOINT_STATES}")
    if dist.space != circ.space:
        raise SpaceMismatchError("input distribution is not over the circuit space")


def propagate(circ: Circuit, dist: Distribution) -> list[Distribution]:
    """Distribution at every stage boundary, input first."""
    _check_input(circ, dist)
    stages = [dist]
    for gate in circ.gates:
        stages.append(push_forward(Computation(gate.op, stages[-1])))
    return stages


def analyze(circ: Circuit, dist: Distribution) -> CircuitReport:
    stages = propagate(circ, dist)
    reports = []
    for k, gate in enumerate(circ.gates):
        before, after = stages[k], stages[k + 1]
        comp = Computation(gate.op, before)
        reports.append(
            GateReport(
                index=k,
                name=circ.names[k],
                precondition_probability=precondition_probability(comp, gate.assumed),
                satisfied=satisfies(before, gate.assumed),
                delta_s_nats=entropy_ejected(comp),
                entropy_in_nats=entropy_of(before.support.values()),
                entropy_out_nats=entropy_of(after.support.values()),
            )
        )
    return CircuitReport(
        gates=tuple(reports),
        entropy_in_nats=entropy_of(stages[0].support.values()),
        entropy_out_nats=entropy_of(stages[-1].support.values()),
        stages=tuple(stages),
    )


def mirror(circ: Circuit) -> Circuit:
    """Gate-wise reversals in reverse order."""
    gates = tuple(reversal(g) for g in reversed(circ.gates))
    names = tuple(f"{n}~" for n in reversed(circ.names))
    return Circuit(circ.space, gates, names)


def bennett_construct(
    f: TruthTable,
    space: FactorizedSpace,
    ancilla: str = "z",
    output: str = "w",
) -> Circuit:
    """Compute ``f`` into the ancilla, copy it to the output, then uncompute.

    Both ancilla and output are assumed to start at 0.
    """
    if any(a != 2 for a in f.input_arities) or f.output_arity != 2:
        raise GateSpecError("the compute-copy-uncompute constructor takes binary functions only")
    operands = (*f.inputs, ancilla)
    gates = (
        build_gate(GateSpec(GateKind.RFUNC, operands, v=0, table=f), space),
        build_gate(GateSpec(GateKind.RCOPY, (ancilla, output), v=0), space),
        build_gate(GateSpec(GateKind.RUNFUNC, operands, v=0, table=f), space),
    )
    return Circuit(space, gates, ("compute", "copy", "uncompute"))


def marginal(dist: Distribution, space: FactorizedSpace, name: str) -> tuple[float, ...]:
    """Marginal distribution of one variable."""
    pos = space.position(name)
    acc: list[list[float]] = [[] for _ in range(space.variables[pos].arity)]
    for i, p in dist.support.items():
        acc[space.assignment(i)[pos]].append(p)
    return tuple(math.fsum(a) for a in acc)


def product_distribution(space: FactorizedSpace, marginals: Sequence[Sequence[float]]) -> Distribution:
    """Independent joint distribution from per-variable marginals."""
    if len(marginals) != len(space.variables):
        raise SpaceMismatchError("one marginal per variable required")
    support = {0: 1.0}
    for var, m in zip(space.variables, marginals):
        if len(m) != var.arity:
            raise SpaceMismatchError(f"marginal of {var.name} has the wrong length")
        support = {i * var.arity + v: p * q for i, p in support.items() for v, q in enumerate(m) if q > 0}
    return Distribution.from_support(space, support)
