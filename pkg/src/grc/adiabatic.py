"""Switch-level model of dual-rail adiabatic circuits.

Nodes carry one of two levels. A transmission gate conducts while its
dual-rail control signal holds logic 1. Per schedule step:

* storage nodes that stay connected to a ramping driver follow it without
  dissipation;
* a gate that turns ON between nodes at different levels snaps the storage
  side to the driver's level, one dissipative event per snapped node;
* gates turning OFF never dissipate.

Connected components are resolved through ON gates, re-evaluated to a
fixpoint after every step.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import DriveFightError, EncodingError, ScheduleError
from .gates import FactorizedSpace
from .opcore import ConditionedOperation, Operation, Precondition

LOW, HIGH = 0, 1

#: Ramp target meaning "the input value supplied for this signal".
INPUT = "input"


class NodeKind(enum.Enum):
    DRIVEN = "driven"
    STORAGE = "storage"


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind


@dataclass(frozen=True)
class DualRailSignal:
    """Logic 1 is pos=HIGH, neg=LOW; logic 0 is the opposite."""

    name: str
    kind: NodeKind

    @property
    def pos(self) -> Node:
        return Node(f"{self.name}.pos", self.kind)

    @property
    def neg(self) -> Node:
        return Node(f"{self.name}.neg", self.kind)

    def levels(self, value: int) -> tuple[int, int]:
        return (HIGH, LOW) if value else (LOW, HIGH)

    def value(self, levels: Mapping[str, int]) -> int | None:
        p, n = levels[self.pos.id], levels[self.neg.id]
        if p == n:
            return None
        return 1 if p == HIGH else 0


@dataclass(frozen=True)
class TransmissionGate:
    control: str
    terminal_a: str
    terminal_b: str


@dataclass(frozen=True)
class SwitchNet:
    signals: tuple[DualRailSignal, ...]
    gates: tuple[TransmissionGate, ...]

    def __post_init__(self):
        object.__setattr__(self, "signals", tuple(self.signals))
        object.__setattr__(self, "gates", tuple(self.gates))
        names = [s.name for s in self.signals]
        if len(set(names)) != len(names):
            raise ScheduleError("duplicate signal names")
        nodes = set(self.node_ids)
        for g in self.gates:
            if g.control not in names:
                raise ScheduleError(f"gate control {g.control!r} is not a signal")
            for t in (g.terminal_a, g.terminal_b):
                if t not in nodes:
                    raise ScheduleError(f"gate terminal {t!r} is not a node")

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for s in self.signals for n in (s.pos, s.neg))

    def signal(self, name: str) -> DualRailSignal:
        for s in self.signals:
            if s.name == name:
                return s
        raise ScheduleError(f"unknown signal {name!r}")

    def node_kind(self, node_id: str) -> NodeKind:
        return self.signal(node_id.rsplit(".", 1)[0]).kind


@dataclass(frozen=True)
class SetInitial:
    signal: str
    value: int


@dataclass(frozen=True)
class RampSignal:
    signal: str
    to: Union[int, str]
    from_value: int | None = None


Step = Union[SetInitial, RampSignal]


@dataclass(frozen=True)
class Schedule:
    steps: tuple[Step, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        seen_ramp = False
        for s in steps:
            if isinstance(s, RampSignal):
                seen_ramp = True
            elif seen_ramp:
                raise ScheduleError("initial settings must precede the first ramp")
        object.__setattr__(self, "steps", steps)

    @property
    def initial(self) -> tuple[SetInitial, ...]:
        return tuple(s for s in self.steps if isinstance(s, SetInitial))

    @property
    def ramps(self) -> tuple[RampSignal, ...]:
        return tuple(s for s in self.steps if isinstance(s, RampSignal))


@dataclass(frozen=True)
class Event:
    step: int
    node: str
    cause: str  # "ramp", "follow" or "snap"
    before: int
    after: int

    @property
    def dissipative(self) -> bool:
        return self.cause == "snap"


@dataclass(frozen=True)
class SimResult:
    initial_levels: tuple[tuple[str, int], ...]
    final_levels: tuple[tuple[str, int], ...]
    final_values: tuple[tuple[str, int], ...]
    trace: tuple[Event, ...]

    @property
    def dissipative_event_count(self) -> int:
        """Number of storage-node snaps."""
        return sum(e.dissipative for e in self.trace)

    @property
    def signal_event_count(self) -> int:
        """Snaps counted once per (step, signal), i.e. per rail pair."""
        return len({(e.step, e.node.rsplit(".", 1)[0]) for e in self.trace if e.dissipative})

    def value(self, signal: str) -> int:
        return dict(self.final_values)[signal]


def replay(result: SimResult) -> dict[str, int]:
    """Final levels obtained by applying the trace to the initial levels."""
    levels = dict(result.initial_levels)
    for e in result.trace:
        if levels[e.node] != e.before:
            raise ValueError(f"trace inconsistent at step {e.step}, node {e.node}")
        levels[e.node] = e.after
    return levels


class _Union:
    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _components(node_ids: Sequence[str], gates, on: Sequence[bool]) -> list[list[str]]:
    uf = _Union(node_ids)
    for g, is_on in zip(gates, on):
        if is_on:
            uf.union(g.terminal_a, g.terminal_b)
    groups: dict[str, list[str]] = {}
    for n in node_ids:
        groups.setdefault(uf.find(n), []).append(n)
    return list(groups.values())


class _Simulator:
    def __init__(self, net: SwitchNet, levels: dict[str, int]):
        self.net = net
        self.levels = levels
        self.trace: list[Event] = []
        self.driven = {n for n in net.node_ids if net.node_kind(n) is NodeKind.DRIVEN}

    def gate_states(self) -> list[bool]:
        return [self.net.signal(g.control).value(self.levels) == 1 for g in self.net.gates]

    def set_level(self, step: int, node: str, level: int, cause: str) -> None:
        if self.levels[node] != level:
            self.trace.append(Event(step, node, cause, self.levels[node], level))
            self.levels[node] = level

    def _driver_level(self, step: int, comp: Sequence[str]) -> int | None:
        drive = {self.levels[n] for n in comp if n in self.driven}
        if len(drive) > 1:
            raise DriveFightError(f"step {step}: conflicting drivers on {sorted(comp)}")
        if drive:
            return drive.pop()
        if len({self.levels[n] for n in comp}) > 1:
            raise DriveFightError(f"step {step}: undriven storage nodes at different levels {sorted(comp)}")
        return None

    def follow(self, step: int, persistent: Sequence[bool]) -> None:
        for comp in _components(self.net.node_ids, self.net.gates, persistent):
            level = self._driver_level(step, [n for n in comp if n in self.driven])
            if level is None:
                continue
            for n in comp:
                if n not in self.driven:
                    self.set_level(step, n, level, "follow")

    def settle(self, step: int, before: list[bool]) -> None:
        on = self.gate_states()
        self.follow(step, [a and b for a, b in zip(before, on)])
        for _ in range(len(self.net.gates) + 2):
            snapped = False
            for comp in _components(self.net.node_ids, self.net.gates, on):
                if len(comp) == 1:
                    continue
                level = self._driver_level(step, comp)
                if level is None:
                    continue
                for n in comp:
                    if n not in self.driven and self.levels[n] != level:
                        self.set_level(step, n, level, "snap")
                        snapped = True
            new_on = self.gate_states()
            if not snapped and new_on == on:
                return
            on = new_on
        raise DriveFightError(f"step {step}: switch network does not settle")

    def check_encoding(self, step: int) -> None:
        for s in self.net.signals:
            if s.value(self.levels) is None:
                raise EncodingError(f"step {step}: signal {s.name} lost its dual-rail encoding")


def simulate(net: SwitchNet, schedule: Schedule, inputs: Mapping[str, int]) -> SimResult:
    """Run a schedule from the given logical inputs.

    Signals fixed by a :class:`SetInitial` start at that value; all others take
    their starting value from ``inputs``. Ramps towards :data:`INPUT` use the
    value in ``inputs`` for that signal.
    """
    values: dict[str, int] = {}
    for s in schedule.initial:
        net.signal(s.signal)
        values[s.signal] = int(s.value)
    for s in net.signals:
        if s.name not in values:
            if s.name not in inputs:
                raise ScheduleError(f"no initial value for signal {s.name!r}")
            values[s.name] = int(inputs[s.name])
    levels: dict[str, int] = {}
    for s in net.signals:
        if values[s.name] not in (0, 1):
            raise EncodingError(f"signal {s.name} initial value must be 0 or 1")
        levels[s.pos.id], levels[s.neg.id] = s.levels(values[s.name])
    initial_levels = tuple(levels.items())

    sim = _Simulator(net, levels)
    sim.settle(0, [False] * len(net.gates))
    sim.check_encoding(0)
    for k, ramp in enumerate(schedule.ramps, start=1):
        sig = net.signal(ramp.signal)
        if sig.kind is not NodeKind.DRIVEN:
            raise ScheduleError(f"step {k}: cannot ramp storage signal {sig.name!r}")
        target = inputs.get(sig.name) if ramp.to == INPUT else ramp.to
        if target not in (0, 1):
            raise ScheduleError(f"step {k}: no valid ramp target for {sig.name!r}")
        current = sig.value(sim.levels)
        if ramp.from_value is not None and current != ramp.from_value:
            raise ScheduleError(f"step {k}: {sig.name} is at {current}, not {ramp.from_value}")
        before = sim.gate_states()
        for node, level in zip((sig.pos.id, sig.neg.id), sig.levels(int(target))):
            sim.set_level(k, node, level, "ramp")
        sim.settle(k, before)
        sim.check_encoding(k)

    final_values = tuple((s.name, s.value(sim.levels)) for s in net.signals)
    return SimResult(initial_levels, tuple(sim.levels.items()), final_values, tuple(sim.trace))


def default_io(net: SwitchNet, schedule: Schedule) -> tuple[str, ...]:
    """Signals whose logical value comes from the caller: uninitialised or ramped to input."""
    fixed = {s.signal for s in schedule.initial}
    ramped = {r.signal for r in schedule.ramps if r.to == INPUT}
    return tuple(s.name for s in net.signals if s.name not in fixed or s.name in ramped)


@dataclass(frozen=True)
class Extraction:
    """Operation realised by a schedule and the inputs on which it is dissipation-free."""

    op: Operation
    precondition: frozenset[int]
    results: tuple[SimResult, ...]

    @property
    def initial(self) -> FactorizedSpace:
        return self.op.initial

    def conditioned(self) -> ConditionedOperation:
        return ConditionedOperation(self.op, Precondition(self.precondition))


def extract_operation(
    net: SwitchNet,
    schedule: Schedule,
    inputs: Sequence[str] | None = None,
    outputs: Sequence[str] | None = None,
) -> Extraction:
    inputs = tuple(inputs or default_io(net, schedule))
    outputs = tuple(outputs or inputs)
    init_space = FactorizedSpace.binary(*inputs)
    final_space = init_space if outputs == inputs else FactorizedSpace.binary(*outputs)
    targets, members, results = [], [], []
    for k, values in enumerate(init_space.assignments()):
        r = simulate(net, schedule, dict(zip(inputs, values)))
        results.append(r)
        targets.append(final_space.index([r.value(o) for o in outputs]))
        if r.dissipative_event_count == 0:
            members.append(k)
    op = Operation.from_function(init_space, final_space, targets)
    return Extraction(op, frozenset(members), tuple(results))


def fig7_model() -> tuple[SwitchNet, Schedule]:
    """Dual-rail copy circuit: two transmission gates controlled by A join D to B.

    A is the logic input, B the output, D the drive signal. Schedule: A and D
    start at 0; step 1 ramps A to its input value, step 2 ramps D from 0 to 1.
    """
    a = DualRailSignal("A", NodeKind.DRIVEN)
    d = DualRailSignal("D", NodeKind.DRIVEN)
    b = DualRailSignal("B", NodeKind.STORAGE)
    net = SwitchNet(
        (a, d, b),
        (
            TransmissionGate("A", d.pos.id, b.pos.id),
            TransmissionGate("A", d.neg.id, b.neg.id),
        ),
    )
    schedule = Schedule(
        (
            SetInitial("A", 0),
            SetInitial("D", 0),
            RampSignal("A", INPUT, 0),
            RampSignal("D", 1, 0),
        )
    )
    return net, schedule


def trace_to_jsonl(result: SimResult) -> str:
    lines = [
        json.dumps(
            {"step": e.step, "node": e.node, "cause": e.cause, "before": e.before, "after": e.after}
        )
        for e in result.trace
    ]
    return "\n".join(lines) + ("\n" if lines else "")
