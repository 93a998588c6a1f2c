"""Physical state spaces, computational partitions and bijective dynamics.

Entropies are returned in nats. Use :func:`to_bits` for display.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidDistributionError, InvalidOperationError, SpaceMismatchError

#: Tolerance on the sum of a probability vector.
SUM_TOL = 1e-9

LN2 = math.log(2.0)


def to_bits(nats: float) -> float:
    return nats / LN2


def to_nats(bits: float) -> float:
    return bits * LN2


def check_probabilities(probs: Iterable[float]) -> tuple[float, ...]:
    """Validate a probability vector and return it as a tuple of floats."""
    values = tuple(float(p) for p in probs)
    if not values:
        raise InvalidDistributionError("empty probability vector")
    for p in values:
        if not (0.0 <= p <= 1.0 + SUM_TOL):
            raise InvalidDistributionError(f"probability {p!r} outside [0, 1]")
    values = tuple(min(p, 1.0) for p in values)
    total = math.fsum(values)
    if abs(total - 1.0) > SUM_TOL:
        raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
    return values


def entropy_of(values: Iterable[float]) -> float:
    """Shannon entropy in nats of raw probability values, with 0 log(1/0) = 0."""
    return math.fsum(-p * math.log(p) for p in values if p > 0.0)


@dataclass(frozen=True)
class PhysicalSpace:
    """Finite set of physical states, identified by distinct labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if not self.labels:
            raise ValueError("a physical space needs at least one state")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("physical state labels must be distinct")

    @classmethod
    def of_size(cls, n: int, prefix: str = "s") -> PhysicalSpace:
        return cls(tuple(f"{prefix}{i + 1}" for i in range(n)))

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class PhysicalDistribution:
    space: PhysicalSpace
    probs: tuple[float, ...]

    def __post_init__(self):
        probs = check_probabilities(self.probs)
        if len(probs) != len(self.space):
            raise SpaceMismatchError(
                f"{len(probs)} probabilities for a space of {len(self.space)} states"
            )
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, space: PhysicalSpace) -> PhysicalDistribution:
        n = len(space)
        return cls(space, (1.0 / n,) * n)

    @classmethod
    def point(cls, space: PhysicalSpace, index: int) -> PhysicalDistribution:
        probs = [0.0] * len(space)
        probs[index] = 1.0
        return cls(space, tuple(probs))


@dataclass(frozen=True)
class Partition:
    """Grouping of physical states into computational states (blocks).

    ``blocks`` holds 0-based state indices; ``labels`` names the blocks.
    """

    space: PhysicalSpace
    blocks: tuple[frozenset[int], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        blocks = tuple(frozenset(int(i) for i in b) for b in self.blocks)
        if any(not b for b in blocks):
            raise ValueError("partition blocks must be non-empty")
        seen: set[int] = set()
        for b in blocks:
            if seen & b:
                raise ValueError("partition blocks overlap")
            seen |= b
        if seen != set(range(len(self.space))):
            raise ValueError("partition blocks do not cover the state space")
        labels = tuple(self.labels) or tuple(f"c{j + 1}" for j in range(len(blocks)))
        if len(labels) != len(blocks) or len(set(labels)) != len(labels):
            raise ValueError("need one distinct label per block")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_sizes(cls, space: PhysicalSpace, sizes: Sequence[int]) -> Partition:
        """Consecutive blocks of the given sizes, in state order."""
        blocks, start = [], 0
        for size in sizes:
            blocks.append(frozenset(range(start, start + size)))
            start += size
        return cls(space, tuple(blocks))

    @classmethod
    def singletons(cls, space: PhysicalSpace) -> Partition:
        return cls(space, tuple(frozenset([i]) for i in range(len(space))))

    @classmethod
    def trivial(cls, space: PhysicalSpace) -> Partition:
        return cls(space, (frozenset(range(len(space))),))


@dataclass(frozen=True)
class BijectiveDynamics:
    """One discrete time step: state ``i`` moves to state ``permutation[i]``."""

    permutation: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(i) for i in self.permutation)
        if sorted(perm) != list(range(len(perm))):
            raise InvalidOperationError("dynamics must be a bijection on the state indices")
        object.__setattr__(self, "permutation", perm)

    def then(self, other: BijectiveDynamics) -> BijectiveDynamics:
        """Apply ``self`` first, then ``other``."""
        if len(other.permutation) != len(self.permutation):
            raise SpaceMismatchError("cannot compose dynamics of different sizes")
        return BijectiveDynamics(tuple(other.permutation[j] for j in self.permutation))


def shannon_entropy(d) -> float:
    """Entropy in nats of a physical or computational distribution."""
    if hasattr(d, "support"):
        return entropy_of(d.support.values())
    return entropy_of(d.probs)


def induce_computational_distribution(p0: PhysicalDistribution, part: Partition):
    """Distribution over the partition's block labels (an ``opcore.Distribution``)."""
    from .opcore import Distribution, StateSpace

    return Distribution(StateSpace(part.labels), _block_masses(p0, part))


def _block_masses(p0: PhysicalDistribution, part: Partition) -> tuple[float, ...]:
    _same_space(p0, part)
    return tuple(math.fsum(p0.probs[i] for i in sorted(block)) for block in part.blocks)


def apply_dynamics(dyn: BijectiveDynamics, p0: PhysicalDistribution) -> PhysicalDistribution:
    if len(dyn.permutation) != len(p0.probs):
        raise SpaceMismatchError("dynamics and distribution sizes differ")
    out = [0.0] * len(p0.probs)
    for i, j in enumerate(dyn.permutation):
        out[j] = p0.probs[i]
    return PhysicalDistribution(p0.space, tuple(out))


def noncomputational_entropy(p: PhysicalDistribution, part: Partition) -> float:
    return shannon_entropy(p) - entropy_of(_block_masses(p, part))


def conditional_entropy(p: PhysicalDistribution, part: Partition) -> float:
    """Physical entropy conditioned on the computational state."""
    _same_space(p, part)
    terms = []
    for block in part.blocks:
        members = [p.probs[i] for i in sorted(block)]
        weight = math.fsum(members)
        if weight > 0.0:
            terms.append(weight * entropy_of(m / weight for m in members))
    return math.fsum(terms)


def _same_space(p: PhysicalDistribution, part: Partition) -> None:
    if p.space != part.space:
        raise SpaceMismatchError("distribution and partition live on different spaces")
