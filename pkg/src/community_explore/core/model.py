# -*- coding: utf-8 -*-
"""Domain types: community instances, members, exploration states, feedback and randomness."""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from ..exceptions import InvalidInstanceError

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class CommunityInstance:
    """Ground truth: m disjoint communities with sizes d_i and rates mu_i = 1/d_i.

    Rates are always derived from the sizes and never stored on their own.
    """

    sizes: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.sizes:
            raise InvalidInstanceError("an instance needs at least one community")
        for i, d in enumerate(self.sizes):
            if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
                raise InvalidInstanceError(f"community {i} has invalid size {d!r}")

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def rates(self) -> Tuple[float, ...]:
        return tuple(1.0 / d for d in self.sizes)

    @property
    def total_members(self) -> int:
        return sum(self.sizes)

    def rates_array(self) -> np.ndarray:
        return 1.0 / np.asarray(self.sizes, dtype=float)

    def check_index(self, i: int) -> None:
        if not 0 <= i < self.m:
            raise InvalidInstanceError(f"community index {i} out of range [0, {self.m})")

    def __str__(self) -> str:
        return "d=(" + ", ".join(str(d) for d in self.sizes) + ")"


class MemberId(NamedTuple):
    """A member, identified by its community and a local id in [0, d_i)."""

    community: int
    local: int


def make_instance(sizes: Sequence[int]) -> CommunityInstance:
    """Validate community sizes and build an instance."""
    sizes = tuple(int(d) if isinstance(d, np.integer) else d for d in sizes)
    return CommunityInstance(sizes)


class RngHandle:
    """Seeded, portable pseudo-random stream (numpy PCG64 behind a 64-bit seed).

    Two handles built from the same seed produce identical sequences on every
    platform numpy supports.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & SEED_MASK
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def integers(self, high: int, size: Optional[int] = None):
        """Uniform integers in [0, high)."""
        return self._generator.integers(0, high, size=size)

    def __repr__(self) -> str:
        return f"RngHandle(seed={self.seed})"


def sample_member(instance: CommunityInstance, i: int, rng: RngHandle) -> MemberId:
    """Meet one member of community i uniformly at random."""
    instance.check_index(i)
    return MemberId(i, int(rng.integers(instance.sizes[i])))


class Realization:
    """A realization Phi: (community, visit index) -> met member, drawn lazily.

    Policies evaluated on the same realization see the same member on the
    tau-th visit of a community, whatever else they did before.
    """

    def __init__(self, instance: CommunityInstance, rng: RngHandle, block: int = 32):
        self.instance = instance
        self.rng = rng
        self.block = max(1, int(block))
        self._streams: Dict[int, np.ndarray] = {}

    def _ensure(self, i: int, n: int) -> np.ndarray:
        stream = self._streams.get(i)
        have = 0 if stream is None else len(stream)
        if have < n:
            extra = self.rng.integers(self.instance.sizes[i], size=max(n - have, self.block))
            stream = extra if stream is None else np.concatenate([stream, extra])
            self._streams[i] = stream
        return self._streams[i]

    def member(self, i: int, tau: int) -> int:
        """Local id met on visit tau (0-based) of community i."""
        return int(self._ensure(i, tau + 1)[tau])

    def prefix(self, i: int, n: int) -> Tuple[int, ...]:
        """Local ids met on the first n visits of community i."""
        if n <= 0:
            return ()
        return tuple(int(v) for v in self._ensure(i, n)[:n])


@dataclass
class ExplorationState:
    """Distinct-member counts c_i, optionally with the met-member sets."""

    sizes: Tuple[int, ...]
    counts: List[int]
    met: Optional[List[Set[int]]] = None

    @classmethod
    def empty(cls, instance: CommunityInstance, track_members: bool = True) -> "ExplorationState":
        met = [set() for _ in instance.sizes] if track_members else None
        return cls(instance.sizes, [0] * instance.m, met)

    @classmethod
    def from_counts(cls, instance: CommunityInstance, counts: Sequence[int]) -> "ExplorationState":
        state = cls(instance.sizes, [int(c) for c in counts], None)
        state.validate()
        return state

    def validate(self) -> None:
        if len(self.counts) != len(self.sizes):
            raise InvalidInstanceError(
                f"state has {len(self.counts)} counts for {len(self.sizes)} communities"
            )
        for i, (c, d) in enumerate(zip(self.counts, self.sizes)):
            if not 0 <= c <= d:
                raise InvalidInstanceError(f"count c_{i}={c} outside [0, {d}]")
        if self.met is not None:
            for i, members in enumerate(self.met):
                if len(members) != self.counts[i]:
                    raise InvalidInstanceError(f"met-set {i} disagrees with its count")

    @property
    def total(self) -> int:
        """c(psi): distinct members met over all communities."""
        return sum(self.counts)

    @property
    def unmet(self) -> int:
        return sum(d - c for d, c in zip(self.sizes, self.counts))

    def status(self) -> List[float]:
        """Unmet fractions s_i = 1 - c_i / d_i."""
        return [(d - c) / d for d, c in zip(self.sizes, self.counts)]

    def observe(self, member: MemberId) -> bool:
        """Record a met member; True when the member is new."""
        if self.met is None:
            raise InvalidInstanceError("member identities are not tracked by this state")
        i, local = member
        self._check_community(i)
        if not 0 <= local < self.sizes[i]:
            raise InvalidInstanceError(f"local id {local} outside community {i}")
        if local in self.met[i]:
            return False
        self.met[i].add(local)
        self.counts[i] += 1
        return True

    def advance(self, i: int) -> None:
        """Count one more distinct member of community i (counts-only states)."""
        self._check_community(i)
        if self.counts[i] >= self.sizes[i]:
            raise InvalidInstanceError(f"community {i} has no unmet members left")
        self.counts[i] += 1

    def _check_community(self, i: int) -> None:
        if not 0 <= i < len(self.sizes):
            raise InvalidInstanceError(f"community index {i} out of range [0, {len(self.sizes)})")

    def copy(self) -> "ExplorationState":
        met = None if self.met is None else [set(s) for s in self.met]
        return ExplorationState(self.sizes, list(self.counts), met)


@dataclass(frozen=True)
class RoundFeedback:
    """Members met in one round, per community, in exploration order.

    Sequences hold local ids; the community is given by the position.
    """

    sequences: Tuple[Tuple[int, ...], ...] = field(default_factory=tuple)

    @classmethod
    def from_lists(cls, sequences: Sequence[Sequence[int]]) -> "RoundFeedback":
        return cls(tuple(tuple(int(v) for v in seq) for seq in sequences))

    def __len__(self) -> int:
        return len(self.sequences)

    def size(self, i: int) -> int:
        return len(self.sequences[i])

    def total(self) -> int:
        """Budget consumed by the round."""
        return sum(len(seq) for seq in self.sequences)

    def members(self, i: int) -> List[MemberId]:
        return [MemberId(i, local) for local in self.sequences[i]]

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        return iter(self.sequences)

    def distinct_count(self) -> int:
        return sum(len(set(seq)) for seq in self.sequences)
