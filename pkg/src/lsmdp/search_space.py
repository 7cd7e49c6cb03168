"""The local-search decision process: states, neighborhoods, moves, rewards.

States are plain ints in [0, 2**n).  A move i -> j is available exactly when
j lies in the neighborhood of i; executing it has deterministic effect and
pays the objective gain f(j) - f(i).  The uniform weight 1/|A(i)| returned by
`action_weight` is the action-averaging weight used by the coefficient
computations, not a transition kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple

from .objectives import Objective


class ResourceLimitError(RuntimeError):
    """An exact analysis would exceed its stated size cap."""


class Move(NamedTuple):
    src: int
    dst: int


@lru_cache(maxsize=None)
def _hamming_masks(n: int, distance: int) -> tuple[int, ...]:
    return tuple(sum(1 << b for b in bits) for bits in combinations(range(n), distance))


@dataclass(frozen=True)
class HammingNeighborhood:
    """All states at Hamming distance exactly `distance` (symmetric)."""

    distance: int = 1

    def __post_init__(self):
        if not isinstance(self.distance, int) or self.distance < 1:
            raise ValueError(f"hamming distance must be a positive int, got {self.distance!r}")

    def neighbors(self, state: int, n: int) -> tuple[int, ...]:
        return tuple(sorted(state ^ mask for mask in _hamming_masks(n, self.distance)))

    @property
    def descriptor(self) -> str:
        return f"hamming:{self.distance}"


def parse_criterion(descriptor: str) -> HammingNeighborhood:
    """Build a neighborhood criterion from a descriptor like 'hamming:1'."""
    head, _, argstr = descriptor.partition(":")
    if head == "hamming":
        try:
            distance = int(argstr) if argstr else 1
        except ValueError:
            raise ValueError(f"bad neighborhood descriptor {descriptor!r}") from None
        return HammingNeighborhood(distance)
    raise ValueError(f"unknown neighborhood descriptor {descriptor!r}")


_MEMO_CAP = 1 << 16  # memoize values/neighbor lists only for modest state counts


class LocalSearchMdp:
    """Immutable pairing of an objective with a neighborhood criterion.

    All operations are pure; internal memo tables are append-only caches of
    pure function values, so concurrent readers are safe.
    """

    def __init__(self, objective: Objective, criterion=None):
        self.objective = objective
        self.criterion = criterion if criterion is not None else HammingNeighborhood(1)
        self.n = objective.n
        self.num_states = 1 << objective.n
        self._memo = self.num_states <= _MEMO_CAP
        self._values: dict[int, float] = {}
        self._neighborhoods: dict[int, tuple[int, ...]] = {}

    def check_state(self, state: int) -> None:
        if not isinstance(state, int) or not 0 <= state < self.num_states:
            raise ValueError(f"state {state!r} out of range [0, 2**{self.n})")

    def value(self, state: int) -> float:
        cached = self._values.get(state)
        if cached is None:
            cached = float(self.objective(state))
            if self._memo:
                self._values[state] = cached
        return cached

    def neighbors(self, state: int) -> tuple[int, ...]:
        """Neighbor states in ascending integer order (canonical tie-break order)."""
        cached = self._neighborhoods.get(state)
        if cached is None:
            self.check_state(state)
            cached = self.criterion.neighbors(state, self.n)
            if self._memo:
                self._neighborhoods[state] = cached
        return cached

    def actions(self, state: int) -> tuple[Move, ...]:
        return tuple(Move(state, j) for j in self.neighbors(state))

    def reward(self, move: Move) -> float:
        return self.value(move.dst) - self.value(move.src)

    def action_weight(self, state: int, move: Move) -> float:
        """Uniform 1/|A(state)| weight of an available move."""
        nbrs = self.neighbors(state)
        if move.src != state or move.dst not in nbrs:
            raise ValueError(f"move {move} is not available in state {state}")
        return 1.0 / len(nbrs)
