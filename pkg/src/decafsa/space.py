"""Search spaces the swarm and DE operators run on.

A space bundles the objective with the discrete geometry (distance,
neighbourhood, guided moves, consensus, local search) and the DE algebra.
:class:`TourSpace` is the plain TSP; the MTSP plan space lives in
:mod:`decafsa.mtsp` and exposes the same methods.
"""

from __future__ import annotations

from random import Random

from . import tours
from .de import PermutationAlgebra, apply_swaps, binomial_cross, swap_sequence
from .instances import DistanceMatrix

_EDGE_CACHE = 4096


class TourSpace(PermutationAlgebra):
    def __init__(self, d: DistanceMatrix, two_opt_passes: int = 1000):
        self.d = d
        self.two_opt_passes = two_opt_passes
        self.evaluations = 0
        self._edges: dict[tuple, frozenset] = {}

    @property
    def size(self) -> int:
        return self.d.n

    def evaluate(self, t) -> float:
        self.evaluations += 1
        return tours.tour_length(t, self.d)

    def random_state(self, rng: Random) -> list[int]:
        t = list(range(self.size))
        rng.shuffle(t)
        return t

    def is_valid(self, t) -> bool:
        return tours.is_tour(t, self.size)

    def _edge_set(self, t) -> frozenset:
        key = tuple(t)
        es = self._edges.get(key)
        if es is None:
            if len(self._edges) >= _EDGE_CACHE:
                self._edges.clear()
            es = self._edges[key] = tours.edge_set(t)
        return es

    def distance(self, a, b) -> int:
        if len(a) != len(b):
            raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
        return len(self._edge_set(a) - self._edge_set(b))

    def random_neighbor(self, t, visual: float, rng: Random):
        return tours.random_neighbor(t, visual, rng)

    def move_toward(self, t, target, steps: int, rng: Random):
        return tours.move_toward(t, target, steps, rng)

    def center(self, states):
        return tours.swarm_center(states, self.d)

    def local_search(self, t):
        return tours.two_opt_improve(t, self.d, self.two_opt_passes)

    def reverse(self, t, i: int, j: int):
        return tours.two_opt_move(t, i, j)

    # DE algebra on normal forms: tours sharing most edges then share most
    # positions, so swap sequences between them stay short
    def diff(self, src, dst):
        return swap_sequence(tours.canonical(src), tours.canonical(dst))

    def add(self, state, diff):
        return apply_swaps(diff, tours.canonical(state))

    def cross(self, x, v, CR: float, rng: Random):
        return binomial_cross(tours.canonical(x), tours.canonical(v), CR, rng)
