"""Differential evolution on permutations.

Vector arithmetic is replaced by swap-sequence algebra: the difference
``b - a`` of two tours is the list of transpositions turning ``a`` into
``b``, scaling by ``F`` keeps a prefix of that list, and adding a difference
to a tour applies the transpositions.  The three mutation strategies keep the
usual shape ``base + F * (x_r - x_s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random
from typing import Callable, Sequence

Swap = tuple[int, int]


class NotEnoughIndividuals(ValueError):
    """The sub-population is too small to draw distinct donors."""


@dataclass(frozen=True)
class DeConfig:
    F: float = 0.5
    K_de: float = 0.5
    CR: float = 0.5
    lambdas: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self):
        for name in ("F", "K_de", "CR"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if len(self.lambdas) != 3 or any(not 0.0 <= x <= 1.0 for x in self.lambdas):
            raise ValueError("lambdas must be three proportions in [0, 1]")
        if not math.isclose(sum(self.lambdas), 1.0, abs_tol=1e-9):
            raise ValueError("lambdas must sum to 1")


def swap_sequence(src: Sequence[int], dst: Sequence[int]) -> list[Swap]:
    """Transpositions (by position) that turn ``src`` into ``dst``."""
    if len(src) != len(dst):
        raise ValueError(f"dimension mismatch: {len(src)} vs {len(dst)}")
    cur = list(src)
    where = {c: k for k, c in enumerate(cur)}
    swaps = []
    for p, want in enumerate(dst):
        if cur[p] != want:
            q = where[want]
            where[cur[p]] = q
            where[want] = p
            cur[p], cur[q] = cur[q], cur[p]
            swaps.append((p, q))
    return swaps


def apply_swaps(swaps: Sequence[Swap], t: Sequence[int]) -> list[int]:
    t = list(t)
    for a, b in swaps:
        t[a], t[b] = t[b], t[a]
    return t


def scale_sequence(swaps: Sequence[Swap], F: float) -> list[Swap]:
    return list(swaps[:math.ceil(F * len(swaps))])


def binomial_cross(x: Sequence[int], v: Sequence[int], CR: float, rng: Random,
                   marked: Sequence[int] | None = None) -> list[int]:
    """Binomial crossover with order-preserving repair.

    Marked positions take ``v``'s city; the other positions receive the
    remaining cities in the order they appear in ``x``.  ``marked`` may be
    passed explicitly, otherwise it is drawn (``rand() <= CR`` or
    ``j == j_rand``).
    """
    n = len(x)
    if len(v) != n:
        raise ValueError(f"dimension mismatch: {n} vs {len(v)}")
    if marked is None:
        j_rand = rng.randrange(n)
        marked = [j for j in range(n) if rng.random() <= CR or j == j_rand]
    child = [None] * n
    used = set()
    for j in marked:
        child[j] = v[j]
        used.add(v[j])
    rest = iter(c for c in x if c not in used)
    return [next(rest) if c is None else c for c in child]


class PermutationAlgebra:
    """The swap-sequence operations the DE strategies are written against."""

    def diff(self, src, dst):
        return swap_sequence(src, dst)

    def scale(self, diff, F: float):
        return scale_sequence(diff, F)

    def add(self, state, diff):
        return apply_swaps(diff, state)

    def cross(self, x, v, CR: float, rng: Random):
        return binomial_cross(x, v, CR, rng)


TOURS = PermutationAlgebra()


def _draw(pool: Sequence[int], k: int, exclude: set, rng: Random) -> list[int]:
    usable = [p for p in pool if p not in exclude]
    if len(usable) < k:
        raise NotEnoughIndividuals(f"need {k} donors, have {len(usable)}")
    return rng.sample(usable, k)


def mutate_rand_1(pop: Sequence, sub: Sequence[int], i: int, F: float, rng: Random,
                  algebra=TOURS):
    """``x_r1 + F (x_r2 - x_r3)``: r2, r3 from ``sub``, r1 from the whole swarm."""
    r2, r3 = _draw(sub, 2, {i}, rng)
    (r1,) = _draw(range(len(pop)), 1, {i, r2, r3}, rng)
    step = algebra.scale(algebra.diff(pop[r3], pop[r2]), F)
    return algebra.add(pop[r1], step)


def mutate_best_1(pop: Sequence, sub: Sequence[int], best, i: int, F: float, rng: Random,
                  algebra=TOURS):
    """``x_best + F (x_r1 - x_r2)``."""
    r1, r2 = _draw(sub, 2, {i}, rng)
    step = algebra.scale(algebra.diff(pop[r2], pop[r1]), F)
    return algebra.add(best, step)


def mutate_rand_to_best_1(pop: Sequence, sub: Sequence[int], best, i: int, F: float,
                          K_de: float, rng: Random, algebra=TOURS):
    """``x_i + K (x_best - x_i) + F (x_r1 - x_r2)``, the pull toward best first."""
    r1, r2 = _draw(sub, 2, {i}, rng)
    pulled = algebra.add(pop[i], algebra.scale(algebra.diff(pop[i], best), K_de))
    step = algebra.scale(algebra.diff(pop[r2], pop[r1]), F)
    return algebra.add(pulled, step)


def greedy_select(x, u):
    """Keep the offspring unless it is strictly worse (ties go to ``u``)."""
    return u if u.fitness <= x.fitness else x


def split_populations(N: int, lambdas: Sequence[float], rng: Random) -> tuple[list[int], ...]:
    order = list(range(N))
    rng.shuffle(order)
    n1 = math.floor(lambdas[0] * N)
    n2 = math.floor(lambdas[1] * N)
    return order[:n1], order[n1:n1 + n2], order[n1 + n2:]


def de_epoch(swarm: Sequence, best, cfg: DeConfig, evaluate: Callable, rng: Random,
             algebra=TOURS, make=None) -> list:
    """One DE generation over the swarm.

    ``swarm`` holds objects with ``state`` and ``fitness``; ``make(state,
    fitness)`` builds a new one (defaults to the swarm element's type).
    Sub-population ``S1`` mutates with rand/1, ``S2`` with best/1 and ``S3``
    with rand-to-best/1.  Members of a sub-population with fewer than three
    individuals are carried over unchanged.
    """
    if not swarm:
        return []
    make = make or type(swarm[0])
    states = [f.state for f in swarm]
    s1, s2, s3 = split_populations(len(swarm), cfg.lambdas, rng)
    out = list(swarm)
    strategies = (
        (s1, lambda i: mutate_rand_1(states, s1, i, cfg.F, rng, algebra)),
        (s2, lambda i: mutate_best_1(states, s2, best, i, cfg.F, rng, algebra)),
        (s3, lambda i: mutate_rand_to_best_1(states, s3, best, i, cfg.F, cfg.K_de, rng,
                                             algebra)),
    )
    for sub, mutate in strategies:
        if len(sub) < 3:
            continue
        for i in sub:
            try:
                v = mutate(i)
            except NotEnoughIndividuals:
                continue
            u_state = algebra.cross(states[i], v, cfg.CR, rng)
            u = make(u_state, evaluate(u_state))
            out[i] = greedy_select(swarm[i], u)
    return out
