"""Chaotic artificial fish swarm (CAFSA) on a discrete search space.

Fish positions are states of a search space (tours or MTSP plans); the
distance between fish is the space's edge distance, ``visual`` bounds the
distance of sampled neighbours and ``step`` bounds the number of guided
moves toward a target.  On top of the classic prey / cluster / follow
behaviours this adds the shrinking visual/step schedules, a 2-opt fallback
when preying fails, late-phase acceptance of slightly worse states, and a
logistic-map chaotic search around the best fish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random
from typing import Any, Sequence

CHAOS_SEED_LOW, CHAOS_SEED_HIGH = 0.05, 0.95
# fixed points / preimages of 0 of the mu=4 map
_BAD_SEEDS = (0.25, 0.5, 0.75)


@dataclass(frozen=True)
class SwarmConfig:
    n_fish: int = 20
    max_iter: int = 200
    trynum: int = 20
    visual0: float = 10.0
    step0: float = 6.0
    delta: float = 0.8
    beta: float = 0.2
    mu: float = 4.0
    sub_accept_prob: float = 0.1
    sub_accept_eps: float = 0.05
    chaos_budget: int = 20
    # feature switches; the plain AFSA baseline turns all four off
    adaptive: bool = True
    two_opt_fallback: bool = True
    sub_accept: bool = True
    chaos: bool = True

    def __post_init__(self):
        if self.n_fish < 3:
            raise ValueError("n_fish must be >= 3")
        if self.max_iter < 2:
            raise ValueError("max_iter must be >= 2")
        if self.trynum < 1:
            raise ValueError("trynum must be >= 1")
        if self.visual0 < 1 or self.step0 < 1:
            raise ValueError("visual0 and step0 must be >= 1")
        for name in ("delta", "beta", "sub_accept_prob"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not 0.0 < self.mu <= 4.0:
            raise ValueError("mu must lie in (0, 4]")
        if self.sub_accept_eps < 0:
            raise ValueError("sub_accept_eps must be >= 0")
        if self.chaos_budget < 1:
            raise ValueError("chaos_budget must be >= 1")


@dataclass(frozen=True)
class Fish:
    state: Any
    fitness: float


@dataclass
class Bulletin:
    best: Fish
    stop_time: int = 0

    @property
    def best_fitness(self) -> float:
        return self.best.fitness

    def update(self, candidate: Fish) -> bool:
        """Record ``candidate`` if strictly better; returns True on improvement."""
        if candidate.fitness < self.best.fitness:
            self.best = candidate
            self.stop_time = 0
            return True
        self.stop_time += 1
        return False


def _schedule(k: int, K: int, value_k: float, value_0: float, beta: float) -> float:
    if K < 2:
        raise ValueError("K must be >= 2")
    if not 1 <= k <= K:
        raise ValueError(f"iteration {k} outside 1..{K}")
    factor = 1.0 - (k - 1) / (K - 1)
    floor = beta * value_0
    if factor >= beta:
        # the shrink stops once the floor is reached
        return max(factor * value_k, floor)
    return floor


def schedule_visual(k: int, K: int, visual_k: float, visual_0: float, beta: float) -> float:
    """Visual range for iteration ``k + 1`` given the value at ``k``."""
    return _schedule(k, K, visual_k, visual_0, beta)


def schedule_step(k: int, K: int, step_k: float, step_0: float, beta: float) -> float:
    return _schedule(k, K, step_k, step_0, beta)


def logistic_step(x: float, mu: float = 4.0) -> float:
    if not 0.0 < x < 1.0:
        raise ValueError(f"logistic map state must lie in (0, 1), got {x}")
    return mu * x * (1.0 - x)


def chaos_seed(rng: Random) -> float:
    while True:
        z = rng.uniform(CHAOS_SEED_LOW, CHAOS_SEED_HIGH)
        if z not in _BAD_SEEDS:
            return z


def move_count(x: float) -> int:
    return max(1, math.floor(x))


class _LogisticStream:
    def __init__(self, rng: Random, mu: float):
        self.rng = rng
        self.mu = mu
        self.z = chaos_seed(rng)

    def __call__(self) -> float:
        z = logistic_step(self.z, self.mu)
        if not 0.0 < z < 1.0:
            # landed on 0 or 1 in floating point: restart the orbit
            z = chaos_seed(self.rng)
        self.z = z
        return z


def chaos_search(best: Fish, step: float, space, rng: Random, budget: int,
                 mu: float = 4.0) -> Fish:
    """Logistic-map search around ``best``; never returns a worse fish.

    Each chaotic value ``z`` gives a displacement ``dx = -k*step + 2k*step*z``
    which becomes ``max(1, round(|dx|))`` reversals of the incumbent at
    chaotically chosen positions.  ``k`` starts at 1 and grows by one each
    time ``budget/3`` evaluations pass without improvement.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    stream = _LogisticStream(rng, mu)
    n = space.size
    patience = math.ceil(budget / 3)
    k = 1
    stale = 0
    incumbent = best
    for _ in range(budget):
        z = stream()
        dx = -k * step + 2 * k * step * z
        m = max(1, round(abs(dx)))
        cand = incumbent.state
        if n >= 4:
            for _ in range(m):
                i = min(int(stream() * n), n - 1)
                j = min(int(stream() * n), n - 1)
                if i == j:
                    continue
                if i > j:
                    i, j = j, i
                cand = space.reverse(cand, i, j)
        f = space.evaluate(cand)
        if f < incumbent.fitness:
            incumbent = Fish(cand, f)
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                k += 1
                stale = 0
    return incumbent


def _approach(fish: Fish, target, target_fitness: float, step: float, space,
              rng: Random) -> Fish:
    """Move toward a strictly better target; unless the partial move is
    itself an improvement, jump onto the target."""
    moved = space.move_toward(fish.state, target, move_count(step), rng)
    f = space.evaluate(moved)
    if f < fish.fitness:
        return Fish(moved, f)
    return Fish(target, target_fitness)


def prey(fish: Fish, k: int, cfg: SwarmConfig, visual: float, step: float, space,
         rng: Random) -> Fish:
    """Sample up to ``trynum`` neighbours; approach the first better one.

    From iteration ``max_iter / 2`` on, a neighbour at most
    ``sub_accept_eps`` (relative) worse is taken with probability
    ``sub_accept_prob``.  If every trial fails the fish is 2-opt improved, or
    with the fallback switched off takes a random step.
    """
    late = cfg.sub_accept and k >= cfg.max_iter / 2
    limit = fish.fitness + cfg.sub_accept_eps * abs(fish.fitness)
    for _ in range(cfg.trynum):
        cand = space.random_neighbor(fish.state, visual, rng)
        fc = space.evaluate(cand)
        if fc < fish.fitness:
            return _approach(fish, cand, fc, step, space, rng)
        if late and fc <= limit and rng.random() < cfg.sub_accept_prob:
            return Fish(cand, fc)
    if cfg.two_opt_fallback:
        state = space.local_search(fish.state)
    else:
        state = space.random_neighbor(fish.state, step, rng)
    return Fish(state, space.evaluate(state))


def neighbors_within(fish: Fish, swarm: Sequence[Fish], visual: float, space) -> list[Fish]:
    return [o for o in swarm if o is not fish and space.distance(fish.state, o.state) <= visual]


def _crowded(n_neighbors: int, n_swarm: int, delta: float) -> bool:
    return n_neighbors / n_swarm >= delta


def cluster(fish: Fish, swarm: Sequence[Fish], visual: float, step: float, delta: float,
            space, rng: Random, neighbors: list[Fish] | None = None) -> Fish | None:
    """Swim toward the consensus of the neighbours; None means fall back to prey."""
    if neighbors is None:
        neighbors = neighbors_within(fish, swarm, visual, space)
    if not neighbors or _crowded(len(neighbors), len(swarm), delta):
        return None
    center = space.center([o.state for o in neighbors])
    fc = space.evaluate(center)
    if fc >= fish.fitness:
        return None
    return _approach(fish, center, fc, step, space, rng)


def follow(fish: Fish, swarm: Sequence[Fish], visual: float, step: float, delta: float,
           space, rng: Random, neighbors: list[Fish] | None = None) -> Fish | None:
    """Swim toward the best neighbour; None means fall back to prey."""
    if neighbors is None:
        neighbors = neighbors_within(fish, swarm, visual, space)
    if not neighbors or _crowded(len(neighbors), len(swarm), delta):
        return None
    leader = min(neighbors, key=lambda o: o.fitness)
    if leader.fitness >= fish.fitness:
        return None
    return _approach(fish, leader.state, leader.fitness, step, space, rng)


def behave(fish: Fish, swarm: Sequence[Fish], k: int, cfg: SwarmConfig, visual: float,
           step: float, space, rng: Random) -> Fish:
    """Try cluster and follow, keep the better success, else prey."""
    neighbors = neighbors_within(fish, swarm, visual, space)
    c = cluster(fish, swarm, visual, step, cfg.delta, space, rng, neighbors)
    f = follow(fish, swarm, visual, step, cfg.delta, space, rng, neighbors)
    if c is not None and f is not None:
        return f if f.fitness <= c.fitness else c
    if c is not None or f is not None:
        return c if c is not None else f
    return prey(fish, k, cfg, visual, step, space, rng)
