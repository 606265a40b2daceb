"""DE-CAFSA driver and its ablations.

``run`` performs the swarm loop: behaviours for every fish against a
snapshot of the previous iteration, chaotic search on the iteration's best
fish, a bulletin-board update, and a multi-population DE generation whenever
the bulletin has not improved for ``max_time`` consecutive iterations.

Variants switch features on and off:

===========  ========  =====================  =====  =================
variant      schedule  2-opt / sub-optimal    chaos  DE
===========  ========  =====================  =====  =================
afsa         no        no (random step)       no     never
cafsa        yes       yes                    yes    never
de           --        --                     --     every iteration
de-afsa      no        no (random step)       no     on stagnation
de-cafsa     yes       yes                    yes    on stagnation
===========  ========  =====================  =====  =================

``de`` and ``de-afsa`` use a single population with the rand/1 strategy;
``de-cafsa`` splits the swarm into three sub-populations.
"""

from __future__ import annotations

import dataclasses
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from random import Random
from typing import Any, Callable, Sequence

from . import afsa
from .afsa import Bulletin, Fish, SwarmConfig
from .de import DeConfig, de_epoch

VARIANTS = ("afsa", "cafsa", "de", "de-afsa", "de-cafsa")
SINGLE_POPULATION = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class HybridConfig:
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    de: DeConfig = field(default_factory=DeConfig)
    max_time: int = 10
    variant: str = "de-cafsa"
    seed: int = 0

    def __post_init__(self):
        if self.max_time < 1:
            raise ValueError("max_time must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")

    def with_variant(self, variant: str, seed: int | None = None) -> "HybridConfig":
        return dataclasses.replace(self, variant=variant,
                                   seed=self.seed if seed is None else seed)

    @property
    def swarm_features(self) -> SwarmConfig:
        improved = self.variant in ("cafsa", "de-cafsa")
        return dataclasses.replace(self.swarm, adaptive=improved, two_opt_fallback=improved,
                                   sub_accept=improved, chaos=improved)

    @property
    def de_features(self) -> DeConfig:
        if self.variant == "de-cafsa":
            return self.de
        return dataclasses.replace(self.de, lambdas=SINGLE_POPULATION)

    @property
    def uses_swarm(self) -> bool:
        return self.variant != "de"

    @property
    def uses_de(self) -> bool:
        return self.variant in ("de", "de-afsa", "de-cafsa")


@dataclass
class RunResult:
    best_state: Any
    best_fitness: float
    history: list[float]
    wall_time: float
    iterations_run: int
    events: list[tuple[int, str]] = field(default_factory=list)
    evaluations: int = 0


def run(cfg: HybridConfig, space, initializer: Callable[[Random], Any] | None = None,
        callback: Callable[[int, list[Fish], Bulletin], None] | None = None) -> RunResult:
    """Optimise ``space.evaluate`` with the configured variant.

    ``initializer(rng)`` produces one starting state (default: uniform random
    via ``space.random_state``).  ``callback(iteration, swarm, bulletin)`` is
    called at the end of every iteration.
    """
    start = time.perf_counter()
    evals0 = getattr(space, "evaluations", 0)
    rng = Random(cfg.seed)
    sc = cfg.swarm_features
    dc = cfg.de_features
    init = initializer or space.random_state

    swarm = []
    for _ in range(sc.n_fish):
        s = init(rng)
        swarm.append(Fish(s, space.evaluate(s)))
    bulletin = Bulletin(min(swarm, key=_fit))

    visual, step = sc.visual0, sc.step0
    M = sc.max_iter
    history: list[float] = []
    events: list[tuple[int, str]] = []

    for m in range(1, M + 1):
        if cfg.uses_swarm:
            snapshot = swarm
            swarm = [afsa.behave(f, snapshot, m, sc, visual, step, space, rng) for f in snapshot]
            if sc.chaos:
                ib = _argmin(swarm)
                swarm[ib] = afsa.chaos_search(swarm[ib], step, space, rng, sc.chaos_budget,
                                              sc.mu)
            bulletin.update(min(swarm, key=_fit))
            trigger = cfg.uses_de and bulletin.stop_time >= cfg.max_time
        else:
            trigger = True

        if trigger:
            best = min(swarm, key=_fit)
            swarm = de_epoch(swarm, best.state, dc, space.evaluate, rng, algebra=space)
            bulletin.update(min(swarm, key=_fit))
            events.append((m, "de_epoch"))
            if cfg.uses_swarm:
                bulletin.stop_time = 0

        if sc.adaptive:
            visual = afsa.schedule_visual(m, M, visual, sc.visual0, sc.beta)
            step = afsa.schedule_step(m, M, step, sc.step0, sc.beta)
        history.append(bulletin.best_fitness)
        if callback is not None:
            callback(m, swarm, bulletin)

    return RunResult(
        best_state=bulletin.best.state,
        best_fitness=bulletin.best_fitness,
        history=history,
        wall_time=time.perf_counter() - start,
        iterations_run=M,
        events=events,
        evaluations=getattr(space, "evaluations", 0) - evals0,
    )


def _fit(f: Fish) -> float:
    return f.fitness


def _argmin(swarm: Sequence[Fish]) -> int:
    return min(range(len(swarm)), key=lambda i: swarm[i].fitness)


@dataclass
class VariantStats:
    variant: str
    optimal: float
    worst: float
    average: float
    average_time: float
    runs: list[RunResult] = field(repr=False, default_factory=list)
    seeds: list[int] = field(default_factory=list)

    @classmethod
    def from_runs(cls, variant: str, seeds: Sequence[int], runs: Sequence[RunResult]):
        best = [r.best_fitness for r in runs]
        return cls(variant, min(best), max(best), statistics.fmean(best),
                   statistics.fmean(r.wall_time for r in runs), list(runs), list(seeds))


def _one(args):
    cfg, space = args
    return run(cfg, space)


def run_variant_matrix(space, variants: Sequence[str], seeds: Sequence[int],
                       base: HybridConfig | None = None, jobs: int = 1) -> list[VariantStats]:
    """Run every variant on the same seed list; one stats row per variant.

    With ``jobs > 1`` runs are distributed over worker processes; each run
    stays single-threaded, so results do not depend on ``jobs``.
    """
    base = base or HybridConfig()
    tasks = [(base.with_variant(v, s), space) for v in variants for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one, tasks))
    else:
        results = [_one(t) for t in tasks]
    rows = []
    for k, v in enumerate(variants):
        chunk = results[k * len(seeds):(k + 1) * len(seeds)]
        rows.append(VariantStats.from_runs(v, seeds, chunk))
    return rows
