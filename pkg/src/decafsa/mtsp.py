"""Multi-group investigation routes sharing one depot.

A plan is a permutation of the non-depot sites cut into ``K`` consecutive
non-empty segments; group ``g`` drives ``depot -> segment g -> depot``.  The
cost of a plan is fuel + personnel + tolls/parking:

* fuel ``C1 = p1 * q * D / 100 * Kr``
* personnel ``C2 = p2 * T * m`` where each group's working days are
  ``floor(hours / 8) + 1`` and ``hours = distance / v + sites * t``
* other ``C3 = p3 * D + p4 * N``

``Kr`` is either 1 for the whole distance (``aggregate-unity``) or looked up
per edge from the road type of the destination site (``per-edge``).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from random import Random
from typing import Sequence

import numpy as np

from . import tours
from .de import apply_swaps, binomial_cross, scale_sequence, swap_sequence
from .instances import DistanceMatrix, TspInstance, distance_matrix, resolve_instance

AGGREGATE_UNITY = "aggregate-unity"
PER_EDGE = "per-edge"
KR_TABLE = (1.00, 1.10, 1.25, 1.35, 1.45, 1.70)
WORKDAY_HOURS = 8.0


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class MtspPlan:
    sites: tuple[int, ...]
    breaks: tuple[int, ...]
    depot: int

    @property
    def K(self) -> int:
        return len(self.breaks) + 1

    def segments(self) -> list[tuple[int, ...]]:
        cuts = (0, *self.breaks, len(self.sites))
        return [self.sites[a:b] for a, b in zip(cuts, cuts[1:])]

    def routes(self) -> list[list[int]]:
        """Closed routes, depot first and last."""
        return [[self.depot, *seg, self.depot] for seg in self.segments()]

    @classmethod
    def from_segments(cls, segments: Sequence[Sequence[int]], depot: int) -> "MtspPlan":
        sites, breaks, acc = [], [], 0
        for seg in segments[:-1]:
            acc += len(seg)
            breaks.append(acc)
        for seg in segments:
            sites.extend(seg)
        return cls(tuple(sites), tuple(breaks), depot)


@dataclass(frozen=True)
class CostParams:
    p1: float = 7.0       # fuel price per litre
    q: float = 7.0        # litres per 100 km
    p2: float = 250.0     # per person per day
    m: int = 2            # people per group
    p3: float = 0.45      # toll per km
    p4: float = 20.0      # parking per site
    v: float = 70.0       # km/h
    t: float = 1.0        # hours spent at each site
    kr_table: tuple[float, ...] = KR_TABLE
    kr_mode: str = AGGREGATE_UNITY
    road_type: dict[int, int] | None = None   # point index -> 1..6

    def __post_init__(self):
        for name in ("p1", "q", "p2", "m", "p3", "p4", "t"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.v <= 0:
            raise ValueError("v must be > 0")
        if self.kr_mode not in (AGGREGATE_UNITY, PER_EDGE):
            raise ValueError(f"unknown kr_mode {self.kr_mode!r}")
        if len(self.kr_table) != 6:
            raise ValueError("kr_table needs 6 coefficients")

    def kr(self, point: int) -> float:
        if self.road_type is None or point not in self.road_type:
            raise PlanError(f"no road type for point {point} (needed in per-edge mode)")
        rt = self.road_type[point]
        if not 1 <= rt <= 6:
            raise PlanError(f"road type {rt} of point {point} outside 1..6")
        return self.kr_table[rt - 1]


@dataclass
class CostBreakdown:
    group_sites: list[int]
    group_distance: list[float]
    group_hours: list[float]
    group_days: list[int]
    group_fuel: list[float]
    group_staff: list[float]
    group_other: list[float]
    D: float
    T: int
    C1: float
    C2: float
    C3: float
    total: float

    @property
    def K(self) -> int:
        return len(self.group_sites)

    def table_rows(self) -> list[list[str]]:
        """Rows shaped like a per-group cost analysis table (4 decimals)."""
        def f4(x):
            return f"{x:.4f}"
        blank = [""] * (self.K - 1)
        return [
            ["", *[f"Group {g + 1}" for g in range(self.K)]],
            ["Number of investigation locations", *map(str, self.group_sites)],
            ["Group path length (km)", *map(f4, self.group_distance)],
            ["Group time spent (hour)", *map(f4, self.group_hours)],
            ["Days of research (day)", *map(str, self.group_days)],
            ["Total path length (km)", f4(self.D), *blank],
            ["Fuel cost (CNY)", *map(f4, self.group_fuel)],
            ["Staff costs (CNY)", *map(f4, self.group_staff)],
            ["Other cost (CNY)", *map(f4, self.group_other)],
            ["Total cost (CNY)", f4(self.total), *blank],
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(self.table_rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return asdict(self)


def route_length(route: Sequence[int], d: DistanceMatrix) -> float:
    rows = d.rows
    return sum(rows[a][b] for a, b in zip(route, route[1:]))


def group_distances(plan: MtspPlan, d: DistanceMatrix) -> list[float]:
    return [route_length(r, d) for r in plan.routes()]


def total_distance(plan: MtspPlan, d: DistanceMatrix) -> tuple[float, list[float]]:
    per_group = group_distances(plan, d)
    return sum(per_group), per_group


def _weighted_route_length(route: Sequence[int], d: DistanceMatrix, params: CostParams) -> float:
    rows = d.rows
    return sum(rows[a][b] * params.kr(b) for a, b in zip(route, route[1:]))


def fuel_for(distance: float, params: CostParams, kr: float = 1.0) -> float:
    return params.p1 * params.q * distance / 100.0 * kr


def _group_fuel(plan: MtspPlan, d: DistanceMatrix, params: CostParams,
                distances: Sequence[float]) -> list[float]:
    if params.kr_mode == AGGREGATE_UNITY:
        return [fuel_for(x, params) for x in distances]
    return [fuel_for(_weighted_route_length(r, d, params), params) for r in plan.routes()]


def fuel_cost(plan: MtspPlan, d: DistanceMatrix, params: CostParams) -> float:
    return sum(_group_fuel(plan, d, params, group_distances(plan, d)))


def group_hours(distance: float, n_sites: int, params: CostParams) -> float:
    return distance / params.v + n_sites * params.t


def days_for(hours: float) -> int:
    # a started day is paid in full, so exactly 8 h already counts as 2 days
    return math.floor(hours / WORKDAY_HOURS) + 1


def person_days(plan: MtspPlan, d: DistanceMatrix,
                params: CostParams) -> tuple[int, list[float], list[int]]:
    hours = [group_hours(x, len(seg), params)
             for x, seg in zip(group_distances(plan, d), plan.segments())]
    days = [days_for(h) for h in hours]
    return sum(days), hours, days


def personnel_cost(T: float, params: CostParams) -> float:
    return params.p2 * T * params.m


def other_cost(plan: MtspPlan, d: DistanceMatrix, params: CostParams) -> float:
    D, _ = total_distance(plan, d)
    return params.p3 * D + params.p4 * len(plan.sites)


def breakdown_from_groups(distances: Sequence[float], site_counts: Sequence[int],
                          params: CostParams,
                          fuel: Sequence[float] | None = None) -> CostBreakdown:
    """Cost table from per-group distances and site counts.

    ``fuel`` overrides the per-group fuel cost (used for per-edge ``Kr``).
    """
    distances = [float(x) for x in distances]
    hours = [group_hours(x, n, params) for x, n in zip(distances, site_counts)]
    days = [days_for(h) for h in hours]
    fuel = list(fuel) if fuel is not None else [fuel_for(x, params) for x in distances]
    staff = [personnel_cost(dd, params) for dd in days]
    other = [params.p3 * x + params.p4 * n for x, n in zip(distances, site_counts)]
    D = sum(distances)
    T = sum(days)
    C1 = sum(fuel)
    C2 = personnel_cost(T, params)
    C3 = params.p3 * D + params.p4 * sum(site_counts)
    return CostBreakdown(list(site_counts), distances, hours, days, fuel, staff, other,
                         D, T, C1, C2, C3, C1 + C2 + C3)


def total_cost(plan: MtspPlan, d: DistanceMatrix, params: CostParams) -> CostBreakdown:
    distances = group_distances(plan, d)
    fuel = _group_fuel(plan, d, params, distances)
    return breakdown_from_groups(distances, [len(s) for s in plan.segments()], params, fuel)


def validate_plan(plan: MtspPlan, K: int, N: int) -> list[str]:
    """Constraint violations of ``plan`` for ``K`` groups and ``N`` sites.

    Points are ``0..N`` with ``plan.depot`` among them; an empty list means
    the plan is feasible.
    """
    problems = []
    if plan.K != K:
        problems.append(f"plan has {plan.K} groups, expected {K}")
    if not 0 <= plan.depot <= N:
        problems.append(f"depot {plan.depot} outside 0..{N}")
    expected = set(range(N + 1)) - {plan.depot}
    seen: dict[int, int] = {}
    for s in plan.sites:
        seen[s] = seen.get(s, 0) + 1
    for s in sorted(seen):
        if s == plan.depot:
            problems.append(f"depot {s} listed as a site")
        elif s not in expected:
            problems.append(f"unknown site {s}")
        elif seen[s] > 1:
            problems.append(f"site {s} visited {seen[s]} times")
    for s in sorted(expected - set(seen)):
        problems.append(f"site {s} not visited")
    b = plan.breaks
    if any(x <= 0 or x >= len(plan.sites) for x in b) or any(x >= y for x, y in zip(b, b[1:])):
        problems.append(f"breaks {list(b)} do not give non-empty increasing segments")
        return problems
    # degree bookkeeping on the decoded routes
    indeg: dict[int, int] = {}
    outdeg: dict[int, int] = {}
    for route in plan.routes():
        for a, c in zip(route, route[1:]):
            outdeg[a] = outdeg.get(a, 0) + 1
            indeg[c] = indeg.get(c, 0) + 1
    if outdeg.get(plan.depot, 0) != plan.K or indeg.get(plan.depot, 0) != plan.K:
        problems.append("depot is not used by every group")
    for s in expected & set(seen):
        if indeg.get(s, 0) != seen[s] or outdeg.get(s, 0) != seen[s]:
            problems.append(f"site {s} has inconsistent flow")
    return problems


# --------------------------------------------------------------------------
# search space


def repair_breaks(breaks: Sequence[float], N: int) -> tuple[int, ...]:
    """Round and push cut positions into a strictly increasing run in 1..N-1."""
    b = sorted(int(round(x)) for x in breaks)
    k = len(b)
    for i in range(k):
        lo = b[i - 1] + 1 if i else 1
        b[i] = max(b[i], lo)
    for i in range(k - 1, -1, -1):
        hi = b[i + 1] - 1 if i < k - 1 else N - 1
        b[i] = min(b[i], hi)
    return tuple(b)


def break_distance(a: MtspPlan, b: MtspPlan) -> int:
    return sum(abs(x - y) for x, y in zip(a.breaks, b.breaks))


def plan_distance(a: MtspPlan, b: MtspPlan) -> int:
    return tours.edge_distance(a.sites, b.sites) + break_distance(a, b)


def shift_break(plan: MtspPlan, index: int, delta: int) -> MtspPlan | None:
    """Move one cut by ``delta``; None if a segment would become empty."""
    b = list(plan.breaks)
    new = b[index] + delta
    lo = b[index - 1] + 1 if index else 1
    hi = b[index + 1] - 1 if index + 1 < len(b) else len(plan.sites) - 1
    if not lo <= new <= hi:
        return None
    b[index] = new
    return MtspPlan(plan.sites, tuple(b), plan.depot)


def relocate(plan: MtspPlan, src_group: int, pos: int, dst_group: int,
             dst_pos: int) -> MtspPlan | None:
    """Move one site between groups; None if the source would become empty."""
    segs = [list(s) for s in plan.segments()]
    if len(segs[src_group]) < 2 or src_group == dst_group:
        return None
    site = segs[src_group].pop(pos)
    segs[dst_group].insert(dst_pos, site)
    return MtspPlan.from_segments(segs, plan.depot)


def reverse_sites(plan: MtspPlan, i: int, j: int) -> MtspPlan:
    return MtspPlan(tuple(tours.two_opt_move(plan.sites, i, j)), plan.breaks, plan.depot)


def random_move(plan: MtspPlan, rng: Random) -> MtspPlan:
    """One random move: site reversal, break shift, or cross-break relocation."""
    N = len(plan.sites)
    kinds = ["reverse"] if N >= 2 else []
    if plan.K > 1:
        kinds += ["shift", "relocate"]
    while kinds:
        kind = rng.choice(kinds)
        if kind == "reverse":
            i, j = sorted(rng.sample(range(N), 2))
            return reverse_sites(plan, i, j)
        if kind == "shift":
            idx = rng.randrange(plan.K - 1)
            moved = shift_break(plan, idx, rng.choice((-1, 1)))
            if moved is None:
                moved = shift_break(plan, idx, rng.choice((-1, 1)))
        else:
            sizes = [len(s) for s in plan.segments()]
            donors = [g for g, n in enumerate(sizes) if n >= 2]
            moved = None
            if donors:
                g = rng.choice(donors)
                h = g + rng.choice((-1, 1))
                if not 0 <= h < plan.K:
                    h = g - 1 if g else g + 1
                moved = relocate(plan, g, rng.randrange(sizes[g]), h,
                                 rng.randrange(sizes[h] + 1))
        if moved is not None:
            return moved
        kinds.remove(kind)
    return plan


class PlanSpace:
    """Search space of ``K``-group plans; sites are ``0..N-1``, depot ``N``."""

    def __init__(self, d: DistanceMatrix, params: CostParams, K: int,
                 two_opt_passes: int = 1000):
        N = d.n - 1
        if not 1 <= K <= N:
            raise ValueError(f"need 1 <= K <= {N} groups, got {K}")
        self.d = d
        self.params = params
        self.K = K
        self.N = N
        self.depot = N
        self.two_opt_passes = two_opt_passes
        self.site_d = DistanceMatrix.from_array(d.d[:N, :N])
        self.evaluations = 0

    @property
    def size(self) -> int:
        return self.N

    def evaluate(self, plan: MtspPlan) -> float:
        self.evaluations += 1
        return total_cost(plan, self.d, self.params).total

    def breakdown(self, plan: MtspPlan) -> CostBreakdown:
        return total_cost(plan, self.d, self.params)

    def random_state(self, rng: Random) -> MtspPlan:
        sites = list(range(self.N))
        rng.shuffle(sites)
        breaks = tuple(sorted(rng.sample(range(1, self.N), self.K - 1)))
        return MtspPlan(tuple(sites), breaks, self.depot)

    def is_valid(self, plan: MtspPlan) -> bool:
        return not validate_plan(plan, self.K, self.N)

    def distance(self, a: MtspPlan, b: MtspPlan) -> int:
        return plan_distance(a, b)

    def random_neighbor(self, plan: MtspPlan, visual: float, rng: Random) -> MtspPlan:
        m = rng.randint(1, max(1, math.floor(visual / 2)))
        for _ in range(m):
            plan = random_move(plan, rng)
        return plan

    def move_toward(self, plan: MtspPlan, target: MtspPlan, steps: int,
                    rng: Random) -> MtspPlan:
        """Each step shrinks either the sites edge distance or one break gap."""
        for _ in range(steps):
            options = []
            if tours.edge_distance(plan.sites, target.sites) > 0:
                options.append(None)
            for idx, (x, y) in enumerate(zip(plan.breaks, target.breaks)):
                if x != y and shift_break(plan, idx, 1 if y > x else -1) is not None:
                    options.append(idx)
            if not options:
                break
            choice = options[rng.randrange(len(options))]
            if choice is None:
                sites = tours.move_toward(plan.sites, target.sites, 1, rng)
                plan = MtspPlan(tuple(sites), plan.breaks, plan.depot)
            else:
                delta = 1 if target.breaks[choice] > plan.breaks[choice] else -1
                plan = shift_break(plan, choice, delta)
        return plan

    def center(self, plans: Sequence[MtspPlan]) -> MtspPlan:
        sites = tours.swarm_center([p.sites for p in plans], self.site_d)
        if self.K == 1:
            return MtspPlan(tuple(sites), (), self.depot)
        med = np.median(np.array([p.breaks for p in plans], dtype=float), axis=0)
        return MtspPlan(tuple(sites), repair_breaks(med, self.N), self.depot)

    def local_search(self, plan: MtspPlan) -> MtspPlan:
        """2-opt every group route; kept only if the cost does not rise."""
        segs = []
        for route in plan.routes():
            closed = tours._two_opt(route[:-1], self.d.rows, self.two_opt_passes)
            k = closed.index(self.depot)
            segs.append(closed[k + 1:] + closed[:k])
        improved = MtspPlan.from_segments(segs, self.depot)
        if self.evaluate(improved) <= self.evaluate(plan):
            return improved
        return plan

    def reverse(self, plan: MtspPlan, i: int, j: int) -> MtspPlan:
        return reverse_sites(plan, i, j)

    # DE algebra: swap sequences on the sites, plain arithmetic on the breaks

    def diff(self, src: MtspPlan, dst: MtspPlan):
        return (swap_sequence(src.sites, dst.sites),
                [y - x for x, y in zip(src.breaks, dst.breaks)])

    def scale(self, diff, F: float):
        swaps, db = diff
        return scale_sequence(swaps, F), [F * x for x in db]

    def add(self, plan: MtspPlan, diff) -> MtspPlan:
        swaps, db = diff
        sites = tuple(apply_swaps(swaps, plan.sites))
        breaks = repair_breaks([x + y for x, y in zip(plan.breaks, db)], self.N)
        return MtspPlan(sites, breaks, plan.depot)

    def cross(self, x: MtspPlan, v: MtspPlan, CR: float, rng: Random) -> MtspPlan:
        sites = tuple(binomial_cross(x.sites, v.sites, CR, rng))
        breaks = [b if rng.random() <= CR else a for a, b in zip(x.breaks, v.breaks)]
        return MtspPlan(sites, repair_breaks(breaks, self.N), x.depot)


# --------------------------------------------------------------------------
# scenario files


@dataclass
class Scenario:
    name: str
    coords: list[tuple[float, float]]     # sites first, depot last
    labels: list[str]                      # printable id for every point
    groups: list[int]
    params: CostParams
    metric: str = "real"
    iters: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.coords) - 1

    def distance_matrix(self) -> DistanceMatrix:
        return distance_matrix(TspInstance(self.name, tuple(self.coords), self.metric))

    def route_labels(self, plan: MtspPlan) -> list[str]:
        return ["-".join(self.labels[p] for p in r) for r in plan.routes()]


def _points_from(data: dict, base: Path | None) -> tuple[list, list[str]]:
    if "sites" in data:
        pts = [tuple(map(float, p)) for p in data["sites"]]
        return pts, [str(i + 1) for i in range(len(pts))]
    if "instance" in data:
        ref = data["instance"]
        if base is not None and (base / ref).exists():
            ref = str(base / ref)
        inst = resolve_instance(ref)
        return list(inst.coords), [str(i + 1) for i in range(inst.n)]
    raise PlanError("scenario needs 'sites' or 'instance'")


def parse_scenario(data: dict, base: Path | None = None) -> Scenario:
    """Build a scenario from its JSON object.

    Either ``depot`` (coordinates, appended after the sites) or
    ``depot_index`` (0-based, taken out of the site list) gives the start.
    ``scale`` multiplies every coordinate, e.g. to turn grid units into km.
    """
    pts, labels = _points_from(data, base)
    road = data.get("cost", {}).get("road_types")
    if road is not None and len(road) != len(pts):
        raise PlanError(f"{len(road)} road types for {len(pts)} points")
    depot_road = data.get("cost", {}).get("depot_road_type", 1)
    if "depot" in data and "depot_index" in data:
        raise PlanError("give either 'depot' or 'depot_index', not both")
    if "depot" in data:
        depot_xy = tuple(map(float, data["depot"]))
        depot_label = str(len(pts) + 1)
    elif "depot_index" in data:
        k = int(data["depot_index"])
        if not 0 <= k < len(pts):
            raise PlanError(f"depot_index {k} out of range")
        depot_xy = pts.pop(k)
        depot_label = labels.pop(k)
        if road is not None:
            road = list(road)
            depot_road = road.pop(k)
    else:
        raise PlanError("scenario needs 'depot' or 'depot_index'")
    scale = float(data.get("scale", 1.0))
    if not scale > 0:
        raise PlanError("scale must be > 0")
    coords = [(x * scale, y * scale) for x, y in pts + [depot_xy]]
    labels = labels + [depot_label]
    if len(coords) < 2:
        raise PlanError("scenario needs at least one site besides the depot")

    cost = dict(data.get("cost", {}))
    cost.pop("road_types", None)
    cost.pop("depot_road_type", None)
    if "kr_table" in cost:
        cost["kr_table"] = tuple(float(x) for x in cost["kr_table"])
    road_type = None
    if road is not None:
        road_type = {i: int(r) for i, r in enumerate(road)}
        road_type[len(coords) - 1] = int(depot_road)
    params = CostParams(**cost, road_type=road_type)

    groups = data.get("groups", data.get("K", 2))
    groups = [int(g) for g in (groups if isinstance(groups, list) else [groups])]
    N = len(coords) - 1
    for g in groups:
        if not 1 <= g <= N:
            raise PlanError(f"cannot split {N} sites into {g} groups")
    return Scenario(data.get("name", "scenario"), coords, labels, groups, params,
                    data.get("metric", "real"), data.get("iters"))


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(json.loads(path.read_text()), path.parent)
