"""Permutation tours and the discrete moves the fish make on them.

A tour is a list of city indices, read cyclically.  The distance between two
tours is the number of undirected edges of one that the other lacks, so a
single segment reversal (a 2-opt move) changes the distance by at most 2.
"""

from __future__ import annotations

import math
from random import Random
from typing import Sequence

from .instances import DistanceMatrix

Tour = list  # list[int]

IMPROVEMENT_EPS = 1e-10


def is_tour(t: Sequence[int], n: int | None = None) -> bool:
    n = len(t) if n is None else n
    return len(t) == n and sorted(t) == list(range(n))


def _check_dims(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")


def tour_length(t: Sequence[int], d: DistanceMatrix) -> float:
    if len(t) != d.n:
        raise ValueError(f"tour of {len(t)} cities for a {d.n}-city matrix")
    rows = d.rows
    prev = t[-1]
    total = 0.0
    for c in t:
        total += rows[prev][c]
        prev = c
    return total


def edge_set(t: Sequence[int]) -> frozenset:
    n = len(t)
    if n < 2:
        return frozenset()
    prev = t[-1]
    out = set()
    for c in t:
        out.add((prev, c) if prev < c else (c, prev))
        prev = c
    return frozenset(out)


def edge_distance(a: Sequence[int], b: Sequence[int]) -> int:
    """Number of undirected edges of ``a`` that are missing from ``b``."""
    _check_dims(a, b)
    return len(edge_set(a) - edge_set(b))


def canonical(t: Sequence[int]) -> Tour:
    """Rotation and direction normal form: lowest city first, then the
    smaller of its two neighbours."""
    t = list(t)
    if len(t) < 3:
        return sorted(t)
    i = t.index(min(t))
    t = t[i:] + t[:i]
    if t[1] > t[-1]:
        t = [t[0]] + t[:0:-1]
    return t


def two_opt_move(t: Sequence[int], i: int, j: int) -> Tour:
    """Reverse the segment ``t[i..j]`` (inclusive)."""
    if not 0 <= i < j < len(t):
        raise IndexError(f"need 0 <= i < j < n, got i={i}, j={j}, n={len(t)}")
    return list(t[:i]) + list(t[i:j + 1])[::-1] + list(t[j + 1:])


def _reverse_inplace(t: list, i: int, j: int) -> None:
    t[i:j + 1] = t[i:j + 1][::-1]


def two_opt_improve(t: Sequence[int], d: DistanceMatrix, max_passes: int = 1000) -> Tour:
    """First-improvement 2-opt, scanning ``(i, j)`` lexicographically.

    After an improving reversal the scan carries on from the next ``j`` on
    the modified tour.  Stops after a pass without improvement (the result
    is then 2-opt optimal) or after ``max_passes`` passes.
    """
    if len(t) != d.n:
        raise ValueError(f"tour of {len(t)} cities for a {d.n}-city matrix")
    return _two_opt(t, d.rows, max_passes)


def _two_opt(t: Sequence[int], rows, max_passes: int) -> Tour:
    """2-opt kernel; ``t`` may hold any city ids indexing ``rows``."""
    t = list(t)
    n = len(t)
    if n < 4:
        return t
    for _ in range(max_passes):
        improved = False
        for i in range(n - 1):
            j = i + 1
            # (0, n-1) would reverse the whole tour: a no-op
            j_end = n - 1 if i == 0 else n
            while j < j_end:
                a = t[i - 1]
                b = t[i]
                ra = rows[a]
                rb = rows[b]
                dab = ra[b]
                for jj in range(j, j_end):
                    c = t[jj]
                    e = t[jj + 1] if jj + 1 < n else t[0]
                    delta = ra[c] + rb[e] - dab - rows[c][e]
                    if delta < -IMPROVEMENT_EPS:
                        _reverse_inplace(t, i, jj)
                        improved = True
                        j = jj + 1
                        break
                else:
                    break
        if not improved:
            break
    return t


def _target_adjacency(target: Sequence[int]) -> list[tuple[int, int]]:
    n = len(target)
    adj = [(0, 0)] * n
    for k, c in enumerate(target):
        adj[c] = (target[k - 1], target[(k + 1) % n])
    return adj


def _reversal_for_cut(p: int, q: int, n: int) -> tuple[int, int]:
    """Positions to reverse so that edges (p, p+1) and (q, q+1) are cut."""
    p %= n
    q %= n
    if p > q:
        p, q = q, p
    return p + 1, q


def _insertions(t: list, adj, pos: list[int], max_change: int = -1) -> list[tuple[int, int]]:
    """Reversals inserting a missing target edge whose effect on the edge
    distance is at most ``max_change``."""
    n = len(t)
    moves = []
    for u in range(n):
        pu = pos[u]
        su = t[(pu + 1) % n]
        pr_u = t[pu - 1]
        for v in adj[u]:
            if v < u:
                continue  # each target edge handled once, from its lower end
            if v == su or v == pr_u:
                continue  # already a tour edge
            pv = pos[v]
            sv = t[(pv + 1) % n]
            pr_v = t[pv - 1]
            # cut the successor edges of u and v, reconnect (u,v) + (su,sv)
            change = (sv not in adj[su]) - (su not in adj[u]) - (sv not in adj[v])
            if change <= max_change:
                moves.append(_reversal_for_cut(pu, pv, n))
            # cut the predecessor edges, reconnect (pr_u,pr_v) + (u,v)
            change = (pr_v not in adj[pr_u]) - (pr_u not in adj[u]) - (pr_v not in adj[v])
            if change <= max_change:
                moves.append(_reversal_for_cut(pu - 1, pv - 1, n))
    return moves


def _positions(t: Sequence[int]) -> list[int]:
    pos = [0] * len(t)
    for k, c in enumerate(t):
        pos[c] = k
    return pos


def _compound_move(t: list, target: Sequence[int], adj, rng: Random) -> list[tuple[int, int]]:
    """Two reversals that together reduce the distance to ``target``.

    Needed for double-bridge-like configurations, where no single reversal
    helps.  The first reversal is a distance-neutral edge insertion.
    """
    n = len(t)
    first = _insertions(t, adj, _positions(t), max_change=0)
    rng.shuffle(first)
    for i, j in first:
        trial = list(t)
        _reverse_inplace(trial, i, j)
        second = _insertions(trial, adj, _positions(trial))
        if second:
            return [(i, j), second[rng.randrange(len(second))]]
    # last resort: any distance-neutral reversal as the first step
    base = edge_distance(t, target)
    for i in range(n):
        for j in range(i + 1, n):
            trial = two_opt_move(t, i, j)
            if edge_distance(trial, target) <= base:
                second = _insertions(trial, adj, _positions(trial))
                if second:
                    return [(i, j), second[rng.randrange(len(second))]]
    raise RuntimeError("no distance-reducing move found")


def move_toward(t: Sequence[int], target: Sequence[int], max_steps: int, rng: Random) -> Tour:
    """Take up to ``max_steps`` steps toward ``target``.

    A step is normally one reversal that inserts an edge of ``target``; when
    no single reversal reduces the distance (double-bridge configurations) a
    step is a pair of reversals.  Every step strictly reduces
    ``edge_distance(t, target)``.
    """
    _check_dims(t, target)
    t = list(t)
    n = len(t)
    if n < 4:
        return t
    adj = _target_adjacency(target)
    for _ in range(max_steps):
        moves = _insertions(t, adj, _positions(t))
        if moves:
            i, j = moves[rng.randrange(len(moves))]
            _reverse_inplace(t, i, j)
            continue
        if edge_distance(t, target) == 0:
            break
        for i, j in _compound_move(t, target, adj, rng):
            _reverse_inplace(t, i, j)
    return t


def random_neighbor(t: Sequence[int], visual: float, rng: Random) -> Tour:
    """Random tour within edge distance about ``visual`` of ``t``.

    Applies ``m`` random segment reversals, ``m`` uniform in
    ``[1, max(1, floor(visual / 2))]``.
    """
    t = list(t)
    n = len(t)
    if n < 4:
        return t
    m = rng.randint(1, max(1, math.floor(visual / 2)))
    for _ in range(m):
        i = rng.randrange(n)
        j = rng.randrange(n - 1)
        if j >= i:
            j += 1
        else:
            i, j = j, i
        _reverse_inplace(t, i, j)
    return t


def swarm_center(neighbors: Sequence[Sequence[int]], d: DistanceMatrix) -> Tour:
    """Consensus tour built greedily from edge frequencies.

    Edges are taken in order of decreasing vote count, then increasing
    length, then increasing ``(i, j)``; an edge is skipped if it would give a
    city degree 3 or close a cycle early.  Cities left as path ends are then
    joined with the same rule (count 0), which completes a Hamiltonian cycle.
    """
    if not neighbors:
        raise ValueError("swarm_center needs at least one tour")
    n = len(neighbors[0])
    for t in neighbors:
        _check_dims(t, neighbors[0])
    if n < 4:
        return list(neighbors[0])
    rows = d.rows

    votes: dict[tuple[int, int], int] = {}
    for t in neighbors:
        for e in edge_set(t):
            votes[e] = votes.get(e, 0) + 1

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    degree = [0] * n
    adj: list[list[int]] = [[] for _ in range(n)]
    added = 0

    def try_add(i, j):
        nonlocal added
        if degree[i] >= 2 or degree[j] >= 2:
            return
        ri, rj = find(i), find(j)
        if ri == rj:
            return
        parent[ri] = rj
        degree[i] += 1
        degree[j] += 1
        adj[i].append(j)
        adj[j].append(i)
        added += 1

    for (i, j) in sorted(votes, key=lambda e: (-votes[e], rows[e[0]][e[1]], e)):
        try_add(i, j)
        if added == n - 1:
            break

    if added < n - 1:
        ends = [c for c in range(n) if degree[c] < 2]
        pairs = [(a, b) for k, a in enumerate(ends) for b in ends[k + 1:]]
        for (i, j) in sorted(pairs, key=lambda e: (rows[e[0]][e[1]], e)):
            try_add(i, j)
            if added == n - 1:
                break

    # walk the Hamiltonian path from one end; the closing edge is implicit
    start = next(c for c in range(n) if degree[c] == 1)
    order = [start]
    prev, cur = -1, start
    while len(order) < n:
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        order.append(nxt)
        prev, cur = cur, nxt
    return order
