import dataclasses
from random import Random

import pytest

from decafsa import afsa
from decafsa.afsa import (Bulletin, Fish, SwarmConfig, behave, chaos_search, chaos_seed, cluster,
                          follow, logistic_step, move_count, neighbors_within, prey,
                          schedule_step, schedule_visual)
from decafsa.instances import distance_matrix, from_points
from decafsa.space import TourSpace
from decafsa.tours import edge_distance, is_tour, two_opt_move

from conftest import MICRO
from oracles import brute_force_tsp, random_points


def space_for(points):
    return TourSpace(distance_matrix(from_points(points)))


def fish(space, t):
    return Fish(list(t), space.evaluate(t))


CAFSA = SwarmConfig()
AFSA = dataclasses.replace(CAFSA, adaptive=False, two_opt_fallback=False, sub_accept=False,
                           chaos=False)


# schedules


def test_schedule_examples():
    assert schedule_visual(1, 200, 10, 10, 0.2) == 10
    assert schedule_visual(200, 200, 3, 10, 0.2) == pytest.approx(2.0)
    assert schedule_visual(101, 201, 8, 10, 0.2) == pytest.approx(4.0)
    assert schedule_step(1, 200, 6, 6, 0.2) == 6
    assert schedule_step(200, 200, 6, 6, 0.2) == pytest.approx(1.2)


def test_schedule_errors():
    with pytest.raises(ValueError):
        schedule_visual(1, 1, 10, 10, 0.2)
    with pytest.raises(ValueError):
        schedule_step(0, 10, 6, 6, 0.2)
    with pytest.raises(ValueError):
        schedule_step(11, 10, 6, 6, 0.2)


@pytest.mark.parametrize("K", [2, 3, 10, 200, 300])
@pytest.mark.parametrize("beta", [0.05, 0.2, 0.5, 0.9])
@pytest.mark.parametrize("v0", [1.0, 6.0, 10.0])
def test_schedule_bounds_and_monotone(K, beta, v0):
    v, seq = v0, [v0]
    for k in range(1, K + 1):
        v = schedule_visual(k, K, v, v0, beta)
        seq.append(v)
    assert all(beta * v0 - 1e-12 <= x <= v0 for x in seq)
    assert all(b <= a for a, b in zip(seq, seq[1:]))
    assert seq[-1] == pytest.approx(beta * v0)


def test_step_floor_with_defaults():
    s = 6.0
    for k in range(1, 201):
        s = schedule_step(k, 200, s, 6.0, 0.2)
        assert s >= 1.2 - 1e-12
        assert move_count(s) >= 1


# logistic map and chaos


def test_logistic_examples():
    assert logistic_step(0.3) == pytest.approx(0.84)
    assert logistic_step(0.84) == pytest.approx(0.5376)
    assert logistic_step(0.5376) == pytest.approx(0.99434, abs=1e-5)
    assert logistic_step(0.5) == 1.0
    assert logistic_step(0.5, mu=2.0) == 0.5
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            logistic_step(bad)


def test_logistic_orbits():
    rng = Random(99)
    for _ in range(100):
        x = chaos_seed(rng)
        assert 0.05 <= x <= 0.95 and x not in (0.25, 0.5, 0.75)
        orbit = []
        for _ in range(1000):
            x = logistic_step(x)
            assert 0.0 < x <= 1.0
            orbit.append(x)
        tail = orbit[-40:]
        for period in range(1, 5):
            assert any(abs(tail[i] - tail[i + period]) > 1e-9 for i in range(len(tail) - period))


def test_move_count():
    assert move_count(0.3) == 1
    assert move_count(1.2) == 1
    assert move_count(6) == 6
    assert move_count(5.99) == 5


def test_chaos_keeps_best_with_budget_one():
    sp = space_for(MICRO["grid8"])
    best = fish(sp, [0, 1, 2, 3, 4, 5, 6, 7])   # optimal perimeter
    for seed in range(50):
        assert chaos_search(best, 6.0, sp, Random(seed), budget=1) == best


def test_chaos_on_global_optimum():
    pts = random_points(8, 3)
    opt, tour = brute_force_tsp(pts)
    sp = space_for(pts)
    best = fish(sp, tour)
    out = chaos_search(best, 6.0, sp, Random(0), budget=40)
    assert out.fitness == pytest.approx(opt)


def test_chaos_never_worse_and_counts_budget():
    pts = random_points(20, 1)
    sp = space_for(pts)
    rng = Random(1)
    for _ in range(30):
        t = list(range(20))
        rng.shuffle(t)
        start = fish(sp, t)
        before = sp.evaluations
        out = chaos_search(start, rng.uniform(1, 6), sp, rng, budget=15)
        assert sp.evaluations - before == 15
        assert is_tour(out.state, 20)
        assert out.fitness <= start.fitness
        assert out.fitness == pytest.approx(sp.evaluate(out.state))


def test_chaos_budget_validation():
    sp = space_for(MICRO["square4"])
    with pytest.raises(ValueError):
        chaos_search(fish(sp, [0, 1, 2, 3]), 1.0, sp, Random(0), budget=0)


# bulletin


def test_bulletin():
    b = Bulletin(Fish([0], 10.0))
    assert not b.update(Fish([1], 10.0))
    assert b.stop_time == 1
    assert not b.update(Fish([2], 11.0))
    assert b.stop_time == 2
    assert b.update(Fish([3], 9.0))
    assert b.stop_time == 0 and b.best_fitness == 9.0


# config


@pytest.mark.parametrize("field, value", [
    ("n_fish", 2), ("max_iter", 1), ("trynum", 0), ("visual0", 0.5), ("delta", 1.0),
    ("beta", 0.0), ("sub_accept_prob", 1.0), ("mu", 4.5), ("chaos_budget", 0),
])
def test_config_validation(field, value):
    with pytest.raises(ValueError):
        SwarmConfig(**{field: value})


# prey


def test_prey_on_local_optimum_is_fixed_point():
    pts = random_points(8, 12)
    opt, tour = brute_force_tsp(pts)
    sp = space_for(pts)
    f = fish(sp, tour)
    for seed in range(20):
        out = prey(f, 1, CAFSA, 10, 6, sp, Random(seed))
        assert out.fitness == pytest.approx(opt)


def test_prey_improves_six_city_tour():
    sp = space_for(MICRO["rect6"])
    bad = fish(sp, [0, 3, 1, 4, 2, 5])
    for seed in range(20):
        assert prey(bad, 1, CAFSA, 10, 6, sp, Random(seed)).fitness < bad.fitness


def test_prey_early_never_worse_late_bounded():
    pts = random_points(15, 4)
    sp = space_for(pts)
    cfg = dataclasses.replace(CAFSA, sub_accept_prob=0.9, sub_accept_eps=0.05)
    rng = Random(4)
    late_worse = 0
    for trial in range(300):
        t = sp.local_search(sp.random_state(rng))
        f = fish(sp, t)
        early = prey(f, 1, cfg, 10, 6, sp, rng)
        assert early.fitness <= f.fitness + 1e-9
        late = prey(f, cfg.max_iter // 2, cfg, 10, 6, sp, rng)
        assert late.fitness <= f.fitness * (1 + cfg.sub_accept_eps) + 1e-9
        late_worse += late.fitness > f.fitness + 1e-9
    assert late_worse > 0   # the gate really opens


def test_prey_afsa_fallback_is_random_step():
    sp = space_for(MICRO["grid8"])
    opt = fish(sp, [0, 1, 2, 3, 4, 5, 6, 7])
    moved = [prey(opt, 1, AFSA, 10, 6, sp, Random(s)) for s in range(20)]
    assert any(m.state != opt.state for m in moved)
    assert all(is_tour(m.state, 8) for m in moved)


# cluster / follow / behave


def _perturb(t, i, j):
    return two_opt_move(t, i, j)


def test_cluster_no_neighbors():
    sp = space_for(MICRO["grid8"])
    f = fish(sp, [0, 2, 4, 6, 1, 3, 5, 7])
    swarm = [f, fish(sp, [0, 1, 2, 3, 4, 5, 6, 7])]
    assert cluster(f, swarm, 1, 6, 0.8, sp, Random(0)) is None
    assert follow(f, swarm, 1, 6, 0.8, sp, Random(0)) is None


def _five_fish():
    sp = space_for(MICRO["grid8"])
    best = [0, 1, 2, 3, 4, 5, 6, 7]
    target = fish(sp, [0, 1, 2, 4, 3, 5, 6, 7])
    others = [fish(sp, best), fish(sp, _perturb(best, 1, 2)), fish(sp, _perturb(best, 5, 6)),
              fish(sp, best[::-1])]
    return sp, target, [target, *others]


def test_cluster_center_beats_fish():
    sp, f, swarm = _five_fish()
    # 4 of 5 neighbours is exactly the default crowding threshold
    assert cluster(f, swarm, 8, 6, 0.8, sp, Random(0)) is None
    out = cluster(f, swarm, 8, 6, 0.9, sp, Random(0))
    assert out is not None and out.fitness < f.fitness


def test_follow_moves_toward_leader():
    sp = space_for(random_points(12, 6))
    rng = Random(6)
    checked = 0
    for _ in range(200):
        a, b = sp.random_state(rng), sp.random_state(rng)
        fa, fb = fish(sp, a), fish(sp, b)
        worse, better = (fa, fb) if fa.fitness > fb.fitness else (fb, fa)
        out = follow(worse, [worse, better], 12, 1, 0.9, sp, rng)
        if out is None:
            continue
        checked += 1
        assert out.fitness < worse.fitness
        assert sp.distance(out.state, better.state) < sp.distance(worse.state, better.state)
    assert checked > 150


def test_follow_fallbacks():
    sp, f, swarm = _five_fish()
    best = min(swarm, key=lambda x: x.fitness)
    # the leader itself has no better neighbour
    assert follow(best, swarm, 8, 6, 0.9, sp, Random(0)) is None
    same = [fish(sp, best.state) for _ in range(5)]
    assert follow(same[0], same, 8, 6, 0.9, sp, Random(0)) is None
    assert cluster(same[0], same, 8, 6, 0.9, sp, Random(0)) is None


def test_behave_falls_back_to_prey():
    sp = space_for(random_points(10, 2))
    f = fish(sp, sp.random_state(Random(2)))
    for seed in range(10):
        assert behave(f, [f], 1, CAFSA, 10, 6, sp, Random(seed)) == \
            prey(f, 1, CAFSA, 10, 6, sp, Random(seed))


def test_behave_prefers_better_success():
    sp, f, swarm = _five_fish()
    cfg = dataclasses.replace(CAFSA, delta=0.9)
    for seed in range(10):
        rng = Random(seed)
        nb = neighbors_within(f, swarm, 8, sp)
        c = cluster(f, swarm, 8, 6, cfg.delta, sp, rng, nb)
        fo = follow(f, swarm, 8, 6, cfg.delta, sp, rng, nb)
        expected = fo if fo.fitness <= c.fitness else c
        assert behave(f, swarm, 1, cfg, 8, 6, sp, Random(seed)) == expected


def test_follow_wins_when_leader_is_strictly_better():
    pts = random_points(9, 21)
    opt, tour = brute_force_tsp(pts)
    sp = space_for(pts)
    rng = Random(21)
    leader = fish(sp, tour)
    # mediocre neighbours pull the consensus away from the leader
    mediocre = [fish(sp, sp.random_state(rng)) for _ in range(3)]
    start = max(mediocre, key=lambda x: x.fitness)
    swarm = [start, leader, *[m for m in mediocre if m is not start]]
    cfg = dataclasses.replace(CAFSA, delta=0.9)
    out = behave(start, swarm, 1, cfg, 9, 9, sp, Random(0))
    # step 9 reaches any target, so follow lands on the optimum
    assert out.fitness == pytest.approx(opt)


def test_behaviours_keep_fitness_cache_honest():
    sp = space_for(random_points(12, 8))
    rng = Random(8)
    swarm = [fish(sp, sp.random_state(rng)) for _ in range(8)]
    for k in (1, 150):
        for f in swarm:
            out = behave(f, swarm, k, CAFSA, 10, 6, sp, rng)
            assert is_tour(out.state, 12)
            assert out.fitness == pytest.approx(sp.evaluate(out.state))
