import pytest

from kslab.adversary import (
    PATH_ROUND_INIT,
    path_round_sequence,
    module_graph,
    perm_init,
    valid_sequence,
)
from kslab.instances import (
    SplitMix64,
    path_graph,
    random_distinct_vertices,
    random_partial_ktree,
    random_requests,
)
from kslab.metric_core import all_pairs_shortest_paths
from kslab.offline_solver import (
    InstanceTooLarge,
    opt_all_schedules,
    opt_cost_dp,
    opt_cost_flow,
    replay_cost,
    validate_lazy_schedule,
)


def test_empty_sequence():
    g = path_graph(5)
    assert opt_cost_dp(g, (1, 3), [])[0] == 0
    assert opt_cost_flow(g, (1, 3), [])[0] == 0


def test_single_round_costs_four():
    g = path_graph(5)
    cost, sched = opt_cost_dp(g, PATH_ROUND_INIT, path_round_sequence("1", 5))
    assert cost == 4
    dm = all_pairs_shortest_paths(g)
    validate_lazy_schedule(dm, PATH_ROUND_INIT, path_round_sequence("1", 5), sched)


def test_module_round_costs_4_gamma():
    g = module_graph(2)
    seq = valid_sequence(2, 1, (((((0, 1), (0, 1))),),))
    cost, _ = opt_cost_dp(g, perm_init(2), list(seq.requests))
    assert cost == 8  # 4 * gamma per round


def test_three_rounds_cost_4m():
    g = path_graph(5)
    sigma = path_round_sequence("101", 5)
    cost, _ = opt_cost_flow(g, PATH_ROUND_INIT, sigma)
    assert cost == 12


def test_guard():
    g = path_graph(20)
    with pytest.raises(InstanceTooLarge):
        opt_cost_dp(g, tuple(range(6)), list(range(20)) * 50)


def test_all_schedules_single_server():
    g = path_graph(4)
    scheds = opt_all_schedules(g, (0,), [2])
    assert len(scheds) == 1
    assert scheds[0].total_cost == 2


def test_all_schedules_symmetric_pair():
    # either server may serve the middle vertex at cost 1
    g = path_graph(5)
    scheds = opt_all_schedules(g, (1, 3), [2])
    assert len(scheds) == 2
    assert {s.move_triples() for s in scheds} == {((0, 1, 2),), ((0, 3, 2),)}


def test_flow_matches_dp_on_random_instances():
    rng = SplitMix64(404)
    for i in range(100):
        n_v = 5 + rng.randrange(8)  # N <= 12
        k = 1 + rng.randrange(3)
        g, _ = random_partial_ktree(rng, n_v, 1 + rng.randrange(3), max_weight=5)
        dm = all_pairs_shortest_paths(g)
        init = random_distinct_vertices(rng, k, g.n)
        sigma = random_requests(rng, 1 + rng.randrange(15), g.n)
        c_dp, s_dp = opt_cost_dp(g, init, sigma, dm)
        c_fl, s_fl = opt_cost_flow(g, init, sigma, dm)
        assert c_dp == c_fl, f"instance {i}: dp {c_dp} != flow {c_fl}"
        validate_lazy_schedule(dm, init, sigma, s_dp)
        validate_lazy_schedule(dm, init, sigma, s_fl)
        assert replay_cost(dm, s_dp) == c_dp
        assert replay_cost(dm, s_fl) == c_dp


def test_lazification_never_costs_more():
    # dropping parking moves and serving straight from the previous serve
    # position can only shorten a run (triangle inequality, per server)
    from kslab.gpc import generate_advice, run_online, server_trajectories
    from kslab.tree_decomp import reduce_height

    rng = SplitMix64(606)
    for _ in range(15):
        g, td = random_partial_ktree(rng, 8 + rng.randrange(12), 2, max_weight=5)
        dm = all_pairs_shortest_paths(g)
        red = reduce_height(td, g.n)
        init = random_distinct_vertices(rng, 2, g.n)
        sigma = random_requests(rng, 15, g.n)
        opt_c, opt_s = opt_cost_dp(g, init, sigma, dm)
        tape = generate_advice(g, dm, red, init, sigma, opt_s)
        tape.rewind()
        run = run_online(g, dm, red, init, sigma, tape)
        lazy_cost = sum(
            dm.dist[a][b]
            for tr in server_trajectories(init, sigma, opt_s)
            for a, b in zip(tr, tr[1:])
        )
        assert lazy_cost <= run.online_cost
        assert lazy_cost == opt_c  # relays sit on shortest paths: equality


def test_schedule_json_round_trip():
    from kslab.offline_solver import Schedule

    g = path_graph(5)
    dm = all_pairs_shortest_paths(g)
    sigma = path_round_sequence("1", 5)
    _, sched = opt_cost_dp(g, PATH_ROUND_INIT, sigma, dm)
    again = Schedule.from_json(sched.to_json())
    assert again.total_cost == sched.total_cost
    assert again.move_triples() == sched.move_triples()
    validate_lazy_schedule(dm, PATH_ROUND_INIT, sigma, again)


def test_all_schedules_contains_dp_schedule_and_is_minimal():
    rng = SplitMix64(405)
    for _ in range(25):
        g, _ = random_partial_ktree(rng, 5 + rng.randrange(5), 2)
        dm = all_pairs_shortest_paths(g)
        init = random_distinct_vertices(rng, 2, g.n)
        sigma = random_requests(rng, 1 + rng.randrange(8), g.n)
        cost, sched = opt_cost_dp(g, init, sigma, dm)
        everything = opt_all_schedules(g, init, sigma, dm)
        assert all(s.total_cost == cost for s in everything)
        assert sched.move_triples() in {s.move_triples() for s in everything}
        # enumerated schedules are pairwise distinct
        triples = [s.move_triples() for s in everything]
        assert len(triples) == len(set(triples))
