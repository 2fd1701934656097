#!/usr/bin/env python3
"""Serving a sequence at exactly the offline optimum from tape advice.

The oracle replays the optimal schedule and, between consecutive serves of
a server, parks it on a relay vertex that lies both on the shortest path
and in the least-common-ancestor bag of a height-restricted tree
decomposition.  Each relay is addressed by (bag depth, index inside the
bag), so a request costs 2(ceil(log(h+1)) + ceil(log(w+1))) bits and the
replayed cost telescopes to the optimum exactly.
"""
import math

from kslab.gpc import address_widths, generate_advice, gpc_bit_budget, run_online
from kslab.instances import SplitMix64, random_distinct_vertices, random_partial_ktree, random_requests
from kslab.metric_core import all_pairs_shortest_paths
from kslab.offline_solver import opt_cost_dp
from kslab.tree_decomp import reduce_height, verify_decomposition

rng = SplitMix64(2718)
g, td = random_partial_ktree(rng, 22, 3, max_weight=4)
dm = all_pairs_shortest_paths(g)
print(f"instance: N={g.n}, m={g.m}, construction width {td.width}, "
      f"height {td.height}")

red = reduce_height(td, g.n)
print(
    f"height-restricted: width {red.width} <= 3*{td.width}+2, height "
    f"{red.height} <= 4*ceil(log2 {g.n}) = {4 * math.ceil(math.log2(g.n))},"
    f" verifies: {bool(verify_decomposition(g, red))}"
)

init = random_distinct_vertices(rng, 3, g.n)
sigma = random_requests(rng, 24, g.n)
opt_cost, opt_sched = opt_cost_dp(g, init, sigma, dm)
print(f"\nservers start at {init}; {len(sigma)} requests; opt cost {opt_cost}")

tape = generate_advice(g, dm, red, init, sigma, opt_sched)
hexstr, nbits = tape.to_hex()
w_h, w_b = address_widths(red)
print(f"tape: {nbits} bits ({hexstr}), record = {w_h}+{w_b} bits")

tape.rewind()
run = run_online(g, dm, red, init, sigma, tape)
print(f"online replay: cost {run.online_cost} (opt {opt_cost}), "
      f"bits read {run.bits_read} = budget {gpc_bit_budget(red, 3, len(sigma))}")

print("\nfirst few moves (request <- parked relay -> next relay):")
for m in run.log[:6]:
    print(f"  t={m.t}: server {m.server} from {m.retrieved_from} "
          f"serves {m.request}, parks at {m.parked_at} (cost {m.cost})")
assert run.online_cost == opt_cost
print("\ncost equality holds move by move: parking on a shortest-path "
      "relay never loses a step.")
