"""PathCover over a system of collective tree spanners.

Every leg x -> y of an optimal server trajectory is rerouted through a
spanning tree certified to preserve d_G(x, y), so each leg costs at most
q * d_G + r <= (q + r) * d_G once edge weights are at least 1, and the
whole run costs at most (q + r) times the offline optimum.

Addressing uses heavy-path decomposition: any root-to-vertex path crosses
at most ceil(log2 N) heavy paths, so naming the heavy path of a leg's
tree LCA takes ceil(log2 ceil(log2 N)) bits, and that ordinal is the same
along the root paths of both leg endpoints.  Between serves a server is
bound to (tree label, heavy-path head); the vertex the binding stands for
is the exit of the upcoming request's root path from that heavy path,
which lies on the leg's tree path, so no relay detour ever costs extra.

Two servers can end up bound to the same (tree, heavy path); a label
alone cannot split them, and guessing wrecks the cost guarantee (on a
path-shaped tree there is only one heavy path, so with two servers every
retrieval would be a coin flip).  Retrieval records therefore append a
disambiguation suffix of ceil(log2 c) bits exactly when c > 1 bound
candidates collide.  Oracle and decoder both know c (the decode is
deterministic), so record widths never drift, and the oracle prefers
certified trees that avoid collisions, keeping suffixes rare.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from fractions import Fraction

from .advice_tape import AdviceTape
from .gpc import ceil_log2, server_trajectories
from .metric_core import DistanceMatrix, Graph, Weight
from .offline_solver import Schedule


class NoLabeledServerOnRootPath(RuntimeError):
    """No server with the decoded label sits on the decoded heavy path."""


@dataclass(frozen=True)
class SpanningTree:
    """Rooted spanning tree; edge_weight[v] is the weight of (v, parent[v])."""

    root: int
    parent: tuple[int | None, ...]
    edge_weight: tuple[Weight | None, ...]

    @property
    def n(self) -> int:
        return len(self.parent)


def spanning_tree_from_parent(g: Graph, root: int, parent) -> SpanningTree:
    """Validate a parent array into a SpanningTree over g's edges."""
    parent = tuple(parent)
    if len(parent) != g.n:
        raise ValueError(f"parent array must have length {g.n}")
    if not (0 <= root < g.n):
        raise ValueError(f"root {root} out of range")
    if parent[root] is not None:
        raise ValueError("root must have parent None")
    weights: list[Weight | None] = [None] * g.n
    for v, p in enumerate(parent):
        if v == root:
            continue
        if p is None or not (0 <= p < g.n):
            raise ValueError(f"vertex {v} has invalid parent {p!r}")
        if not g.has_edge(v, p):
            raise ValueError(f"tree edge ({v}, {p}) is not a graph edge")
        weights[v] = g.weight(v, p)
    # reachability check doubles as an acyclicity check
    for v in range(g.n):
        u = v
        hops = 0
        while parent[u] is not None:
            u = parent[u]
            hops += 1
            if hops > g.n:
                raise ValueError("parent links contain a cycle")
        if u != root:
            raise ValueError(f"vertex {v} does not reach the root")
    return SpanningTree(root=root, parent=parent, edge_weight=tuple(weights))


def shortest_path_tree(g: Graph, root: int) -> SpanningTree:
    """Deterministic shortest-path spanning tree (lowest-id parent on ties).

    On unit-weight graphs this is a plain breadth-first tree.
    """
    dist: list[Weight | None] = [None] * g.n
    dist[root] = 0
    heap: list[tuple] = [(0, root)]
    done = [False] * g.n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in g.adj[u]:
            nd = d + w
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    parent: list[int | None] = [None] * g.n
    for v in range(g.n):
        if v == root:
            continue
        parent[v] = min(
            u for u, w in g.adj[v] if dist[u] + w == dist[v]
        )
    return spanning_tree_from_parent(g, root, parent)


class HeavyPathIndex:
    """Heavy-path decomposition of one rooted tree.

    head[v] is the top vertex of v's heavy path; any root-to-v path crosses
    at most ceil(log2 N) heavy paths.
    """

    def __init__(self, tree: SpanningTree):
        self.tree = tree
        n = tree.n
        parent = tree.parent
        children: list[list[int]] = [[] for _ in range(n)]
        for v, p in enumerate(parent):
            if p is not None:
                children[p].append(v)
        order = [tree.root]
        for u in order:
            order.extend(children[u])  # appends while iterating: BFS order
        size = [1] * n
        for u in reversed(order):
            p = parent[u]
            if p is not None:
                size[p] += size[u]
        heavy: list[int | None] = [None] * n
        for u in range(n):
            if children[u]:
                heavy[u] = min(
                    children[u], key=lambda c: (-size[c], c)
                )
        head = [0] * n
        for u in order:
            p = parent[u]
            if p is None or heavy[p] != u:
                head[u] = u
            else:
                head[u] = head[p]
        depth = [0] * n
        depw: list[Weight] = [0] * n
        for u in order:
            p = parent[u]
            if p is not None:
                depth[u] = depth[p] + 1
                depw[u] = depw[p] + tree.edge_weight[u]
        self.parent = parent
        self.head = head
        self.depth = depth
        self.weighted_depth = depw

    def lca(self, u: int, v: int) -> int:
        head, parent, depth = self.head, self.parent, self.depth
        while head[u] != head[v]:
            if depth[head[u]] >= depth[head[v]]:
                u = parent[head[u]]
            else:
                v = parent[head[v]]
        return u if depth[u] <= depth[v] else v

    def dist(self, u: int, v: int) -> Weight:
        a = self.lca(u, v)
        return (
            self.weighted_depth[u]
            + self.weighted_depth[v]
            - 2 * self.weighted_depth[a]
        )

    def segments_on_root_path(self, v: int) -> list[tuple[int, int]]:
        """(head, exit) per heavy path crossed by root -> v, root first.

        The exit is the deepest path vertex inside that heavy path.
        """
        segs = []
        u = v
        while True:
            segs.append((self.head[u], u))
            p = self.parent[self.head[u]]
            if p is None:
                break
            u = p
        segs.reverse()
        return segs

    def seg_ordinal(self, v: int) -> int:
        """Index of v's heavy path along any root path through v."""
        count = 0
        u = v
        while self.parent[self.head[u]] is not None:
            u = self.parent[self.head[u]]
            count += 1
        return count


def build_heavy_paths(tree: SpanningTree) -> HeavyPathIndex:
    return HeavyPathIndex(tree)


# ---------------------------------------------------------------------------
# Spanner systems and stretch verification.


@dataclass
class SpannerSystem:
    trees: tuple[SpanningTree, ...]
    q: Weight | None = None
    r: Weight | None = None

    @property
    def mu(self) -> int:
        return len(self.trees)

    def to_json(self) -> dict:
        def num(x):
            if x is None:
                return None
            return x if isinstance(x, int) else f"{x.numerator}/{x.denominator}"

        return {
            "mu": self.mu,
            "q": num(self.q),
            "r": num(self.r),
            "trees": [
                {"root": t.root, "parent": list(t.parent)} for t in self.trees
            ],
        }


@dataclass
class StretchCheck:
    ok: bool
    witness: tuple[int, int] | None = None
    excess: Weight | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _tree_distance_fn(system: SpannerSystem):
    hps = [HeavyPathIndex(t) for t in system.trees]

    def best(x: int, y: int) -> tuple[Weight, int]:
        return min((hp.dist(x, y), i) for i, hp in enumerate(hps))

    return hps, best


def verify_stretch(
    g: Graph, dm: DistanceMatrix, system: SpannerSystem, q, r
) -> StretchCheck:
    """Exact check of best-tree distance <= q*d_G + r over all pairs."""
    _, best = _tree_distance_fn(system)
    worst = None
    for x in range(g.n):
        for y in range(x + 1, g.n):
            d_tree, _ = best(x, y)
            excess = d_tree - (q * dm.dist[x][y] + r)
            if excess > 0 and (worst is None or excess > worst[0]):
                worst = (excess, (x, y))
    if worst is None:
        return StretchCheck(True, message=f"({q}, {r})-stretch holds")
    return StretchCheck(
        False,
        witness=worst[1],
        excess=worst[0],
        message=(
            f"pair {worst[1]} exceeds q*d+r by {worst[0]}"
        ),
    )


def measure_min_stretch(
    g: Graph, dm: DistanceMatrix, system: SpannerSystem
) -> tuple[Fraction, tuple[int, int] | None]:
    """Smallest q with (q, 0)-stretch, as an exact ratio, with its witness."""
    _, best = _tree_distance_fn(system)
    worst = (Fraction(1), None)
    for x in range(g.n):
        for y in range(x + 1, g.n):
            ratio = Fraction(best(x, y)[0], dm.dist[x][y])
            if ratio > worst[0]:
                worst = (ratio, (x, y))
    return worst


def certify_system(
    g: Graph, dm: DistanceMatrix, trees, q, r
) -> SpannerSystem:
    """Bundle trees with a verified (q, r) certificate or raise."""
    system = SpannerSystem(trees=tuple(trees))
    check = verify_stretch(g, dm, system, q, r)
    if not check:
        raise ValueError(f"stretch certificate rejected: {check.message}")
    system.q = q
    system.r = r
    return system


def system_from_json(g: Graph, text: str) -> SpannerSystem:
    """Load and certify a spanner system; rejects bad trees or stretch."""
    obj = json.loads(text) if isinstance(text, str) else text
    trees = [
        spanning_tree_from_parent(
            g, t["root"], [p for p in t["parent"]]
        )
        for t in obj["trees"]
    ]
    if obj.get("mu") is not None and obj["mu"] != len(trees):
        raise ValueError(f"mu={obj['mu']} but {len(trees)} trees given")

    def num(x):
        if x is None or isinstance(x, int):
            return x
        f = Fraction(x)
        return int(f) if f.denominator == 1 else f

    q, r = num(obj.get("q")), num(obj.get("r"))
    dm_local = None
    if q is not None and r is not None:
        from .metric_core import all_pairs_shortest_paths

        dm_local = all_pairs_shortest_paths(g)
        return certify_system(g, dm_local, trees, q, r)
    return SpannerSystem(trees=tuple(trees))


# ---------------------------------------------------------------------------
# Advice generation and the labeled-server online run.


def spanner_widths(mu: int, n_vertices: int) -> tuple[int, int]:
    """(tree-label bits, segment-ordinal bits)."""
    seg_bound = max(1, ceil_log2(n_vertices))
    return ceil_log2(mu), ceil_log2(seg_bound)


def spanner_bit_budget(mu: int, n_vertices: int, k: int, n: int) -> int:
    w_mu, w_seg = spanner_widths(mu, n_vertices)
    return n * (2 * w_mu + 2 * w_seg) + k * (w_mu + w_seg)


def _suffix_width(c: int) -> int:
    return ceil_log2(c) if c > 1 else 0


def _ordinal_width(hp: HeavyPathIndex, ref: int) -> int:
    """Bits for a segment ordinal on ref's root path.

    The path crosses seg_ordinal(ref)+1 heavy paths, a number both encoder
    and decoder know, so the width never exceeds ceil(log2 ceil(log2 N))
    and is usually smaller.
    """
    return ceil_log2(hp.seg_ordinal(ref) + 1)


def _pick_leg_tree(
    hps, system: SpannerSystem, dm, bindings, sid: int, x: int, y: int
) -> tuple[int, int]:
    """(tree, anchor head) for leg x -> y, dodging binding collisions.

    Any tree within the certified stretch for this pair keeps the
    competitive bound; among those, prefer one whose (tree, head) binding
    is not already live on another server, then the lowest index.
    """
    budget = system.q * dm.dist[x][y] + system.r
    admissible = []
    for p, hp in enumerate(hps):
        if hp.dist(x, y) <= budget:
            admissible.append((p, hp.head[hp.lca(x, y)]))
    assert admissible, "certified system must cover every pair"
    taken = {b for i, b in enumerate(bindings) if i != sid}
    for p, head in admissible:
        if (p, head) not in taken:
            return p, head
    return admissible[0]


def generate_advice_spanner(
    g: Graph,
    dm: DistanceMatrix,
    system: SpannerSystem,
    init,
    sigma,
    opt: Schedule,
) -> AdviceTape:
    """Encode, per trajectory leg, a certified tree and the LCA's heavy path.

    Each request record holds the retrieval pair for the leg ending here
    (plus a disambiguation suffix when several servers share the binding)
    and the parking pair for the leg leaving here; k initial records bind
    each server to the tree of its first leg.  Unused servers and final
    legs bind to the server's own heavy path, which costs nothing.

    The decode is deterministic, so the oracle mirrors it move for move to
    know each retrieval's candidate count.
    """
    if system.q is None or system.r is None:
        raise ValueError("spanner system must carry a certified (q, r)")
    hps, _ = _tree_distance_fn(system)
    w_mu, _ = spanner_widths(system.mu, g.n)
    tape = AdviceTape()
    trajectories = server_trajectories(init, sigma, opt)
    bindings: list[tuple[int, int]] = [(-1, -1)] * len(init)
    for i, x0 in enumerate(init):
        if len(trajectories[i]) > 1:
            p, head = _pick_leg_tree(
                hps, system, dm, bindings, i, x0, trajectories[i][1]
            )
            v = hps[p].lca(x0, trajectories[i][1])
        else:
            p, head, v = 0, hps[0].head[x0], x0
        bindings[i] = (p, head)
        tape.write_uint(p, w_mu)
        tape.write_uint(hps[p].seg_ordinal(v), _ordinal_width(hps[p], x0))
    serving = {m.t: m.server for m in opt.moves}
    progress = [0] * len(init)
    for t, y in enumerate(sigma):
        sid = serving[t]
        traj = trajectories[sid]
        x = traj[progress[sid]]
        p, head = bindings[sid]
        tape.write_uint(p, w_mu)
        tape.write_uint(
            hps[p].seg_ordinal(hps[p].lca(x, y)), _ordinal_width(hps[p], y)
        )
        holders = sorted(i for i, b in enumerate(bindings) if b == (p, head))
        if len(holders) > 1:
            tape.write_uint(holders.index(sid), _suffix_width(len(holders)))
        progress[sid] += 1
        assert traj[progress[sid]] == y
        if progress[sid] + 1 < len(traj):
            q_idx, head2 = _pick_leg_tree(
                hps, system, dm, bindings, sid, y, traj[progress[sid] + 1]
            )
            v2 = hps[q_idx].lca(y, traj[progress[sid] + 1])
        else:
            q_idx, head2, v2 = p, hps[p].head[y], y
        tape.write_uint(q_idx, w_mu)
        tape.write_uint(hps[q_idx].seg_ordinal(v2), _ordinal_width(hps[q_idx], y))
        bindings[sid] = (q_idx, head2)
    return tape


@dataclass
class SpannerMove:
    t: int
    request: int
    server: int
    tree: int
    src: int
    relay: int
    cost: Weight
    candidates: int


@dataclass
class SpannerRun:
    cost: Weight
    bits_read: int
    log: list[SpannerMove]
    labels: list[int]
    mu: int
    n_vertices: int
    k: int
    n: int
    ambiguous_retrievals: int = 0
    suffix_bits: int = 0

    @property
    def bit_budget(self) -> int:
        return spanner_bit_budget(self.mu, self.n_vertices, self.k, self.n)

    def to_json(self) -> dict:
        return {
            "cost": str(self.cost),
            "bits_read": self.bits_read,
            "bit_budget": self.bit_budget,
            "suffix_bits": self.suffix_bits,
            "labels": list(self.labels),
            "moves": [
                {
                    "t": m.t,
                    "request": m.request,
                    "server": m.server,
                    "tree": m.tree,
                    "from": m.src,
                    "relay": m.relay,
                    "cost": str(m.cost),
                }
                for m in self.log
            ],
        }


def run_online_spanner(
    g: Graph,
    system: SpannerSystem,
    hp: list[HeavyPathIndex],
    init,
    sigma,
    tape: AdviceTape,
) -> SpannerRun:
    """Serve sigma with labeled servers moving along the advised trees.

    A server is retrieved only through the tree its label names.  The
    decoded heavy path selects the servers bound to it; when several are
    bound, a suffix names the intended one.  The binding's relay vertex is
    the exit of the request's root path from that heavy path; it lies on
    the leg's tree path, so the move costs exactly the tree distance.
    """
    w_mu, _ = spanner_widths(system.mu, g.n)
    k = len(init)
    positions = list(init)
    bindings: list[tuple[int, int]] = [(-1, -1)] * k
    ambiguous = 0
    suffix_bits = 0
    for i in range(k):
        p = tape.read_uint(w_mu)
        s = tape.read_uint(_ordinal_width(hp[p], positions[i]))
        segs = hp[p].segments_on_root_path(positions[i])
        if s >= len(segs):
            raise NoLabeledServerOnRootPath(
                f"initial record {i}: segment {s} beyond {len(segs)}"
            )
        bindings[i] = (p, segs[s][0])
    cost = 0
    log: list[SpannerMove] = []
    for t, y in enumerate(sigma):
        p = tape.read_uint(w_mu)
        s = tape.read_uint(_ordinal_width(hp[p], y))
        segs = hp[p].segments_on_root_path(y)
        if s >= len(segs):
            raise NoLabeledServerOnRootPath(
                f"request {t}: segment {s} beyond root path of {y}"
            )
        head, relay = segs[s]
        candidates = [i for i in range(k) if bindings[i] == (p, head)]
        if not candidates:
            raise NoLabeledServerOnRootPath(
                f"request {t}: no label-{p} server on heavy path {head}"
            )
        if len(candidates) > 1:
            ambiguous += 1
            width = _suffix_width(len(candidates))
            suffix_bits += width
            sid = candidates[tape.read_uint(width)]
        else:
            sid = candidates[0]
        src = positions[sid]
        move_cost = hp[p].dist(src, y)
        # the relay sits on the tree path, so routing through it is free
        assert hp[p].dist(src, relay) + hp[p].dist(relay, y) == move_cost
        cost += move_cost
        positions[sid] = y
        q_idx = tape.read_uint(w_mu)
        s2 = tape.read_uint(_ordinal_width(hp[q_idx], y))
        segs2 = hp[q_idx].segments_on_root_path(y)
        if s2 >= len(segs2):
            raise NoLabeledServerOnRootPath(
                f"request {t}: parking segment {s2} beyond root path of {y}"
            )
        bindings[sid] = (q_idx, segs2[s2][0])
        log.append(
            SpannerMove(
                t=t,
                request=y,
                server=sid,
                tree=p,
                src=src,
                relay=relay,
                cost=move_cost,
                candidates=len(candidates),
            )
        )
    return SpannerRun(
        cost=cost,
        bits_read=tape.bits_read,
        log=log,
        labels=[b[0] for b in bindings],
        mu=system.mu,
        n_vertices=g.n,
        k=k,
        n=len(sigma),
        ambiguous_retrievals=ambiguous,
        suffix_bits=suffix_bits,
    )
