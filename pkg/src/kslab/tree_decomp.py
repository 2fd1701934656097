"""Tree decompositions: axiom verification, exact treewidth for tiny
graphs, logarithmic height restriction, ancestor/LCA addressing, and the
explicit decompositions of the unit/module graph families.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .metric_core import DistanceMatrix, Graph, shortest_path_vertices
from . import adversary


class InstanceTooLarge(ValueError):
    pass


class NoIntersection(RuntimeError):
    """A bag on the tree path missed the shortest path: decomposition bug."""


class TreeDecomposition:
    """Rooted bag tree.

    bags[i] is a sorted vertex tuple; parent[i] is a bag index or None for
    the root.  Bag ordering for in-bag indices is ascending vertex id, and
    the representative bag of a vertex is the lowest-index bag containing
    it.
    """

    def __init__(self, bags, parent, root: int):
        self.bags: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(set(b))) for b in bags
        )
        self.parent: tuple[int | None, ...] = tuple(parent)
        self.root = root
        b = len(self.bags)
        if len(self.parent) != b or not (0 <= root < b):
            raise ValueError("parent array and root must match the bag list")
        if self.parent[root] is not None:
            raise ValueError("root must have parent None")
        children: list[list[int]] = [[] for _ in range(b)]
        for i, p in enumerate(self.parent):
            if i == root:
                continue
            if p is None or not (0 <= p < b):
                raise ValueError(f"bag {i} has invalid parent {p!r}")
            children[p].append(i)
        self.children: tuple[tuple[int, ...], ...] = tuple(
            tuple(c) for c in children
        )
        depth = [-1] * b
        depth[root] = 0
        order = [root]
        stack = [root]
        while stack:
            u = stack.pop()
            for v in self.children[u]:
                depth[v] = depth[u] + 1
                order.append(v)
                stack.append(v)
        if any(d < 0 for d in depth):
            raise ValueError("parent links do not form a single rooted tree")
        self.depth: tuple[int, ...] = tuple(depth)
        self._dfs_order = tuple(order)
        self._pos = [
            {v: i for i, v in enumerate(bag)} for bag in self.bags
        ]
        rep: dict[int, int] = {}
        for i, bag in enumerate(self.bags):
            for v in bag:
                rep.setdefault(v, i)
        self.representative_bag: dict[int, int] = rep
        self._lift: list[list[int]] | None = None

    @property
    def num_bags(self) -> int:
        return len(self.bags)

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    @property
    def height(self) -> int:
        return max(self.depth)

    def vertices(self) -> set[int]:
        return set(self.representative_bag)

    def in_bag_index(self, bag_idx: int, v: int) -> int:
        return self._pos[bag_idx][v]

    def vertex_at(self, bag_idx: int, pos: int) -> int:
        return self.bags[bag_idx][pos]

    # -- ancestor machinery (binary lifting) --------------------------------

    def _ensure_lift(self) -> None:
        if self._lift is not None:
            return
        b = self.num_bags
        levels = max(1, max(self.depth).bit_length())
        up = [[0] * b for _ in range(levels)]
        for i in range(b):
            p = self.parent[i]
            up[0][i] = i if p is None else p
        for k in range(1, levels):
            prev = up[k - 1]
            up[k] = [prev[prev[i]] for i in range(b)]
        self._lift = up

    def _lift_by(self, i: int, steps: int) -> int:
        self._ensure_lift()
        k = 0
        while steps:
            if steps & 1:
                i = self._lift[k][i]
            steps >>= 1
            k += 1
        return i

    def ancestor_at_depth(self, bag_idx: int, d: int) -> int:
        """The unique ancestor of bag_idx at depth d (d <= its depth)."""
        if not (0 <= d <= self.depth[bag_idx]):
            raise ValueError(
                f"depth {d} not on the root path of bag {bag_idx}"
            )
        return self._lift_by(bag_idx, self.depth[bag_idx] - d)

    def lca_bag(self, i: int, j: int) -> int:
        """Deepest common ancestor of two bags."""
        self._ensure_lift()
        di, dj = self.depth[i], self.depth[j]
        if di > dj:
            i, j = j, i
            di, dj = dj, di
        j = self._lift_by(j, dj - di)
        if i == j:
            return i
        for k in range(len(self._lift) - 1, -1, -1):
            if self._lift[k][i] != self._lift[k][j]:
                i = self._lift[k][i]
                j = self._lift[k][j]
        return self.parent[i]

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "bags": [list(b) for b in self.bags],
            "parent": [p for p in self.parent],
        }

    @classmethod
    def from_json(cls, obj) -> "TreeDecomposition":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["bags"], obj["parent"], obj["root"])

    def __repr__(self) -> str:
        return (
            f"TreeDecomposition(bags={self.num_bags}, width={self.width}, "
            f"height={self.height})"
        )


@dataclass
class DecompositionCheck:
    ok: bool
    axiom: int | None = None
    witness: object = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_decomposition(g: Graph, td: TreeDecomposition) -> DecompositionCheck:
    """Check the three axioms; reports the first violation with a witness."""
    covered: set[int] = set()
    for bag in td.bags:
        for v in bag:
            if not (0 <= v < g.n):
                return DecompositionCheck(
                    False, 1, v, f"bag vertex {v} outside the graph"
                )
        covered.update(bag)
    for v in range(g.n):
        if v not in covered:
            return DecompositionCheck(
                False, 1, v, f"vertex {v} not covered by any bag"
            )
    bag_sets = [set(b) for b in td.bags]
    for u, v, _ in g.edges:
        if not any(u in b and v in b for b in bag_sets):
            return DecompositionCheck(
                False, 2, (u, v), f"edge ({u}, {v}) inside no bag"
            )
    # Connectivity: the bags holding each vertex must form a subtree.
    holding: dict[int, list[int]] = {}
    for i, b in enumerate(td.bags):
        for v in b:
            holding.setdefault(v, []).append(i)
    adj: list[list[int]] = [[] for _ in range(td.num_bags)]
    for i, p in enumerate(td.parent):
        if p is not None:
            adj[i].append(p)
            adj[p].append(i)
    for v, nodes in holding.items():
        node_set = set(nodes)
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w in node_set and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(node_set):
            return DecompositionCheck(
                False,
                3,
                v,
                f"bags containing vertex {v} are not connected in the tree",
            )
    return DecompositionCheck(True, message="all three axioms hold")


# ---------------------------------------------------------------------------
# Exact treewidth by dynamic programming over eliminated vertex sets.


def _boundary_size(adj_masks, elim: int, v: int) -> int:
    """Neighbors of v outside elim, reachable through eliminated vertices."""
    comp = 1 << v
    frontier = comp
    boundary = 0
    while frontier:
        reach = 0
        f = frontier
        while f:
            u = (f & -f).bit_length() - 1
            f &= f - 1
            reach |= adj_masks[u]
        reach &= ~comp
        boundary |= reach & ~elim
        frontier = reach & elim
        comp |= reach
    return bin(boundary).count("1")


def exact_treewidth(g: Graph) -> tuple[int, TreeDecomposition]:
    """Minimum width over all elimination orderings, with a witness.

    Memoized over eliminated subsets, so only graphs with N <= 20 are
    admitted.  The returned decomposition always verifies.
    """
    n = g.n
    if n > 20:
        raise InstanceTooLarge(f"exact treewidth guarded to N <= 20, got {n}")
    adj_masks = [0] * n
    for u, v, _ in g.edges:
        adj_masks[u] |= 1 << v
        adj_masks[v] |= 1 << u
    full = (1 << n) - 1
    memo: dict[int, int] = {0: -1}
    choice: dict[int, int] = {}

    def best(mask: int) -> int:
        got = memo.get(mask)
        if got is not None:
            return got
        result = n  # upper sentinel
        pick = -1
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            rest = mask & ~(1 << v)
            cand = max(best(rest), _boundary_size(adj_masks, rest, v))
            if cand < result:
                result = cand
                pick = v
        memo[mask] = result
        choice[mask] = pick
        return result

    import sys

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, n * n + 1000))
    try:
        width = best(full)
    finally:
        sys.setrecursionlimit(old_limit)

    # Recover the elimination order (choice picks the last-eliminated).
    rev = []
    mask = full
    while mask:
        v = choice[mask]
        rev.append(v)
        mask &= ~(1 << v)
    order = rev[::-1]

    # Build bags from the order; parent = bag of the earliest-eliminated
    # neighbor at elimination time.
    pos = {v: i for i, v in enumerate(order)}
    work = [set() for _ in range(n)]
    for u, v, _ in g.edges:
        work[u].add(v)
        work[v].add(u)
    bags = []
    seps = []
    for v in order:
        c = sorted(work[v])
        bags.append(sorted(c + [v]))
        seps.append(c)
        for a in c:
            for b in c:
                if a != b:
                    work[a].add(b)
            work[a].discard(v)
    parent: list[int | None] = [None] * n
    for i in range(n):
        if seps[i]:
            parent[i] = min(pos[u] for u in seps[i])
        elif i < n - 1:
            parent[i] = i + 1  # cannot happen on connected graphs
    td = TreeDecomposition(bags, parent, root=n - 1)
    return width, td


# ---------------------------------------------------------------------------
# Height restriction.
#
# Recursive splitting of the bag tree.  Each recursion step roots the
# result at the union of the chosen split bag and up to two anchor bags
# (the bags facing already-processed parts), so new bags merge at most
# three old ones: width <= 3*alpha + 2.  With at most one anchor the split
# bag is a centroid; with two anchors it is chosen on the anchor-to-anchor
# path so that both anchor-side components halve.  Every two levels the
# component size halves, giving height <= 2*log2(bags) + O(1), and bags
# are first pruned to at most N+1, comfortably under the asserted
# 4*ceil(log2 N).


def _simplify(td: TreeDecomposition) -> tuple[list[set[int]], list[set[int]]]:
    """Contract bags that are subsets of a neighbor; returns (bags, adj)."""
    bags = [set(b) for b in td.bags]
    adj: list[set[int]] = [set() for b in bags]
    for i, p in enumerate(td.parent):
        if p is not None:
            adj[i].add(p)
            adj[p].add(i)
    alive = set(range(len(bags)))
    changed = True
    while changed and len(alive) > 1:
        changed = False
        for i in sorted(alive):
            for j in sorted(adj[i]):
                if bags[i] <= bags[j]:
                    for x in adj[i]:
                        if x != j:
                            adj[x].discard(i)
                            adj[x].add(j)
                            adj[j].add(x)
                    adj[j].discard(i)
                    adj[i].clear()
                    alive.discard(i)
                    changed = True
                    break
            if changed:
                break
    idx = {old: new for new, old in enumerate(sorted(alive))}
    new_bags = [bags[old] for old in sorted(alive)]
    new_adj: list[set[int]] = [set() for _ in new_bags]
    for old in sorted(alive):
        for nb in adj[old]:
            new_adj[idx[old]].add(idx[nb])
    return new_bags, new_adj


def _components(nodes: set[int], adj, removed: int) -> list[set[int]]:
    comps = []
    left = set(nodes)
    left.discard(removed)
    while left:
        start = min(left)
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v in left and v not in comp:
                    comp.add(v)
                    stack.append(v)
        comps.append(comp)
        left -= comp
    return comps


def _centroid(nodes: set[int], adj) -> int:
    best = None
    for c in sorted(nodes):
        worst = max((len(x) for x in _components(nodes, adj, c)), default=0)
        if best is None or (worst, c) < best:
            best = (worst, c)
    return best[1]


def _tree_path(nodes: set[int], adj, a: int, b: int) -> list[int]:
    prev = {a: a}
    stack = [a]
    while stack:
        u = stack.pop()
        if u == b:
            break
        for v in adj[u]:
            if v in nodes and v not in prev:
                prev[v] = u
                stack.append(v)
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]


def _path_splitter(nodes: set[int], adj, a1: int, a2: int) -> int:
    path = _tree_path(nodes, adj, a1, a2)
    best = None
    for x in path:
        comps = _components(nodes, adj, x)
        side1 = next((len(c) for c in comps if a1 in c), 0)
        side2 = next((len(c) for c in comps if a2 in c), 0)
        worst = max(side1, side2)
        if best is None or (worst, x) < best:
            best = (worst, x)
    assert best[0] <= len(nodes) // 2, "path splitter must halve anchor sides"
    return best[1]


def reduce_height(td: TreeDecomposition, n_vertices: int) -> TreeDecomposition:
    """Rebalance a decomposition to logarithmic height, width <= 3a+2."""
    bags, adj = _simplify(td)
    out_bags: list[set[int]] = []
    out_parent: list[int | None] = []

    def build(nodes: set[int], anchors: tuple[int, ...]) -> int:
        if len(nodes) <= 2:
            merged: set[int] = set()
            for i in nodes:
                merged |= bags[i]
            out_bags.append(merged)
            out_parent.append(None)
            return len(out_bags) - 1
        if len(anchors) <= 1:
            c = _centroid(nodes, adj)
        else:
            c = _path_splitter(nodes, adj, anchors[0], anchors[1])
        merged = set(bags[c])
        for a in anchors:
            merged |= bags[a]
        out_bags.append(merged)
        out_parent.append(None)
        r_idx = len(out_bags) - 1
        for comp in _components(nodes, adj, c):
            door = next(iter(adj[c] & comp))
            sub_anchors = tuple(sorted({door} | (set(anchors) & comp)))
            assert len(sub_anchors) <= 2, "anchor invariant violated"
            child = build(comp, sub_anchors)
            out_parent[child] = r_idx
        return r_idx

    root = build(set(range(len(bags))), ())
    return TreeDecomposition(out_bags, out_parent, root)


# ---------------------------------------------------------------------------
# Path/bag intersection (the addressing primitive of the online algorithm).


def intersect_shortest_path(
    g: Graph,
    dm: DistanceMatrix,
    td: TreeDecomposition,
    x: int,
    y: int,
    bag_idx: int,
) -> int:
    """First vertex of the canonical shortest x-y path inside the bag.

    For any bag on the tree path between bags holding x and y, such a
    vertex exists; NoIntersection therefore signals a broken decomposition
    and aborts the run.
    """
    bag = set(td.bags[bag_idx])
    for v in shortest_path_vertices(dm, x, y):
        if v in bag:
            return v
    raise NoIntersection(
        f"bag {bag_idx} misses every vertex of the shortest {x}-{y} path"
    )


# ---------------------------------------------------------------------------
# Explicit decompositions for the module families.


def _module_bags(ml) -> list[list[int]]:
    """2 * 2^gamma full bags: every element vertex plus one subset vertex.

    Each side contributes one bag per proper subset in (size, mask) order
    plus a duplicate of its empty-set bag, rounding the count up to a full
    power of two per side; duplicates sit next to their originals so
    subtree connectivity is preserved.
    """
    core = list(ml.side1.u_ids) + list(ml.side2.u_ids)
    bags = []
    for side in ml.sides():
        side_bags = [sorted(core + [w]) for w in side.w_ids]
        side_bags.append(side_bags[0])
        bags.extend(side_bags)
    return bags


def _module_parent(gamma: int) -> list[int | None]:
    """Chain the full bags of one module; duplicates hang off the empty-set bags."""
    s = (1 << gamma) - 1
    parent: list[int | None] = [None] * (2 * s + 2)
    for i in range(1, s):
        parent[i] = i - 1
    parent[s] = 0  # side-1 duplicate
    parent[s + 1] = s - 1  # side-2 chain joins the end of side 1
    for i in range(s + 2, 2 * s + 1):
        parent[i] = i - 1
    parent[2 * s + 1] = s + 1  # side-2 duplicate
    return parent


def module_graph_decomposition(gamma: int) -> TreeDecomposition:
    """Width-2*gamma decomposition of the module graph, 2*2^gamma bags."""
    ml = adversary.module_layout(gamma)
    return TreeDecomposition(_module_bags(ml), _module_parent(gamma), root=0)


def gb_decomposition(m: int, gamma: int) -> TreeDecomposition:
    """Width-2*gamma decomposition of the source-joined graph.

    Each module keeps its own chain of full bags; a two-vertex bag
    {source, selected vertex} fronts every module, and these source bags
    form their own chain so the source stays connected.
    """
    gb = adversary.gb_layout(m, gamma)
    per_module = 2 * ((1 << gamma) - 1) + 2
    module_parent = _module_parent(gamma)
    bags: list[list[int]] = []
    parent: list[int | None] = []
    for i, ml in enumerate(gb.modules):
        base = len(bags)  # index of this module's source bag
        bags.append(sorted((gb.source, gb.selected(i))))
        parent.append(None if i == 0 else base - (per_module + 1))
        for j, bag in enumerate(_module_bags(ml)):
            bags.append(bag)
            p = module_parent[j]
            parent.append(base if p is None else base + 1 + p)
    return TreeDecomposition(bags, parent, root=0)
