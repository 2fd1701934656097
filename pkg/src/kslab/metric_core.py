"""Weighted graphs, exact shortest-path metrics, and path reconstruction.

Distances are kept exact: integer weights give integer distances, Fraction
weights give Fraction distances.  Floats are rejected so that cost-equality
checks elsewhere never need tolerances.
"""
from __future__ import annotations

from fractions import Fraction
import json

Weight = int | Fraction


class GraphError(ValueError):
    """Base class for graph construction and parsing errors."""


class SelfLoop(GraphError):
    pass


class NonPositiveWeight(GraphError):
    """Edge weight below the unit minimum (weights must be >= 1)."""


class DisconnectedGraph(GraphError):
    pass


class GraphFormatError(GraphError):
    """Parse error carrying the offending line (text) or index (JSON)."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def _check_weight(w) -> Weight:
    if isinstance(w, bool) or not isinstance(w, (int, Fraction)):
        raise GraphError(f"weight {w!r} must be an int or Fraction")
    if w < 1:
        raise NonPositiveWeight(f"weight {w} is below 1")
    if isinstance(w, Fraction) and w.denominator == 1:
        return int(w)
    return w


class Graph:
    """Connected undirected graph on vertices 0..n-1 with weights >= 1.

    Immutable after construction; each undirected edge is stored once with
    u < v.
    """

    def __init__(self, n: int, edges):
        if not isinstance(n, int) or n < 1:
            raise GraphError(f"vertex count must be a positive int, got {n!r}")
        seen: dict[tuple[int, int], Weight] = {}
        for u, v, w in edges:
            if not (isinstance(u, int) and isinstance(v, int)):
                raise GraphError(f"edge endpoints must be ints: ({u!r}, {v!r})")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range [0, {n})")
            if u == v:
                raise SelfLoop(f"self-loop at vertex {u}")
            w = _check_weight(w)
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen[key] = w
        self.n = n
        self.edges: tuple[tuple[int, int, Weight], ...] = tuple(
            (u, v, seen[(u, v)]) for (u, v) in sorted(seen)
        )
        adj: list[list[tuple[int, Weight]]] = [[] for _ in range(n)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        self.adj: tuple[tuple[tuple[int, Weight], ...], ...] = tuple(
            tuple(sorted(a)) for a in adj
        )
        self._require_connected()

    def _require_connected(self) -> None:
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for v, _ in self.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        if count != self.n:
            missing = seen.index(False)
            raise DisconnectedGraph(
                f"vertex {missing} not reachable from vertex 0"
            )

    def weight(self, u: int, v: int) -> Weight:
        for x, w in self.adj[u]:
            if x == v:
                return w
        raise KeyError(f"no edge ({u}, {v})")

    def has_edge(self, u: int, v: int) -> bool:
        return any(x == v for x, _ in self.adj[u])

    @property
    def m(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def build_graph(edge_list, n: int) -> Graph:
    """Validate an edge list into a Graph; rejects disconnected input."""
    return Graph(n, edge_list)


class DistanceMatrix:
    """Exact all-pairs distances with next-hop path reconstruction.

    Tie-breaking: among equal-length shortest paths the lexicographically
    smallest vertex sequence is reconstructed, which makes every downstream
    run reproducible.
    """

    def __init__(self, dist, next_hop):
        self.dist = dist
        self.next_hop = next_hop

    def distance(self, u: int, v: int) -> Weight:
        return self.dist[u][v]


def all_pairs_shortest_paths(g: Graph) -> DistanceMatrix:
    n = g.n
    INF = None  # exact arithmetic: use None as +infinity
    dist: list[list[Weight | None]] = [[INF] * n for _ in range(n)]
    for u in range(n):
        dist[u][u] = 0
    for u, v, w in g.edges:
        dist[u][v] = w
        dist[v][u] = w
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik is None:
                continue
            di = dist[i]
            for j in range(n):
                dkj = dk[j]
                if dkj is None:
                    continue
                alt = dik + dkj
                if di[j] is None or alt < di[j]:
                    di[j] = alt
    # Connectivity is a Graph invariant, so no None survives.
    next_hop: list[list[int]] = [[0] * n for _ in range(n)]
    for u in range(n):
        next_hop[u][u] = u
        for v in range(n):
            if v == u:
                continue
            # smallest neighbor lying on some shortest u-v path
            best = None
            for x, w in g.adj[u]:
                if w + dist[x][v] == dist[u][v]:
                    best = x
                    break  # adj is sorted by vertex id
            assert best is not None
            next_hop[u][v] = best
    return DistanceMatrix(dist, next_hop)


def shortest_path_vertices(dm: DistanceMatrix, x: int, y: int) -> list[int]:
    """The lexicographically smallest shortest path from x to y, inclusive."""
    path = [x]
    u = x
    while u != y:
        u = dm.next_hop[u][y]
        path.append(u)
    return path


# ---------------------------------------------------------------------------
# External formats.
#
# Text:  first line "N M", then M lines "u v w".
# JSON:  {"n": N, "edges": [[u, v, w], ...]} with w an int or a "p/q" string.


def _parse_weight_token(tok: str, location: str) -> Weight:
    try:
        f = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise GraphFormatError(location, f"bad weight {tok!r}")
    return int(f) if f.denominator == 1 else f


def graph_from_text(text: str) -> Graph:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise GraphFormatError("line 1", "missing 'N M' header")
    head = lines[0].split()
    if len(head) != 2:
        raise GraphFormatError("line 1", "header must be 'N M'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphFormatError("line 1", "header must hold two integers")
    edges = []
    lineno = 1
    for raw in lines[1:]:
        lineno += 1
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise GraphFormatError(f"line {lineno}", "expected 'u v w'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}", "u and v must be integers")
        w = _parse_weight_token(parts[2], f"line {lineno}")
        edges.append((u, v, w))
    if len(edges) != m:
        raise GraphFormatError(
            f"line {lineno}", f"header promised {m} edges, found {len(edges)}"
        )
    try:
        return Graph(n, edges)
    except GraphFormatError:
        raise
    except GraphError as exc:
        raise GraphFormatError(f"line {lineno}", str(exc)) from exc


def graph_to_text(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v} {w}" for u, v, w in g.edges)
    return "\n".join(out) + "\n"


def _weight_to_json(w: Weight):
    return w if isinstance(w, int) else f"{w.numerator}/{w.denominator}"


def graph_from_json(text: str) -> Graph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"line {exc.lineno}", exc.msg) from exc
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise GraphFormatError("top level", "expected {'n': ..., 'edges': [...]}")
    edges = []
    for i, e in enumerate(obj["edges"]):
        if not isinstance(e, list) or len(e) != 3:
            raise GraphFormatError(f"edges[{i}]", "expected [u, v, w]")
        u, v, raw_w = e
        if isinstance(raw_w, str):
            w = _parse_weight_token(raw_w, f"edges[{i}]")
        elif isinstance(raw_w, int):
            w = raw_w
        else:
            raise GraphFormatError(f"edges[{i}]", f"bad weight {raw_w!r}")
        edges.append((u, v, w))
    try:
        return Graph(obj["n"], edges)
    except GraphError as exc:
        raise GraphFormatError("edges", str(exc)) from exc


def graph_to_json(g: Graph) -> str:
    return json.dumps(
        {"n": g.n, "edges": [[u, v, _weight_to_json(w)] for u, v, w in g.edges]},
        sort_keys=True,
    )
