"""Partially edge-colored graphs and the structural operations on them.

Vertices are ``0..n-1``; edges carry a stable dense index.  A graph is an
immutable value: every operation returns a new graph.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import (
    BadIndex,
    ColorClash,
    FormatError,
    GluingConflict,
    LoopCreated,
    NotConnected,
    UniverseMismatch,
)

Edge = tuple[int, int]


class _Unreachable:
    """Distance between different components.  Deliberately unordered."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNREACHABLE"

    def __lt__(self, other):
        raise TypeError("UNREACHABLE has no order")

    __le__ = __gt__ = __ge__ = __lt__


UNREACHABLE = _Unreachable()


class ColoredGraph:
    __slots__ = (
        "n",
        "edges",
        "oriented",
        "colors",
        "_edge_colors",
        "vertex_color_universe",
        "_vertex_colors",
        "_index",
        "_adj",
        "_out",
        "_in",
        "_hash",
        "_sets",
    )

    def __init__(
        self,
        n: int,
        edges: Iterable[Sequence[int]] = (),
        colors: int = 1,
        edge_colors: Mapping[int, int] | None = None,
        oriented: bool = False,
        vertex_colors: Mapping[int, Iterable[int]] | None = None,
        vertex_color_universe: int = 0,
    ):
        if n < 0:
            raise ValueError("negative vertex count")
        if colors < 1:
            raise ValueError("color universe must be positive")
        self.n = n
        self.oriented = bool(oriented)
        self.colors = colors
        self.vertex_color_universe = vertex_color_universe
        self.edges: tuple[Edge, ...] = tuple((int(u), int(v)) for u, v in edges)
        index: dict[Edge, int] = {}
        adj: list[list[int]] = [[] for _ in range(n)]
        out: list[list[int]] = [[] for _ in range(n)]
        inn: list[list[int]] = [[] for _ in range(n)]
        for k, (u, v) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise BadIndex(f"edge {k} has endpoint outside 0..{n - 1}")
            if u == v:
                raise LoopCreated(f"edge {k} is a loop at {u}")
            key = (u, v) if oriented else (min(u, v), max(u, v))
            if key in index:
                raise GluingConflict(f"edge {k} duplicates edge {index[key]}")
            index[key] = k
            adj[u].append(v)
            adj[v].append(u)
            out[u].append(v)
            inn[v].append(u)
        ec = {}
        for k, c in (edge_colors or {}).items():
            k, c = int(k), int(c)
            if not 0 <= k < len(self.edges):
                raise BadIndex(f"colored edge index {k} does not exist")
            if not 1 <= c <= colors:
                raise ValueError(f"edge {k} color {c} outside 1..{colors}")
            ec[k] = c
        vc = {}
        for v, cs in (vertex_colors or {}).items():
            v = int(v)
            if not 0 <= v < n:
                raise BadIndex(f"vertex {v} does not exist")
            cs = frozenset(int(c) for c in cs)
            if cs:
                vc[v] = cs
        for lst in (*adj, *out, *inn):
            lst.sort()
        self._edge_colors = ec
        self._vertex_colors = vc
        self._index = index
        self._adj = adj
        self._out = out
        self._in = inn
        self._hash = None
        self._sets = None

    # -- basic accessors -------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def edge_colors(self) -> Mapping[int, int]:
        return MappingProxyType(self._edge_colors)

    @property
    def vertex_colors(self) -> Mapping[int, frozenset[int]]:
        return MappingProxyType(self._vertex_colors)

    def color(self, e: int) -> int | None:
        return self._edge_colors.get(e)

    def vertex_color_set(self, v: int) -> frozenset[int]:
        return self._vertex_colors.get(v, frozenset())

    def check_edge(self, e: int) -> None:
        if not (isinstance(e, int) and 0 <= e < len(self.edges)):
            raise BadIndex(f"edge index {e!r} out of range")

    def edge_index(self, u: int, v: int) -> int | None:
        """Index of the edge u-v (u->v when oriented), or None."""
        if self.oriented:
            return self._index.get((u, v))
        return self._index.get((u, v) if u < v else (v, u))

    def neighbors(self, v: int) -> list[int]:
        return self._adj[v]

    def out_neighbors(self, v: int) -> list[int]:
        return self._out[v] if self.oriented else self._adj[v]

    def in_neighbors(self, v: int) -> list[int]:
        return self._in[v] if self.oriented else self._adj[v]

    def adjacency_sets(self) -> tuple[list[frozenset[int]], list[frozenset[int]]]:
        """Out- and in-neighbor sets (equal for undirected graphs), built once."""
        if self._sets is None:
            if self.oriented:
                self._sets = ([frozenset(x) for x in self._out], [frozenset(x) for x in self._in])
            else:
                both = [frozenset(x) for x in self._adj]
                self._sets = (both, both)
        return self._sets

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def incident_edges(self, v: int) -> list[int]:
        return [k for k, (a, b) in enumerate(self.edges) if v in (a, b)]

    def uncolored_edges(self) -> list[int]:
        return [k for k in range(len(self.edges)) if k not in self._edge_colors]

    def is_total(self) -> bool:
        return len(self._edge_colors) == len(self.edges)

    def is_uncolored(self) -> bool:
        return not self._edge_colors

    # -- derived graphs --------------------------------------------------

    def _replace(self, **kw) -> "ColoredGraph":
        args = dict(
            n=self.n,
            edges=self.edges,
            colors=self.colors,
            edge_colors=self._edge_colors,
            oriented=self.oriented,
            vertex_colors=self._vertex_colors,
            vertex_color_universe=self.vertex_color_universe,
        )
        args.update(kw)
        return ColoredGraph(**args)

    def with_coloring(self, edge_colors: Mapping[int, int]) -> "ColoredGraph":
        return self._replace(edge_colors=edge_colors)

    def recolored(self, updates: Mapping[int, int | None]) -> "ColoredGraph":
        """Set (or with None, erase) the colors of some edges."""
        ec = dict(self._edge_colors)
        for e, c in updates.items():
            self.check_edge(e)
            if c is None:
                ec.pop(e, None)
            else:
                ec[e] = c
        return self._replace(edge_colors=ec)

    def uncolored(self) -> "ColoredGraph":
        return self._replace(edge_colors={})

    def with_universe(self, colors: int) -> "ColoredGraph":
        return self._replace(colors=colors)

    def without_edges(self, drop: Iterable[int]) -> "ColoredGraph":
        """Delete edges; remaining edges are re-indexed in their old order."""
        drop = set(drop)
        keep = [k for k in range(self.m) if k not in drop]
        new = {old: i for i, old in enumerate(keep)}
        return self._replace(
            edges=[self.edges[k] for k in keep],
            edge_colors={new[k]: c for k, c in self._edge_colors.items() if k in new},
        )

    def add_edges(self, edges: Iterable[Edge], colors: Mapping[int, int] | None = None) -> "ColoredGraph":
        """Append edges; ``colors`` is keyed by position among the new edges."""
        edges = list(edges)
        ec = dict(self._edge_colors)
        for k, c in (colors or {}).items():
            ec[self.m + k] = c
        return self._replace(edges=list(self.edges) + edges, edge_colors=ec)

    def relabeled(self, perm: Sequence[int]) -> "ColoredGraph":
        """Rename vertex v to perm[v]; edge order is kept."""
        return self._replace(
            edges=[(perm[u], perm[v]) for u, v in self.edges],
            vertex_colors={perm[v]: cs for v, cs in self._vertex_colors.items()},
        )

    def drop_isolated(self) -> tuple["ColoredGraph", list[int]]:
        """Remove isolated vertices.  Returns the graph and old->new map (-1 if dropped)."""
        keep = [v for v in range(self.n) if self._adj[v]]
        new = [-1] * self.n
        for i, v in enumerate(keep):
            new[v] = i
        g = self._replace(
            n=len(keep),
            edges=[(new[u], new[v]) for u, v in self.edges],
            vertex_colors={new[v]: cs for v, cs in self._vertex_colors.items() if new[v] >= 0},
        )
        return g, new

    def induced(self, vertices: Iterable[int]) -> tuple["ColoredGraph", list[int]]:
        """Induced subgraph.  Returns it with the list of original vertex ids."""
        keep = sorted(set(vertices))
        new = {v: i for i, v in enumerate(keep)}
        edges, ec = [], {}
        for k, (u, v) in enumerate(self.edges):
            if u in new and v in new:
                if k in self._edge_colors:
                    ec[len(edges)] = self._edge_colors[k]
                edges.append((new[u], new[v]))
        g = self._replace(
            n=len(keep),
            edges=edges,
            edge_colors=ec,
            vertex_colors={new[v]: cs for v, cs in self._vertex_colors.items() if v in new},
        )
        return g, keep

    # -- value semantics -------------------------------------------------

    def to_dict(self) -> dict:
        doc = {
            "vertices": self.n,
            "oriented": self.oriented,
            "colors": self.colors,
            "edges": [[u, v] for u, v in self.edges],
            "edge_colors": {str(k): c for k, c in sorted(self._edge_colors.items())},
        }
        if self.vertex_color_universe or self._vertex_colors:
            doc["vertex_color_universe"] = self.vertex_color_universe
            doc["vertex_colors"] = {
                str(v): sorted(cs) for v, cs in sorted(self._vertex_colors.items())
            }
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ColoredGraph":
        try:
            return cls(
                n=int(doc["vertices"]),
                edges=[tuple(e) for e in doc.get("edges", [])],
                colors=int(doc.get("colors", 1)),
                edge_colors={int(k): int(c) for k, c in doc.get("edge_colors", {}).items()},
                oriented=bool(doc.get("oriented", False)),
                vertex_colors={int(v): cs for v, cs in doc.get("vertex_colors", {}).items()},
                vertex_color_universe=int(doc.get("vertex_color_universe", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, BadIndex):
                raise
            raise FormatError(f"malformed graph document: {exc!r}") from exc

    def _key(self):
        return (
            self.n,
            self.edges,
            self.oriented,
            self.colors,
            tuple(sorted(self._edge_colors.items())),
            self.vertex_color_universe,
            tuple(sorted((v, tuple(sorted(cs))) for v, cs in self._vertex_colors.items())),
        )

    def __eq__(self, other):
        return isinstance(other, ColoredGraph) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        kind = "oriented " if self.oriented else ""
        return (
            f"ColoredGraph({kind}n={self.n}, m={self.m}, r={self.colors}, "
            f"colored={len(self._edge_colors)})"
        )


def dumps(g: ColoredGraph) -> str:
    return json.dumps(g.to_dict(), sort_keys=True)


def loads(text: str) -> ColoredGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return ColoredGraph.from_dict(doc)


def save(g: ColoredGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(g))
        fh.write("\n")


def load(path) -> ColoredGraph:
    with open(path) as fh:
        return loads(fh.read())


# -- small constructors ----------------------------------------------------


def complete_graph(n: int, colors: int = 1, color: int | None = None) -> ColoredGraph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    ec = {k: color for k in range(len(edges))} if color else {}
    return ColoredGraph(n, edges, colors, ec)


def cycle_graph(n: int, colors: int = 1, color: int | None = None) -> ColoredGraph:
    if n < 3:
        raise ValueError("cycles need at least 3 vertices")
    edges = [(k, (k + 1) % n) for k in range(n)]
    edges = [(min(u, v), max(u, v)) for u, v in edges]
    ec = {k: color for k in range(n)} if color else {}
    return ColoredGraph(n, edges, colors, ec)


def path_graph(n: int, colors: int = 1) -> ColoredGraph:
    return ColoredGraph(n, [(k, k + 1) for k in range(n - 1)], colors)


# -- union, gluing, quotients ----------------------------------------------


@dataclass(frozen=True)
class EdgeSelector:
    """An edge plus the order in which its endpoints are read."""

    edge_index: int
    flip: bool = False

    def endpoints(self, g: ColoredGraph) -> Edge:
        g.check_edge(self.edge_index)
        u, v = g.edges[self.edge_index]
        return (v, u) if self.flip else (u, v)


@dataclass(frozen=True)
class Amalgam:
    graph: ColoredGraph
    left_vertices: tuple[int, ...]
    left_edges: tuple[int, ...]
    right_vertices: tuple[int, ...]
    right_edges: tuple[int, ...]


def _same_universe(g: ColoredGraph, h: ColoredGraph) -> None:
    if g.colors != h.colors or g.oriented != h.oriented:
        raise UniverseMismatch(
            f"universes differ: r={g.colors}/{h.colors}, oriented={g.oriented}/{h.oriented}"
        )


def disjoint_union(g: ColoredGraph, h: ColoredGraph) -> ColoredGraph:
    _same_universe(g, h)
    s = g.n
    ec = dict(g.edge_colors)
    ec.update({g.m + k: c for k, c in h.edge_colors.items()})
    vc = dict(g.vertex_colors)
    vc.update({s + v: cs for v, cs in h.vertex_colors.items()})
    return ColoredGraph(
        g.n + h.n,
        list(g.edges) + [(u + s, v + s) for u, v in h.edges],
        g.colors,
        ec,
        g.oriented,
        vc,
        max(g.vertex_color_universe, h.vertex_color_universe),
    )


def _check_disjoint(g: ColoredGraph, sels: Sequence[EdgeSelector], side: str) -> None:
    seen: set[int] = set()
    for s in sels:
        ends = set(s.endpoints(g))
        if ends & seen:
            raise GluingConflict(f"selected {side} edges share an endpoint")
        seen |= ends


def amalgamate(
    g: ColoredGraph,
    h: ColoredGraph,
    pairs: Sequence[tuple[EdgeSelector, EdgeSelector]],
) -> Amalgam:
    """Glue h onto g, identifying each selected h edge with its g partner."""
    _same_universe(g, h)
    pairs = [
        (a if isinstance(a, EdgeSelector) else EdgeSelector(a), b if isinstance(b, EdgeSelector) else EdgeSelector(b))
        for a, b in pairs
    ]
    _check_disjoint(g, [a for a, _ in pairs], "left")
    _check_disjoint(h, [b for _, b in pairs], "right")
    vmap: dict[int, int] = {}
    glued_edge: dict[int, int] = {}
    for a, b in pairs:
        gu, gv = a.endpoints(g)
        hu, hv = b.endpoints(h)
        if g.oriented and (g.edges[a.edge_index] == (gu, gv)) != (h.edges[b.edge_index] == (hu, hv)):
            raise GluingConflict("oriented edges glued against their direction")
        vmap[hu], vmap[hv] = gu, gv
        glued_edge[b.edge_index] = a.edge_index
    nxt = g.n
    for v in range(h.n):
        if v not in vmap:
            vmap[v] = nxt
            nxt += 1
    edges = list(g.edges)
    ec = dict(g.edge_colors)
    emap: list[int] = []
    for k, (u, v) in enumerate(h.edges):
        c = h.color(k)
        if k in glued_edge:
            target = glued_edge[k]
            old = ec.get(target)
            if old is not None and c is not None and old != c:
                raise ColorClash(f"glued edges colored {old} and {c}")
            if c is not None:
                ec[target] = c
            emap.append(target)
            continue
        mu, mv = vmap[u], vmap[v]
        if mu < g.n and mv < g.n and g.edge_index(mu, mv) is not None:
            raise GluingConflict(f"edge {k} of the right graph duplicates an existing edge")
        if c is not None:
            ec[len(edges)] = c
        emap.append(len(edges))
        edges.append((mu, mv))
    vc = {v: set(cs) for v, cs in g.vertex_colors.items()}
    for v, cs in h.vertex_colors.items():
        vc.setdefault(vmap[v], set()).update(cs)
    out = ColoredGraph(
        nxt,
        edges,
        g.colors,
        ec,
        g.oriented,
        vc,
        max(g.vertex_color_universe, h.vertex_color_universe),
    )
    return Amalgam(
        out,
        tuple(range(g.n)),
        tuple(range(g.m)),
        tuple(vmap[v] for v in range(h.n)),
        tuple(emap),
    )


def quotient(g: ColoredGraph, partition: Mapping[int, object] | Sequence[object]) -> ColoredGraph:
    """Merge vertices with equal class labels.

    Classes are numbered by their smallest member; edges keep first-occurrence order.
    """
    if isinstance(partition, Mapping):
        label = [partition[v] for v in range(g.n)]
    else:
        label = list(partition)
    if len(label) != g.n:
        raise BadIndex("partition must label every vertex")
    cls: dict[object, int] = {}
    vid = []
    for v in range(g.n):
        if label[v] not in cls:
            cls[label[v]] = len(cls)
        vid.append(cls[label[v]])
    edges: list[Edge] = []
    ec: dict[int, int] = {}
    seen: dict[Edge, int] = {}
    for k, (u, v) in enumerate(g.edges):
        a, b = vid[u], vid[v]
        if a == b:
            raise LoopCreated(f"edge {k} joins merged vertices {u} and {v}")
        key = (a, b) if g.oriented else (min(a, b), max(a, b))
        c = g.color(k)
        if key in seen:
            j = seen[key]
            if ec.get(j) != c:
                raise ColorClash(f"merged parallel edges colored {ec.get(j)} and {c}")
            continue
        seen[key] = len(edges)
        if c is not None:
            ec[len(edges)] = c
        edges.append((a, b))
    vc: dict[int, set[int]] = {}
    for v, cs in g.vertex_colors.items():
        vc.setdefault(vid[v], set()).update(cs)
    return ColoredGraph(len(cls), edges, g.colors, ec, g.oriented, vc, g.vertex_color_universe)


# -- distances and connectivity --------------------------------------------


def _bfs(g: ColoredGraph, sources: Iterable[int]) -> list[int]:
    dist = [-1] * g.n
    queue = deque()
    for s in sources:
        if dist[s] < 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def edge_distance(g: ColoredGraph, e: int, f: int):
    g.check_edge(e)
    g.check_edge(f)
    dist = _bfs(g, g.edges[e])
    ds = [dist[x] for x in g.edges[f] if dist[x] >= 0]
    return min(ds) if ds else UNREACHABLE


def set_distance(g: ColoredGraph, e: int, s: Iterable[int]):
    s = list(s)
    if not s:
        raise ValueError("distance to an empty edge set is undefined")
    g.check_edge(e)
    for f in s:
        g.check_edge(f)
    dist = _bfs(g, g.edges[e])
    ds = [dist[x] for f in s for x in g.edges[f] if dist[x] >= 0]
    return min(ds) if ds else UNREACHABLE


def components(g: ColoredGraph, removed: Iterable[int] = ()) -> list[list[int]]:
    gone = set(removed)
    seen = set(gone)
    comps = []
    for s in range(g.n):
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in g.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def is_connected(g: ColoredGraph) -> bool:
    return g.n <= 1 or len(components(g)) == 1


@dataclass(frozen=True)
class TwoCut:
    pair: tuple[int, int]
    sides: tuple[frozenset[int], ...]  # components of g - pair


@dataclass(frozen=True)
class CutStructure:
    cut_vertices: tuple[int, ...]
    two_cuts: tuple[TwoCut, ...]

    @property
    def is_two_connected(self) -> bool:
        return not self.cut_vertices

    @property
    def is_three_connected(self) -> bool:
        return not self.cut_vertices and not self.two_cuts


def cut_structure(g: ColoredGraph) -> CutStructure:
    """Articulation vertices and separating vertex pairs, by direct deletion."""
    if not is_connected(g):
        raise NotConnected("cut structure needs a connected graph")
    cuts = tuple(v for v in range(g.n) if len(components(g, [v])) > 1)
    pairs = []
    for v in range(g.n):
        for w in range(v + 1, g.n):
            comps = components(g, [v, w])
            if len(comps) > 1:
                pairs.append(TwoCut((v, w), tuple(frozenset(c) for c in comps)))
    return CutStructure(cuts, tuple(pairs))


# -- homomorphisms ---------------------------------------------------------


def _search_order(src: ColoredGraph, first: Sequence[int] = ()) -> list[int]:
    """Vertex order in which every vertex after the first of its component has an earlier neighbor."""
    order: list[int] = []
    placed = set()

    def grow(start):
        queue = deque([start])
        placed.add(start)
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in sorted(src.neighbors(u), key=lambda x: (-src.degree(x), x)):
                if w not in placed:
                    placed.add(w)
                    queue.append(w)

    for v in first:
        if v not in placed:
            placed.add(v)
            order.append(v)
    # continue BFS from the fixed prefix
    frontier = deque(order)
    while frontier:
        u = frontier.popleft()
        for w in sorted(src.neighbors(u), key=lambda x: (-src.degree(x), x)):
            if w not in placed:
                placed.add(w)
                order.append(w)
                frontier.append(w)
    rest = sorted(range(src.n), key=lambda x: (-src.degree(x), x))
    for v in rest:
        if v not in placed:
            grow(v)
    return order


EdgeTest = Callable[[int, int], bool]


def homomorphisms(
    src: ColoredGraph,
    dst: ColoredGraph,
    edge_ok: EdgeTest | None = None,
    fixed: Mapping[int, int] | None = None,
    vertex_ok: Callable[[int, int], bool] | None = None,
) -> Iterator[tuple[int, ...]]:
    """All vertex maps src -> dst preserving (oriented) edges.

    ``edge_ok(src_edge, dst_edge)`` filters edge images and ``vertex_ok``
    vertex images; ``fixed`` pre-assigns some vertices.  Yields tuples
    indexed by src vertex.
    """
    if src.oriented != dst.oriented:
        raise UniverseMismatch("orientation flags differ")
    fixed = dict(fixed or {})
    order = _search_order(src, sorted(fixed))
    pos = {v: i for i, v in enumerate(order)}
    # for each position: list of (earlier vertex, src edge, src vertex is the head)
    back: list[list[tuple[int, int, bool]]] = [[] for _ in order]
    for k, (a, b) in enumerate(src.edges):
        if pos[a] < pos[b]:
            back[pos[b]].append((a, k, True))  # a -> b, b is head
        else:
            back[pos[a]].append((b, k, False))  # a -> b, a is tail
    image = [-1] * src.n
    dst_edge = dst.edge_index
    out_sets, in_sets = dst.adjacency_sets()
    all_vertices = range(dst.n)

    def candidates(i: int):
        v = order[i]
        if v in fixed:
            return [fixed[v]]
        bs = back[i]
        if not bs:
            return all_vertices
        u, _, head = bs[0]
        if len(bs) == 1:
            return dst.out_neighbors(image[u]) if head else dst.in_neighbors(image[u])
        common = set(out_sets[image[u]] if head else in_sets[image[u]])
        for u, _, head in bs[1:]:
            common &= out_sets[image[u]] if head else in_sets[image[u]]
            if not common:
                return ()
        return sorted(common)

    def consistent(i: int, x: int) -> bool:
        v = order[i]
        if vertex_ok is not None and not vertex_ok(v, x):
            return False
        if v in fixed or edge_ok is not None:
            for u, k, head in back[i]:
                hu = image[u]
                d = dst_edge(hu, x) if head else dst_edge(x, hu)
                if d is None:
                    return False
                if edge_ok is not None and not edge_ok(k, d):
                    return False
        return True

    n = len(order)

    def rec(i: int):
        if i == n:
            yield tuple(image)
            return
        v = order[i]
        for x in candidates(i):
            if consistent(i, x):
                image[v] = x
                yield from rec(i + 1)
        image[v] = -1

    if src.n == 0:
        yield ()
        return
    yield from rec(0)


def homomorphisms_through(
    src: ColoredGraph,
    dst: ColoredGraph,
    focus: int,
    edge_ok: EdgeTest | None = None,
    vertex_ok: Callable[[int, int], bool] | None = None,
) -> Iterator[tuple[int, ...]]:
    """Homomorphisms whose image contains edge ``focus`` (may repeat a map)."""
    dst.check_edge(focus)
    fu, fv = dst.edges[focus]
    for k, (a, b) in enumerate(src.edges):
        if edge_ok is not None and not edge_ok(k, focus):
            continue
        targets = [(fu, fv)] if src.oriented else [(fu, fv), (fv, fu)]
        for x, y in targets:
            yield from homomorphisms(src, dst, edge_ok, {a: x, b: y}, vertex_ok)


def color_matcher(src: ColoredGraph, dst: ColoredGraph) -> EdgeTest:
    """Edge test for a color-matched image: dst edge colored exactly like src edge."""
    sc, dc = src.edge_colors, dst.edge_colors

    def ok(k: int, d: int) -> bool:
        c = dc.get(d)
        return c is not None and c == sc.get(k)

    return ok


def vertex_matcher(src: ColoredGraph, dst: ColoredGraph):
    """Vertex test: the image vertex carries every color of the source vertex."""
    if not src.vertex_colors:
        return None
    sv = src.vertex_colors

    def ok(v: int, x: int) -> bool:
        need = sv.get(v)
        return not need or need <= dst.vertex_color_set(x)

    return ok


def find_violation(g: ColoredGraph, family, focus: int | None = None):
    """First color-matched homomorphism from an obstruction into g, or None.

    Returns ``(obstruction index, vertex map)``.
    """
    if family.colors != g.colors or family.oriented != g.oriented:
        raise UniverseMismatch("graph and family use different universes")
    for idx, obs in enumerate(family.obstructions):
        ok = color_matcher(obs, g)
        vok = vertex_matcher(obs, g)
        it = (
            homomorphisms(obs, g, ok, vertex_ok=vok)
            if focus is None
            else homomorphisms_through(obs, g, focus, ok, vok)
        )
        for h in it:
            return idx, h
    return None


def is_free(g: ColoredGraph, family) -> bool:
    return find_violation(g, family) is None
