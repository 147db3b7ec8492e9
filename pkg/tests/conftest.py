"""Independent brute-force oracles shared by the test modules.

Nothing here calls the library's homomorphism search or solvers: vertex maps
are enumerated with itertools and colorings with itertools.product.
"""

import itertools

import pytest

from forbcol.family import ObstructionFamily
from forbcol.graph import ColoredGraph
from forbcol.library import triangle_family


def brute_homs(src: ColoredGraph, dst: ColoredGraph, coloring=None):
    """All vertex maps src -> dst preserving edges and, if given, colors under ``coloring``."""
    index = {}
    for k, (u, v) in enumerate(dst.edges):
        index[(u, v)] = k
        if not dst.oriented:
            index[(v, u)] = k
    col = dst.edge_colors if coloring is None else coloring
    for h in itertools.product(range(dst.n), repeat=src.n):
        ok = True
        for k, (a, b) in enumerate(src.edges):
            d = index.get((h[a], h[b]))
            if d is None or col.get(d) != src.color(k):
                ok = False
                break
        if ok:
            yield h


def brute_free(g: ColoredGraph, family: ObstructionFamily, coloring=None) -> bool:
    return not any(next(brute_homs(o, g, coloring), None) is not None for o in family.obstructions)


def brute_extensions(g: ColoredGraph, family: ObstructionFamily):
    free_edges = [k for k in range(g.m) if g.color(k) is None]
    for combo in itertools.product(range(1, family.colors + 1), repeat=len(free_edges)):
        col = dict(g.edge_colors)
        col.update(zip(free_edges, combo))
        if brute_free(g, family, col):
            yield tuple(col[k] for k in range(g.m))


def brute_sat(g: ColoredGraph, family: ObstructionFamily) -> bool:
    return next(brute_extensions(g, family), None) is not None


def graphs_up_to(n_max: int, colors: int = 1, n_min: int = 1):
    """Every labeled simple graph on n_min..n_max vertices (edge sets by bitmask)."""
    for n in range(n_min, n_max + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1 << len(pairs)):
            yield ColoredGraph(n, [pairs[k] for k in range(len(pairs)) if mask >> k & 1], colors)


def triangles(g: ColoredGraph, coloring) -> list:
    """Monochromatic triangles by direct inspection (a second, pattern-free oracle for K3 families)."""
    adj = {}
    for k, (u, v) in enumerate(g.edges):
        adj[frozenset((u, v))] = k
    out = []
    for a, b, c in itertools.combinations(range(g.n), 3):
        ks = [adj.get(frozenset(p)) for p in ((a, b), (b, c), (a, c))]
        if None not in ks and len({coloring[k] for k in ks}) == 1:
            out.append((a, b, c))
    return out


@pytest.fixture(scope="session")
def tri():
    return triangle_family(2)


def precolored_graphs(n_max: int, max_pre: int, colors: int = 2):
    """Every labeled graph up to n_max vertices with at most max_pre precolored edges."""
    for g in graphs_up_to(n_max, colors):
        for k in range(max_pre + 1):
            for pre in itertools.combinations(range(g.m), k):
                for cs in itertools.product(range(1, colors + 1), repeat=k):
                    yield g.with_coloring(dict(zip(pre, cs)))


def brute_csp(x, s) -> bool:
    rels = {rel.name: rel.tuples for rel in s.relations}
    for val in itertools.product(range(1, s.domain + 1), repeat=x.variables):
        if any(val[v] != c for v, c in x.pins.items()):
            continue
        if all(tuple(val[v] for v in vs) in rels[name] for name, vs in x.constraints):
            return True
    return False
