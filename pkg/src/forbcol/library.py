"""Ready-made families and uncolorable witnesses."""

from __future__ import annotations

import itertools

from .family import ObstructionFamily, canonical_key
from .graph import ColoredGraph, complete_graph, cycle_graph


def mono_clique_family(n: int, colors: int = 2) -> ObstructionFamily:
    """Monochromatic K_n in every color."""
    return ObstructionFamily(colors, [complete_graph(n, colors, c) for c in range(1, colors + 1)])


def triangle_family(colors: int = 2) -> ObstructionFamily:
    return mono_clique_family(3, colors)


def all_colorings(g: ColoredGraph) -> list[ColoredGraph]:
    r = g.colors
    return [g.with_coloring(dict(enumerate(t))) for t in itertools.product(range(1, r + 1), repeat=g.m)]


def clique_free_family(n: int, colors: int = 2) -> ObstructionFamily:
    """Monochromatic K_n in every color plus every coloring of K_{n+1}."""
    extra = all_colorings(complete_graph(n + 1, colors))
    return ObstructionFamily(colors, mono_clique_family(n, colors).obstructions + extra)


def mono_cycle(n: int, color: int, colors: int = 2) -> ColoredGraph:
    return cycle_graph(n, colors, color)


def k6_witness() -> ColoredGraph:
    """K_6: every 2-coloring has a monochromatic triangle."""
    return complete_graph(6, 2)


def _family_key(f: ObstructionFamily) -> tuple:
    return (f.colors, f.oriented, tuple(sorted(canonical_key(o) for o in f.obstructions)))


def witness_for(family: ObstructionFamily) -> ColoredGraph | None:
    """A shipped uncolorable witness for the family, if there is one."""
    if _family_key(family) == _family_key(triangle_family(2)):
        return k6_witness()
    return None
