"""Recognizing the obstruction shapes the gadget constructions rely on."""

from __future__ import annotations

import itertools

from .errors import NoGroundGraph
from .graph import ColoredGraph, complete_graph, cycle_graph, is_connected


def is_complete(g: ColoredGraph) -> bool:
    return g.n >= 2 and g.m == g.n * (g.n - 1) // 2 and not g.oriented


def is_cycle(g: ColoredGraph) -> bool:
    return (
        g.n >= 3
        and g.m == g.n
        and all(g.degree(v) == 2 for v in range(g.n))
        and is_connected(g)
    )


def is_odd_cycle(g: ColoredGraph) -> bool:
    return is_cycle(g) and g.n % 2 == 1


def clique_number(g: ColoredGraph) -> int:
    """Size of a largest clique of the underlying graph (brute force)."""
    if g.n == 0:
        return 0
    adj = [set(g.neighbors(v)) for v in range(g.n)]
    best = 1
    for size in range(2, g.n + 1):
        found = False
        for combo in itertools.combinations(range(g.n), size):
            if all(b in adj[a] for a, b in itertools.combinations(combo, 2)):
                found = True
                break
        if not found:
            break
        best = size
    return best


def mono_color(g: ColoredGraph) -> int | None:
    """The single color of a totally monochromatic graph, else None."""
    cs = set(g.edge_colors.values())
    if g.is_total() and len(cs) == 1:
        return next(iter(cs))
    return None


def mono_obstructions(family, color: int) -> list[ColoredGraph]:
    return [g for g in family.obstructions if g.m and mono_color(g) == color]


def ground_shape(family, color: int) -> tuple[str, int]:
    """Longest monochromatic odd cycle of the color, else its smallest clique."""
    mono = mono_obstructions(family, color)
    cycles = [g.n for g in mono if is_odd_cycle(g)]
    if cycles:
        return "cycle", max(cycles)
    cliques = [g.n for g in mono if is_complete(g) and g.n >= 3]
    if cliques:
        return "clique", min(cliques)
    raise NoGroundGraph(f"no monochromatic odd cycle or clique of color {color}")


def ground_graph(family, color: int) -> ColoredGraph:
    """Uncolored standard copy of the ground shape for ``color``."""
    shape, n = ground_shape(family, color)
    if shape == "cycle":
        return cycle_graph(n, family.colors)
    return complete_graph(n, family.colors)
