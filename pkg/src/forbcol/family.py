"""Obstruction families and operations on them."""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import AlreadyOriented, FormatError, UniverseMismatch
from .graph import (
    ColoredGraph,
    color_matcher,
    homomorphisms,
    is_connected,
    vertex_matcher,
)


class ObstructionFamily:
    """A color count r together with a list of totally colored connected graphs."""

    def __init__(
        self,
        colors: int,
        obstructions: Iterable[ColoredGraph] = (),
        oriented: bool | None = None,
        vertex_color_universe: int = 0,
    ):
        obstructions = tuple(obstructions)
        if oriented is None:
            oriented = obstructions[0].oriented if obstructions else False
        for k, g in enumerate(obstructions):
            if g.colors != colors or g.oriented != oriented:
                raise UniverseMismatch(f"obstruction {k} uses a different universe")
        self.colors = colors
        self.oriented = oriented
        self.vertex_color_universe = vertex_color_universe
        self.obstructions = obstructions

    def __len__(self):
        return len(self.obstructions)

    def __iter__(self):
        return iter(self.obstructions)

    def __eq__(self, other):
        return (
            isinstance(other, ObstructionFamily)
            and self.colors == other.colors
            and self.oriented == other.oriented
            and self.obstructions == other.obstructions
        )

    def __hash__(self):
        return hash((self.colors, self.oriented, self.obstructions))

    def __repr__(self):
        return f"ObstructionFamily(r={self.colors}, size={len(self.obstructions)})"

    @property
    def max_vertices(self) -> int:
        return max((g.n for g in self.obstructions), default=0)

    def to_dict(self) -> dict:
        doc = {
            "colors": self.colors,
            "oriented": self.oriented,
            "obstructions": [g.to_dict() for g in self.obstructions],
        }
        if self.vertex_color_universe:
            doc["vertex_colors"] = self.vertex_color_universe
        return doc

    @classmethod
    def from_dict(cls, doc) -> "ObstructionFamily":
        try:
            colors = int(doc["colors"])
            obs = []
            for k, gd in enumerate(doc.get("obstructions", [])):
                gd = dict(gd)
                gd.setdefault("colors", colors)
                obs.append(ColoredGraph.from_dict(gd))
            return cls(colors, obs, doc.get("oriented"), int(doc.get("vertex_colors", 0)))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed family document: {exc!r}") from exc

    def fingerprint(self) -> str:
        keys = sorted(canonical_key(g) for g in self.obstructions)
        blob = json.dumps([self.colors, self.oriented, keys], sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def save_family(f: ObstructionFamily, path) -> None:
    with open(path, "w") as fh:
        json.dump(f.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def load_family(path) -> ObstructionFamily:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return ObstructionFamily.from_dict(doc)


# -- canonical forms -------------------------------------------------------


def _refine(g: ColoredGraph) -> list[int]:
    """Stable vertex classes from iterated neighborhood signatures."""
    cls = [
        (len(g.out_neighbors(v)), len(g.in_neighbors(v)), tuple(sorted(g.vertex_color_set(v))))
        for v in range(g.n)
    ]
    while True:
        sig = []
        for v in range(g.n):
            around = []
            for k in g.incident_edges(v):
                a, b = g.edges[k]
                w = b if a == v else a
                around.append((cls[w], g.color(k) or 0, a == v))
            sig.append((cls[v], tuple(sorted(around))))
        ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(ranks) == len(set(cls)):
            return new
        cls = new


def canonical_form(g: ColoredGraph) -> tuple[tuple, tuple[int, ...]]:
    """Return (key, perm): ``g.relabeled(perm)`` has the least encoding among relabelings.

    Isomorphic graphs (with colors) get identical keys.  Exhaustive within
    refinement cells, intended for obstruction-sized graphs.
    """
    cls = _refine(g)
    cells: dict[int, list[int]] = {}
    for v in range(g.n):
        cells.setdefault(cls[v], []).append(v)
    ordered = [cells[c] for c in sorted(cells)]
    best = None
    best_perm: tuple[int, ...] = ()
    for choice in itertools.product(*(itertools.permutations(c) for c in ordered)):
        seq = [v for part in choice for v in part]
        perm = [0] * g.n
        for i, v in enumerate(seq):
            perm[v] = i
        edges = []
        for k, (u, v) in enumerate(g.edges):
            a, b = perm[u], perm[v]
            if not g.oriented and a > b:
                a, b = b, a
            edges.append((a, b, g.color(k) or 0))
        vcol = tuple(tuple(sorted(g.vertex_color_set(v))) for v in seq)
        key = (g.n, g.oriented, tuple(sorted(edges)), vcol)
        if best is None or key < best:
            best, best_perm = key, tuple(perm)
    if best is None:
        best = (0, g.oriented, (), ())
    return best, best_perm


def canonical_key(g: ColoredGraph) -> str:
    return json.dumps(canonical_form(g)[0])


def canonical_graph(g: ColoredGraph) -> ColoredGraph:
    """The representative of g's isomorphism class with edges in sorted order."""
    key, _ = canonical_form(g)
    n, oriented, edges, vcol = key
    return ColoredGraph(
        n,
        [(a, b) for a, b, _ in edges],
        g.colors,
        {k: c for k, (_, _, c) in enumerate(edges) if c},
        oriented,
        {v: cs for v, cs in enumerate(vcol) if cs},
        g.vertex_color_universe,
    )


def are_isomorphic(g: ColoredGraph, h: ColoredGraph) -> bool:
    return canonical_form(g)[0] == canonical_form(h)[0]


def dedupe_isomorphic(graphs: Iterable[ColoredGraph]) -> list[ColoredGraph]:
    seen, out = set(), []
    for g in graphs:
        key = canonical_key(g)
        if key not in seen:
            seen.add(key)
            out.append(g)
    return out


# -- validation and pruning ------------------------------------------------


def validate(f: ObstructionFamily) -> list[str]:
    problems = []
    for k, g in enumerate(f.obstructions):
        if not is_connected(g):
            problems.append(f"obstruction {k} is not connected")
        if not g.is_total():
            problems.append(f"obstruction {k} has {len(g.uncolored_edges())} uncolored edges")
    return problems


def maps_into(src: ColoredGraph, dst: ColoredGraph) -> bool:
    """Is there a color-matched homomorphism src -> dst?"""
    for _ in homomorphisms(src, dst, color_matcher(src, dst), vertex_ok=vertex_matcher(src, dst)):
        return True
    return False


def prune_redundant(f: ObstructionFamily) -> ObstructionFamily:
    """Drop obstructions implied by another one mapping into them.

    Among homomorphically equivalent obstructions the earliest survives.
    """
    obs = f.obstructions
    n = len(obs)
    hom = [[i != j and maps_into(obs[i], obs[j]) for j in range(n)] for i in range(n)]
    keep = []
    for i in range(n):
        dominated = any(hom[j][i] and (not hom[i][j] or j < i) for j in range(n))
        if not dominated:
            keep.append(obs[i])
    return ObstructionFamily(f.colors, keep, f.oriented, f.vertex_color_universe)


# -- recolorings -----------------------------------------------------------


@dataclass(frozen=True)
class Recoloring:
    """A color map [r_source] -> [r_target]; ``table[c - 1]`` is the image of c."""

    table: tuple[int, ...]
    target_colors: int

    def __post_init__(self):
        if any(not 1 <= c <= self.target_colors for c in self.table):
            raise ValueError("recoloring values outside the target universe")

    @property
    def source_colors(self) -> int:
        return len(self.table)

    def __call__(self, c: int) -> int:
        return self.table[c - 1]

    def is_surjective(self) -> bool:
        return set(self.table) == set(range(1, self.target_colors + 1))

    def then(self, other: "Recoloring") -> "Recoloring":
        return Recoloring(tuple(other(c) for c in self.table), other.target_colors)

    @classmethod
    def identity(cls, r: int) -> "Recoloring":
        return cls(tuple(range(1, r + 1)), r)

    def apply(self, g: ColoredGraph) -> ColoredGraph:
        return ColoredGraph(
            g.n,
            g.edges,
            self.target_colors,
            {k: self(c) for k, c in g.edge_colors.items()},
            g.oriented,
            g.vertex_colors,
            g.vertex_color_universe,
        )


def _preimage_colorings(g: ColoredGraph, rho: Recoloring) -> Iterator[ColoredGraph]:
    choices = []
    for k in range(g.m):
        pre = [c for c in range(1, rho.source_colors + 1) if rho(c) == g.color(k)]
        if not pre:
            return
        choices.append(pre)
    base = g.with_universe(rho.source_colors)
    for combo in itertools.product(*choices):
        yield base.with_coloring(dict(enumerate(combo)))


def is_recoloring(rho: Recoloring, source: ObstructionFamily, target: ObstructionFamily) -> bool:
    if rho.source_colors != source.colors or rho.target_colors != target.colors:
        raise UniverseMismatch("recoloring does not match the families' color counts")
    if source.oriented != target.oriented:
        raise UniverseMismatch("orientation flags differ")
    for obs in target.obstructions:
        for pre in _preimage_colorings(obs, rho):
            if not any(maps_into(s, pre) for s in source.obstructions):
                return False
    return True


def restrict_colors(f: ObstructionFamily, keep: Sequence[int]) -> tuple[ObstructionFamily, dict[int, int]]:
    """Obstructions using only colors in ``keep``, renumbered 1..len(keep)."""
    keep = sorted(set(keep))
    new = {c: i + 1 for i, c in enumerate(keep)}
    obs = []
    for g in f.obstructions:
        if all(c in new for c in g.edge_colors.values()):
            obs.append(
                ColoredGraph(
                    g.n,
                    g.edges,
                    len(keep),
                    {k: new[c] for k, c in g.edge_colors.items()},
                    g.oriented,
                    g.vertex_colors,
                    g.vertex_color_universe,
                )
            )
    return ObstructionFamily(len(keep), dedupe_isomorphic(obs), f.oriented, f.vertex_color_universe), new


def compute_core(f: ObstructionFamily) -> tuple[ObstructionFamily, Recoloring]:
    """Shrink the palette along non-surjective self-recolorings until none is left.

    Returns the core family and the composed map from the original colors.
    """
    total = Recoloring.identity(f.colors)
    while True:
        found = None
        for table in itertools.product(range(1, f.colors + 1), repeat=f.colors):
            rho = Recoloring(table, f.colors)
            if not rho.is_surjective() and is_recoloring(rho, f, f):
                found = rho
                break
        if found is None:
            return f, total
        image = sorted(set(found.table))
        f, relabel = restrict_colors(f, image)
        step = Recoloring(tuple(relabel[found(c)] for c in range(1, found.source_colors + 1)), f.colors)
        total = total.then(step)


def is_core(f: ObstructionFamily) -> bool:
    for table in itertools.product(range(1, f.colors + 1), repeat=f.colors):
        rho = Recoloring(table, f.colors)
        if not rho.is_surjective() and is_recoloring(rho, f, f):
            return False
    return True


# -- orientations ----------------------------------------------------------


def orientations(g: ColoredGraph) -> Iterator[ColoredGraph]:
    """All 2^|E| orientations; bit k of the counter reverses edge k."""
    for mask in range(1 << g.m):
        edges = [((v, u) if mask >> k & 1 else (u, v)) for k, (u, v) in enumerate(g.edges)]
        yield ColoredGraph(
            g.n, edges, g.colors, g.edge_colors, True, g.vertex_colors, g.vertex_color_universe
        )


def orient(f: ObstructionFamily, dedupe: bool = False) -> ObstructionFamily:
    if f.oriented:
        raise AlreadyOriented("family is already oriented")
    obs = [o for g in f.obstructions for o in orientations(g)]
    if dedupe:
        obs = dedupe_isomorphic(obs)
    return ObstructionFamily(f.colors, obs, True, f.vertex_color_universe)


def orient_graph(g: ColoredGraph, mask: int = 0) -> ColoredGraph:
    """One orientation of an unoriented graph (bit k reverses edge k)."""
    if g.oriented:
        raise AlreadyOriented("graph is already oriented")
    edges = [((v, u) if mask >> k & 1 else (u, v)) for k, (u, v) in enumerate(g.edges)]
    return ColoredGraph(g.n, edges, g.colors, g.edge_colors, True, g.vertex_colors, g.vertex_color_universe)
