"""Deciding Col(F) and Ext(F).

Two strategies share one contract:

* ``"cdcl"`` (default) compiles every partially matched obstruction image
  into a nogood over edge/color pairs and runs the learning engine in
  :mod:`forbcol.sat`;
* ``"backtrack"`` is the plain depth-first search with incremental
  violation checks through the last assigned edge.

``enumerate_extensions`` is a third, deliberately naive search used as an
oracle in verification code.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import PinConflict, TooLarge, UniverseMismatch
from .graph import ColoredGraph, find_violation, homomorphisms, homomorphisms_through, vertex_matcher
from .sat import Engine

ENUMERATION_GUARD = 30


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


@dataclass
class SolveStats:
    nodes: int = 0
    conflicts: int = 0
    violations_checked: int = 0
    nogoods: int = 0


@dataclass
class ColResult:
    status: Status
    witness: dict[int, int] | None = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT

    def to_dict(self) -> dict:
        doc = {"status": self.status.value, "nodes": self.stats.nodes}
        if self.witness is not None:
            doc["witness"] = {str(k): c for k, c in sorted(self.witness.items())}
        return doc


def _check_universe(g: ColoredGraph, family) -> None:
    if g.colors != family.colors or g.oriented != family.oriented:
        raise UniverseMismatch(
            f"graph (r={g.colors}, oriented={g.oriented}) vs family "
            f"(r={family.colors}, oriented={family.oriented})"
        )


def _assert_sound(g: ColoredGraph, family, witness: Mapping[int, int]) -> None:
    total = g.with_coloring(witness)
    hit = find_violation(total, family)
    if hit is not None:  # pragma: no cover - would be a solver bug
        raise AssertionError(f"solver returned a coloring violating obstruction {hit[0]}")


# -- compilation -------------------------------------------------------------


def obstruction_nogoods(g: ColoredGraph, family) -> tuple[list[tuple[tuple[int, int], ...]], bool]:
    """Images of obstructions that are still avoidable, as sets of (edge, color).

    Returns the deduplicated nogoods and whether the precoloring already
    contains a complete violation (an empty nogood).
    """
    nogoods = set()
    violated = False
    gc = g.edge_colors
    for obs in family.obstructions:
        oc = obs.edge_colors

        def ok(k, d, oc=oc):
            c = gc.get(d)
            return c is None or c == oc[k]

        vok = vertex_matcher(obs, g)
        for h in homomorphisms(obs, g, ok, vertex_ok=vok):
            lits = {}
            clash = False
            for k, (a, b) in enumerate(obs.edges):
                d = g.edge_index(h[a], h[b])
                if d in gc:
                    continue
                prev = lits.get(d)
                if prev is not None and prev != oc[k]:
                    clash = True
                    break
                lits[d] = oc[k]
            if clash:
                continue
            if not lits:
                violated = True
                continue
            nogoods.add(tuple(sorted(lits.items())))
    return sorted(nogoods, key=lambda t: (len(t), t)), violated


class ExtensionOracle:
    """Compiled Ext(F) instance answering many pinned queries incrementally."""

    def __init__(self, g: ColoredGraph, family):
        _check_universe(g, family)
        self.g = g
        self.family = family
        self.r = family.colors
        self.free = g.uncolored_edges()
        self.var = {}
        nogoods, self.violated = obstruction_nogoods(g, family)
        self.stats = SolveStats(nogoods=len(nogoods))
        eng = Engine()
        r = self.r
        if r == 2:
            eng.new_vars(len(self.free))
            for k, e in enumerate(self.free):
                self.var[e] = k + 1
                eng.set_polarity(k + 1, True)
        elif r > 2:
            eng.new_vars(len(self.free) * r)
            for k, e in enumerate(self.free):
                base = k * r
                self.var[e] = base + 1
                eng.add_clause([base + c for c in range(1, r + 1)])
                for c in range(1, r + 1):
                    for d in range(c + 1, r + 1):
                        eng.add_clause([-(base + c), -(base + d)])
                eng.set_polarity(base + 1, True)
        if r == 1:
            # every free edge is forced to color 1, so any nogood is hit
            self.violated = self.violated or bool(nogoods)
        else:
            for ng in nogoods:
                eng.add_clause([-self.lit(e, c) for e, c in ng])
        self.engine = eng

    def lit(self, e: int, c: int) -> int:
        """Literal stating that edge e gets color c."""
        if self.r == 1:
            return 0
        v = self.var[e]
        if self.r == 2:
            return v if c == 1 else -v
        return v + c - 1

    def _decode(self, model) -> dict[int, int]:
        out = dict(self.g.edge_colors)
        for e in self.free:
            if self.r == 1:
                out[e] = 1
            elif self.r == 2:
                out[e] = 1 if model[self.var[e]] > 0 else 2
            else:
                base = self.var[e]
                out[e] = next(c for c in range(1, self.r + 1) if model[base + c - 1] > 0)
        return out

    def _assumptions(self, pins, forbid) -> list[int] | None:
        """Translate pins and forbidden colors; None means trivially impossible."""
        lits = []
        for e, c in (pins or {}).items():
            self.g.check_edge(e)
            if e not in self.var and self.r > 1:
                if self.g.color(e) is not None:
                    raise PinConflict(f"edge {e} is already colored")
            if not 1 <= c <= self.r:
                raise PinConflict(f"pin color {c} outside 1..{self.r}")
            if self.r > 1:
                lits.append(self.lit(e, c))
        for e, cs in (forbid or {}).items():
            self.g.check_edge(e)
            if self.g.color(e) is not None:
                if self.g.color(e) in cs:
                    return None
                continue
            for c in cs:
                if self.r == 1:
                    return None
                lits.append(-self.lit(e, c))
        return lits

    def solve(
        self,
        pins: Mapping[int, int] | None = None,
        forbid: Mapping[int, Iterable[int]] | None = None,
        canonical: bool = False,
    ) -> ColResult:
        if pins:
            for e in pins:
                if self.g.color(e) is not None:
                    raise PinConflict(f"edge {e} is already colored")
        stats = SolveStats(nogoods=self.stats.nogoods)
        if self.violated:
            return ColResult(Status.UNSAT, None, stats)
        lits = self._assumptions(pins, {e: set(cs) for e, cs in (forbid or {}).items()})
        if lits is None:
            return ColResult(Status.UNSAT, None, stats)
        eng = self.engine
        before = (eng.decisions, eng.conflicts)
        ok = eng.solve(lits)
        if ok and canonical:
            ok = self._least(lits)
        stats.nodes += eng.decisions - before[0]
        stats.conflicts += eng.conflicts - before[1]
        if not ok:
            return ColResult(Status.UNSAT, None, stats)
        witness = self._decode(eng.model)
        if pins:
            witness.update(pins)
        if self.r == 1:
            for e in self.free:
                witness[e] = 1
        _assert_sound(self.g, self.family, witness)
        return ColResult(Status.SAT, witness, stats)

    def _least(self, lits: list[int]) -> bool:
        """Fix edges in index order to their least feasible color."""
        eng = self.engine
        fixed = list(lits)
        model = eng.model
        for e in self.free:
            current = self._decode(model)[e]
            for c in range(1, self.r + 1):
                lit = self.lit(e, c)
                if c == current:
                    fixed.append(lit)
                    break
                if eng.solve(fixed + [lit]):
                    fixed.append(lit)
                    model = eng.model
                    break
        eng.solve(fixed)
        return True


# -- public entry points ------------------------------------------------------


def solve_ext(
    g: ColoredGraph,
    family,
    deterministic: bool = False,
    strategy: str = "cdcl",
    propagate: bool = False,
) -> ColResult:
    """Decide whether the partial coloring of g extends to an F-free coloring.

    With ``deterministic`` the witness is the lexicographically least
    extension in edge-index order.
    """
    _check_universe(g, family)
    if strategy == "backtrack":
        return backtrack_search(g, family, propagate=propagate)
    if strategy != "cdcl":
        raise ValueError(f"unknown strategy {strategy!r}")
    return ExtensionOracle(g, family).solve(canonical=deterministic)


def solve_col(g: ColoredGraph, family, **kw) -> ColResult:
    if g.edge_colors:
        raise PinConflict("solve_col expects an uncolored graph; use solve_ext")
    return solve_ext(g, family, **kw)


def solve_ext_pinned(g: ColoredGraph, family, pins: Mapping[int, int], **kw) -> ColResult:
    for e, c in pins.items():
        g.check_edge(e)
        if g.color(e) is not None:
            raise PinConflict(f"edge {e} is already colored")
    return solve_ext(g.recolored(dict(pins)), family, **kw)


# -- plain backtracking -------------------------------------------------------


class _Checker:
    """Violation test against a mutable color array."""

    def __init__(self, g: ColoredGraph, family):
        self.g = g
        self.family = family
        self.colors: list[int | None] = [g.color(k) for k in range(g.m)]
        self.calls = 0
        self._tests = []
        for obs in family.obstructions:
            oc = obs.edge_colors
            cols = self.colors

            def ok(k, d, oc=oc, cols=cols):
                c = cols[d]
                return c is not None and c == oc[k]

            self._tests.append((obs, ok, vertex_matcher(obs, g)))

    def violated(self, focus: int | None = None) -> bool:
        self.calls += 1
        for obs, ok, vok in self._tests:
            it = (
                homomorphisms(obs, self.g, ok, vertex_ok=vok)
                if focus is None
                else homomorphisms_through(obs, self.g, focus, ok, vok)
            )
            for _ in it:
                return True
        return False


def backtrack_search(g: ColoredGraph, family, propagate: bool = False) -> ColResult:
    """Depth-first search; edges by endpoint degree sum, colors ascending."""
    _check_universe(g, family)
    chk = _Checker(g, family)
    stats = SolveStats()
    if chk.violated():
        stats.violations_checked = chk.calls
        return ColResult(Status.UNSAT, None, stats)
    free = sorted(
        g.uncolored_edges(),
        key=lambda e: (-(g.degree(g.edges[e][0]) + g.degree(g.edges[e][1])), e),
    )
    r = family.colors
    cols = chk.colors

    def feasible(e: int) -> list[int]:
        out = []
        for c in range(1, r + 1):
            cols[e] = c
            if not chk.violated(e):
                out.append(c)
        cols[e] = None
        return out

    def rec(i: int) -> bool:
        if i == len(free):
            return True
        e = free[i]
        options = feasible(e) if propagate else range(1, r + 1)
        for c in options:
            stats.nodes += 1
            cols[e] = c
            if propagate or not chk.violated(e):
                if propagate and not _lookahead(i + 1):
                    continue
                if rec(i + 1):
                    return True
        cols[e] = None
        return False

    def _lookahead(start: int) -> bool:
        # every remaining edge must keep at least one color open
        for e in free[start:]:
            if not feasible(e):
                return False
        return True

    found = rec(0)
    stats.violations_checked = chk.calls
    if not found:
        return ColResult(Status.UNSAT, None, stats)
    witness = {k: c for k, c in enumerate(cols)}
    _assert_sound(g, family, witness)
    return ColResult(Status.SAT, witness, stats)


# -- enumeration oracle --------------------------------------------------------


def enumerate_extensions(g: ColoredGraph, family, limit: int) -> list[tuple[int, ...]]:
    """All F-free extensions in lexicographic order (tuples over edge indices), up to ``limit``."""
    _check_universe(g, family)
    if limit < 1:
        raise ValueError("limit must be positive")
    free = g.uncolored_edges()
    if len(free) > ENUMERATION_GUARD:
        raise TooLarge(f"{len(free)} uncolored edges exceed the guard of {ENUMERATION_GUARD}")
    chk = _Checker(g, family)
    out: list[tuple[int, ...]] = []
    if chk.violated():
        return out
    cols = chk.colors
    r = family.colors

    def rec(i: int) -> bool:
        if i == len(free):
            out.append(tuple(cols))
            return len(out) >= limit
        e = free[i]
        for c in range(1, r + 1):
            cols[e] = c
            if not chk.violated(e) and rec(i + 1):
                return True
        cols[e] = None
        return False

    rec(0)
    return out
