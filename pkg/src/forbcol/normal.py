"""Edge-amalgamation normal form for oriented families.

Obstructions are rewritten into *patterns*: oriented graphs whose vertices
and edges carry literal sets.  A literal is either an original edge color
(``"1"``, ``"2"``, ...) or a fresh color name ``"c3"`` / its negation
``"~c3"``.  An input coloring is exact: every edge gets one original color
and a truth value for each fresh edge color, every vertex a truth value for
each fresh vertex color.  A pattern occurs when some homomorphism lands on
edges and vertices satisfying all of its literals.

Under exact colorings, completing a partial literal set with both polarities
describes the same occurrences as leaving the literal out, so the negation
and powerset steps are bookkeeping: :meth:`NormalForm.to_family` carries them
out explicitly when the expansion is small enough.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import TooLarge, UniverseMismatch
from .family import ObstructionFamily, orient_graph
from .graph import ColoredGraph, components, homomorphisms
from .sat import Engine

Lits = frozenset  # of str

PATTERN_BUDGET = 20000
PHASES = ("quotients", "one-cuts", "two-cuts", "negation", "powerset")


def neg(lit: str) -> str:
    return lit[1:] if lit.startswith("~") else "~" + lit


def is_original(lit: str) -> bool:
    return lit.isdigit()


def consistent(lits: Iterable[str]) -> bool:
    lits = set(lits)
    if sum(1 for x in lits if is_original(x)) > 1:
        return False
    return not any(neg(x) in lits for x in lits if not is_original(x))


@dataclass(frozen=True)
class Pattern:
    n: int
    edges: tuple[tuple[int, int], ...]
    edge_lits: tuple[Lits, ...]
    vertex_lits: tuple[Lits, ...]

    @staticmethod
    def from_graph(g: ColoredGraph) -> "Pattern":
        return Pattern(
            g.n,
            g.edges,
            tuple(Lits({str(g.color(k))}) for k in range(g.m)),
            tuple(Lits() for _ in range(g.n)),
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    def skeleton(self) -> ColoredGraph:
        return ColoredGraph(self.n, self.edges, 1, oriented=True)

    def edge_between(self, v: int, w: int) -> int | None:
        for k, (a, b) in enumerate(self.edges):
            if {a, b} == {v, w}:
                return k
        return None

    def induced(self, keep: Sequence[int]) -> "Pattern":
        keep = sorted(keep)
        pos = {v: i for i, v in enumerate(keep)}
        edges, lits = [], []
        for (a, b), ls in zip(self.edges, self.edge_lits):
            if a in pos and b in pos:
                edges.append((pos[a], pos[b]))
                lits.append(ls)
        return Pattern(len(keep), tuple(edges), tuple(lits), tuple(self.vertex_lits[v] for v in keep))

    def with_vertex_lit(self, v: int, lit: str) -> "Pattern":
        vl = list(self.vertex_lits)
        vl[v] = vl[v] | {lit}
        return Pattern(self.n, self.edges, self.edge_lits, tuple(vl))

    def with_edge_lit(self, k: int, lit: str) -> "Pattern":
        el = list(self.edge_lits)
        el[k] = el[k] | {lit}
        return Pattern(self.n, self.edges, tuple(el), self.vertex_lits)

    def with_edge(self, v: int, w: int, lit: str) -> "Pattern":
        return Pattern(self.n, self.edges + ((v, w),), self.edge_lits + (Lits({lit}),), self.vertex_lits)

    def satisfiable(self) -> bool:
        return all(consistent(ls) for ls in (*self.edge_lits, *self.vertex_lits))

    def key(self) -> tuple:
        """Canonical key by brute force over vertex orders (raw key past 7 vertices)."""
        perms = itertools.permutations(range(self.n)) if self.n <= 7 else [tuple(range(self.n))]
        best = None
        for p in perms:
            edges = tuple(sorted((p[a], p[b], tuple(sorted(ls))) for (a, b), ls in zip(self.edges, self.edge_lits)))
            verts = [()] * self.n
            for v in range(self.n):
                verts[p[v]] = tuple(sorted(self.vertex_lits[v]))
            cand = (self.n, edges, tuple(verts))
            if best is None or cand < best:
                best = cand
        return best

    def to_dict(self) -> dict:
        return {
            "vertices": self.n,
            "edges": [list(e) for e in self.edges],
            "edge_literals": [sorted(ls) for ls in self.edge_lits],
            "vertex_literals": {str(v): sorted(ls) for v, ls in enumerate(self.vertex_lits) if ls},
        }


def _connected(p: Pattern, removed: Iterable[int] = ()) -> list[list[int]]:
    return components(p.skeleton(), removed)


def quotients(p: Pattern) -> Iterator[Pattern]:
    """Proper quotients: merge independent vertex classes, union literals, drop digons and clashes."""
    adj = [set() for _ in range(p.n)]
    for a, b in p.edges:
        adj[a].add(b)
        adj[b].add(a)

    def partitions(i: int, blocks: list[list[int]]):
        if i == p.n:
            yield blocks
            return
        for blk in blocks:
            if not any(u in adj[i] for u in blk):
                blk.append(i)
                yield from partitions(i + 1, blocks)
                blk.pop()
        blocks.append([i])
        yield from partitions(i + 1, blocks)
        blocks.pop()

    for blocks in partitions(0, []):
        if len(blocks) == p.n:
            continue
        cls = {v: b for b, blk in enumerate(blocks) for v in blk}
        merged: dict[tuple[int, int], set] = {}
        for (a, b), ls in zip(p.edges, p.edge_lits):
            merged.setdefault((cls[a], cls[b]), set()).update(ls)
        if any((b, a) in merged for (a, b) in merged):
            continue  # a digon cannot sit in an oriented input
        vl = [set() for _ in blocks]
        for v in range(p.n):
            vl[cls[v]] |= p.vertex_lits[v]
        q = Pattern(
            len(blocks),
            tuple(merged),
            tuple(Lits(ls) for ls in merged.values()),
            tuple(Lits(ls) for ls in vl),
        )
        if q.satisfiable():
            yield q


@dataclass
class NormalForm:
    colors: int
    patterns: list[Pattern]
    edge_fresh: list[str] = field(default_factory=list)
    vertex_fresh: list[str] = field(default_factory=list)
    transcript: list[dict] = field(default_factory=list)

    @property
    def fired(self) -> list[str]:
        seen = []
        for ev in self.transcript:
            if ev["phase"] not in seen:
                seen.append(ev["phase"])
        return seen

    def to_dict(self) -> dict:
        return {
            "colors": self.colors,
            "edge_fresh": self.edge_fresh,
            "vertex_fresh": self.vertex_fresh,
            "patterns": [p.to_dict() for p in self.patterns],
            "transcript": self.transcript,
        }

    def edge_color_index(self, original: int, fresh_true: Iterable[str]) -> int:
        """Powerset color number for an original color plus the set of true fresh edge colors."""
        bits = sum(1 << self.edge_fresh.index(c) for c in fresh_true)
        return 1 + (original - 1) * (1 << len(self.edge_fresh)) + bits

    def to_family(self, limit: int = 100000) -> ObstructionFamily:
        """Materialize negation completion and powerset colors as a plain family."""
        k = len(self.edge_fresh)
        total = 0
        for p in self.patterns:
            free = 1
            for ls in p.edge_lits:
                orig = [x for x in ls if is_original(x)]
                fixed = {x.lstrip("~") for x in ls if not is_original(x)}
                free *= (1 if orig else self.colors) * (1 << (k - len(fixed)))
            total += free
            if total > limit:
                raise TooLarge(f"powerset expansion exceeds {limit} obstructions")
        vindex = {c: j for j, c in enumerate(self.vertex_fresh)}

        def vcode(lit: str) -> int:
            j = vindex[lit.lstrip("~")]
            return 2 * j + (2 if lit.startswith("~") else 1)

        out = []
        for p in self.patterns:
            choices = []
            for ls in p.edge_lits:
                orig = [int(x) for x in ls if is_original(x)] or list(range(1, self.colors + 1))
                opts = []
                for o in orig:
                    for bits in itertools.product((False, True), repeat=k):
                        true = {c for c, b in zip(self.edge_fresh, bits) if b}
                        if all((x.lstrip("~") in true) != x.startswith("~") for x in ls if not is_original(x)):
                            opts.append(self.edge_color_index(o, true))
                choices.append(opts)
            vcols = {v: {vcode(x) for x in ls} for v, ls in enumerate(p.vertex_lits) if ls}
            for combo in itertools.product(*choices):
                out.append(
                    ColoredGraph(
                        p.n, p.edges, self.colors << k, dict(enumerate(combo)), True, vcols, 2 * len(self.vertex_fresh)
                    )
                )
        return ObstructionFamily(self.colors << k, out, True, 2 * len(self.vertex_fresh))


class _Builder:
    def __init__(self, colors: int, budget: int):
        self.colors = colors
        self.budget = budget
        self.patterns: dict[tuple, Pattern] = {}
        self.edge_fresh: list[str] = []
        self.vertex_fresh: list[str] = []
        self.transcript: list[dict] = []
        self.counter = 0
        self.clashes: list[Pattern] = []

    def fresh(self, kind: str) -> str:
        self.counter += 1
        name = f"c{self.counter}"
        (self.edge_fresh if kind == "edge" else self.vertex_fresh).append(name)
        return name

    def log(self, phase: str, **kw) -> None:
        self.transcript.append({"phase": phase, **kw})

    def add(self, p: Pattern) -> bool:
        if not p.satisfiable():
            return False
        k = p.key()
        if k in self.patterns:
            return False
        if len(self.patterns) >= self.budget:
            raise TooLarge(f"normal form exceeds {self.budget} patterns")
        self.patterns[k] = p
        return True

    def close_quotients(self, seeds: list[Pattern]) -> list[Pattern]:
        """Add all quotients of the seeds; return every pattern that was new."""
        fresh = []
        for p in seeds:
            for q in quotients(p):
                if self.add(q):
                    fresh.append(q)
        return fresh


def _cut_vertex(p: Pattern) -> int | None:
    for v in range(p.n):
        if p.n > 2 and len(_connected(p, [v])) > 1:
            return v
    return None


def _split_pair(p: Pattern, done: frozenset) -> tuple[int, int, list[int]] | None:
    for v in range(p.n):
        for w in range(v + 1, p.n):
            if (v, w) in done:
                continue
            comps = _connected(p, [v, w])
            if len(comps) > 1:
                return v, w, comps[0]
    return None


def normalize(f: ObstructionFamily, budget: int = PATTERN_BUDGET) -> NormalForm:
    """Rewrite an oriented family so that its forbidden class is closed under edge amalgamation."""
    if not f.oriented:
        raise UniverseMismatch("normalize expects an oriented family (see orient)")
    if any(g.vertex_colors for g in f.obstructions):
        raise UniverseMismatch("vertex-colored input families are not supported")
    b = _Builder(f.colors, budget)
    start = [Pattern.from_graph(g) for g in f.obstructions]
    for p in start:
        b.add(p)
    added = b.close_quotients(list(b.patterns.values()))
    b.log("quotients", added=len(added))

    _split_one_cuts(b)

    # 2-cuts, separating pairs in lexicographic order
    handled: dict[tuple, frozenset] = {}
    while True:
        target = None
        for k, p in b.patterns.items():
            sp = _split_pair(p, handled.get(k, frozenset()))
            if sp is not None:
                target = (k, p, sp)
                break
        if target is None:
            break
        k, p, (v, w, comp) = target
        rest = [u for u in range(p.n) if u not in comp and u not in (v, w)]
        s1, s2 = sorted(comp + [v, w]), sorted(rest + [v, w])
        e = p.edge_between(v, w)
        new = []
        if e is not None:
            c = b.fresh("edge")
            del b.patterns[k]
            for side, lit in ((s1, c), (s2, neg(c))):
                q = p.induced(side)
                q = q.with_edge_lit(q.edge_between(side.index(v), side.index(w)), lit)
                if b.add(q):
                    new.append(q)
            b.log("two-cuts", pair=[v, w], edge=True, colors=[c])
        else:
            c, d = b.fresh("edge"), b.fresh("edge")
            handled[k] = handled.get(k, frozenset()) | {(v, w)}
            for side, lit_fwd, lit_back in ((s1, c, d), (s2, neg(c), neg(d))):
                q = p.induced(side)
                iv, iw = side.index(v), side.index(w)
                for extra in (q.with_edge(iv, iw, lit_fwd), q.with_edge(iw, iv, lit_back)):
                    if b.add(extra):
                        new.append(extra)
            b.log("two-cuts", pair=[v, w], edge=False, colors=[c, d])
        b.close_quotients(new)
        _split_one_cuts(b)  # quotients of pieces can pinch at a vertex

    if b.edge_fresh:
        b.log("negation", colors=[neg(c) for c in b.edge_fresh])
    b.log("powerset", edge_colors=f.colors << len(b.edge_fresh))
    pats = sorted(b.patterns.values(), key=lambda p: (p.n, p.m, p.key())) + b.clashes
    return NormalForm(f.colors, pats, b.edge_fresh, b.vertex_fresh, b.transcript)


def _split_one_cuts(b: _Builder) -> None:
    """Split at cut vertices until every pattern is 2-connected."""
    while True:
        target = next(((k, p) for k, p in b.patterns.items() if _cut_vertex(p) is not None), None)
        if target is None:
            return
        k, p = target
        v = _cut_vertex(p)
        comps = _connected(p, [v])
        side1 = comps[0] + [v]
        side2 = [u for c in comps[1:] for u in c] + [v]
        c = b.fresh("vertex")
        del b.patterns[k]
        b.clashes.append(Pattern(1, (), (), (Lits({c, neg(c)}),)))
        pieces = []
        for side, lit in ((side1, c), (side2, neg(c))):
            q = p.induced(side).with_vertex_lit(sorted(side).index(v), lit)
            if b.add(q):
                pieces.append(q)
        b.log("one-cuts", vertex=v, color=c, piece_vertices=[len(side1), len(side2)])
        b.close_quotients(pieces)


# -- deciding the normalized problem ------------------------------------------


class NormalSolver:
    """CDCL encoding of exact colorings of one oriented input graph."""

    def __init__(self, g: ColoredGraph, nf: NormalForm):
        if not g.oriented:
            raise UniverseMismatch("input must be oriented")
        self.g, self.nf = g, nf
        self.engine = Engine()
        self._vars: dict[tuple, int] = {}
        r = nf.colors
        for k in range(g.m):
            lits = [self.var(("e", k, str(c))) for c in range(1, r + 1)]
            self.engine.add_clause(lits)
            for a, b2 in itertools.combinations(lits, 2):
                self.engine.add_clause([-a, -b2])
            if g.color(k) is not None:
                self.engine.add_clause([self.var(("e", k, str(g.color(k))))])
        skel = ColoredGraph(g.n, g.edges, 1, oriented=True)
        seen = set()
        for p in nf.patterns:
            src = p.skeleton()
            for h in homomorphisms(src, skel):
                clause = []
                for k, (a, b2) in enumerate(p.edges):
                    d = skel.edge_index(h[a], h[b2])
                    clause.extend(self._negated(("e", d), p.edge_lits[k]))
                for v in range(p.n):
                    clause.extend(self._negated(("v", h[v]), p.vertex_lits[v]))
                key = frozenset(clause)
                if key not in seen:
                    seen.add(key)
                    self.engine.add_clause(clause)

    def var(self, key: tuple) -> int:
        if key not in self._vars:
            self.engine.new_vars(1)
            self._vars[key] = self.engine.nvars
        return self._vars[key]

    def _negated(self, where: tuple, lits: Iterable[str]) -> list[int]:
        out = []
        for lit in lits:
            if is_original(lit) or not lit.startswith("~"):
                out.append(-self.var((*where, lit)))
            else:
                out.append(self.var((*where, lit[1:])))
        return out

    def solve(self) -> dict | None:
        """A witness ``{"edges": {k: (color, true fresh)}, "vertices": {v: true fresh}}`` or None."""
        if not self.engine.solve():
            return None
        model = self.engine.model
        truth = {key: model[v] > 0 for key, v in self._vars.items()}
        edges = {}
        for k in range(self.g.m):
            color = next(c for c in range(1, self.nf.colors + 1) if truth[("e", k, str(c))])
            fresh = sorted(c for c in self.nf.edge_fresh if truth.get(("e", k, c)))
            edges[k] = (color, fresh)
        verts = {v: sorted(c for c in self.nf.vertex_fresh if truth.get(("v", v, c))) for v in range(self.g.n)}
        return {"edges": edges, "vertices": verts}


def solve_normal(g: ColoredGraph, nf: NormalForm) -> dict | None:
    if not g.oriented:
        g = orient_graph(g)
    return NormalSolver(g, nf).solve()


# -- exact colored graphs and the amalgamation test -----------------------------


@dataclass(frozen=True)
class ExactGraph:
    """An oriented graph with an exact coloring: literal sets listing every true fresh color."""

    n: int
    edges: tuple[tuple[int, int], ...]
    edge_lits: tuple[Lits, ...]
    vertex_lits: tuple[Lits, ...]


def occurs(p: Pattern, x: ExactGraph) -> bool:
    skel = ColoredGraph(x.n, x.edges, 1, oriented=True)

    def holds(have: Lits, need: Lits) -> bool:
        return all((l[1:] not in have) if l.startswith("~") else (l in have) for l in need)

    def eok(k: int, d: int) -> bool:
        return holds(x.edge_lits[d], p.edge_lits[k])

    def vok(v: int, y: int) -> bool:
        return holds(x.vertex_lits[y], p.vertex_lits[v])

    return next(homomorphisms(p.skeleton(), skel, eok, vertex_ok=vok), None) is not None


def is_free_exact(x: ExactGraph, nf: NormalForm) -> bool:
    return not any(occurs(p, x) for p in nf.patterns)


def amalgamate_exact(x: ExactGraph, ex: int, y: ExactGraph, ey: int) -> ExactGraph | None:
    """Glue y onto x identifying edge ey with ex (heads to heads); None on clashes."""
    if x.edge_lits[ex] != y.edge_lits[ey]:
        return None
    (xa, xb), (ya, yb) = x.edges[ex], y.edges[ey]
    vmap, nxt = {ya: xa, yb: xb}, x.n
    for v in range(y.n):
        if v not in vmap:
            vmap[v], nxt = nxt, nxt + 1
    vl = list(x.vertex_lits) + [Lits()] * (nxt - x.n)
    for v in range(y.n):
        if v in (ya, yb):
            if y.vertex_lits[v] != x.vertex_lits[vmap[v]]:
                return None
        else:
            vl[vmap[v]] = y.vertex_lits[v]
    edges, lits = list(x.edges), list(x.edge_lits)
    for k, (a, b) in enumerate(y.edges):
        if k == ey:
            continue
        e = (vmap[a], vmap[b])
        if e in edges or (e[1], e[0]) in edges:
            return None
        edges.append(e)
        lits.append(y.edge_lits[k])
    return ExactGraph(nxt, tuple(edges), tuple(lits), tuple(vl))


def random_exact(rng, n: int, nf: NormalForm, density: float = 0.6) -> ExactGraph:
    edges = []
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < density:
            edges.append((a, b) if rng.random() < 0.5 else (b, a))
    lits = tuple(
        Lits({str(rng.randint(1, nf.colors))} | {c for c in nf.edge_fresh if rng.random() < 0.5}) for _ in edges
    )
    vl = tuple(Lits(c for c in nf.vertex_fresh if rng.random() < 0.5) for _ in range(n))
    return ExactGraph(n, tuple(edges), lits, vl)


def pattern_completion(rng, p: Pattern, nf: NormalForm) -> ExactGraph:
    """Exact graph realizing p, unspecified literals drawn at random."""
    def fill(ls: Lits, universe: list[str], with_original: bool) -> Lits:
        out = set()
        orig = [x for x in ls if is_original(x)]
        if with_original:
            out.add(orig[0] if orig else str(rng.randint(1, nf.colors)))
        for c in universe:
            if c in ls:
                out.add(c)
            elif "~" + c not in ls and rng.random() < 0.5:
                out.add(c)
        return Lits(out)

    return ExactGraph(
        p.n,
        p.edges,
        tuple(fill(ls, nf.edge_fresh, True) for ls in p.edge_lits),
        tuple(fill(ls, nf.vertex_fresh, False) for ls in p.vertex_lits),
    )


def amalgamation_counterexample(nf: NormalForm, samples: int = 300, max_vertices: int = 5, seed: int = 0):
    """Search for two free exact graphs whose edge amalgam is not free.

    Candidates are pieces of each pattern split along a vertex pair (with
    the pair joined by an edge) plus random small graphs.  Returns the pair
    and the amalgam, or None.
    """
    import random

    rng = random.Random(seed)
    pieces: list[tuple[ExactGraph, int]] = []
    for p in nf.patterns:
        if p.n > max_vertices * 2 - 2:
            continue
        for v, w in itertools.permutations(range(p.n), 2):
            comps = _connected(p, [v, w])
            if len(comps) < 2:
                continue
            for r in range(1, len(comps)):
                for group in itertools.combinations(range(len(comps)), r):
                    s1 = sorted([u for i in group for u in comps[i]] + [v, w])
                    s2 = sorted([u for i in range(len(comps)) if i not in group for u in comps[i]] + [v, w])
                    for _ in range(3):
                        whole = pattern_completion(rng, p, nf)
                        e = p.edge_between(v, w)
                        if e is None or p.edges[e] != (v, w):
                            continue
                        for side in (s1, s2):
                            if len(side) > max_vertices:
                                continue
                            q = _restrict(whole, side)
                            pieces.append((q, _find_edge(q, side.index(v), side.index(w))))
    for _ in range(samples):
        x = random_exact(rng, rng.randint(2, max_vertices), nf)
        if x.edges:
            pieces.append((x, rng.randrange(len(x.edges))))
    free = [(x, e) for x, e in pieces if e is not None and is_free_exact(x, nf)]
    for (x, ex), (y, ey) in itertools.product(free, repeat=2):
        am = amalgamate_exact(x, ex, y, ey)
        if am is not None and not is_free_exact(am, nf):
            return x, y, am
    return None


def _restrict(x: ExactGraph, keep: Sequence[int]) -> ExactGraph:
    pos = {v: i for i, v in enumerate(keep)}
    edges, lits = [], []
    for (a, b), ls in zip(x.edges, x.edge_lits):
        if a in pos and b in pos:
            edges.append((pos[a], pos[b]))
            lits.append(ls)
    return ExactGraph(len(keep), tuple(edges), tuple(lits), tuple(x.vertex_lits[v] for v in keep))


def _find_edge(x: ExactGraph, a: int, b: int) -> int | None:
    try:
        return x.edges.index((a, b))
    except ValueError:
        return None
