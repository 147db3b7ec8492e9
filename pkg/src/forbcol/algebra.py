"""The finite structure G_F, cyclic polymorphism search and classification."""

from __future__ import annotations

import enum
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import FormatError, HypothesisUnmet, LemmaCheckFailed, TooLarge
from .family import ObstructionFamily, canonical_graph, canonical_key
from .graph import ColoredGraph, is_free
from .shapes import clique_number, is_complete, is_cycle, is_odd_cycle, mono_color, mono_obstructions

CANDIDATE_BUDGET = 10**7
COLORING_GUARD = 1 << 20


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    tuples: frozenset
    graph: ColoredGraph | None = None  # underlying obstruction graph, edge order = tuple order

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples


@dataclass
class FiniteStructure:
    domain: int
    relations: list[Relation] = field(default_factory=list)

    def __post_init__(self):
        names = set()
        for rel in self.relations:
            if rel.name in names:
                raise ValueError(f"duplicate relation name {rel.name!r}")
            names.add(rel.name)
            for t in rel.tuples:
                if len(t) != rel.arity:
                    raise ValueError(f"{rel.name}: tuple {t} has wrong arity")
                if any(not 1 <= a <= self.domain for a in t):
                    raise ValueError(f"{rel.name}: tuple {t} leaves the domain")

    def relation(self, name: str) -> Relation:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise KeyError(name)

    def names(self) -> list[str]:
        return [rel.name for rel in self.relations]

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "relations": [
                {"name": rel.name, "arity": rel.arity, "tuples": sorted(list(t) for t in rel.tuples)}
                for rel in self.relations
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "FiniteStructure":
        try:
            rels = [
                Relation(r["name"], int(r["arity"]), frozenset(tuple(t) for t in r["tuples"]))
                for r in doc["relations"]
            ]
            return cls(int(doc["domain"]), rels)
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad structure document: {exc}") from exc


def singleton_name(i: int) -> str:
    return "{" + str(i) + "}"


def dump_structure(s: FiniteStructure) -> str:
    return json.dumps(s.to_dict(), sort_keys=True)


@dataclass
class FiniteFunction:
    arity: int
    domain: int
    table: dict[tuple[int, ...], int]

    def __post_init__(self):
        if len(self.table) != self.domain**self.arity:
            raise ValueError("function table is not total")

    def __call__(self, *args: int) -> int:
        return self.table[tuple(args)]

    def is_cyclic(self) -> bool:
        return all(self.table[t[1:] + t[:1]] == v for t, v in self.table.items())

    @classmethod
    def from_callable(cls, arity: int, domain: int, fn) -> "FiniteFunction":
        cube = itertools.product(range(1, domain + 1), repeat=arity)
        return cls(arity, domain, {t: fn(*t) for t in cube})

    @classmethod
    def projection(cls, arity: int, domain: int, k: int) -> "FiniteFunction":
        return cls.from_callable(arity, domain, lambda *xs: xs[k])

    def to_dict(self) -> dict:
        return {
            "arity": self.arity,
            "domain": self.domain,
            "table": [[list(t), v] for t, v in sorted(self.table.items())],
        }


# -- G_F ------------------------------------------------------------------------


def _graph_name(g: ColoredGraph) -> str:
    if is_complete(g):
        return f"K{g.n}"
    if is_cycle(g):
        return f"C{g.n}"
    return f"G{g.n}.{g.m}"


def build_G_F(family: ObstructionFamily) -> FiniteStructure:
    """One relation per underlying obstruction graph, plus a singleton per color."""
    r = family.colors
    seen: dict[str, ColoredGraph] = {}
    for obs in family.obstructions:
        base = canonical_graph(obs.uncolored())
        key = canonical_key(base)
        if key not in seen:
            seen[key] = base
    rels = []
    used = set()
    for base in seen.values():
        if r**base.m > COLORING_GUARD:
            raise TooLarge(f"{r}^{base.m} colorings of an obstruction graph")
        name = _graph_name(base)
        if base.oriented or base.vertex_colors or name in used:
            k = 2
            while f"{name}#{k}" in used:
                k += 1
            name = f"{name}#{k}"
        used.add(name)
        tuples = frozenset(
            t
            for t in itertools.product(range(1, r + 1), repeat=base.m)
            if is_free(base.with_coloring(dict(enumerate(t))), family)
        )
        rels.append(Relation(name, base.m, tuples, base))
    for i in range(1, r + 1):
        rels.append(Relation(singleton_name(i), 1, frozenset({(i,)})))
    return FiniteStructure(r, rels)


# -- polymorphisms ----------------------------------------------------------------


def polymorphism_counterexample(f: FiniteFunction, s: FiniteStructure):
    """First (relation name, columns) whose row-wise image leaves the relation, or None."""
    if f.domain != s.domain:
        raise ValueError("function and structure domains differ")
    for rel in s.relations:
        tuples = sorted(rel.tuples)
        for cols in itertools.product(tuples, repeat=f.arity):
            image = tuple(f.table[tuple(c[row] for c in cols)] for row in range(rel.arity))
            if image not in rel.tuples:
                return rel.name, cols
    return None


def is_polymorphism(f: FiniteFunction, s: FiniteStructure) -> bool:
    return polymorphism_counterexample(f, s) is None


def necklaces(k: int, r: int) -> list[tuple[int, ...]]:
    """Least rotation of every rotation class of [r]^k, in lexicographic order."""
    out = []
    for t in itertools.product(range(1, r + 1), repeat=k):
        if all(t <= t[s:] + t[:s] for s in range(1, k)):
            out.append(t)
    return out


def _least_rotation(t: tuple[int, ...]) -> tuple[int, ...]:
    return min(t[s:] + t[:s] for s in range(len(t)))


class _CyclicSearch:
    """Backtracking over values of necklace classes, lexicographic in class order.

    A matrix is checked as soon as the last of its row classes is assigned,
    so the first complete assignment found is the lexicographically least
    cyclic polymorphism.
    """

    def __init__(self, s: FiniteStructure, k: int):
        self.r = s.domain
        self.k = k
        self.classes = necklaces(k, self.r)
        index = {t: n for n, t in enumerate(self.classes)}
        self.cls_of = {
            t: index[_least_rotation(t)] for t in itertools.product(range(1, self.r + 1), repeat=k)
        }
        self.bucket: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in self.classes]
        seen = set()
        for rel in s.relations:
            tuples = sorted(rel.tuples)
            for cols in itertools.product(tuples, repeat=k):
                rows = tuple(self.cls_of[tuple(c[row] for c in cols)] for row in range(rel.arity))
                key = (rel.name, rows)
                if key in seen:
                    continue
                seen.add(key)
                last = max(rows) if rows else 0
                self.bucket[last].append((rows, rel.tuples))

    def run(self, prefix: Sequence[int] = ()) -> list[int] | None:
        vals: list[int] = []
        n = len(self.classes)

        def ok(t: int) -> bool:
            for rows, tuples in self.bucket[t]:
                if tuple(vals[c] for c in rows) not in tuples:
                    return False
            return True

        def rec(t: int) -> bool:
            if t == n:
                return True
            choices = [prefix[t]] if t < len(prefix) else range(1, self.r + 1)
            for v in choices:
                vals.append(v)
                if ok(t) and rec(t + 1):
                    return True
                vals.pop()
            return False

        return list(vals) if rec(0) else None

    def function(self, vals: list[int]) -> FiniteFunction:
        return FiniteFunction(self.k, self.r, {t: vals[c] for t, c in self.cls_of.items()})


def _block(args):
    s, k, prefix = args
    return _CyclicSearch(s, k).run(prefix)


def cyclic_candidate_count(r: int, k: int) -> int:
    return r ** len(necklaces(k, r))


def find_cyclic_polymorphism(
    s: FiniteStructure, k: int, budget: int = CANDIDATE_BUDGET, workers: int = 1
) -> FiniteFunction | None:
    """Lexicographically first cyclic polymorphism of arity k, or None."""
    if k < 2:
        raise ValueError("cyclic functions need arity at least 2")
    count = cyclic_candidate_count(s.domain, k)
    if count > budget:
        raise TooLarge(f"{count} cyclic candidates exceed the budget of {budget}")
    search = _CyclicSearch(s, k)
    if workers <= 1:
        vals = search.run()
    else:
        blocks = [(s, k, (v,)) for v in range(1, s.domain + 1)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block, blocks))
        vals = next((v for v in results if v is not None), None)
    return None if vals is None else search.function(vals)


def cyclic_functions(r: int, k: int) -> Iterable[FiniteFunction]:
    """Every cyclic function [r]^k -> [r] (used to cross-check the search)."""
    classes = necklaces(k, r)
    cls_of = {t: classes.index(_least_rotation(t)) for t in itertools.product(range(1, r + 1), repeat=k)}
    for vals in itertools.product(range(1, r + 1), repeat=len(classes)):
        yield FiniteFunction(k, r, {t: vals[c] for t, c in cls_of.items()})


# -- hardness matrices ------------------------------------------------------------------


@dataclass
class HardnessMatrix:
    relation: str
    p: int
    rows: list[tuple[int, ...]]

    @property
    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(row[c] for row in self.rows) for c in range(len(self.rows[0]))]

    def image(self, f: FiniteFunction) -> tuple[int, ...]:
        return tuple(f(*row) for row in self.rows)


def _pattern_rows(k: int, i: int, j: int) -> list[tuple[int, ...]]:
    half = k // 2
    if k % 2 == 0:
        return [(i,) * half + (j,) * half, (j,) * half + (i,) * half]
    return [
        (i,) * half + (j,) * (half + 1),
        (j,) * (half + 1) + (i,) * half,
        (j,) + (i,) * half + (j,) * half,
    ]


def _relation_for(family: ObstructionFamily, s: FiniteStructure, p: int, m: int | None) -> Relation:
    best = None
    for obs in mono_obstructions(family, p):
        w = clique_number(obs)
        if m is not None and w >= m:
            continue
        key = canonical_key(canonical_graph(obs.uncolored()))
        for rel in s.relations:
            if rel.graph is not None and canonical_key(rel.graph) == key and rel.arity >= 3:
                rank = (w, rel.arity, rel.name)
                if best is None or rank < best[0]:
                    best = (rank, rel)
    if best is None:
        need = f"K{m}-free " if m is not None else ""
        raise HypothesisUnmet(f"no {need}monochromatic obstruction of color {p} with at least 3 edges")
    return best[1]


def hardness_matrix(
    family: ObstructionFamily,
    k: int,
    i: int,
    j: int,
    f: FiniteFunction | None = None,
    p: int | None = None,
    m: int | None = None,
    structure: FiniteStructure | None = None,
) -> HardnessMatrix:
    """Matrix whose columns lie in a relation but whose image under a cyclic f is constant p.

    p is f(i,..,i,j,..,j) when f is given; otherwise it must be passed.
    With m given, the chosen obstruction must be K_m-free.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if i == j:
        raise ValueError("i and j must differ")
    half = k // 2
    if f is not None:
        if f.arity != k:
            raise ValueError("function arity differs from k")
        p = f(*((i,) * half + (j,) * (k - half)))
    if p is None:
        raise ValueError("pass a candidate function or the color p")
    s = structure or build_G_F(family)
    rel = _relation_for(family, s, p, m)
    pattern = _pattern_rows(k, i, j)
    rows = pattern + [(p,) * k] * (rel.arity - len(pattern))
    if rel.arity < len(pattern):
        raise HypothesisUnmet(f"relation {rel.name} has arity {rel.arity} < {len(pattern)}")
    return HardnessMatrix(rel.name, p, rows)


# -- classification ---------------------------------------------------------------


class Verdict(str, enum.Enum):
    TriviallyP = "TriviallyP"
    NPComplete = "NPComplete"
    OutOfShape = "OutOfShape"


def shape_problems(family: ObstructionFamily, m: int) -> list[str]:
    """Reasons the family falls outside the dichotomy's shape hypotheses (empty if none)."""
    out = []
    if m < 3:
        out.append("m must be at least 3")
    if family.oriented:
        out.append("oriented obstructions")
    if family.vertex_color_universe:
        out.append("vertex-colored obstructions")
    r = family.colors
    full_km = _has_all_colorings(family, m)
    for idx, obs in enumerate(family.obstructions):
        cyc, clq = is_odd_cycle(obs), is_complete(obs) and obs.n >= 3
        if not (cyc or clq):
            out.append(f"obstruction {idx} is neither an odd cycle nor a clique on >= 3 vertices")
            continue
        if mono_color(obs) is not None:
            continue
        if clq and obs.n == m:
            if not full_km:
                out.append(f"obstruction {idx} is a non-monochromatic K{m} but not all {r}^{obs.m} colorings are present")
        elif cyc:
            out.append(f"obstruction {idx} is a non-monochromatic cycle")
    return out


def _has_all_colorings(family: ObstructionFamily, m: int) -> bool:
    if m < 2:
        return False
    keys = {canonical_key(o) for o in family.obstructions if is_complete(o) and o.n == m}
    if not keys:
        return False
    base = ColoredGraph(m, [(a, b) for a in range(m) for b in range(a + 1, m)], family.colors)
    for t in itertools.product(range(1, family.colors + 1), repeat=base.m):
        if canonical_key(base.with_coloring(dict(enumerate(t)))) not in keys:
            return False
    return True


def trivial_color(family: ObstructionFamily, m: int) -> int | None:
    """Least color whose monochromatic obstructions all contain K_m (vacuously if none)."""
    for i in range(1, family.colors + 1):
        if all(clique_number(o) >= m for o in mono_obstructions(family, i)):
            return i
    return None


@dataclass
class Classification:
    verdict: Verdict
    color: int | None = None
    problems: list[str] = field(default_factory=list)
    refuted: dict[int, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {"verdict": self.verdict.value}
        if self.color is not None:
            doc["color"] = self.color
        if self.problems:
            doc["problems"] = list(self.problems)
        if self.refuted:
            doc["cyclic_polymorphisms"] = {str(k): v for k, v in self.refuted.items()}
        return doc


def classify_report(family: ObstructionFamily, m: int, arities: Sequence[int] = (2, 3, 4)) -> Classification:
    problems = shape_problems(family, m)
    if problems:
        return Classification(Verdict.OutOfShape, problems=problems)
    c = trivial_color(family, m)
    if c is not None:
        return Classification(Verdict.TriviallyP, color=c)
    s = build_G_F(family)
    refuted = {}
    for k in arities:
        try:
            f = find_cyclic_polymorphism(s, k)
        except TooLarge:
            refuted[k] = "skipped (over budget)"
            continue
        if f is not None:
            raise LemmaCheckFailed(
                f"hardness contradicted: cyclic polymorphism of arity {k} found", f.to_dict()
            )
        refuted[k] = "none"
    return Classification(Verdict.NPComplete, refuted=refuted)


def classify(family: ObstructionFamily, m: int) -> Verdict:
    return classify_report(family, m).verdict
