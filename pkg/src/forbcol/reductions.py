"""The three reductions Col -> CSP(G_F) -> Ext -> Col, plus agreement checking."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .algebra import FiniteStructure, build_G_F, singleton_name
from .errors import FormatError, UnverifiedGadget
from .family import ObstructionFamily
from .gadgets import Gadget, GadgetKind, Sender, default_sender, verify_gadget
from .graph import ColoredGraph, EdgeSelector, amalgamate, disjoint_union, homomorphisms, quotient, vertex_matcher
from .solver import solve_col, solve_ext


@dataclass
class CspInstance:
    variables: int
    constraints: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    pins: dict[int, int] = field(default_factory=dict)

    def validate(self, s: FiniteStructure) -> None:
        arity = {rel.name: rel.arity for rel in s.relations}
        for name, vs in self.constraints:
            if name not in arity:
                raise FormatError(f"unknown relation {name!r}")
            if len(vs) != arity[name]:
                raise FormatError(f"relation {name!r} has arity {arity[name]}, got {len(vs)} variables")
            for v in vs:
                if not 0 <= v < self.variables:
                    raise FormatError(f"variable {v} out of range")
        for v, c in self.pins.items():
            if not 0 <= v < self.variables:
                raise FormatError(f"pinned variable {v} out of range")
            if not 1 <= c <= s.domain:
                raise FormatError(f"pin color {c} outside 1..{s.domain}")

    def to_dict(self) -> dict:
        return {
            "variables": self.variables,
            "constraints": [{"relation": n, "tuple": list(t)} for n, t in self.constraints],
            "pins": {str(v): c for v, c in sorted(self.pins.items())},
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CspInstance":
        try:
            return cls(
                int(doc["variables"]),
                [(c["relation"], tuple(int(v) for v in c["tuple"])) for c in doc.get("constraints", [])],
                {int(v): int(c) for v, c in doc.get("pins", {}).items()},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad CSP instance: {exc}") from exc


def load_csp(path) -> CspInstance:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return CspInstance.from_dict(doc)


@dataclass
class ReductionTrace:
    source: str
    input_fingerprint: str
    output_size: int
    maps: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "input_fingerprint": self.input_fingerprint,
            "output_size": self.output_size,
            "maps": self.maps,
        }


def _graph_fingerprint(g: ColoredGraph) -> str:
    return hashlib.sha256(json.dumps(g.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


def _csp_fingerprint(x: CspInstance) -> str:
    return hashlib.sha256(json.dumps(x.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


# -- CSP brute force ------------------------------------------------------------------


def solve_csp(x: CspInstance, s: FiniteStructure) -> dict[int, int] | None:
    """Backtracking over variables in index order; returns a satisfying assignment or None."""
    x.validate(s)
    rels = {rel.name: rel.tuples for rel in s.relations}
    due: list[list[tuple[frozenset, tuple[int, ...]]]] = [[] for _ in range(x.variables)]
    for name, vs in x.constraints:
        if not vs:
            if () not in rels[name]:
                return None
            continue
        due[max(vs)].append((rels[name], vs))
    for v, c in x.pins.items():
        due[v].append((frozenset({(c,)}), (v,)))
    val = [0] * x.variables

    def rec(v: int) -> bool:
        if v == x.variables:
            return True
        for c in range(1, s.domain + 1):
            val[v] = c
            if all(tuple(val[u] for u in vs) in tuples for tuples, vs in due[v]) and rec(v + 1):
                return True
        return False

    return dict(enumerate(val)) if rec(0) else None


# -- Col -> CSP -------------------------------------------------------------------------


def _edge_automorphisms(g: ColoredGraph) -> list[tuple[int, ...]]:
    """Edge permutations induced by the automorphisms of g."""
    out = set()
    for h in homomorphisms(g, g, vertex_ok=vertex_matcher(g, g)):
        if len(set(h)) == g.n:
            out.add(tuple(g.edge_index(h[a], h[b]) for a, b in g.edges))
    return sorted(out)


def col_to_csp(
    g: ColoredGraph, family: ObstructionFamily, structure: FiniteStructure | None = None
) -> tuple[CspInstance, ReductionTrace]:
    """One variable per edge, one constraint per distinct image of an obstruction graph."""
    s = structure or build_G_F(family)
    constraints: list[tuple[str, tuple[int, ...]]] = []
    seen = set()
    raw = 0
    for rel in s.relations:
        if rel.graph is None:
            continue
        src = rel.graph
        autos = _edge_automorphisms(src)
        for h in homomorphisms(src, g, vertex_ok=vertex_matcher(src, g)):
            raw += 1
            t = tuple(g.edge_index(h[a], h[b]) for a, b in src.edges)
            # the relation is invariant under automorphisms of its graph
            key = (rel.name, min(tuple(t[k] for k in perm) for perm in autos))
            if key not in seen:
                seen.add(key)
                constraints.append((rel.name, t))
    x = CspInstance(g.m, constraints, {})
    trace = ReductionTrace(
        "col", _graph_fingerprint(g), len(constraints),
        {"variable_edge": {str(k): k for k in range(g.m)}, "homomorphisms": raw},
    )
    return x, trace


# -- CSP -> Ext ----------------------------------------------------------------------------

_verified: dict[tuple[int, str], bool] = {}


def _check_equality(eq: Gadget, family: ObstructionFamily) -> None:
    if eq.kind is not GadgetKind.Equality:
        raise UnverifiedGadget(f"expected an equality gadget, got {eq.kind.value}")
    key = (id(eq), family.fingerprint())
    if key not in _verified:
        _verified[key] = eq.family_fingerprint == family.fingerprint() and verify_gadget(eq, family).passed
    if not _verified[key]:
        raise UnverifiedGadget("equality gadget fails verification for this family")


def csp_to_ext(
    x: CspInstance,
    family: ObstructionFamily,
    eq: Gadget,
    structure: FiniteStructure | None = None,
    check: bool = True,
) -> tuple[ColoredGraph, ReductionTrace]:
    """A copy of the obstruction graph per constraint, equalities through a hub edge per variable.

    Variables occurring once are represented by that occurrence; variables
    occurring twice or more get a fresh hub edge linked by an equality
    gadget to every occurrence.  Unused variables become isolated edges.
    Pins color the representative edge.
    """
    s = structure or build_G_F(family)
    x.validate(s)
    if check:
        _check_equality(eq, family)
    rels = {rel.name: rel for rel in s.relations}
    r = family.colors
    g = ColoredGraph(0, [], r, oriented=family.oriented)
    occurrences: list[list[int]] = [[] for _ in range(x.variables)]
    wanted: dict[int, set[int]] = {v: {c} for v, c in x.pins.items()}
    copies = []
    for name, vs in x.constraints:
        rel = rels[name]
        if rel.graph is None:
            # a singleton relation acts as a pin
            (v,), ((c,),) = vs, tuple(rel.tuples)
            wanted.setdefault(v, set()).add(c)
            continue
        base = g.m
        g = disjoint_union(g, rel.graph.uncolored())
        for k, v in enumerate(vs):
            occurrences[v].append(base + k)
        copies.append({"relation": name, "edges": list(range(base, base + rel.graph.m))})
    e_eq, f_eq = eq.edge("e^="), eq.edge("f^=")
    rep: dict[int, int] = {}
    gadgets = 0
    for v, occ in enumerate(occurrences):
        if len(occ) == 1:
            rep[v] = occ[0]
            continue
        rep[v] = hub = g.m
        g = disjoint_union(g, ColoredGraph(2, [(0, 1)], r, oriented=family.oriented))
        for o in occ:
            am = amalgamate(g, eq.graph, [(EdgeSelector(hub), EdgeSelector(e_eq)), (EdgeSelector(o), EdgeSelector(f_eq))])
            g = am.graph
            gadgets += 1
    g = g.recolored({rep[v]: min(cs) for v, cs in wanted.items()})
    contradictory = sorted(v for v, cs in wanted.items() if len(cs) > 1)
    if contradictory:
        if not family.obstructions:
            raise ValueError("conflicting pins cannot be expressed without obstructions")
        # a fully colored obstruction copy has no F-free extension
        g = disjoint_union(g, family.obstructions[0])
    extra = family.obstructions[0].m if contradictory else 0
    limit = sum(rels[n].arity for n, _ in x.constraints) + x.variables + gadgets * eq.graph.m + extra
    assert g.m <= limit, "reduction output exceeds its size bound"
    trace = ReductionTrace(
        "csp", _csp_fingerprint(x), g.m,
        {
            "variable_edge": {str(v): e for v, e in sorted(rep.items())},
            "occurrences": {str(v): occ for v, occ in enumerate(occurrences)},
            "constraint_copies": copies,
            "equality_gadgets": gadgets,
            "contradictory_variables": contradictory,
        },
    )
    return g, trace


# -- Ext -> Col ---------------------------------------------------------------------------------


def _check_determiners(dets: Mapping[int, Gadget], family: ObstructionFamily, needed: Iterable[int]) -> None:
    for c in needed:
        if c not in dets:
            raise UnverifiedGadget(f"no determiner for color {c}")
        det = dets[c]
        if det.kind not in (GadgetKind.Determiner, GadgetKind.RemoteDeterminer):
            raise UnverifiedGadget(f"gadget for color {c} is a {det.kind.value}")
        if det.params.get("i") != c:
            raise UnverifiedGadget(f"gadget for color {c} determines {det.params.get('i')}")
        key = (id(det), family.fingerprint())
        if key not in _verified:
            _verified[key] = det.family_fingerprint == family.fingerprint() and verify_gadget(det, family).passed
        if not _verified[key]:
            raise UnverifiedGadget(f"determiner for color {c} fails verification")


def ext_to_col(
    x: ColoredGraph,
    family: ObstructionFamily,
    dets: Mapping[int, Gadget],
    check: bool = True,
    rigidify: bool = True,
    sender: Sender | None = None,
) -> tuple[ColoredGraph, ReductionTrace]:
    """Glue a determiner copy on every precolored edge, share colored edges per color, erase colors.

    With ``rigidify`` the shared colored edges are tied together before the
    colors are erased: an uncolored sender links every colored edge to a
    hub edge of its color, and hubs of different colors are forced apart.
    Any coloring of the output then colors the shared edges like the
    determiners did, up to a permutation of the colors.  Without a sender
    (none found for the family) the output is the bare construction.
    """
    colored = sorted(x.edge_colors.items())
    used = sorted({c for _, c in colored})
    if check:
        _check_determiners(dets, family, used)
    if not colored:
        return x, ReductionTrace("ext", _graph_fingerprint(x), x.m, {"determiner_copies": {}})
    g = x.uncolored()
    labels: list[object] = list(range(x.n))
    anchor: dict[int, dict[int, object]] = {}  # color -> determiner vertex -> shared label
    copies = {}
    for e, c in colored:
        det = dets[c]
        f = det.edge("f^i")
        offset = g.n
        g = disjoint_union(g, det.graph)
        u, v = x.edges[e]
        a, b = det.graph.edges[f]
        pinned = {w for k in det.graph.edge_colors for w in det.graph.edges[k]}
        if a in pinned or b in pinned:
            raise UnverifiedGadget(f"determiner for color {c} is not remote")
        lab = [offset + w for w in range(det.graph.n)]
        lab[a], lab[b] = labels[u], labels[v]
        shared = anchor.setdefault(c, {})
        for w in sorted(pinned):
            if w in shared:
                lab[w] = shared[w]
            else:
                shared[w] = lab[w]
        labels.extend(lab)
        copies[str(e)] = {"color": c, "offset": offset}
    merged = quotient(g, labels)
    links = 0
    if rigidify and sender is None:
        sender = default_sender(family)
    if rigidify and sender is not None:
        merged, links = _rigidify(merged, family, sender, used)
    out = merged.uncolored()
    bound = x.m + len(colored) * max(dets[c].graph.m for c in used)
    if links:
        bound += links * sender.graph.m + len(used) * (2 + family.colors * family.max_vertices**2)
    assert out.m <= bound, "reduction output exceeds its size bound"
    trace = ReductionTrace(
        "ext", _graph_fingerprint(x), out.m,
        {
            "determiner_copies": copies,
            "edge_map": {str(k): k for k in range(x.m)},
            "sender_links": links,
        },
    )
    return out, trace


def _rigidify(g: ColoredGraph, family: ObstructionFamily, sender: Sender, used: list[int]) -> tuple[ColoredGraph, int]:
    from .shapes import ground_graph

    r = family.colors
    hub = {}
    for c in used:
        hub[c] = g.m
        g = disjoint_union(g, ColoredGraph(2, [(0, 1)], r, oriented=family.oriented))
    links = 0

    def link(a: int, b: int) -> None:
        nonlocal g, links
        pairs = [(EdgeSelector(a), EdgeSelector(sender.left)), (EdgeSelector(b), EdgeSelector(sender.right))]
        g = amalgamate(g, sender.graph, pairs).graph
        links += 1

    for k, c in sorted(g.edge_colors.items()):
        if c in hub:
            link(hub[c], k)
    for pos, c in enumerate(used):
        for c2 in used[pos + 1:]:
            # ground graph of p: one edge follows hub c2, the rest hub c, so c and c2 never share p
            for p in range(1, r + 1):
                base = g.m
                g = disjoint_union(g, ground_graph(family, p))
                for k in range(base, g.m):
                    link(hub[c2] if k == base else hub[c], k)
    return g, links


# -- agreement checking -------------------------------------------------------------------


@dataclass
class AgreementReport:
    total: int = 0
    agreed: int = 0
    disagreements: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.agreed == self.total

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "agreed": self.agreed,
            "passed": self.passed,
            "disagreements": self.disagreements,
        }


def check_reduction_pair(
    oracle_a: Callable[[object], bool],
    oracle_b: Callable[[object], bool],
    instances: Iterable,
    count: int | None = None,
    describe: Callable[[object], object] = repr,
) -> AgreementReport:
    """Run instances through two deciders and collect every disagreement."""
    report = AgreementReport()
    for n, inst in enumerate(instances):
        if count is not None and n >= count:
            break
        a, b = bool(oracle_a(inst)), bool(oracle_b(inst))
        report.total += 1
        if a == b:
            report.agreed += 1
        else:
            report.disagreements.append({"index": n, "a": a, "b": b, "instance": describe(inst)})
    return report


def generate_csp_instances(s: FiniteStructure, count: int, max_variables: int = 6) -> list[CspInstance]:
    """Instance n comes from a generator seeded with n, so the sequence never changes."""
    rels = [rel for rel in s.relations if rel.graph is not None]
    out = []
    for n in range(count):
        rng = random.Random(n)
        nv = rng.randint(1, max_variables)
        cons = []
        for _ in range(rng.randint(1, 4)):
            rel = rels[rng.randrange(len(rels))]
            cons.append((rel.name, tuple(rng.randrange(nv) for _ in range(rel.arity))))
        pins = {}
        for v in range(nv):
            if rng.random() < 0.3:
                pins[v] = rng.randint(1, s.domain)
        if rng.random() < 0.2:
            v = rng.randrange(nv)
            cons.append((singleton_name(rng.randint(1, s.domain)), (v,)))
        out.append(CspInstance(nv, cons, pins))
    return out


def csp_ext_agreement(
    family: ObstructionFamily, eq: Gadget, instances: Sequence[CspInstance], structure: FiniteStructure | None = None
) -> AgreementReport:
    s = structure or build_G_F(family)
    _check_equality(eq, family)
    return check_reduction_pair(
        lambda inst: solve_csp(inst, s) is not None,
        lambda inst: solve_ext(csp_to_ext(inst, family, eq, s, check=False)[0], family).sat,
        instances,
        describe=lambda inst: inst.to_dict(),
    )


def col_csp_agreement(family: ObstructionFamily, graphs: Sequence[ColoredGraph], structure=None) -> AgreementReport:
    s = structure or build_G_F(family)
    return check_reduction_pair(
        lambda g: solve_col(g, family).sat,
        lambda g: solve_csp(col_to_csp(g, family, s)[0], s) is not None,
        graphs,
        describe=lambda g: g.to_dict(),
    )


def ext_col_agreement(family: ObstructionFamily, dets: Mapping[int, Gadget], graphs: Sequence[ColoredGraph]) -> AgreementReport:
    _check_determiners(dets, family, sorted(dets))
    return check_reduction_pair(
        lambda g: solve_ext(g, family).sat,
        lambda g: solve_col(ext_to_col(g, family, dets, check=False)[0], family).sat,
        graphs,
        describe=lambda g: g.to_dict(),
    )
