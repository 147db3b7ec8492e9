"""Gadget constructions: determiners, pair gadgets, chains, equality gadgets.

Every builder verifies what it built with solver queries and raises
:class:`LemmaCheckFailed` if a forcing property does not hold.  Greedy and
selection steps always go by ascending edge index, so a family always
yields the same gadget file.
"""

from __future__ import annotations

import enum
import itertools
import json
import warnings
from dataclasses import dataclass, field

from .certificates import CLOSURE, GLUE, SIMULTANEOUS, SafetyCertificate
from .errors import (
    ForbColError,
    IncompleteInputs,
    LemmaCheckFailed,
    NotUncolorable,
    RemotenessFailed,
)
from .family import ObstructionFamily, canonical_key
from .graph import (
    UNREACHABLE,
    ColoredGraph,
    EdgeSelector,
    amalgamate,
    complete_graph,
    cycle_graph,
    disjoint_union,
    edge_distance,
    set_distance,
)
from .shapes import ground_graph, ground_shape
from .solver import ExtensionOracle, Status, enumerate_extensions, solve_col

ENUMERATION_LIMIT = 16


class GadgetKind(str, enum.Enum):
    BaseH = "BaseH"
    Ci = "Ci"
    DNegI = "DNegI"
    Determiner = "Determiner"
    RemoteDeterminer = "RemoteDeterminer"
    Hij = "Hij"
    GijChain = "GijChain"
    Equality = "Equality"


@dataclass
class Gadget:
    graph: ColoredGraph
    kind: GadgetKind
    distinguished: dict[str, int]
    family_fingerprint: str
    params: dict = field(default_factory=dict)
    certificate: SafetyCertificate | None = None
    safe: tuple[str, ...] = ()

    def __post_init__(self):
        self.kind = GadgetKind(self.kind)
        for label, e in self.distinguished.items():
            self.graph.check_edge(e)

    def edge(self, label: str) -> int:
        return self.distinguished[label]

    def to_dict(self) -> dict:
        doc = self.graph.to_dict()
        doc.update(
            kind=self.kind.value,
            distinguished=dict(self.distinguished),
            family_fingerprint=self.family_fingerprint,
            params=dict(self.params),
            safe=list(self.safe),
        )
        if self.certificate is not None:
            doc["certificate"] = self.certificate.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Gadget":
        cert = doc.get("certificate")
        return cls(
            ColoredGraph.from_dict(doc),
            GadgetKind(doc["kind"]),
            {k: int(v) for k, v in doc["distinguished"].items()},
            doc.get("family_fingerprint", ""),
            dict(doc.get("params", {})),
            SafetyCertificate.from_dict(cert) if cert else None,
            tuple(doc.get("safe", ())),
        )


def save_gadget(g: Gadget, path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def load_gadget(path) -> Gadget:
    with open(path) as fh:
        return Gadget.from_dict(json.load(fh))


# -- helpers ------------------------------------------------------------------


def _fail(message: str, query=None):
    raise LemmaCheckFailed(message, query)


def _require(cond: bool, message: str, query=None) -> None:
    if not cond:
        _fail(message, query)


def _oriented_selector(g: ColoredGraph, e: int, first: int) -> EdgeSelector:
    """Selector on edge e reading ``first`` as its first endpoint."""
    u, v = g.edges[e]
    if first == u:
        return EdgeSelector(e, False)
    if first == v:
        return EdgeSelector(e, True)
    raise ValueError(f"vertex {first} is not an endpoint of edge {e}")


def uncovered_endpoints(g: ColoredGraph, e: int) -> list[int]:
    """Endpoints of e that touch no colored edge."""
    touched = set()
    for k in g.edge_colors:
        touched.update(g.edges[k])
    return [v for v in g.edges[e] if v not in touched]


def remoteness(g: ColoredGraph, e: int):
    """Distance from e to the precolored edges (UNREACHABLE if none reachable)."""
    dom = list(g.edge_colors)
    if not dom:
        return UNREACHABLE
    return set_distance(g, e, dom)


# -- base graph and C^i ------------------------------------------------------------


def minimize_uncolorable(witness: ColoredGraph, family: ObstructionFamily) -> ColoredGraph:
    """Delete edges (ascending index) while the graph stays uncolorable."""
    if solve_col(witness, family).sat:
        raise NotUncolorable("the witness graph has an F-free coloring")
    dropped: set[int] = set()
    for k in range(witness.m):
        trial = witness.without_edges(dropped | {k})
        if not solve_col(trial, family).sat:
            dropped.add(k)
    g, _ = witness.without_edges(dropped).drop_isolated()
    return g


def build_base_H(witness: ColoredGraph, family: ObstructionFamily) -> tuple[ColoredGraph, int]:
    """Minimal uncolorable graph minus its first edge, and that edge's lower endpoint x.

    Verified: H is colorable, and for every color i the edges at x cannot all avoid i.
    """
    gmin = minimize_uncolorable(witness, family)
    x = min(gmin.edges[0])
    h = gmin.without_edges([0])
    oracle = ExtensionOracle(h, family)
    _require(oracle.solve().sat, "H is not F-free colorable")
    at_x = h.incident_edges(x)
    for i in range(1, family.colors + 1):
        res = oracle.solve(forbid={e: {i} for e in at_x})
        _require(not res.sat, f"edges at x can avoid color {i}", {"avoid": i, "edges": at_x})
    return h, x


def base_gadget(h: ColoredGraph, x: int, family: ObstructionFamily) -> Gadget:
    at_x = h.incident_edges(x)
    return Gadget(h, GadgetKind.BaseH, {"x-edge": at_x[0]}, family.fingerprint(), {"x": x})


def build_C_i(h: ColoredGraph, x: int, i: int, family: ObstructionFamily) -> Gadget:
    """Color edges at x greedily with colors other than i while an extension survives."""
    r = family.colors
    if r < 2:
        _fail("a forcing gadget needs at least two colors")
    if not 1 <= i <= r:
        raise ValueError(f"color {i} outside 1..{r}")
    oracle = ExtensionOracle(h, family)
    pins: dict[int, int] = {}
    at_x = h.incident_edges(x)
    for e in at_x:
        for c in range(1, r + 1):
            if c == i:
                continue
            if oracle.solve({**pins, e: c}).sat:
                pins[e] = c
                break
    rest = [e for e in at_x if e not in pins]
    _require(bool(rest), f"every edge at x took a color other than {i}")
    f = rest[0]
    g = h.recolored(pins)
    gadget = Gadget(g, GadgetKind.Ci, {"f^i": f}, family.fingerprint(), {"i": i, "x": x})
    _verify_forcing(gadget, family, "f^i", i)
    return gadget


def _verify_forcing(gadget: Gadget, family, label: str, i: int) -> None:
    oracle = ExtensionOracle(gadget.graph, family)
    f = gadget.edge(label)
    _require(oracle.solve().sat, f"{gadget.kind.value}: no F-free extension")
    for j in range(1, family.colors + 1):
        res = oracle.solve({f: j})
        if j == i:
            _require(res.sat, f"{gadget.kind.value}: pin {label}={j} has no extension", {label: j})
        else:
            _require(not res.sat, f"{gadget.kind.value}: pin {label}={j} extends", {label: j})


# -- D^{not i} and determiners ------------------------------------------------------


def build_D_neg_i(ci: Gadget, i: int, family: ObstructionFamily) -> Gadget:
    """Ground graph with C^i copies on every edge touching f, other ground edges colored i.

    The copies sit with their vertex x on the endpoint away from f, so
    both endpoints of f stay free of colored edges.
    """
    ground = ground_graph(family, i)
    shape, n = ground_shape(family, i)
    y, z = ground.edges[0]
    x = ci.params["x"]
    fi = ci.edge("f^i")
    cu, cv = ci.graph.edges[fi]
    other = cv if cu == x else cu
    g = ground
    colors = {}
    copies = 0
    for k in range(1, ground.m):
        u, v = ground.edges[k]
        if {u, v} & {y, z}:
            near = u if u in (y, z) else v
            far = v if near == u else u
            am = amalgamate(
                g,
                ci.graph,
                [(_oriented_selector(g, k, near), _oriented_selector(ci.graph, fi, other))],
            )
            del far
            g = am.graph
            copies += 1
        else:
            colors[k] = i
    g = g.recolored(colors)
    cert = SafetyCertificate.lemma("dneg", ("f^-i",), shape=shape, n=n, color=i, copies=copies)
    gadget = Gadget(
        g, GadgetKind.DNegI, {"f^-i": 0}, family.fingerprint(), {"i": i, "copies": copies}, cert, ("f^-i",)
    )
    oracle = ExtensionOracle(g, family)
    _require(oracle.solve().sat, "D^-i has no F-free extension")
    _require(not oracle.solve({0: i}).sat, f"D^-i lets f^-i take color {i}", {"f^-i": i})
    _require(bool(uncovered_endpoints(g, 0)), "both endpoints of f^-i touch colored edges")
    return gadget


def build_determiner(i: int, family: ObstructionFamily, dnegs: dict[int, Gadget]) -> Gadget:
    """Glue D^{not j} for all j != i along their distinguished edges."""
    r = family.colors
    missing = [j for j in range(1, r + 1) if j != i and j not in dnegs]
    if missing:
        raise IncompleteInputs(f"missing D^-j gadgets for colors {missing}")
    order = [j for j in range(1, r + 1) if j != i]
    if not order:
        _fail("a determiner needs at least two colors")
    first = dnegs[order[0]]
    g = first.graph
    f = first.edge("f^-i")
    free_end = uncovered_endpoints(g, f)
    _require(bool(free_end), "D^-j has no uncovered endpoint")
    anchor = free_end[0]
    cert = first.certificate
    for j in order[1:]:
        d = dnegs[j]
        df = d.edge("f^-i")
        dfree = uncovered_endpoints(d.graph, df)
        _require(bool(dfree), "D^-j has no uncovered endpoint")
        am = amalgamate(
            g,
            d.graph,
            [(_oriented_selector(g, f, anchor), _oriented_selector(d.graph, df, dfree[0]))],
        )
        g = am.graph
        if cert is not None and d.certificate is not None:
            cert = SafetyCertificate.glued(cert, d.certificate, [("f^-i", "f^-i", "f^-i")], ("f^-i",))
    if cert is not None:
        cert = cert.relabel({"f^-i": "f^i"})
    gadget = Gadget(g, GadgetKind.Determiner, {"f^i": f}, family.fingerprint(), {"i": i}, cert, ("f^i",))
    _verify_forcing(gadget, family, "f^i", i)
    _require(bool(uncovered_endpoints(g, f)), "merged endpoint touches a colored edge")
    return gadget


def build_determiners(witness: ColoredGraph, family: ObstructionFamily) -> dict[int, Gadget]:
    """The whole pipeline: base graph, C^i, D^{not i}, then a determiner per color."""
    h, x = build_base_H(witness, family)
    r = family.colors
    cis = {i: build_C_i(h, x, i, family) for i in range(1, r + 1)}
    dnegs = {i: build_D_neg_i(cis[i], i, family) for i in range(1, r + 1)}
    return {i: build_determiner(i, family, dnegs) for i in range(1, r + 1)}


def _glue_on_colored(base: Gadget, towers: dict[int, Gadget]) -> tuple[ColoredGraph, list[SafetyCertificate]]:
    """Replace each colored edge of base by a copy of the tower of its color (edge left uncolored)."""
    g = base.graph
    certs = []
    colored = sorted(base.graph.edge_colors.items())
    for e, c in colored:
        t = towers[c]
        tf = t.edge("f^i")
        free = uncovered_endpoints(t.graph, tf)
        near = _nearer_endpoint(g, base.edge("f^i"), e)
        sel_t = _oriented_selector(t.graph, tf, free[0]) if free else EdgeSelector(tf)
        am = amalgamate(g, t.graph, [(_oriented_selector(g, e, near), sel_t)])
        g = am.graph.recolored({e: None})
        if t.certificate is not None:
            certs.append(t.certificate)
    return g, certs


def _nearer_endpoint(g: ColoredGraph, f: int, e: int) -> int:
    from .graph import _bfs

    dist = _bfs(g, g.edges[f])
    u, v = g.edges[e]
    du, dv = dist[u], dist[v]
    if du < 0:
        return v
    if dv < 0:
        return u
    return u if du <= dv else v


def make_remote(det: Gadget, d: int, dets: dict[int, Gadget]) -> Gadget:
    """Grow determiner towers until the distinguished edge is d away from every colored edge."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    i = det.params["i"]
    missing = [c for c in range(1, det.graph.colors + 1) if c not in dets]
    if missing:
        raise IncompleteInputs(f"missing determiners for colors {missing}")
    f = det.edge("f^i")
    dist = remoteness(det.graph, f)
    if dist is UNREACHABLE:
        raise RemotenessFailed("distinguished edge has no reachable precolored edge")
    if dist >= d:
        return Gadget(
            det.graph,
            GadgetKind.RemoteDeterminer,
            dict(det.distinguished),
            det.family_fingerprint,
            {**det.params, "d": d, "level": 1},
            det.certificate,
            det.safe,
        )
    towers = dict(dets)
    level = 1
    current = det
    while True:
        level += 1
        fresh = {}
        for c in sorted(dets):
            base = det if c == i else dets[c]
            g, certs = _glue_on_colored(base, towers)
            cert = None
            if base.certificate is not None:
                cert = SafetyCertificate(
                    CLOSURE,
                    ("f^i",),
                    (base.certificate, *certs[:1]),
                    fact={"hypothesis": "edge-amalgamation closure of the forbidden class", "level": level},
                )
            fresh[c] = Gadget(
                g, GadgetKind.RemoteDeterminer, {"f^i": base.edge("f^i")}, base.family_fingerprint,
                {"i": c, "level": level}, cert, ("f^i",),
            )
        towers = fresh
        current = towers[i]
        dist = remoteness(current.graph, f)
        if dist is UNREACHABLE:
            raise RemotenessFailed("precolored edges became unreachable")
        if dist >= d:
            break
        if dist < level - 1:
            raise RemotenessFailed(f"distance {dist} did not grow at level {level}")
    current.params["d"] = d
    return current


def make_remote_by_sender(det: Gadget, d: int, sender: "Sender") -> Gadget:
    """Push the distinguished edge away by chaining uncolored senders onto it.

    Unlike towers, this adds no precolored edges, so the result keeps the
    handful of colored edges of ``det``.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    g = det.graph
    f = det.edge("f^i")
    dist = remoteness(g, f)
    if dist is UNREACHABLE:
        raise RemotenessFailed("distinguished edge has no reachable precolored edge")
    hops = 0
    while dist < d:
        am = amalgamate(g, sender.graph, [(EdgeSelector(f), EdgeSelector(sender.left))])
        g, f = am.graph, am.right_edges[sender.right]
        hops += 1
        new = remoteness(g, f)
        if new is UNREACHABLE or new <= dist:
            raise RemotenessFailed(f"sender hop {hops} did not increase the distance")
        dist = new
    return Gadget(
        g, GadgetKind.RemoteDeterminer, {"f^i": f}, det.family_fingerprint,
        {"i": det.params["i"], "d": d, "level": 1, "sender_hops": hops}, None, (),
    )


def verify_determiner_pins(gadget: Gadget, family: ObstructionFamily) -> None:
    _verify_forcing(gadget, family, "f^i", gadget.params["i"])


# -- pair gadgets and equality ----------------------------------------------------


def _partial_ground(family, p: int, keep: list[int]) -> tuple[ColoredGraph, str, int]:
    """Ground graph of color p with every edge except ``keep`` colored p."""
    ground = ground_graph(family, p)
    shape, n = ground_shape(family, p)
    g = ground.recolored({k: p for k in range(ground.m) if k not in keep})
    return g, shape, n


def build_H_ij(i: int, j: int, family: ObstructionFamily) -> Gadget:
    """Edge restricted to colors {i, j}: a p-colored ground graph minus one edge for every other p."""
    r = family.colors
    if i == j or not (1 <= i <= r and 1 <= j <= r):
        raise ValueError("need two distinct colors in range")
    g = ColoredGraph(2, [(0, 1)], r)
    cert = None
    for p in range(1, r + 1):
        if p in (i, j):
            continue
        hp, shape, n = _partial_ground(family, p, [0])
        leaf = SafetyCertificate.leaf(shape, n, p, 1, ("f^ij",))
        am = amalgamate(g, hp, [(EdgeSelector(0), EdgeSelector(0))])
        g = am.graph
        cert = leaf if cert is None else SafetyCertificate.glued(cert, leaf, [("f^ij", "f^ij", "f^ij")], ("f^ij",))
    gadget = Gadget(g, GadgetKind.Hij, {"f^ij": 0}, family.fingerprint(), {"i": i, "j": j}, cert, ("f^ij",))
    oracle = ExtensionOracle(g, family)
    for p in range(1, r + 1):
        res = oracle.solve({0: p})
        if p in (i, j):
            _require(res.sat, f"H^ij: pin {p} has no extension", {"f^ij": p})
        else:
            _require(not res.sat, f"H^ij: pin {p} extends", {"f^ij": p})
    return gadget


def _second_edge(g: ColoredGraph, first: int) -> int:
    a, b = g.edges[first]
    for k, (u, v) in enumerate(g.edges):
        if not {u, v} & {a, b}:
            return k
    raise LemmaCheckFailed("ground graph has no two disjoint edges")


def _g1(i: int, j: int, family) -> tuple[ColoredGraph, int, int, int, list]:
    """One link of the chain: (graph, center, e2i, e2j, leaves)."""
    si, ni = ground_shape(family, i)
    sj, nj = ground_shape(family, j)
    r = family.colors
    if ni == 3 and nj == 3:
        # a=0, b=1, c=2, d=3: ab center, bc=e2i, ac colored i, ad=e2j, bd colored j
        g = ColoredGraph(4, [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3)], r, {2: i, 4: j})
        leaves = [
            SafetyCertificate.leaf("cycle", 3, i, 2, ("center", "e2i")),
            SafetyCertificate.leaf("cycle", 3, j, 2, ("center", "e2j")),
        ]
        return g, 0, 1, 3, leaves
    gi = ground_graph(family, i)
    gj = ground_graph(family, j)
    e2i = _second_edge(gi, 0)
    e2j = _second_edge(gj, 0)
    hi = gi.recolored({k: i for k in range(gi.m) if k not in (0, e2i)})
    hj = gj.recolored({k: j for k in range(gj.m) if k not in (0, e2j)})
    am = amalgamate(hi, hj, [(EdgeSelector(0), EdgeSelector(0))])
    leaves = [
        SafetyCertificate.leaf(si, ni, i, 2, ("center", "e2i")),
        SafetyCertificate.leaf(sj, nj, j, 2, ("center", "e2j")),
    ]
    return am.graph, 0, e2i, am.right_edges[e2j], leaves


def build_G_ij_chain(i: int, j: int, d: int, family: ObstructionFamily, hij: Gadget | None = None) -> Gadget:
    """d links in a row, H^{i,j} on every inner uncolored edge.

    Forbids (e2i, e2j) = (i, j) and allows every other pair.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    g1, center, e2i, e2j, leaves = _g1(i, j, family)
    g = g1
    first_i, last_j = e2i, e2j
    for _ in range(d - 1):
        am = amalgamate(g, g1, [(EdgeSelector(last_j), EdgeSelector(e2i))])
        g = am.graph
        last_j = am.right_edges[e2j]
    if hij is None:
        hij = build_H_ij(i, j, family)
    inner = [k for k in g.uncolored_edges() if k not in (first_i, last_j)]
    if hij.graph.m > 1:
        hf = hij.edge("f^ij")
        for k in inner:
            g = amalgamate(g, hij.graph, [(EdgeSelector(k), EdgeSelector(hf))]).graph
    cert = _chain_certificate(leaves, hij, d)
    gadget = Gadget(
        g, GadgetKind.GijChain, {"e_2^i": first_i, "e_2^j": last_j}, family.fingerprint(),
        {"i": i, "j": j, "d": d}, cert, ("e_2^i", "e_2^j"),
    )
    dist = edge_distance(g, first_i, last_j)
    _require(dist is not UNREACHABLE and dist >= d, f"chain ends at distance {dist} < {d}")
    oracle = ExtensionOracle(g, family)
    r = family.colors
    for p in range(1, r + 1):
        for q in range(1, r + 1):
            res = oracle.solve({first_i: p, last_j: q})
            if (p, q) == (i, j):
                _require(not res.sat, "chain admits the forbidden pair", {"e_2^i": p, "e_2^j": q})
            else:
                _require(res.sat, f"chain rejects pair ({p},{q})", {"e_2^i": p, "e_2^j": q})
    return gadget


def _chain_certificate(leaves, hij: Gadget, d: int) -> SafetyCertificate:
    left, right = leaves
    link = SafetyCertificate.glued(left, right, [("center", "center", "center")], ("e2i", "e2j", "center"))
    if hij.certificate is not None:
        link = SafetyCertificate.glued(
            link, hij.certificate, [("center", "f^ij", "center")], ("e2i", "e2j")
        )
    chain = link
    for _ in range(d - 1):
        chain = SafetyCertificate.glued(chain, link, [("e2j", "e2i", "inner")], ("e2i", "e2j"))
    return chain.relabel({"e2i": "e_2^i", "e2j": "e_2^j"})


def default_equality_d(family: ObstructionFamily) -> int:
    return family.max_vertices + 1


def build_equality_gadget(family: ObstructionFamily, d: int | None = None) -> Gadget:
    """Two edges forced to equal colors, every equal pair achievable."""
    r = family.colors
    size = family.max_vertices
    if d is None:
        d = default_equality_d(family)
    if r == 1:
        g = ColoredGraph(4, [(0, 1), (2, 3)], 1)
        return Gadget(g, GadgetKind.Equality, {"e^=": 0, "f^=": 1}, family.fingerprint(), {"d": d}, None, ("e^=", "f^="))
    simultaneous = d > size
    if not simultaneous:
        warnings.warn(
            f"d={d} does not exceed the largest obstruction ({size} vertices); "
            "the certificate covers the two edges one at a time only",
            stacklevel=2,
        )
    acc = None
    acc_e = acc_f = -1
    cert = None
    for i, j in itertools.combinations(range(1, r + 1), 2):
        chain = build_G_ij_chain(i, j, d, family)
        pair, left, right, pcert = _double_chain(chain, d, size, simultaneous)
        if acc is None:
            acc, acc_e, acc_f, cert = pair, left, right, pcert
            continue
        am = amalgamate(acc, pair, [(EdgeSelector(acc_e), EdgeSelector(left)), (EdgeSelector(acc_f), EdgeSelector(right))])
        acc = am.graph
        cert = _pair_glue(cert, pcert, d, size, simultaneous)
    gadget = Gadget(
        acc, GadgetKind.Equality, {"e^=": acc_e, "f^=": acc_f}, family.fingerprint(),
        {"d": d, "simultaneous": simultaneous}, cert, ("e^=", "f^="),
    )
    report = verify_gadget(gadget, family)
    failed = [c for c in report.conditions if not c.passed and c.name.startswith("pin")]
    _require(not failed, "equality gadget: " + "; ".join(c.detail for c in failed))
    return gadget


def assemble_equality(chains: list[Gadget], family, d: int) -> Gadget:
    """Equality gadget from explicit chains (two per color pair); used to test incomplete builds."""
    acc = chains[0].graph
    e, f = chains[0].edge("e_2^i"), chains[0].edge("e_2^j")
    for ch in chains[1:]:
        am = amalgamate(acc, ch.graph, [(EdgeSelector(e), EdgeSelector(ch.edge("e_2^j"))), (EdgeSelector(f), EdgeSelector(ch.edge("e_2^i")))])
        acc = am.graph
    return Gadget(acc, GadgetKind.Equality, {"e^=": e, "f^=": f}, family.fingerprint(), {"d": d}, None, ("e^=", "f^="))


def _double_chain(chain: Gadget, d: int, size: int, simultaneous: bool):
    a_i, a_j = chain.edge("e_2^i"), chain.edge("e_2^j")
    am = amalgamate(
        chain.graph,
        chain.graph,
        [(EdgeSelector(a_i), EdgeSelector(a_j)), (EdgeSelector(a_j), EdgeSelector(a_i))],
    )
    cert = None
    if chain.certificate is not None:
        rule = SIMULTANEOUS if simultaneous else GLUE
        pairs = [("e_2^i", "e_2^j", "e^="), ("e_2^j", "e_2^i", "f^=")]
        if not simultaneous:
            pairs = pairs[:1]
        cert = SafetyCertificate.glued(
            chain.certificate, chain.certificate, pairs, ("e^=", "f^=") if simultaneous else ("e^=",),
            rule=rule, d=d, max_obstruction=size,
        )
    return am.graph, a_i, a_j, cert


def _pair_glue(left, right, d, size, simultaneous):
    if left is None or right is None:
        return None
    if simultaneous:
        return SafetyCertificate.glued(
            left, right, [("e^=", "e^=", "e^="), ("f^=", "f^=", "f^=")], ("e^=", "f^="),
            rule=SIMULTANEOUS, d=d, max_obstruction=size,
        )
    return SafetyCertificate.glued(left, right, [("e^=", "e^=", "e^=")], ("e^=",))


# -- uncolored senders ------------------------------------------------------------


@dataclass(frozen=True)
class Sender:
    """Uncolored graph in which two vertex-disjoint edges get equal colors in every F-free coloring."""

    graph: ColoredGraph
    left: int
    right: int


def _compose(s1: Sender, s2: Sender) -> Sender:
    am = amalgamate(s1.graph, s2.graph, [(EdgeSelector(s1.right), EdgeSelector(s2.left))])
    return Sender(am.graph, s1.left, am.right_edges[s2.right])


def sender_distance(family: ObstructionFamily) -> int:
    """Distance between sender ends that keeps obstruction images inside one piece."""
    return max(2, family.max_vertices // 2 + 1)


def find_sender(base: ColoredGraph, family: ObstructionFamily, min_distance: int | None = None) -> Sender | None:
    """Search an uncolored graph for a pair of edges forced equal, then chain copies.

    Copies are chained until the two ends are vertex-disjoint and at least
    ``min_distance`` apart.
    """
    if min_distance is None:
        min_distance = sender_distance(family)
    base = base.uncolored()
    exts = enumerate_extensions(base, family, 1 << 20)
    if not exts:
        return None
    pairs = [
        (a, b)
        for a in range(base.m)
        for b in range(a + 1, base.m)
        if all(t[a] == t[b] for t in exts)
    ]
    if not pairs:
        return None
    a, b = pairs[0]
    shared = set(base.edges[a]) & set(base.edges[b])
    if shared:
        # second copy: its edge a, read (far end, w), lands on our edge b read (w, far end)
        (w,) = shared
        sel = [(EdgeSelector(b, base.edges[b][0] != w), EdgeSelector(a, base.edges[a][0] == w))]
        try:
            am = amalgamate(base, base, sel)
        except ForbColError:
            return None
        sender = Sender(am.graph, a, am.right_edges[b])
    else:
        sender = Sender(base, a, b)
    step = sender
    for _ in range(8):
        ends = set(sender.graph.edges[sender.left]) & set(sender.graph.edges[sender.right])
        dist = edge_distance(sender.graph, sender.left, sender.right)
        if not ends and dist is not UNREACHABLE and dist >= min_distance:
            return sender
        sender = _compose(sender, step)
    return None


_sender_cache: dict[str, Sender | None] = {}


def default_sender(family: ObstructionFamily, base: ColoredGraph | None = None) -> Sender | None:
    """Sender from a base graph (defaults to the library witness minus its first edge)."""
    key = family.fingerprint() if base is None else family.fingerprint() + json.dumps(base.to_dict(), sort_keys=True)
    if key not in _sender_cache:
        if base is None:
            from .library import witness_for

            witness = witness_for(family)
            if witness is None:
                _sender_cache[key] = None
                return None
            base = minimize_uncolorable(witness, family).without_edges([0])
        _sender_cache[key] = find_sender(base, family)
    return _sender_cache[key]


# -- verification ---------------------------------------------------------------


@dataclass
class Condition:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    kind: str
    conditions: list[Condition]
    mode: str
    queries: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failures(self) -> list[Condition]:
        return [c for c in self.conditions if not c.passed]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "mode": self.mode,
            "queries": self.queries,
            "conditions": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.conditions],
        }


class _PinTable:
    """Which color tuples on some edges extend: by enumeration when small, else by solver."""

    def __init__(self, g: ColoredGraph, family, edges: list[int]):
        self.g, self.family, self.edges = g, family, edges
        self.queries = 0
        if len(g.uncolored_edges()) <= ENUMERATION_LIMIT:
            self.mode = "enumeration"
            exts = enumerate_extensions(g, family, 1 << (ENUMERATION_LIMIT + 1))
            self.table = {tuple(t[e] for e in edges) for t in exts}
            self.any = bool(exts)
        else:
            self.mode = "solver"
            self.oracle = ExtensionOracle(g, family)
            self.any = self.oracle.solve().sat
            self.queries += 1

    def extends(self, colors: tuple[int, ...]) -> bool:
        if self.mode == "enumeration":
            return colors in self.table
        self.queries += 1
        pins = {}
        for e, c in zip(self.edges, colors):
            if e in pins and pins[e] != c:
                return False
            pins[e] = c
        return self.oracle.solve(pins).sat


def verify_gadget(g: Gadget, family: ObstructionFamily) -> VerificationReport:
    conds: list[Condition] = []
    graph = g.graph
    r = family.colors

    def check(name, ok, detail=""):
        conds.append(Condition(name, bool(ok), detail))

    missing = [lab for lab in _required_labels(g.kind) if lab not in g.distinguished]
    if missing:
        check("distinguished edges present", False, f"missing {missing}")
        return VerificationReport(g.kind.value, conds, "structural")
    for lab, e in g.distinguished.items():
        check(f"{lab} uncolored", graph.color(e) is None, f"edge {e} colored {graph.color(e)}")
    if any(not c.passed for c in conds):
        return VerificationReport(g.kind.value, conds, "structural")
    if g.certificate is not None:
        probs = g.certificate.problems()
        check("certificate well-formed", not probs, "; ".join(probs))
    if graph.colors != r:
        check("color universe", False, f"gadget r={graph.colors}, family r={r}")
        return VerificationReport(g.kind.value, conds, "structural")
    kind = g.kind
    if kind is GadgetKind.BaseH:
        x = g.params["x"]
        at_x = graph.incident_edges(x)
        oracle = ExtensionOracle(graph, family)
        check("H colorable", oracle.solve().sat)
        for i in range(1, r + 1):
            check(f"edges at x cannot avoid {i}", not oracle.solve(forbid={e: {i} for e in at_x}).sat)
        return VerificationReport(kind.value, conds, "solver", r + 1)
    labels = {
        GadgetKind.Ci: ["f^i"],
        GadgetKind.DNegI: ["f^-i"],
        GadgetKind.Determiner: ["f^i"],
        GadgetKind.RemoteDeterminer: ["f^i"],
        GadgetKind.Hij: ["f^ij"],
        GadgetKind.GijChain: ["e_2^i", "e_2^j"],
        GadgetKind.Equality: ["e^=", "f^="],
    }[kind]
    edges = [g.edge(lab) for lab in labels]
    table = _PinTable(graph, family, edges)
    check("some F-free extension exists", table.any)
    i = g.params.get("i")
    j = g.params.get("j")
    if kind in (GadgetKind.Ci, GadgetKind.Determiner, GadgetKind.RemoteDeterminer):
        for c in range(1, r + 1):
            ok = table.extends((c,))
            if c == i:
                check(f"pin {labels[0]}={c} extends", ok)
            else:
                check(f"pin {labels[0]}={c} has no extension", not ok)
        if kind is GadgetKind.Ci:
            x = g.params["x"]
            check("colored edges all at x", all(x in graph.edges[k] for k in graph.edge_colors))
        else:
            check("an endpoint of f touches no colored edge", bool(uncovered_endpoints(graph, edges[0])))
        if kind is GadgetKind.RemoteDeterminer:
            d = g.params.get("d", 0)
            dist = remoteness(graph, edges[0])
            check(f"{d}-remote", dist is not UNREACHABLE and dist >= d, f"distance {dist}")
    elif kind is GadgetKind.DNegI:
        check(f"pin f^-i={i} has no extension", not table.extends((i,)))
        check("an endpoint of f touches no colored edge", bool(uncovered_endpoints(graph, edges[0])))
    elif kind is GadgetKind.Hij:
        for c in range(1, r + 1):
            ok = table.extends((c,))
            if c in (i, j):
                check(f"pin f^ij={c} extends", ok)
            else:
                check(f"pin f^ij={c} has no extension", not ok)
    elif kind is GadgetKind.GijChain:
        for p in range(1, r + 1):
            for q in range(1, r + 1):
                ok = table.extends((p, q))
                if (p, q) == (i, j):
                    check(f"pin ({p},{q}) has no extension", not ok)
                else:
                    check(f"pin ({p},{q}) extends", ok)
        d = g.params.get("d", 1)
        dist = edge_distance(graph, *edges)
        check(f"ends at distance >= {d}", dist is not UNREACHABLE and dist >= d, f"distance {dist}")
    elif kind is GadgetKind.Equality:
        for p in range(1, r + 1):
            for q in range(1, r + 1):
                ok = table.extends((p, q))
                if p == q:
                    check(f"pin ({p},{q}) extends", ok, "" if ok else f"equal pair ({p},{q}) blocked")
                else:
                    check(f"pin ({p},{q}) has no extension", not ok, "" if not ok else f"unequal pair ({p},{q}) extends")
    return VerificationReport(kind.value, conds, table.mode, table.queries)


def _required_labels(kind: GadgetKind) -> list[str]:
    return {
        GadgetKind.BaseH: [],
        GadgetKind.Ci: ["f^i"],
        GadgetKind.DNegI: ["f^-i"],
        GadgetKind.Determiner: ["f^i"],
        GadgetKind.RemoteDeterminer: ["f^i"],
        GadgetKind.Hij: ["f^ij"],
        GadgetKind.GijChain: ["e_2^i", "e_2^j"],
        GadgetKind.Equality: ["e^=", "f^="],
    }[kind]


# -- bounded safety falsification -----------------------------------------------------


@dataclass
class SafetyCounterexample:
    host: ColoredGraph
    glued: tuple[tuple[str, int, bool], ...]  # (gadget label, host edge, flip)

    def to_dict(self) -> dict:
        return {"host": self.host.to_dict(), "glued": [list(t) for t in self.glued]}


def safety_catalog(family: ObstructionFamily, bound: int) -> list[ColoredGraph]:
    """Uncolored cliques and cycles up to ``bound`` vertices plus the obstruction shapes."""
    r = family.colors
    graphs = [complete_graph(n, r) for n in range(2, bound + 1)]
    graphs += [cycle_graph(n, r) for n in range(4, bound + 1)]
    graphs += [o.uncolored() for o in family.obstructions]
    seen, out = set(), []
    for h in graphs:
        key = canonical_key(h)
        if key not in seen:
            seen.add(key)
            out.append(h)
    return out


def falsify_safety(g: Gadget, family: ObstructionFamily, bound: int) -> SafetyCounterexample | None:
    """Search small F-free graphs whose gluing onto the safe edges kills every extension."""
    labels = list(g.safe)
    if not labels:
        raise ValueError("gadget declares no safe edges")
    edges = [g.edge(lab) for lab in labels]
    oracle = ExtensionOracle(g.graph, family)
    r = family.colors
    subsets = [(k,) for k in range(len(labels))]
    if len(labels) > 1:
        subsets.append(tuple(range(len(labels))))
    pin_ok: dict[tuple, bool] = {}

    def extends(idx, colors):
        key = (idx, colors)
        if key not in pin_ok:
            pin_ok[key] = oracle.solve({edges[k]: c for k, c in zip(idx, colors)}).sat
        return pin_ok[key]

    for host in safety_catalog(family, bound):
        if host.oriented != g.graph.oriented:
            continue
        colorings = enumerate_extensions(host, family, 1 << 20)
        for idx in subsets:
            s = len(idx)
            for hedges in itertools.permutations(range(host.m), s):
                ends = [set(host.edges[e]) for e in hedges]
                if any(ends[a] & ends[b] for a in range(s) for b in range(a + 1, s)):
                    continue
                for flips in itertools.product((False, True), repeat=s):
                    for col in colorings:
                        colors = tuple(col[e] for e in hedges)
                        if not extends(idx, colors):
                            continue
                        colored = host.with_coloring(dict(enumerate(col)))
                        pairs = [
                            (EdgeSelector(edges[k]), EdgeSelector(he, fl))
                            for k, he, fl in zip(idx, hedges, flips)
                        ]
                        am = amalgamate(g.graph, colored, pairs)
                        if not ExtensionOracle(am.graph, family).solve().sat:
                            return SafetyCounterexample(
                                colored,
                                tuple((labels[k], he, fl) for k, he, fl in zip(idx, hedges, flips)),
                            )
    return None
