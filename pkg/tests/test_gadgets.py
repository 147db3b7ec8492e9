import itertools
import warnings

import pytest

from forbcol.errors import LemmaCheckFailed, NotUncolorable
from forbcol.family import ObstructionFamily
from forbcol.gadgets import (
    Gadget,
    GadgetKind,
    assemble_equality,
    build_base_H,
    build_C_i,
    build_D_neg_i,
    build_determiners,
    build_equality_gadget,
    build_G_ij_chain,
    build_H_ij,
    default_sender,
    falsify_safety,
    load_gadget,
    make_remote,
    make_remote_by_sender,
    minimize_uncolorable,
    remoteness,
    save_gadget,
    uncovered_endpoints,
    verify_gadget,
)
from forbcol.graph import ColoredGraph, complete_graph, edge_distance
from forbcol.library import k6_witness, mono_cycle, triangle_family
from forbcol.solver import solve_col, solve_ext_pinned

from conftest import brute_free


@pytest.fixture(scope="module")
def fam():
    return triangle_family(2)


@pytest.fixture(scope="module")
def dets(fam):
    return build_determiners(k6_witness(), fam)


@pytest.fixture(scope="module")
def base(fam):
    return build_base_H(k6_witness(), fam)


def pin_table(g, family, edges):
    """Which color tuples on ``edges`` extend, asked through the public pinned solver."""
    r = family.colors
    return {
        cols: solve_ext_pinned(g, family, dict(zip(edges, cols))).sat
        for cols in itertools.product(range(1, r + 1), repeat=len(edges))
    }


class TestBase:
    def test_k6_is_already_minimal(self, fam):
        g = minimize_uncolorable(complete_graph(6, 2), fam)
        assert (g.n, g.m) == (6, 15)
        for k in range(15):
            assert solve_col(g.without_edges([k]), fam).sat

    def test_pendant_edge_is_dropped(self, fam):
        k6 = complete_graph(6, 2)
        g = ColoredGraph(7, list(k6.edges) + [(5, 6)], 2)
        out = minimize_uncolorable(g, fam)
        assert (out.n, out.m) == (6, 15)

    def test_colorable_witness_rejected(self, fam):
        with pytest.raises(NotUncolorable):
            minimize_uncolorable(complete_graph(5, 2), fam)

    def test_h_and_x(self, base, fam):
        h, x = base
        assert h.m == 14 and x == 0
        # with two colors, avoiding i at x means painting every edge at x the other color
        at_x = h.incident_edges(x)
        assert len(at_x) == 4
        for i in (1, 2):
            assert not solve_ext_pinned(h, fam, {e: 3 - i for e in at_x}).sat


class TestForcing:
    def test_ci(self, base, fam):
        h, x = base
        for i in (1, 2):
            ci = build_C_i(h, x, i, fam)
            f = ci.edge("f^i")
            assert all(x in ci.graph.edges[k] for k in ci.graph.edge_colors)
            assert set(ci.graph.edge_colors.values()) == {3 - i}
            assert pin_table(ci.graph, fam, [f]) == {(i,): True, (3 - i,): False}
            assert verify_gadget(ci, fam).passed

    def test_dneg(self, base, fam):
        h, x = base
        for i in (1, 2):
            d = build_D_neg_i(build_C_i(h, x, i, fam), i, fam)
            assert d.graph.m == 29 and len(d.graph.edge_colors) == 4
            assert pin_table(d.graph, fam, [0])[(i,)] is False
            assert uncovered_endpoints(d.graph, 0)
            assert verify_gadget(d, fam).passed

    def test_determiners(self, dets, fam):
        for i, det in dets.items():
            f = det.edge("f^i")
            table = pin_table(det.graph, fam, [f])
            assert table == {(c,): c == i for c in (1, 2)}
            assert verify_gadget(det, fam).passed

    def test_color_out_of_range(self, base, fam):
        h, x = base
        with pytest.raises(ValueError):
            build_C_i(h, x, 3, fam)

    def test_roundtrip(self, dets, fam, tmp_path):
        save_gadget(dets[1], tmp_path / "d.json")
        back = load_gadget(tmp_path / "d.json")
        assert back.graph.edges == dets[1].graph.edges
        assert back.certificate == dets[1].certificate
        assert verify_gadget(back, fam).passed


class TestNegativeControls:
    def test_colored_distinguished_edge(self, dets, fam):
        det = dets[1]
        bad = Gadget(
            det.graph.recolored({det.edge("f^i"): 1}), det.kind, dict(det.distinguished),
            det.family_fingerprint, dict(det.params),
        )
        rep = verify_gadget(bad, fam)
        assert not rep.passed and rep.mode == "structural"

    def test_wrong_forced_color(self, dets, fam):
        det = dets[1]
        bad = Gadget(det.graph, det.kind, dict(det.distinguished), det.family_fingerprint, {"i": 2})
        rep = verify_gadget(bad, fam)
        assert {c.name for c in rep.failures()} == {"pin f^i=1 has no extension", "pin f^i=2 extends"}

    def test_equality_missing_a_chain(self, fam):
        chain = build_G_ij_chain(1, 2, 4, fam)
        half = assemble_equality([chain], fam, 4)
        rep = verify_gadget(half, fam)
        assert not rep.passed
        assert [c.name for c in rep.failures()] == ["pin (2,1) has no extension"]


class TestRemote:
    def test_already_remote_enough(self, dets):
        r0 = make_remote(dets[1], 1, dets)
        assert r0.graph is dets[1].graph

    def test_towers_d3(self, dets, fam):
        rem = make_remote(dets[1], 3, dets)
        f = rem.edge("f^i")
        assert (rem.graph.m, len(rem.graph.edge_colors)) == (589, 64)
        assert remoteness(rem.graph, f) >= 3
        assert pin_table(rem.graph, fam, [f]) == {(1,): True, (2,): False}

    def test_senders(self, dets, fam):
        s = default_sender(fam)
        assert s.graph.m == 53 and not s.graph.edge_colors
        assert not set(s.graph.edges[s.left]) & set(s.graph.edges[s.right])
        assert edge_distance(s.graph, s.left, s.right) >= 2
        assert pin_table(s.graph, fam, [s.left, s.right]) == {
            (1, 1): True, (1, 2): False, (2, 1): False, (2, 2): True,
        }
        for i in (1, 2):
            rem = make_remote_by_sender(dets[i], 3, s)
            f = rem.edge("f^i")
            assert len(rem.graph.edge_colors) == 4
            assert remoteness(rem.graph, f) >= 3
            assert verify_gadget(rem, fam).passed

    def test_negative_d(self, dets):
        with pytest.raises(ValueError):
            make_remote(dets[1], -1, dets)


class TestPairs:
    def test_hij_single_edge_for_two_colors(self, fam):
        g = build_H_ij(1, 2, fam)
        assert g.graph.m == 1

    def test_hij_three_colors(self):
        f3 = triangle_family(3)
        for i, j in itertools.combinations((1, 2, 3), 2):
            g = build_H_ij(i, j, f3)
            table = pin_table(g.graph, f3, [g.edge("f^ij")])
            assert {c for (c,), ok in table.items() if ok} == {i, j}

    def test_chain_lengths(self, fam):
        for d in (1, 2, 3):
            ch = build_G_ij_chain(1, 2, d, fam)
            a, b = ch.edge("e_2^i"), ch.edge("e_2^j")
            assert edge_distance(ch.graph, a, b) >= d
            table = pin_table(ch.graph, fam, [a, b])
            assert [k for k, ok in table.items() if not ok] == [(1, 2)]

    def test_chain_d0(self, fam):
        with pytest.raises(ValueError):
            build_G_ij_chain(1, 2, 0, fam)


class TestEquality:
    def test_pins(self, fam):
        eq = build_equality_gadget(fam)
        assert eq.params["d"] == 4 and eq.params["simultaneous"]
        table = pin_table(eq.graph, fam, [eq.edge("e^="), eq.edge("f^=")])
        assert table == {(p, q): p == q for p in (1, 2) for q in (1, 2)}

    def test_short_d_warns(self, fam):
        with pytest.warns(UserWarning, match="one at a time"):
            eq = build_equality_gadget(fam, d=2)
        assert not eq.params["simultaneous"]

    def test_single_color(self):
        f1 = ObstructionFamily(1, [complete_graph(3, 1, 1)])
        eq = build_equality_gadget(f1)
        assert eq.graph.m == 2 and verify_gadget(eq, f1).passed

    def test_three_colors(self):
        f3 = triangle_family(3)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            eq = build_equality_gadget(f3)
        assert verify_gadget(eq, f3).passed


class TestSafety:
    def test_determiner_survives_small_hosts(self, dets, fam):
        assert falsify_safety(dets[1], fam, 5) is None

    def test_unsafe_mock_is_caught(self):
        # a path of two 1-edges closing on the free edge: fine for triangles,
        # but glued onto a 3-path of 1-edges it completes a 1-colored pentagon
        f = ObstructionFamily(2, [mono_cycle(5, 1)])
        g = ColoredGraph(3, [(0, 1), (1, 2), (0, 2)], 2, {0: 1, 1: 1})
        mock = Gadget(g, GadgetKind.Determiner, {"f^i": 2}, f.fingerprint(), {"i": 2}, None, ("f^i",))
        assert solve_ext_pinned(g, f, {2: 2}).sat
        cex = falsify_safety(mock, f, 5)
        assert cex is not None
        assert brute_free(cex.host, f)

    def test_no_safe_edges(self, fam):
        g = Gadget(ColoredGraph(2, [(0, 1)], 2), GadgetKind.Hij, {"f^ij": 0}, fam.fingerprint())
        with pytest.raises(ValueError):
            falsify_safety(g, fam, 3)


def test_too_few_colors():
    f1 = ObstructionFamily(1, [complete_graph(3, 1, 1)])
    h = complete_graph(3, 1)
    with pytest.raises(LemmaCheckFailed):
        build_C_i(h, 0, 1, f1)
