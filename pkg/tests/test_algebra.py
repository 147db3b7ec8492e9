import itertools
import json
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forbcol.algebra import (
    FiniteFunction,
    FiniteStructure,
    Relation,
    Verdict,
    build_G_F,
    classify,
    classify_report,
    cyclic_candidate_count,
    cyclic_functions,
    find_cyclic_polymorphism,
    hardness_matrix,
    is_polymorphism,
    necklaces,
    shape_problems,
)
from forbcol.errors import HypothesisUnmet, TooLarge
from forbcol.family import ObstructionFamily
from forbcol.graph import ColoredGraph, complete_graph, cycle_graph
from forbcol.library import all_colorings, mono_cycle, triangle_family


def naive_is_poly(f: FiniteFunction, s: FiniteStructure) -> bool:
    """Apply f to every k-tuple of relation members, row by row."""
    for rel in s.relations:
        for cols in itertools.product(list(rel.tuples), repeat=f.arity):
            if tuple(f(*(c[row] for c in cols)) for row in range(rel.arity)) not in rel.tuples:
                return False
    return True


def naive_cyclic(r, k):
    """Every function on [r]^k, kept when invariant under one rotation."""
    cube = list(itertools.product(range(1, r + 1), repeat=k))
    for vals in itertools.product(range(1, r + 1), repeat=len(cube)):
        table = dict(zip(cube, vals))
        if all(table[t[1:] + t[:1]] == v for t, v in table.items()):
            yield FiniteFunction(k, r, table)


def burnside_necklaces(k, r):
    phi = lambda d: sum(1 for a in range(1, d + 1) if gcd(a, d) == 1)
    return sum(phi(d) * r ** (k // d) for d in range(1, k + 1) if k % d == 0) // k


@pytest.fixture(scope="module")
def gf():
    return build_G_F(triangle_family(2))


class TestStructure:
    def test_r_k3(self, gf):
        rel = gf.relation("K3")
        # 2^3 colorings of a triangle minus the two monochromatic ones
        expect = {t for t in itertools.product((1, 2), repeat=3) if len(set(t)) > 1}
        assert rel.tuples == expect and len(rel.tuples) == 6
        assert gf.names() == ["K3", "{1}", "{2}"]

    def test_dump_roundtrip(self, gf):
        doc = json.loads(json.dumps(gf.to_dict()))
        back = FiniteStructure.from_dict(doc)
        assert back.to_dict() == gf.to_dict()

    def test_bad_tuples(self):
        with pytest.raises(ValueError):
            FiniteStructure(2, [Relation("R", 2, frozenset({(1, 3)}))])
        with pytest.raises(ValueError):
            FiniteStructure(2, [Relation("R", 2, frozenset({(1,)}))])

    def test_shared_underlying_graph(self):
        f = ObstructionFamily(2, [complete_graph(3, 2, 1), complete_graph(3, 2, 2), mono_cycle(5, 1)])
        s = build_G_F(f)
        assert s.names() == ["K3", "C5", "{1}", "{2}"]
        assert s.relation("C5").arity == 5


class TestCyclic:
    @pytest.mark.parametrize("k,r", [(2, 2), (3, 2), (4, 2), (6, 2), (2, 3), (3, 3), (4, 3)])
    def test_necklace_count(self, k, r):
        assert len(necklaces(k, r)) == burnside_necklaces(k, r)
        assert cyclic_candidate_count(r, k) == r ** burnside_necklaces(k, r)

    @pytest.mark.parametrize("k,r", [(2, 2), (3, 2), (2, 3)])
    def test_enumeration_is_exactly_cyclic(self, k, r):
        got = {tuple(sorted(f.table.items())) for f in cyclic_functions(r, k)}
        want = {tuple(sorted(f.table.items())) for f in naive_cyclic(r, k)}
        assert got == want

    def test_none_for_triangles(self, gf):
        for k in (2, 3, 4):
            assert find_cyclic_polymorphism(gf, k) is None
            assert not any(naive_is_poly(f, gf) for f in cyclic_functions(2, k))

    def test_parallel_matches(self, gf):
        assert find_cyclic_polymorphism(gf, 3, workers=2) is None

    def test_semilattice_found(self):
        # forbidding only the 1-colored triangle leaves max as a cyclic polymorphism
        s = build_G_F(ObstructionFamily(2, [complete_graph(3, 2, 1)]))
        for k in (2, 3):
            f = find_cyclic_polymorphism(s, k)
            first = next(g for g in cyclic_functions(2, k) if naive_is_poly(g, s))
            assert f.table == first.table and f.is_cyclic()
            assert is_polymorphism(FiniteFunction.from_callable(k, 2, max), s)

    def test_budget(self, gf):
        with pytest.raises(TooLarge):
            find_cyclic_polymorphism(gf, 4, budget=10)
        with pytest.raises(ValueError):
            find_cyclic_polymorphism(gf, 1)


@st.composite
def small_structures(draw):
    r = draw(st.integers(2, 3))
    rels = []
    for n in range(draw(st.integers(1, 2))):
        arity = draw(st.integers(1, 3))
        cube = list(itertools.product(range(1, r + 1), repeat=arity))
        tuples = draw(st.sets(st.sampled_from(cube), min_size=1, max_size=6))
        rels.append(Relation(f"R{n}", arity, frozenset(tuples)))
    return FiniteStructure(r, rels)


@settings(max_examples=40, deadline=None)
@given(small_structures(), st.data())
def test_is_polymorphism_matches_naive(s, data):
    k = data.draw(st.integers(1, 2))
    cube = list(itertools.product(range(1, s.domain + 1), repeat=k))
    vals = data.draw(st.lists(st.integers(1, s.domain), min_size=len(cube), max_size=len(cube)))
    f = FiniteFunction(k, s.domain, dict(zip(cube, vals)))
    assert is_polymorphism(f, s) == naive_is_poly(f, s)


class TestHardness:
    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_every_candidate_refuted(self, gf, k):
        rel = gf.relation("K3")
        fam = triangle_family(2)
        for f in cyclic_functions(2, k):
            if any(f(*(c,) * k) != c for c in (1, 2)):
                # not idempotent: some singleton relation already refutes it
                assert not naive_is_poly(f, FiniteStructure(2, gf.relations[1:]))
                continue
            for i, j in ((1, 2), (2, 1)):
                hm = hardness_matrix(fam, k, i, j, f=f, structure=gf)
                assert hm.relation == "K3"
                assert all(col in rel for col in hm.columns)
                img = hm.image(f)
                assert len(set(img)) == 1 and img not in rel

    def test_odd_rows(self):
        hm = hardness_matrix(triangle_family(2), 3, 1, 2, p=1)
        assert hm.rows == [(1, 2, 2), (2, 2, 1), (2, 1, 2)]

    def test_needs_p(self):
        with pytest.raises(ValueError):
            hardness_matrix(triangle_family(2), 2, 1, 2)

    def test_no_suitable_obstruction(self):
        f = ObstructionFamily(2, [ColoredGraph(2, [(0, 1)], 2, {0: 1})])
        with pytest.raises(HypothesisUnmet):
            hardness_matrix(f, 2, 1, 2, p=1)


K4_ALL = all_colorings(complete_graph(4, 2))


class TestClassify:
    def test_np_complete(self):
        f = ObstructionFamily(2, [complete_graph(3, 2, 1), complete_graph(3, 2, 2), *K4_ALL])
        rep = classify_report(f, 4)
        assert rep.verdict is Verdict.NPComplete
        assert rep.refuted == {2: "none", 3: "none", 4: "none"}

    def test_trivial(self):
        f = ObstructionFamily(2, [complete_graph(4, 2, 1), complete_graph(3, 2, 2), *K4_ALL])
        rep = classify_report(f, 4)
        assert rep.verdict is Verdict.TriviallyP and rep.color == 1

    def test_non_mono_cycle(self):
        c5 = cycle_graph(5, 2).with_coloring({0: 1, 1: 1, 2: 1, 3: 1, 4: 2})
        f = ObstructionFamily(2, [c5, complete_graph(3, 2, 1)])
        assert classify(f, 3) is Verdict.OutOfShape

    def test_partial_clique_colorings(self):
        f = ObstructionFamily(2, [complete_graph(3, 2, 1), K4_ALL[5]])
        assert any("not all" in p for p in shape_problems(f, 4))

    def test_small_m_and_bad_shape(self):
        assert classify(triangle_family(2), 2) is Verdict.OutOfShape
        path = ColoredGraph(3, [(0, 1), (1, 2)], 2, {0: 1, 1: 1})
        assert classify(ObstructionFamily(2, [path]), 3) is Verdict.OutOfShape

    def test_empty_family_is_vacuously_trivial(self):
        rep = classify_report(ObstructionFamily(1, []), 3)
        assert rep.verdict is Verdict.TriviallyP and rep.color == 1

    def test_mono_triangles_m3(self):
        # both colors have a triangle, which contains K3
        assert classify_report(triangle_family(2), 3).color == 1
