import pytest

from forbcol.errors import TooLarge, UniverseMismatch
from forbcol.family import ObstructionFamily, orient, orient_graph
from forbcol.graph import ColoredGraph, complete_graph
from forbcol.library import mono_cycle
from forbcol.normal import (
    NormalForm,
    Pattern,
    amalgamation_counterexample,
    consistent,
    neg,
    normalize,
    solve_normal,
)
from forbcol.solver import solve_col

from conftest import brute_sat, graphs_up_to

BOWTIE = ColoredGraph(5, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4)], 1, {k: 1 for k in range(6)})
DIAMOND = ColoredGraph(4, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)], 2, {0: 1, 1: 1, 2: 1, 3: 2, 4: 2})

FAMILIES = {
    "K3": ObstructionFamily(1, [complete_graph(3, 1, 1)]),
    "C5": ObstructionFamily(1, [mono_cycle(5, 1, 1)]),
    "bowtie": ObstructionFamily(1, [BOWTIE]),
}


@pytest.fixture(scope="module")
def forms():
    return {name: normalize(orient(f, dedupe=True)) for name, f in FAMILIES.items()}


def test_literals():
    assert neg("c1") == "~c1" and neg("~c1") == "c1"
    assert consistent({"1", "c2"})
    assert not consistent({"1", "2"})
    assert not consistent({"c2", "~c2"})


class TestPhases:
    def test_triangle_needs_no_cuts(self, forms):
        nf = forms["K3"]
        assert len(nf.patterns) == 2
        assert "one-cuts" not in nf.fired and "two-cuts" not in nf.fired
        assert nf.edge_fresh == [] and nf.vertex_fresh == []

    def test_pentagon_splits_pairs(self, forms):
        nf = forms["C5"]
        assert "two-cuts" in nf.fired
        # quotients of the pentagon include triangles with pendant edges, hence one-cuts too
        assert nf.edge_fresh and "one-cuts" in nf.fired

    def test_bowtie_splits_cut_vertex(self, forms):
        nf = forms["bowtie"]
        assert "one-cuts" in nf.fired
        assert len(nf.vertex_fresh) >= 1
        # every leftover pattern is 2-connected or a single edge
        for p in nf.patterns:
            assert p.n <= 3

    def test_transcript_shape(self, forms):
        for nf in forms.values():
            assert nf.transcript[0]["phase"] == "quotients"
            assert all(set(ev) >= {"phase"} for ev in nf.transcript)
            doc = nf.to_dict()
            assert len(doc["patterns"]) == len(nf.patterns)


class TestSameProblem:
    @pytest.mark.parametrize("name", ["K3", "C5", "bowtie"])
    def test_up_to_four_vertices(self, forms, name):
        f, nf = FAMILIES[name], forms[name]
        for g in graphs_up_to(4, 1):
            assert (solve_normal(g, nf) is not None) == solve_col(g, f).sat

    def test_five_vertices_sampled(self, forms):
        for name in ("K3", "C5", "bowtie"):
            f, nf = FAMILIES[name], forms[name]
            for g in list(graphs_up_to(5, 1, n_min=5))[::11]:
                assert (solve_normal(g, nf) is not None) == solve_col(g, f).sat

    def test_triangle_against_brute(self, forms):
        f, nf = FAMILIES["K3"], forms["K3"]
        for g in graphs_up_to(5, 1, n_min=3):
            if g.m <= 7:
                assert (solve_normal(g, nf) is not None) == brute_sat(g, f)

    def test_witness_shape(self, forms):
        c4 = ColoredGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)], 1)
        sol = solve_normal(c4, forms["C5"])
        assert set(sol) == {"edges", "vertices"} and len(sol["edges"]) == 4
        assert solve_normal(complete_graph(3, 1), forms["C5"]) is None


class TestClosure:
    def test_raw_diamond_fails_amalgamation(self):
        of = orient(ObstructionFamily(2, [DIAMOND]), dedupe=True)
        raw = NormalForm(2, [Pattern.from_graph(g) for g in of.obstructions])
        assert amalgamation_counterexample(raw) is not None

    def test_normalized_diamond_passes(self):
        nf = normalize(orient(ObstructionFamily(2, [DIAMOND]), dedupe=True))
        assert amalgamation_counterexample(nf) is None

    @pytest.mark.parametrize("name", ["K3", "C5", "bowtie"])
    def test_normalized_families_pass(self, forms, name):
        assert amalgamation_counterexample(forms[name], samples=150) is None


class TestMaterialize:
    def test_triangle_family(self, forms):
        fam = forms["K3"].to_family()
        assert fam.oriented and fam.colors == 1
        for g in graphs_up_to(5, 1, n_min=3):
            if g.m <= 8:
                assert solve_col(orient_graph(g), fam).sat == solve_col(g, FAMILIES["K3"]).sat

    def test_pentagon_expansion_refused(self, forms):
        # hundreds of fresh edge colors: the powerset cannot be written out
        with pytest.raises(TooLarge):
            forms["C5"].to_family()

    def test_guard(self, forms):
        with pytest.raises(TooLarge):
            forms["C5"].to_family(limit=1)


class TestErrors:
    def test_needs_orientation(self):
        with pytest.raises(UniverseMismatch):
            normalize(FAMILIES["K3"])

    def test_budget(self):
        with pytest.raises(TooLarge):
            normalize(orient(FAMILIES["C5"], dedupe=True), budget=5)
