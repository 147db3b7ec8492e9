import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forbcol.errors import PinConflict, TooLarge, UniverseMismatch
from forbcol.family import ObstructionFamily
from forbcol.graph import ColoredGraph, complete_graph, find_violation
from forbcol.library import all_colorings, mono_cycle
from forbcol.solver import (
    enumerate_extensions,
    solve_col,
    solve_ext,
    solve_ext_pinned,
)

from conftest import brute_extensions, brute_free, graphs_up_to, triangles


def random_graph(rng, n_max=6, colors=2, precolor=0.0):
    n = rng.randint(1, n_max)
    pairs = [p for p in itertools.combinations(range(n), 2) if rng.random() < 0.55]
    col = {k: rng.randint(1, colors) for k in range(len(pairs)) if rng.random() < precolor}
    return ColoredGraph(n, pairs, colors, col)


class TestRamsey:
    def test_k6_unsat_k5_sat(self, tri):
        assert not solve_col(complete_graph(6, 2), tri).sat
        res = solve_col(complete_graph(5, 2), tri)
        assert res.sat
        assert triangles(complete_graph(5, 2), res.witness) == []

    def test_k5_brute_force(self, tri):
        k5 = complete_graph(5, 2)
        count = sum(1 for col in itertools.product((1, 2), repeat=10) if not triangles(k5, dict(enumerate(col))))
        # each good coloring is two complementary 5-cycles: 12 labeled pentagons
        assert count == 12
        assert len(enumerate_extensions(k5, tri, 100)) == count

    def test_edgeless(self, tri):
        res = solve_col(ColoredGraph(4, [], 2), tri)
        assert res.sat and res.witness == {}


class TestExt:
    def test_precolored_violation(self):
        f = ObstructionFamily(1, [complete_graph(3, 1, 1)])
        assert not solve_ext(complete_graph(3, 1, 1), f).sat

    def test_one_precolored_edge(self, tri):
        g = complete_graph(3, 2).with_coloring({0: 1})
        assert solve_ext(g, tri).sat
        assert len(list(brute_extensions(g, tri))) == 3
        assert len(enumerate_extensions(g, tri, 10)) == 3

    def test_witness_extends(self, tri):
        g = complete_graph(5, 2).with_coloring({0: 2, 4: 1})
        w = solve_ext(g, tri).witness
        assert w[0] == 2 and w[4] == 1

    def test_empty_precoloring_matches_col(self, tri):
        rng = random.Random(7)
        for _ in range(200):
            g = random_graph(rng)
            assert solve_ext(g, tri).sat == solve_col(g, tri).sat

    def test_universe_mismatch(self, tri):
        with pytest.raises(UniverseMismatch):
            solve_col(complete_graph(3, 3), tri)


class TestPinned:
    def test_matching_pin(self, tri):
        k5 = complete_graph(5, 2)
        w = solve_col(k5, tri).witness
        assert solve_ext_pinned(k5, tri, {3: w[3]}).sat

    def test_pin_whole_obstruction(self, tri):
        assert not solve_ext_pinned(complete_graph(3, 2), tri, {0: 2, 1: 2, 2: 2}).sat

    def test_pin_on_colored(self, tri):
        with pytest.raises(PinConflict):
            solve_ext_pinned(complete_graph(3, 2).with_coloring({0: 1}), tri, {0: 1})

    def test_agrees_with_merged_precoloring(self, tri):
        rng = random.Random(3)
        for _ in range(60):
            g = random_graph(rng, precolor=0.3)
            free = g.uncolored_edges()
            pins = {e: rng.randint(1, 2) for e in free if rng.random() < 0.3}
            assert solve_ext_pinned(g, tri, pins).sat == solve_ext(g.recolored(pins), tri).sat


class TestEnumeration:
    def test_lonely_edge(self):
        f = ObstructionFamily(3, [complete_graph(3, 3, 1)])
        assert len(enumerate_extensions(ColoredGraph(2, [(0, 1)], 3), f, 10)) == 3

    def test_everything_forbidden(self):
        f = ObstructionFamily(2, all_colorings(complete_graph(3, 2)))
        assert enumerate_extensions(complete_graph(3, 2), f, 10) == []

    def test_k4_matches_filter(self, tri):
        k4 = complete_graph(4, 2)
        expect = sorted(brute_extensions(k4, tri))
        assert enumerate_extensions(k4, tri, 1000) == expect
        assert len(expect) == 18

    def test_guard(self, tri):
        with pytest.raises(TooLarge):
            enumerate_extensions(complete_graph(9, 2), tri, 1)

    def test_lexicographic_and_truncated(self, tri):
        all_ = enumerate_extensions(complete_graph(4, 2), tri, 1000)
        assert all_ == sorted(all_)
        assert enumerate_extensions(complete_graph(4, 2), tri, 5) == all_[:5]


class TestProperties:
    def test_sound_and_complete_small(self):
        fam = ObstructionFamily(2, [complete_graph(3, 2, 1), mono_cycle(5, 2), ColoredGraph(3, [(0, 1), (1, 2)], 2, {0: 2, 1: 2})])
        for g in list(graphs_up_to(5, 2, n_min=3))[::5]:
            res = solve_col(g, fam)
            ref = next(brute_extensions(g, fam), None)
            assert res.sat == (ref is not None)
            if res.sat:
                assert brute_free(g, fam, res.witness)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_status_equals_enumeration(self, seed):
        rng = random.Random(seed)
        g = random_graph(rng, n_max=7, precolor=0.2)
        if len(g.uncolored_edges()) > 16:
            return
        fam = ObstructionFamily(2, [complete_graph(3, 2, 1), complete_graph(3, 2, 2)])
        assert solve_ext(g, fam).sat == bool(enumerate_extensions(g, fam, 1))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_monotone_under_edge_addition(self, seed):
        rng = random.Random(seed)
        g = random_graph(rng, n_max=7)
        missing = [p for p in itertools.combinations(range(g.n), 2) if g.edge_index(*p) is None]
        extra = [p for p in missing if rng.random() < 0.5]
        bigger = g.add_edges(extra)
        fam = ObstructionFamily(2, [complete_graph(3, 2, 1), complete_graph(3, 2, 2)])
        if solve_col(bigger, fam).sat:
            assert solve_col(g, fam).sat

    def test_deterministic_witness_is_least(self, tri):
        k5 = complete_graph(5, 2)
        a = solve_col(k5, tri, deterministic=True).witness
        b = solve_col(k5, tri, deterministic=True).witness
        assert a == b
        least = enumerate_extensions(k5, tri, 1)[0]
        assert tuple(a[k] for k in range(k5.m)) == least

    def test_backtracking_agrees(self, tri):
        # second decision procedure, kept separate from the clause-learning one
        rng = random.Random(11)
        for _ in range(80):
            g = random_graph(rng, n_max=7, precolor=0.15)
            a = solve_ext(g, tri).sat
            assert solve_ext(g, tri, strategy="backtrack").sat == a
            assert solve_ext(g, tri, strategy="backtrack", propagate=True).sat == a

    def test_witness_has_no_violation(self, tri):
        rng = random.Random(5)
        for _ in range(50):
            g = random_graph(rng, n_max=7)
            res = solve_col(g, tri)
            if res.sat:
                assert find_violation(g.with_coloring(res.witness), tri) is None
