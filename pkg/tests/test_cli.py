import json

import pytest

from forbcol import cli
from forbcol.algebra import build_G_F, classify_report
from forbcol.family import ObstructionFamily, compute_core, load_family, save_family
from forbcol.gadgets import load_gadget, save_gadget, verify_gadget
from forbcol.graph import ColoredGraph, complete_graph, load, save
from forbcol.library import all_colorings, triangle_family
from forbcol.reductions import CspInstance, col_to_csp
from forbcol.solver import enumerate_extensions, solve_col, solve_ext


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    report = json.loads(capsys.readouterr().out)
    assert report["exit"] == code and report["seconds"] >= 0
    return code, report


@pytest.fixture
def files(tmp_path):
    save_family(triangle_family(2), tmp_path / "tri.json")
    save(complete_graph(6, 2), tmp_path / "k6.json")
    save(complete_graph(5, 2), tmp_path / "k5.json")
    return tmp_path


class TestSolve:
    def test_k6_unsat(self, capsys, files):
        code, rep = run(capsys, "solve", "--graph", files / "k6.json", "--family", files / "tri.json")
        assert code == 1 and rep["result"]["status"] == "UNSAT"
        assert set(rep["inputs"]) == {"graph", "family"}

    def test_k5_matches_library(self, capsys, files):
        code, rep = run(capsys, "solve", "--graph", files / "k5.json", "--family", files / "tri.json", "--enumerate", 100)
        res = solve_col(complete_graph(5, 2), triangle_family(2))
        assert code == 0
        assert rep["result"]["witness"] == {str(k): c for k, c in sorted(res.witness.items())}
        assert rep["result"]["extensions"] == len(enumerate_extensions(complete_graph(5, 2), triangle_family(2), 100))

    def test_ext_flag(self, capsys, files):
        g = complete_graph(3, 2).with_coloring({0: 1, 1: 1})
        save(g, files / "pre.json")
        code, rep = run(capsys, "solve", "--graph", files / "pre.json", "--family", files / "tri.json")
        assert code == 2
        code, rep = run(capsys, "solve", "--ext", "--graph", files / "pre.json", "--family", files / "tri.json")
        assert code == 0 and rep["result"]["witness"]["2"] == 2
        assert solve_ext(g, triangle_family(2)).sat

    def test_malformed_graph(self, capsys, files):
        (files / "bad.json").write_text('{"n": 3,\n  "edges": [[0, 1]\n')
        code, rep = run(capsys, "solve", "--graph", files / "bad.json", "--family", files / "tri.json")
        assert code == 2 and "line" in rep["result"]["error"]

    def test_missing_file(self, capsys, files):
        code, _ = run(capsys, "solve", "--graph", files / "nope.json", "--family", files / "tri.json")
        assert code == 2


class TestGadget:
    def test_build_and_verify(self, capsys, files):
        out = files / "det.json"
        code, rep = run(capsys, "gadget", "build", "--kind", "determiner", "--color", 1, "--family", files / "tri.json", "--out", out)
        assert code == 0 and rep["result"]["verification"]["passed"]
        assert verify_gadget(load_gadget(out), triangle_family(2)).passed
        code, _ = run(capsys, "gadget", "verify", "--gadget", out, "--family", files / "tri.json")
        assert code == 0

    def test_tampered_gadget(self, capsys, files):
        out = files / "det.json"
        run(capsys, "gadget", "build", "--kind", "determiner", "--color", 2, "--family", files / "tri.json", "--out", out)
        g = load_gadget(out)
        g.params["i"] = 1
        save_gadget(g, out)
        code, rep = run(capsys, "gadget", "verify", "--gadget", out, "--family", files / "tri.json")
        assert code == 3 and not rep["result"]["verification"]["passed"]

    def test_short_equality_warns(self, capsys, files):
        code, rep = run(capsys, "gadget", "build", "--kind", "equality", "--d", 2, "--family", files / "tri.json", "--out", files / "eq.json")
        assert code == 0 and rep["result"]["warnings"]

    def test_color_required(self, capsys, files):
        code, _ = run(capsys, "gadget", "build", "--kind", "ci", "--family", files / "tri.json", "--out", files / "c.json")
        assert code == 2

    def test_no_witness(self, capsys, files):
        save_family(ObstructionFamily(2, [complete_graph(4, 2, 1)]), files / "k4.json")
        code, rep = run(capsys, "gadget", "build", "--kind", "base", "--family", files / "k4.json", "--out", files / "b.json")
        assert code == 2 and "--witness" in rep["result"]["error"]

    def test_remote_by_sender(self, capsys, files):
        code, rep = run(
            capsys, "gadget", "build", "--kind", "remote", "--via", "sender", "--color", 1, "--d", 3,
            "--family", files / "tri.json", "--out", files / "r.json",
        )
        assert code == 0 and rep["result"]["precolored"] == 4


class TestReduce:
    def test_col_to_csp_edgeless(self, capsys, files):
        save(ColoredGraph(3, [], 2), files / "e.json")
        code, rep = run(capsys, "reduce", "--from", "col", "--to", "csp", "--in", files / "e.json", "--family", files / "tri.json", "--out", files / "x.json")
        assert code == 0 and rep["result"]["constraints"] == 0
        assert json.loads((files / "x.json").read_text())["constraints"] == []

    def test_col_to_csp_golden(self, capsys, files):
        code, _ = run(capsys, "reduce", "--from", "col", "--to", "csp", "--in", files / "k5.json", "--family", files / "tri.json", "--out", files / "x.json")
        inst, _ = col_to_csp(complete_graph(5, 2), triangle_family(2))
        assert json.loads((files / "x.json").read_text()) == inst.to_dict()

    def test_csp_to_ext_check(self, capsys, files):
        (files / "x.json").write_text(json.dumps(CspInstance(3, [("K3", (0, 1, 2))], {0: 1}).to_dict()))
        code, rep = run(
            capsys, "reduce", "--from", "csp", "--to", "ext", "--in", files / "x.json", "--family", files / "tri.json",
            "--out", files / "g.json", "--check", 100, "--trace", files / "t.json",
        )
        assert code == 0
        assert rep["result"]["check"]["total"] == 100 and rep["result"]["check"]["passed"]
        assert solve_ext(load(files / "g.json"), triangle_family(2)).sat
        assert json.loads((files / "t.json").read_text())["source"] == "csp"

    def test_ext_to_col_agrees(self, capsys, files):
        fam = triangle_family(2)
        for pre in ({0: 1, 1: 1}, {0: 1, 1: 1, 2: 1}):
            x = complete_graph(3, 2).with_coloring(pre)
            save(x, files / "x.json")
            code, _ = run(capsys, "reduce", "--from", "ext", "--to", "col", "--in", files / "x.json", "--family", files / "tri.json", "--out", files / "g.json")
            assert code == 0
            out = load(files / "g.json")
            assert not out.edge_colors
            assert solve_col(out, fam).sat == solve_ext(x, fam).sat

    def test_unsupported_direction(self, capsys, files):
        code, _ = run(capsys, "reduce", "--from", "col", "--to", "ext", "--in", files / "k5.json", "--family", files / "tri.json", "--out", files / "o.json")
        assert code == 2


class TestClassifyAndAlgebra:
    def test_np_complete(self, capsys, files):
        f = ObstructionFamily(2, [complete_graph(3, 2, 1), complete_graph(3, 2, 2), *all_colorings(complete_graph(4, 2))])
        save_family(f, files / "f.json")
        code, rep = run(capsys, "classify", "--family", files / "f.json", "--m", 4)
        assert code == 0 and rep["result"] == classify_report(f, 4).to_dict()
        assert rep["result"]["verdict"] == "NPComplete"

    def test_vacuous(self, capsys, files):
        save_family(ObstructionFamily(1, []), files / "empty.json")
        code, rep = run(capsys, "classify", "--family", files / "empty.json", "--m", 3)
        assert rep["result"] == {"verdict": "TriviallyP", "color": 1}

    def test_algebra_dump(self, capsys, files):
        code, rep = run(capsys, "algebra", "--family", files / "tri.json", "--cyclic", 2, 3, "--classify", 3, "--out", files / "s.json")
        assert code == 0
        assert rep["result"]["relations"] == {"K3": 6, "{1}": 1, "{2}": 1}
        assert rep["result"]["cyclic"] == {"2": None, "3": None}
        assert json.loads((files / "s.json").read_text()) == build_G_F(triangle_family(2)).to_dict()

    def test_algebra_finds_polymorphism(self, capsys, files):
        save_family(ObstructionFamily(2, [complete_graph(3, 2, 1)]), files / "one.json")
        code, rep = run(capsys, "algebra", "--family", files / "one.json", "--cyclic", 2)
        assert rep["result"]["cyclic"]["2"]["arity"] == 2


class TestFamily:
    def test_validate(self, capsys, files):
        code, rep = run(capsys, "family", "validate", "--family", files / "tri.json")
        assert code == 0 and rep["result"]["valid"]

    def test_core(self, capsys, files):
        f = ObstructionFamily(2, all_colorings(complete_graph(3, 2)))
        save_family(f, files / "all.json")
        code, rep = run(capsys, "family", "core", "--family", files / "all.json", "--out", files / "core.json")
        core, rho = compute_core(f)
        assert rep["result"] == {"colors": core.colors, "obstructions": len(core.obstructions), "recoloring": list(rho.table)}
        assert load_family(files / "core.json").fingerprint() == core.fingerprint()

    def test_orient_and_normalize(self, capsys, files):
        code, rep = run(capsys, "family", "orient", "--dedupe", "--family", files / "tri.json", "--out", files / "o.json")
        assert code == 0 and rep["result"]["obstructions"] == 4
        code, rep = run(capsys, "family", "normalize", "--family", files / "o.json", "--out", files / "n.json")
        assert code == 0 and rep["result"]["phases"][0] == "quotients"
        assert "patterns" in json.loads((files / "n.json").read_text())
