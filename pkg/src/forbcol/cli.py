"""Command-line front end.

Every subcommand prints one JSON report on stdout::

    {"command": [...], "inputs": {name: fingerprint}, "result": {...},
     "seconds": float, "stats": {...}}

Exit codes: 0 success / SAT, 1 UNSAT, 2 bad input or unsupported request,
3 a gadget lemma check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings

from . import algebra, gadgets, reductions
from .errors import ForbColError, FormatError, LemmaCheckFailed, UnverifiedGadget
from .family import (
    ObstructionFamily,
    compute_core,
    load_family,
    orient,
    prune_redundant,
    save_family,
    validate,
)
from .graph import ColoredGraph, load, save
from .library import witness_for
from .normal import normalize
from .solver import enumerate_extensions, solve_col, solve_ext

EXIT_OK, EXIT_UNSAT, EXIT_ERROR, EXIT_LEMMA = 0, 1, 2, 3


class Failure(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR, payload: dict | None = None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


def _fp(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:16]


def _write_json(doc, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def _witness(args, family: ObstructionFamily) -> ColoredGraph:
    if getattr(args, "witness", None):
        return load(args.witness)
    w = witness_for(family)
    if w is None:
        raise Failure("no shipped witness for this family; pass --witness")
    return w


# -- solve -------------------------------------------------------------------


def cmd_solve(args, inputs: dict, stats: dict) -> tuple[dict, int]:
    g, family = load(args.graph), load_family(args.family)
    inputs.update(graph=_fp(args.graph), family=_fp(args.family))
    if g.edge_colors and not args.ext:
        raise Failure("graph has precolored edges; pass --ext")
    res = solve_ext(g, family) if args.ext else solve_col(g, family)
    stats.update(vars(res.stats))
    out = {"status": res.status.value}
    if res.witness is not None:
        out["witness"] = {str(k): c for k, c in sorted(res.witness.items())}
    if args.enumerate:
        exts = enumerate_extensions(g, family, args.enumerate)
        out["extensions"] = len(exts)
        out["extensions_capped"] = len(exts) >= args.enumerate
    return out, EXIT_OK if res.sat else EXIT_UNSAT


# -- gadgets -----------------------------------------------------------------


def _build(kind: str, family: ObstructionFamily, args) -> gadgets.Gadget:
    w = _witness(args, family)
    if kind == "base":
        h, x = gadgets.build_base_H(w, family)
        return gadgets.base_gadget(h, x, family)
    if kind == "equality":
        return gadgets.build_equality_gadget(family, args.d)
    h, x = gadgets.build_base_H(w, family)
    i = args.color
    if i is None:
        raise Failure(f"--color is required for kind {kind}")
    if kind == "ci":
        return gadgets.build_C_i(h, x, i, family)
    if kind == "dneg":
        return gadgets.build_D_neg_i(gadgets.build_C_i(h, x, i, family), i, family)
    dets = gadgets.build_determiners(w, family)
    if kind == "determiner":
        return dets[i]
    if kind == "remote":
        d = args.d if args.d is not None else family.max_vertices
        if args.via == "sender":
            snd = gadgets.default_sender(family)
            if snd is None:
                raise Failure("no uncolored sender found for this family")
            return gadgets.make_remote_by_sender(dets[i], d, snd)
        return gadgets.make_remote(dets[i], d, dets)
    raise Failure(f"unknown gadget kind {kind!r}")


def cmd_gadget(args, inputs: dict, stats: dict) -> tuple[dict, int]:
    family = load_family(args.family)
    inputs["family"] = _fp(args.family)
    if args.action == "build":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            g = _build(args.kind, family, args)
        gadgets.save_gadget(g, args.out)
        report = gadgets.verify_gadget(g, family)
        out = {
            "kind": g.kind.value,
            "edges": g.graph.m,
            "precolored": len(g.graph.edge_colors),
            "out": args.out,
            "verification": report.to_dict(),
            "warnings": [str(w.message) for w in caught],
        }
        return out, EXIT_OK if report.passed else EXIT_LEMMA
    g = gadgets.load_gadget(args.gadget)
    inputs["gadget"] = _fp(args.gadget)
    report = gadgets.verify_gadget(g, family)
    out = {"kind": g.kind.value, "verification": report.to_dict()}
    if not report.passed:
        raise Failure("gadget verification failed", EXIT_LEMMA, out)
    return out, EXIT_OK


# -- reductions ----------------------------------------------------------------

_DIRECTIONS = {("col", "csp"), ("csp", "ext"), ("ext", "col")}


def cmd_reduce(args, inputs: dict, stats: dict) -> tuple[dict, int]:
    if (args.source, args.target) not in _DIRECTIONS:
        raise Failure(f"unsupported direction {args.source} -> {args.target}")
    family = load_family(args.family)
    inputs.update(family=_fp(args.family), input=_fp(args.input))
    s = algebra.build_G_F(family)
    out: dict = {}
    if args.source == "col":
        g = load(args.input)
        inst, trace = reductions.col_to_csp(g, family, s)
        _write_json(inst.to_dict(), args.out)
        out["constraints"] = len(inst.constraints)
        if args.check:
            graphs = _small_graphs(family.colors, args.check)
            out["check"] = reductions.col_csp_agreement(family, graphs, s).to_dict()
    elif args.source == "csp":
        inst = reductions.load_csp(args.input)
        eq = gadgets.build_equality_gadget(family)
        g, trace = reductions.csp_to_ext(inst, family, eq, s)
        save(g, args.out)
        out["edges"] = g.m
        if args.check:
            xs = reductions.generate_csp_instances(s, args.check)
            out["check"] = reductions.csp_ext_agreement(family, eq, xs, s).to_dict()
    else:
        x = load(args.input)
        w = _witness(args, family)
        dets = gadgets.build_determiners(w, family)
        d = family.max_vertices
        snd = gadgets.default_sender(family)
        if snd is None:
            raise Failure("no uncolored sender found for this family")
        remote = {i: gadgets.make_remote_by_sender(dets[i], d, snd) for i in sorted(dets)}
        g, trace = reductions.ext_to_col(x, family, remote)
        save(g, args.out)
        out["edges"] = g.m
        if args.check:
            graphs = _small_graphs(family.colors, args.check, precolor=True)
            out["check"] = reductions.ext_col_agreement(family, remote, graphs).to_dict()
    if args.trace:
        _write_json(trace.to_dict(), args.trace)
    out["out"] = args.out
    failed = "check" in out and not out["check"]["passed"]
    return out, EXIT_LEMMA if failed else EXIT_OK


def _small_graphs(colors: int, count: int, precolor: bool = False) -> list[ColoredGraph]:
    """The first ``count`` graphs of a fixed enumeration (edge masks, then one precolored edge)."""
    import itertools

    out = []
    for n in range(2, 6):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1, 1 << len(pairs)):
            g = ColoredGraph(n, [pairs[k] for k in range(len(pairs)) if mask >> k & 1], colors)
            out.append(g)
            if precolor:
                out.extend(g.with_coloring({0: c}) for c in range(1, colors + 1))
            if len(out) >= count:
                return out[:count]
    return out


# -- classification and algebra ----------------------------------------------------


def cmd_classify(args, inputs: dict, stats: dict) -> tuple[dict, int]:
    family = load_family(args.family)
    inputs["family"] = _fp(args.family)
    return algebra.classify_report(family, args.m).to_dict(), EXIT_OK


def cmd_algebra(args, inputs: dict, stats: dict) -> tuple[dict, int]:
    family = load_family(args.family)
    inputs["family"] = _fp(args.family)
    s = algebra.build_G_F(family)
    out = {
        "domain": s.domain,
        "relations": {rel.name: len(rel.tuples) for rel in s.relations},
        "cyclic": {},
    }
    for k in args.arity:
        f = algebra.find_cyclic_polymorphism(s, k, args.budget, args.threads)
        out["cyclic"][str(k)] = None if f is None else f.to_dict()
    if args.classify is not None:
        out["classification"] = algebra.classify_report(family, args.classify).to_dict()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(algebra.dump_structure(s) + "\n")
    return out, EXIT_OK


# -- family operations -------------------------------------------------------------


def cmd_family(args, inputs: dict, stats: dict) -> tuple[dict, int]:
    family = load_family(args.family)
    inputs["family"] = _fp(args.family)
    if args.action == "validate":
        problems = validate(family)
        return {"valid": not problems, "violations": problems}, EXIT_OK if not problems else EXIT_ERROR
    if args.action == "core":
        core, rho = compute_core(family)
        if args.out:
            save_family(core, args.out)
        return {"colors": core.colors, "obstructions": len(core.obstructions), "recoloring": list(rho.table)}, EXIT_OK
    if args.action == "prune":
        pruned = prune_redundant(family)
        if args.out:
            save_family(pruned, args.out)
        return {"obstructions": len(pruned.obstructions)}, EXIT_OK
    if args.action == "orient":
        oriented = orient(family, dedupe=args.dedupe)
        if args.out:
            save_family(oriented, args.out)
        return {"obstructions": len(oriented.obstructions)}, EXIT_OK
    fam = family if family.oriented else orient(family, dedupe=True)
    nf = normalize(fam)
    if args.out:
        _write_json(nf.to_dict(), args.out)
    return {
        "patterns": len(nf.patterns),
        "phases": nf.fired,
        "edge_fresh": len(nf.edge_fresh),
        "vertex_fresh": len(nf.vertex_fresh),
    }, EXIT_OK


# -- wiring ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="forbcol", description="Forbidden edge-coloring problems.")
    p.add_argument("--threads", type=int, default=1, help="worker count for parallel searches")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide Col(F) or Ext(F) for one graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--family", required=True)
    s.add_argument("--ext", action="store_true", help="treat precolored edges as fixed")
    s.add_argument("--enumerate", type=int, default=0, metavar="N", help="also count up to N extensions")
    s.add_argument("--deterministic", action="store_true", help="accepted for compatibility; runs are always deterministic")
    s.set_defaults(run=cmd_solve)

    g = sub.add_parser("gadget", help="build or verify gadgets")
    gsub = g.add_subparsers(dest="action", required=True)
    b = gsub.add_parser("build")
    b.add_argument("--kind", required=True, choices=["base", "ci", "dneg", "determiner", "remote", "equality"])
    b.add_argument("--family", required=True)
    b.add_argument("--color", type=int)
    b.add_argument("--d", type=int)
    b.add_argument("--via", choices=["tower", "sender"], default="tower")
    b.add_argument("--witness")
    b.add_argument("--out", required=True)
    v = gsub.add_parser("verify")
    v.add_argument("--gadget", required=True)
    v.add_argument("--family", required=True)
    g.set_defaults(run=cmd_gadget)

    r = sub.add_parser("reduce", help="run one reduction step")
    r.add_argument("--from", dest="source", required=True, choices=["ext", "csp", "col"])
    r.add_argument("--to", dest="target", required=True, choices=["col", "ext", "csp"])
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--family", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--trace")
    r.add_argument("--witness")
    r.add_argument("--check", type=int, default=0, metavar="N")
    r.set_defaults(run=cmd_reduce)

    c = sub.add_parser("classify", help="P / NP-complete verdict for clique and odd-cycle families")
    c.add_argument("--family", required=True)
    c.add_argument("--m", type=int, required=True)
    c.set_defaults(run=cmd_classify)

    a = sub.add_parser("algebra", help="build G_F and search cyclic polymorphisms")
    a.add_argument("--family", required=True)
    a.add_argument("--cyclic", "--arity", dest="arity", type=int, nargs="+", default=[2, 3, 4], metavar="K")
    a.add_argument("--classify", type=int, metavar="M", help="also classify the family for K_M-free inputs")
    a.add_argument("--budget", type=int, default=algebra.CANDIDATE_BUDGET)
    a.add_argument("--out")
    a.set_defaults(run=cmd_algebra)

    f = sub.add_parser("family", help="family meta-operations")
    f.add_argument("action", choices=["validate", "core", "prune", "orient", "normalize"])
    f.add_argument("--family", required=True)
    f.add_argument("--out")
    f.add_argument("--dedupe", action="store_true")
    f.set_defaults(run=cmd_family)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    inputs: dict = {}
    stats: dict = {}
    start = time.perf_counter()
    code = EXIT_OK
    try:
        result, code = args.run(args, inputs, stats)
    except Failure as exc:
        result, code = {"error": str(exc), **exc.payload}, exc.code
    except (LemmaCheckFailed, UnverifiedGadget) as exc:
        result, code = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_LEMMA
    except (ForbColError, FormatError, OSError, ValueError) as exc:
        result, code = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_ERROR
    report = {
        "command": argv,
        "inputs": inputs,
        "result": result,
        "seconds": round(time.perf_counter() - start, 6),
        "stats": stats,
        "exit": code,
    }
    print(json.dumps(report, sort_keys=True, default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())
