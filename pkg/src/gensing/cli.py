"""Command line interface: ``gensing <command> GRAPHFILE [options]``.

Exit codes: 0 success, 1 usage, 2 validation, 3 resource guard, 4 oracle
discrepancy.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import generic as gc
from .cycle_opt import SearchTooLarge, min_chi_box, sublevel_bounds
from .graph_ops import StepCapReached, blowup_edge, blowup_vertex
from .hyperelliptic import (CensusRecord, EnumerationGuard, classify_pair, classify_single,
                            enumerate_instances, verify_report, _fundamental_cycle_rational)
from .io import (GraphFileError, cycle_dict, dumps_report, emit_graph, make_report,
                 read_graph_file)
from .lattice import (GraphError, NotInDualLattice, chi, discriminant_order, dual_basis,
                      from_dual_coordinates, in_dual_lattice, intersection_pairing)
from .relative import (SplitConfig, h1_on_Z1, relative_dominant, relative_eca_dim,
                       relative_h1)

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_GUARD, EXIT_ORACLE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument helpers ---------------------------------------------------------------

def _pairs(text):
    out = {}
    for tok in text.replace(",", " ").split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise UsageError(f"expected vertex=value, got {tok!r}")
        out[key] = out.get(key, 0) + Fraction(val)
    return out


def _cycle(g, doc, spec):
    """A cycle named in the file, or inline ``a=1,b=2``; ``0`` is the zero cycle."""
    if spec in doc.cycles:
        coeffs = doc.cycles[spec]
    elif spec == "0":
        coeffs = {}
    elif "=" in spec:
        coeffs = _pairs(spec)
    else:
        raise UsageError(f"no cycle named {spec!r} in the graph file")
    for v, x in coeffs.items():
        if v not in g.index:
            raise GraphError([f"unknown vertex {v!r} in cycle"])
        if Fraction(x).denominator != 1:
            raise GraphError([f"cycle coefficient at {v!r} is not an integer"])
    return g.cycle({v: int(x) for v, x in coeffs.items()})


def _chern(g, spec):
    """``a=1/3,b=2/3`` in the E-basis, ``dual:a=1`` for sum a_v E*_v, or ``0``."""
    dual = spec.startswith("dual:")
    coeffs = {} if spec == "0" else _pairs(spec[5:] if dual else spec)
    for v in coeffs:
        if v not in g.index:
            raise GraphError([f"unknown vertex {v!r} in Chern class"])
    vec = tuple(Fraction(coeffs.get(v, 0)) for v in g.vertices)
    if dual:
        vec = from_dual_coordinates(g, vec)
    if not in_dual_lattice(g, vec):
        raise NotInDualLattice("Chern class is not in L'")
    return vec


def _vertices(g, text):
    names = [x for x in text.replace(",", " ").split() if x]
    for v in names:
        if v not in g.index:
            raise GraphError([f"unknown vertex {v!r}"])
    return names


def _frac(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fmt_cycle(g, c):
    return " ".join(f"{v}={_frac(x)}" for v, x in zip(g.vertices, c))


# -- commands ---------------------------------------------------------------------
# Each returns (results, text lines, oracle dict or None).

def cmd_validate(g, doc, args):
    res = {"vertices": g.n, "edges": len(g.edges), "determinant": g.determinant,
           "cycles": sorted(doc.cycles)}
    return res, [f"valid: {g.n} vertices, {len(g.edges)} edges, det(-I) = {g.determinant}"], None


def _oracle_pg(g):
    """p_g and rationality by a different route: Laufer's fundamental cycle for
    rationality and a box search over the chi <= 1 sublevel set."""
    lo, hi = sublevel_bounds(g, g.zero, 1)
    hi = tuple(max(1, b) for b in hi)
    r = min_chi_box(g, None, g.zero, hi, exclude_zero=True)
    return {"rational": _fundamental_cycle_rational(g), "p_g": max(0, int(1 - r.minimum)),
            "box": hi}


def cmd_invariants(g, doc, args):
    rational = gc.is_rational(g)
    res = {
        "determinant": g.determinant,
        "discriminant_order": discriminant_order(g),
        "canonical_cycle": cycle_dict(g, g.canonical),
        "dual_basis": {v: cycle_dict(g, d) for v, d in zip(g.vertices, dual_basis(g))},
        "rational": rational,
        "p_g": gc.geometric_genus(g),
        "min_chi": gc.min_chi_positive(g).minimum,
        "maximal_ideal_cycle": None if rational else cycle_dict(g, gc.maximal_ideal_cycle(g)),
    }
    lines = [f"det(-I) = {res['determinant']}",
             f"Z_K: {_fmt_cycle(g, g.canonical)}",
             f"rational: {'yes' if rational else 'no'}",
             f"p_g = {res['p_g']}",
             f"min chi over l > 0 = {_frac(res['min_chi'])}"]
    for v, d in zip(g.vertices, dual_basis(g)):
        lines.append(f"E*_{v}: {_fmt_cycle(g, d)}")
    if not rational:
        lines.append(f"maximal ideal cycle: {_fmt_cycle(g, gc.maximal_ideal_cycle(g))}")
    oracle = None
    if args.oracle:
        o = _oracle_pg(g)
        oracle = {"values": o, "discrepancies": []}
        if o["rational"] != rational:
            oracle["discrepancies"].append("rational")
        if o["p_g"] != res["p_g"]:
            oracle["discrepancies"].append("p_g")
    return res, lines, oracle


def cmd_chi(g, doc, args):
    Z = _cycle(g, doc, args.cycle)
    val = chi(g, Z)
    oracle = None
    if args.oracle:
        # direct expansion: chi(l) = (sum l_v (e_v + 2) - (l, l)) / 2
        direct = Fraction(sum(x * (e + 2) for x, e in zip(Z, g.euler))
                          - intersection_pairing(g, Z, Z), 2)
        oracle = {"values": {"chi": direct},
                  "discrepancies": [] if direct == val else ["chi"]}
    return {"cycle": cycle_dict(g, Z), "chi": val}, [f"chi = {_frac(val)}"], oracle


def cmd_h1(g, doc, args):
    Z = _cycle(g, doc, args.cycle)
    if args.chern:
        lp = _chern(g, args.chern)
        h = gc.h1_natural(g, Z, lp)
        res = {"cycle": cycle_dict(g, Z), "chern": cycle_dict(g, lp), "h1": h}
        rep = gc.h0_natural_via_rr(g, Z, lp, h1=h)
        res["h0"] = rep.h0
        oracle = None
        if args.oracle:
            r = min_chi_box(g, lp, g.zero, Z)
            direct = int(chi(g, lp) - r.minimum) if any(Z) else 0
            oracle = {"values": {"h1": direct}, "discrepancies": [] if direct == h else ["h1"]}
        return res, [f"h1(O_Z(-l')) = {h}", f"h0(O_Z(-l')) = {rep.h0}"], oracle
    h = gc.h1_generic(g, Z) if any(Z) else 0
    oracle = None
    if args.oracle:
        direct = gc.h1_generic_oracle(g, Z) if any(Z) else 0
        oracle = {"values": {"h1": direct}, "discrepancies": [] if direct == h else ["h1"]}
    return {"cycle": cycle_dict(g, Z), "h1": h}, [f"h1(O_Z) = {h}"], oracle


def cmd_ez(g, doc, args):
    Z = _cycle(g, doc, args.cycle)
    J = _vertices(g, args.vertices)
    e = gc.e_Z(g, Z, J)
    regular = gc.has_regular_canonical_section(g, Z)
    oracle = None
    if args.oracle:
        idx = {g.index[v] for v in J}
        rest = tuple(0 if i in idx else x for i, x in enumerate(Z))
        h = lambda c: gc.h1_generic_oracle(g, c) if any(c) else 0  # noqa: E731
        direct = h(Z) - h(rest)
        reg = gc.regular_section_chi_test(g, Z)
        disc = ([] if direct == e else ["e_Z"]) + ([] if reg == regular else ["regular"])
        oracle = {"values": {"e_Z": direct, "regular_canonical_section": reg},
                  "discrepancies": disc}
    res = {"cycle": cycle_dict(g, Z), "J": J, "e_Z": e, "regular_canonical_section": regular}
    return res, [f"e_Z({','.join(J)}) = {e}",
                 f"regular canonical section: {'yes' if regular else 'no'}"], oracle


def cmd_semigroup(g, doc, args):
    lp = _chern(g, args.chern)
    member = gc.semigroup_member(g, lp)
    oracle = None
    if args.oracle:
        hi = sublevel_bounds(g, lp, chi(g, lp))
        if hi is None:
            direct = True
        else:
            top = tuple(max(1, b) for b in hi[1])
            r = min_chi_box(g, lp, g.zero, top, exclude_zero=True)
            direct = not any(lp) or r.minimum > chi(g, lp)
        oracle = {"values": {"member": direct},
                  "discrepancies": [] if direct == member else ["member"]}
    return ({"chern": cycle_dict(g, lp), "member": member},
            [f"in S'_an: {'yes' if member else 'no'}"], oracle)


def cmd_cohcycle(g, doc, args):
    Z = _cycle(g, doc, args.cycle)
    c = gc.cohomological_cycle(g, Z)
    oracle = None
    if args.oracle:
        mins = gc.cohomological_cycle_oracle(g, Z)
        oracle = {"values": {"minimal_elements": [cycle_dict(g, m) for m in mins]},
                  "discrepancies": [] if mins == [c] else ["cohomological_cycle"]}
    return ({"cycle": cycle_dict(g, Z), "cohomological_cycle": cycle_dict(g, c)},
            [f"cohomological cycle: {_fmt_cycle(g, c)}"], oracle)


def cmd_blowup(g, doc, args):
    if bool(args.edge) == bool(args.vertex):
        raise UsageError("give exactly one of --edge u,v or --vertex v")
    if args.edge:
        ends = _vertices(g, args.edge)
        if len(ends) != 2:
            raise UsageError("--edge needs two vertices")
        r = blowup_edge(g, *ends)
    else:
        r = blowup_vertex(g, _vertices(g, args.vertex)[0])
    cycles = {name: r.new_graph.as_dict(r.pullback(g.cycle(c))) for name, c in doc.cycles.items()}
    text = emit_graph(r.new_graph, cycles)
    res = {"new_vertex": r.new_vertex, "graph": text,
           "new_fingerprint": r.new_graph.fingerprint,
           "canonical_cycle": cycle_dict(r.new_graph, r.new_graph.canonical)}
    return res, [text.rstrip("\n")], None


def cmd_relative(g, doc, args):
    V1 = _vertices(g, args.split)
    Z = _cycle(g, doc, args.cycle)
    lp = _chern(g, args.chern)
    cfg = SplitConfig.from_v1(g, V1, Z)
    val = relative_h1(cfg, lp, detail=True)
    dom, witness = relative_dominant(cfg, lp)
    hz1 = h1_on_Z1(cfg, lp)
    res = {"split": sorted(V1), "cycle": cycle_dict(g, Z), "chern": cycle_dict(g, lp),
           "relative_h1": val.value, "minimizer": cycle_dict(g, val.minimizer),
           "dominant": dom, "first_violation": None if witness is None else cycle_dict(g, witness),
           "h1_Z1": hz1, "eca_dim": relative_eca_dim(cfg, lp, hz1)}
    lines = [f"relative h1 = {val.value} (minimum at {_fmt_cycle(g, val.minimizer)})",
             f"h1(Z_1, L) = {hz1}",
             f"relatively dominant: {'yes' if dom else 'no'}",
             f"ECa dimension = {_frac(res['eca_dim'])}"]
    if witness is not None:
        lines.append(f"first violating l: {_fmt_cycle(g, witness)}")
    return res, lines, None


def _report_dict(rep):
    from .io import to_jsonable
    return to_jsonable(rep)


def cmd_classify(g, doc, args):
    Z = _cycle(g, doc, args.cycle)
    if bool(args.pair) == bool(args.single):
        raise UsageError("give exactly one of --pair u,v or --single u")
    if args.pair:
        vs = _vertices(g, args.pair)
        if len(vs) != 2:
            raise UsageError("--pair needs two vertices")
        rep = classify_pair(g, Z, *vs, towers=args.towers)
    else:
        rep = classify_single(g, Z, _vertices(g, args.single)[0], towers=args.towers)
    lines = [f"status: {rep.status}" + (f" ({rep.reason})" if rep.reason else "")]
    for c in rep.checks:
        vals = ", ".join(f"{k}={v}" for k, v in c["values"].items())
        lines.append(f"  [{'x' if c['holds'] else ' '}] {c['name']}" + (f": {vals}" if vals else ""))
    for c in rep.necessary_conditions:
        tag = "applicable" if c["applicable"] else "not applicable"
        lines.append(f"  necessary ({tag}): {c['name']}: {'holds' if c['holds'] else 'fails'}")
    oracle = None
    if args.oracle:
        bad = verify_report(g, rep)
        oracle = {"values": {}, "discrepancies": [str(b) for b in bad]}
    return {"report": _report_dict(rep)}, lines, oracle


def cmd_enumerate(args):
    rec = CensusRecord({})
    hits = []
    modes = ("pair", "single") if args.mode == "both" else (args.mode,)
    for g, Z, verts, rep in enumerate_instances(
            args.max_vertices, (args.euler_min, args.euler_max), args.coeff_cap, args.status,
            modes, max_yield=args.max_yield, max_graphs=args.max_graphs,
            time_limit=args.time_limit, census=rec):
        hits.append({"graph": emit_graph(g, {"Z": Z}), "fingerprint": g.fingerprint,
                     "vertices": list(verts), "report": _report_dict(rep)})
    census = {"graphs_examined": rec.graphs_examined, "nonrational": rec.nonrational,
              "by_size": rec.graphs_by_size, "exhausted": rec.exhausted, "stopped": rec.stopped,
              "counts": {f"{m}/{s}": c for (m, s), c in sorted(rec.counts.items())},
              "params": rec.params}
    lines = [f"examined {rec.graphs_examined} graphs ({rec.nonrational} non-rational), "
             f"{'search space exhausted' if rec.exhausted else 'stopped: ' + rec.stopped}",
             f"{len(hits)} {args.status} instances"]
    for h in hits:
        lines.append(f"--- {h['report']['mode']} {h['vertices']}")
        lines.append(h["graph"].rstrip("\n"))
    return {"census": census, "instances": hits}, lines


COMMANDS = {
    "validate": cmd_validate, "invariants": cmd_invariants, "chi": cmd_chi, "h1": cmd_h1,
    "ez": cmd_ez, "semigroup": cmd_semigroup, "cohcycle": cmd_cohcycle, "blowup": cmd_blowup,
    "relative": cmd_relative, "classify": cmd_classify,
}


def build_parser():
    p = _Parser(prog="gensing", description="Invariants of generic surface singularities "
                "from their resolution graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_text):
        s = sub.add_parser(name, help=help_text)
        if name != "enumerate":
            s.add_argument("graph", help="graph file")
        s.add_argument("--json", action="store_true", help="print a JSON report")
        s.add_argument("--oracle", action="store_true", help="cross-check by brute force")
        return s

    cmd("validate", "parse and validate a graph file")
    cmd("invariants", "Z_K, determinant, dual basis, rationality, p_g, maximal ideal cycle")
    cmd("chi", "Riemann-Roch value of a cycle").add_argument("--cycle", required=True)
    s = cmd("h1", "h^1(O_Z) or h^1(O_Z(-l'))")
    s.add_argument("--cycle", required=True)
    s.add_argument("--chern", help="l' as v=q,... (E-basis) or dual:v=k,...")
    s = cmd("ez", "e_Z(J)")
    s.add_argument("--cycle", required=True)
    s.add_argument("--vertices", required=True)
    cmd("semigroup", "membership in the analytic semigroup").add_argument("--chern", required=True)
    cmd("cohcycle", "cohomological cycle").add_argument("--cycle", required=True)
    s = cmd("blowup", "blow up an edge or a point of a curve")
    s.add_argument("--edge")
    s.add_argument("--vertex")
    s = cmd("relative", "relative h^1 and dominance for a split V = V1 + V2")
    s.add_argument("--split", required=True, help="vertices of V1")
    s.add_argument("--chern", required=True)
    s.add_argument("--cycle", required=True)
    s = cmd("classify", "g^1_2 verdict for a pair or a single vertex")
    s.add_argument("--cycle", required=True)
    s.add_argument("--pair")
    s.add_argument("--single")
    s.add_argument("--towers", action="store_true", help="also build cycle towers")
    s = cmd("enumerate", "search small trees for classified instances")
    s.add_argument("--max-vertices", type=int, required=True)
    s.add_argument("--status", default="Forbidden", choices=["Forbidden", "Guaranteed"])
    s.add_argument("--mode", default="both", choices=["pair", "single", "both"])
    s.add_argument("--euler-min", type=int, default=-5)
    s.add_argument("--euler-max", type=int, default=-1)
    s.add_argument("--coeff-cap", type=int, default=3)
    s.add_argument("--max-yield", type=int, default=10)
    s.add_argument("--max-graphs", type=int)
    s.add_argument("--time-limit", type=float)
    return p


def run_command(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        if args.command == "enumerate":
            g = None
            if args.oracle:
                print("note: enumerated instances are always re-verified by brute force", file=err)
            results, lines = cmd_enumerate(args)
            oracle = None
            inputs = {k: v for k, v in vars(args).items() if k not in ("json", "oracle")}
        else:
            doc = read_graph_file(args.graph)
            g = doc.graph
            results, lines, oracle = COMMANDS[args.command](g, doc, args)
            inputs = {k: v for k, v in vars(args).items()
                      if k not in ("json", "oracle", "graph") and v is not None}
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except (GraphFileError, GraphError, NotInDualLattice, gc.FormulaNotApplicable,
            gc.NonUniqueCohomologicalCycle, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_VALIDATION
    except (SearchTooLarge, StepCapReached, EnumerationGuard) as exc:
        print(f"resource guard: {exc}", file=err)
        return EXIT_GUARD
    code = EXIT_OK
    extra = {}
    if oracle is not None:
        extra["oracle"] = oracle
        if oracle["discrepancies"]:
            code = EXIT_ORACLE
    if args.json:
        print(dumps_report(make_report(g, args.command, inputs, results, **extra)), file=out)
    else:
        for line in lines:
            print(line, file=out)
        if oracle is not None:
            if oracle["discrepancies"]:
                print(f"ORACLE DISCREPANCY: {', '.join(oracle['discrepancies'])}", file=out)
            else:
                print("oracle: agrees", file=out)
    return code


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
