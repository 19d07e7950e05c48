"""Verdicts on degree-two linear systems (g^1_2) on cycles of generic singularities.

A pair u', u'' asks for a bundle of class -E*_u' - E*_u'' with h^0 = 2; the
single mode asks the same for class -2E*_u. Everything here is decided by
h^1(O_Z') values of the generic structure, i.e. by chi alone.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .cycle_opt import SearchTooLarge
from .generic import (CACHE, NonUniqueCohomologicalCycle, SubcycleTable, _h1_any,
                      cohomological_cycle, cohomological_cycle_oracle, e_Z,
                      h1_generic_oracle, has_regular_canonical_section)
from .lattice import (GraphError, ResolutionGraph, bareiss_minors, intersection_pairing,
                      leq, sub, support, validate_graph)

FORBIDDEN = "Forbidden"
GUARANTEED = "Guaranteed"
UNDETERMINED = "Undetermined"
STATUSES = (FORBIDDEN, GUARANTEED, UNDETERMINED)
ADVISORY = "derived-under-hypothesis"


@dataclass
class CycleTower:
    kind: str  # "pair" or "single"
    vertex: str  # the vertex whose curve is removed at each step (w' or u_nj)
    levels: list = field(default_factory=list)
    stopped: str = ""

    def cycles(self):
        return [lv["cycle"] for lv in self.levels]


@dataclass
class G12Report:
    mode: dict
    status: str
    checks: list
    necessary_conditions: list = field(default_factory=list)
    towers: list = field(default_factory=list)
    reason: str = ""
    cycle: tuple = ()

    def check(self, name):
        for c in self.checks:
            if c["name"] == name:
                return c
        raise KeyError(name)

    @property
    def e_values(self) -> dict:
        return dict(self.check("e-values")["values"])


def _vertex(g, v):
    if v not in g.index:
        raise GraphError([f"unknown vertex {v!r}"])
    return g.index[v]


def _chk(name, holds, **values):
    return {"name": name, "holds": bool(holds), "values": values}


def _first_failing(checks):
    for c in checks:
        if not c["holds"]:
            return c["name"]
    return ""


# -- verdicts -----------------------------------------------------------------

def _pair_status(regular, ones, e1, e2, e12):
    """The decision rule, on raw values."""
    if regular and ones:
        if max(e1, e2) >= 3:
            return FORBIDDEN
        if 0 < e1 == e2 == e12 <= 2:
            return GUARANTEED
    return UNDETERMINED


def _single_status(regular, one, e):
    return FORBIDDEN if regular and one and e >= 3 else UNDETERMINED


def classify_pair(g: ResolutionGraph, Z, u1: str, u2: str, *, necessary=True,
                  towers=False, cache=CACHE) -> G12Report:
    Z = tuple(int(x) for x in Z)
    i, j = _vertex(g, u1), _vertex(g, u2)
    if i == j:
        raise GraphError(["u' and u'' must differ"])
    if Z[i] <= 0 or Z[j] <= 0:
        raise GraphError(["u' and u'' must lie in the support of Z"])
    regular = has_regular_canonical_section(g, Z, cache)
    e1, e2 = e_Z(g, Z, [i], cache), e_Z(g, Z, [j], cache)
    e12 = e_Z(g, Z, [i, j], cache)
    checks = [
        _chk("regular canonical section", regular),
        _chk("Z_u' = Z_u'' = 1", Z[i] == 1 and Z[j] == 1, Z_u1=Z[i], Z_u2=Z[j]),
        _chk("e-values", True, e_u1=e1, e_u2=e2, e_u1u2=e12),
        _chk("e >= 3", max(e1, e2) >= 3, e=max(e1, e2)),
        _chk("e > 0", e1 > 0, e=e1),
        _chk("e-values equal", e1 == e2 == e12),
        _chk("e <= 2", e1 <= 2, e=e1),
    ]
    status = _pair_status(regular, Z[i] == 1 and Z[j] == 1, e1, e2, e12)
    if status == FORBIDDEN:
        reason = "e_Z >= 3 under the hypotheses"
    elif status == GUARANTEED:
        reason = "three e-values agree and lie in {1, 2}"
    else:
        gate = [c for c in checks[:2] if not c["holds"]]
        if gate:
            reason = gate[0]["name"]
        else:
            reason = _first_failing([checks[4], checks[5], checks[6]]) or "no rule applies"
    rep = G12Report(mode={"kind": "pair", "u1": u1, "u2": u2}, status=status, checks=checks,
                    reason=reason, cycle=Z)
    if necessary:
        rep.necessary_conditions = necessary_conditions_pair(g, Z, u1, u2, cache=cache)
    if towers:
        rep.towers = _towers_pair(g, Z, u1, u2, cache)
    return rep


def classify_single(g: ResolutionGraph, Z, u: str, *, necessary=True, towers=False,
                    cache=CACHE) -> G12Report:
    Z = tuple(int(x) for x in Z)
    i = _vertex(g, u)
    if Z[i] <= 0:
        raise GraphError(["u must lie in the support of Z"])
    regular = has_regular_canonical_section(g, Z, cache)
    e = e_Z(g, Z, [i], cache)
    checks = [
        _chk("regular canonical section", regular),
        _chk("Z_u = 1", Z[i] == 1, Z_u=Z[i]),
        _chk("e-values", True, e_u=e),
        _chk("e >= 3", e >= 3, e=e),
    ]
    status = _single_status(regular, Z[i] == 1, e)
    reason = "e_Z(u) >= 3 under the hypotheses" if status == FORBIDDEN else \
        (_first_failing([checks[0], checks[1], checks[3]]))
    rep = G12Report(mode={"kind": "single", "u": u}, status=status, checks=checks,
                    reason=reason, cycle=Z)
    if necessary:
        rep.necessary_conditions = necessary_conditions_single(g, Z, u, cache=cache)
    if towers:
        rep.towers = _towers_single(g, Z, u, cache)
    return rep


# -- necessary-condition ledgers ----------------------------------------------

def _cond(name, holds, applicable, **values):
    return {"name": name, "holds": bool(holds), "applicable": bool(applicable),
            "status": ADVISORY, "values": values}


def _only_neighbor(g, i):
    nb = g.neighbors[i]
    return nb[0] if len(nb) == 1 else None


def necessary_conditions_pair(g: ResolutionGraph, Z, u1: str, u2: str, cache=CACHE) -> list:
    """Conditions any counterexample to the Forbidden verdict would satisfy."""
    Z = tuple(int(x) for x in Z)
    i, j = g.index[u1], g.index[u2]
    regular = has_regular_canonical_section(g, Z, cache)
    e1 = e_Z(g, Z, [i], cache)
    hyp = regular and Z[i] == 1 and Z[j] == 1 and e1 >= 3
    ends = g.valency(u1) == 1 and g.valency(u2) == 1
    out = [_cond("end vertices", ends, hyp, valency_u1=g.valency(u1), valency_u2=g.valency(u2))]
    w1, w2 = _only_neighbor(g, i), _only_neighbor(g, j)
    if w1 is None or w2 is None:
        out.append(_cond("Z_w' = Z_w''", False, False))
        out.append(_cond("e_Z(u') = Z_w' - 1", False, False))
        return out
    out.append(_cond("Z_w' = Z_w''", Z[w1] == Z[w2], hyp, w1=g.vertices[w1],
                     w2=g.vertices[w2], Z_w1=Z[w1], Z_w2=Z[w2]))
    out.append(_cond("e_Z(u') = Z_w' - 1", e1 == Z[w1] - 1, hyp, e_u1=e1, Z_w1=Z[w1]))
    return out


def necessary_conditions_single(g: ResolutionGraph, Z, u: str, cache=CACHE) -> list:
    Z = tuple(int(x) for x in Z)
    i = g.index[u]
    regular = has_regular_canonical_section(g, Z, cache)
    e = e_Z(g, Z, [i], cache)
    hyp = regular and Z[i] == 1 and e >= 3
    p = intersection_pairing(g, sub(Z, g.canonical), g.basis(u))
    p = Fraction(p)
    parity = p.denominator == 1 and p.numerator % 2 == 0
    q = intersection_pairing(g, sub(Z, g.basis(u)), g.basis(u))
    nbrs = {g.vertices[k]: Z[k] for k in g.neighbors[i] if Z[k] > 0}
    return [
        _cond("2 | (Z - Z_K, E_u)", parity, hyp, pairing=p),
        _cond("e_Z(u) = (Z - E_u, E_u)/2", 2 * e == q, hyp, e_u=e, pairing=q),
        _cond("2 | Z at neighbors of u", all(x % 2 == 0 for x in nbrs.values()), hyp,
              neighbors=nbrs),
    ]


# -- cycle towers ---------------------------------------------------------------

def _level(g, t, Zt, keys, cache, extra=None):
    h = _h1_any(g, Zt)
    lv = {"t": t, "cycle": Zt, "h1": h,
          "coefficients": {g.vertices[k]: Zt[k] for k in keys}}
    lv.update(extra or {})
    return lv


def _drop(g, Zt, w):
    out = list(Zt)
    out[w] -= 1
    return tuple(out)


def cycle_tower_pair(g: ResolutionGraph, Z, u1: str, u2: str, cache=CACHE) -> CycleTower:
    """Z^1 = Z, Z^t = cohomological cycle of Z^{t-1} - E_w', w' the neighbor of u'."""
    Z = tuple(int(x) for x in Z)
    i, j = _vertex(g, u1), _vertex(g, u2)
    w1 = _only_neighbor(g, i)
    if w1 is None:
        raise GraphError([f"{u1!r} is not an end vertex"])
    w2 = _only_neighbor(g, j)
    keys = [w1] + ([w2] if w2 is not None else [])

    def evals(Zt):
        return {"e_u1": e_Z(g, Zt, [i], cache) if Zt[i] else None,
                "e_u2": e_Z(g, Zt, [j], cache) if Zt[j] else None}

    tower = CycleTower("pair", g.vertices[w1])
    tower.levels.append(_level(g, 1, Z, keys, cache, evals(Z)))
    t, cur = 1, Z
    while True:
        if t >= Z[w1] - 1:
            tower.stopped = "t reached Z_w' - 1"
            break
        if cur[w1] == 0:
            tower.stopped = "w' left the support"
            break
        try:
            nxt = cohomological_cycle(g, _drop(g, cur, w1), cache)
        except NonUniqueCohomologicalCycle as exc:
            tower.stopped = f"cohomological cycle not unique: {exc.witnesses[:2]}"
            break
        t += 1
        prev_h = tower.levels[-1]["h1"]
        lv = _level(g, t, nxt, keys, cache, evals(nxt))
        lv["h1_drop"] = prev_h - lv["h1"]
        lv["predicted_drop"] = 1
        tower.levels.append(lv)
        cur = nxt
        if not any(cur) or len(g.components(support(cur))) != 1:
            tower.stopped = "support disconnected or empty"
            break
    return tower


def cycle_tower_single(g: ResolutionGraph, Z, u: str, u_nj: str, cache=CACHE) -> CycleTower:
    """Z^1 = Z, Z^t = cohomological cycle of Z^{t-1} - E_{u_nj}; drops are observed, not asserted."""
    Z = tuple(int(x) for x in Z)
    i, k = _vertex(g, u), _vertex(g, u_nj)
    if k not in g.neighbors[i]:
        raise GraphError([f"{u_nj!r} is not a neighbor of {u!r}"])
    tower = CycleTower("single", u_nj)
    e0 = e_Z(g, Z, [i], cache) if Z[i] else None
    tower.levels.append(_level(g, 1, Z, [i, k], cache, {"e_u": e0}))
    t, cur = 1, Z
    while True:
        if cur[k] == 0:
            tower.stopped = "u_nj left the support"
            break
        if t > Z[k]:
            tower.stopped = "level cap"
            break
        try:
            nxt = cohomological_cycle(g, _drop(g, cur, k), cache)
        except NonUniqueCohomologicalCycle as exc:
            tower.stopped = f"cohomological cycle not unique: {exc.witnesses[:2]}"
            break
        t += 1
        prev = tower.levels[-1]
        e = e_Z(g, nxt, [i], cache) if nxt[i] else None
        lv = _level(g, t, nxt, [i, k], cache, {"e_u": e})
        lv["coefficient_drop"] = cur[k] - nxt[k]
        lv["coefficient_drop_is_2"] = cur[k] - nxt[k] == 2
        lv["e_drop_is_1"] = (prev["e_u"] is not None and e is not None and prev["e_u"] - e == 1)
        tower.levels.append(lv)
        cur = nxt
        if not any(cur) or len(g.components(support(cur))) != 1 or cur[i] == 0:
            tower.stopped = "support disconnected, empty, or u left the support"
            break
    return tower


def _towers_pair(g, Z, u1, u2, cache):
    out = []
    for a, b in ((u1, u2), (u2, u1)):
        if g.valency(a) == 1:
            out.append(cycle_tower_pair(g, Z, a, b, cache))
    return out


def _towers_single(g, Z, u, cache):
    i = g.index[u]
    return [cycle_tower_single(g, Z, u, g.vertices[k], cache)
            for k in g.neighbors[i] if Z[k] > 0]


def certify_tower(g: ResolutionGraph, tower: CycleTower) -> list:
    """Brute-force checks: Z^t <= Z^{t-1}, h^1 nonincreasing, each level the unique minimal
    cycle with its h^1 below (previous - E_w). Returns a list of failures."""
    fails = []
    w = g.index[tower.vertex]
    for prev, lv in zip(tower.levels, tower.levels[1:]):
        Zp, Zt = prev["cycle"], lv["cycle"]
        if not leq(Zt, Zp):
            fails.append((lv["t"], "not below previous level"))
        hp = h1_generic_oracle(g, Zp) if any(Zp) else 0
        ht = h1_generic_oracle(g, Zt) if any(Zt) else 0
        if ht > hp:
            fails.append((lv["t"], "h1 increased"))
        if ht != lv["h1"]:
            fails.append((lv["t"], "recorded h1 differs from brute force"))
        mins = cohomological_cycle_oracle(g, _drop(g, Zp, w))
        if mins != [Zt]:
            fails.append((lv["t"], f"minimal elements {mins}"))
    return fails


# -- brute-force re-verification -----------------------------------------------

def _h1_oracle(g, Z):
    return h1_generic_oracle(g, Z) if any(Z) else 0


def _regular_oracle(g, Z):
    if not any(Z) or len(g.components(support(Z))) != 1:
        return False
    h = _h1_oracle(g, Z)
    return all(_h1_oracle(g, _drop(g, Z, i)) < h for i in support(Z))


def _e_oracle(g, Z, idx):
    rest = tuple(0 if k in idx else x for k, x in enumerate(Z))
    return _h1_oracle(g, Z) - _h1_oracle(g, rest)


def verify_report(g: ResolutionGraph, rep: G12Report) -> list:
    """Recompute every raw value of a report by direct enumeration; return discrepancies."""
    Z = rep.cycle
    bad = []
    reg = _regular_oracle(g, Z)
    if reg != rep.check("regular canonical section")["holds"]:
        bad.append(("regular canonical section", reg))
    if rep.mode["kind"] == "pair":
        i, j = g.index[rep.mode["u1"]], g.index[rep.mode["u2"]]
        ev = {"e_u1": _e_oracle(g, Z, {i}), "e_u2": _e_oracle(g, Z, {j}),
              "e_u1u2": _e_oracle(g, Z, {i, j})}
        status = _pair_status(reg, Z[i] == 1 and Z[j] == 1, ev["e_u1"], ev["e_u2"], ev["e_u1u2"])
    else:
        i = g.index[rep.mode["u"]]
        ev = {"e_u": _e_oracle(g, Z, {i})}
        status = _single_status(reg, Z[i] == 1, ev["e_u"])
    if ev != rep.e_values:
        bad.append(("e-values", ev))
    if status != rep.status:
        bad.append(("status", status))
    return bad


def verdict_sound(rep: G12Report) -> bool:
    """Re-run the decision rule on the values recorded in the report."""
    reg = rep.check("regular canonical section")["holds"]
    ev = rep.e_values
    if rep.mode["kind"] == "pair":
        ones = rep.check("Z_u' = Z_u'' = 1")["holds"]
        return _pair_status(reg, ones, ev["e_u1"], ev["e_u2"], ev["e_u1u2"]) == rep.status
    ones = rep.check("Z_u = 1")["holds"]
    return _single_status(reg, ones, ev["e_u"]) == rep.status


# -- enumeration of decorated trees -----------------------------------------------

def _encode(adj, euler, root):
    def enc(v, parent):
        kids = sorted(enc(c, v) for c in adj[v] if c != parent)
        return "(" + str(-euler[v]) + "".join(kids) + ")"
    return enc(root, -1)


def canonical_form(adj, euler) -> str:
    """Minimal rooted encoding over all roots; equal iff the decorated trees are isomorphic."""
    return min(_encode(adj, euler, r) for r in range(len(euler)))


def _neg_def(adj, euler):
    n = len(euler)
    m = [[0] * n for _ in range(n)]
    for v in range(n):
        m[v][v] = euler[v]
        for w in adj[v]:
            m[v][w] = 1
    minors = bareiss_minors([[-x for x in row] for row in m])
    return all(x > 0 for x in minors)


def decorated_trees(max_vertices: int, euler_range=(-5, -1)):
    """Non-isomorphic negative-definite decorated trees, by size, in canonical order.

    Negative definiteness passes to subtrees, and every tree is a smaller tree
    plus a leaf, so growing only definite trees reaches all of them.
    """
    lo, hi = euler_range
    eulers = range(lo, hi + 1)
    level = {}
    for e in eulers:
        if e < 0:
            level[canonical_form([[]], [e])] = ([[]], [e])
    size = 1
    while level:
        for key in sorted(level):
            yield size, key, level[key]
        if size >= max_vertices:
            return
        nxt = {}
        for key in sorted(level):
            adj, eul = level[key]
            n = len(eul)
            for v in range(n):
                for e in eulers:
                    a2 = [list(x) for x in adj] + [[v]]
                    a2[v].append(n)
                    e2 = eul + [e]
                    k2 = canonical_form(a2, e2)
                    if k2 in nxt:
                        continue
                    if _neg_def(a2, e2):
                        nxt[k2] = (a2, e2)
        level = nxt
        size += 1


def _to_graph(adj, euler):
    ids = [f"v{k}" for k in range(len(euler))]
    edges = [(ids[a], ids[b]) for a in range(len(adj)) for b in adj[a] if a < b]
    return validate_graph([(ids[k], euler[k]) for k in range(len(euler))], edges)


def _raw_rational(adj, euler) -> bool:
    """Laufer's sequence: the fundamental cycle has chi = 1 iff the graph is rational."""
    n = len(euler)
    x = [1] * n
    while True:
        for i in range(n):
            if euler[i] * x[i] + sum(x[j] for j in adj[i]) > 0:
                x[i] += 1
                break
        else:
            break
    quad = sum(x[i] * (euler[i] * x[i] + sum(x[j] for j in adj[i])) for i in range(n))
    lin = sum(x[i] * (euler[i] + 2) for i in range(n))
    return (lin - quad) // 2 == 1


def _fundamental_cycle_rational(g: ResolutionGraph) -> bool:
    return _raw_rational([list(nb) for nb in g.neighbors], list(g.euler))


class _BoxChi:
    """min chi over (0, cap]^n for many graphs on n vertices, from precomputed monomials."""

    def __init__(self, n, cap):
        pts = np.indices((cap + 1,) * n).reshape(n, -1).T[1:].astype(np.int64)
        self.pts = pts
        self.sq = pts * pts
        self.prods = {(a, b): pts[:, a] * pts[:, b] for a, b in combinations(range(n), 2)}

    def min_chi(self, adj, euler):
        e = np.array(euler, dtype=np.int64)
        twice = self.pts @ (e + 2) - self.sq @ e
        for a in range(len(adj)):
            for b in adj[a]:
                if a < b:
                    twice -= 2 * self.prods[(a, b)]
        return int(twice.min()) // 2


@dataclass
class CensusRecord:
    params: dict
    graphs_examined: int = 0
    graphs_by_size: dict = field(default_factory=dict)
    nonrational: int = 0
    pruned: int = 0  # non-rational graphs whose chi never drops low enough in the box
    counts: dict = field(default_factory=dict)  # (mode, target status) -> (Z, vertices) count
    yielded: int = 0
    exhausted: bool = False
    stopped: str = ""
    seconds: float = 0.0


class EnumerationGuard(RuntimeError):
    pass


def _census_graph(g, cap, modes):
    """Vectorized verdicts for every Z in [0, cap]^V at once.

    Returns {(mode, status): count} and a list of candidate hits (mode, Z, vertices, status).
    """
    t = SubcycleTable(g, (cap,) * g.n)
    reg = t.regular_mask()
    h = t.h1
    n = g.n
    counts, hits = {}, []
    restricted = {}

    def r(axes):
        key = tuple(sorted(axes))
        if key not in restricted:
            restricted[key] = h - t.restricted_h1(set(key))
        return restricted[key]

    coord = np.indices(t.shape)
    if "single" in modes:
        for i in range(n):
            gate = reg & (coord[i] == 1)
            e = r([i])
            forb = gate & (e >= 3)
            c = int(forb.sum())
            counts[("single", FORBIDDEN)] = counts.get(("single", FORBIDDEN), 0) + c
            for p in np.argwhere(forb):
                hits.append(("single", tuple(int(x) for x in p), (g.vertices[i],), FORBIDDEN))
    if "pair" in modes:
        for i, j in combinations(range(n), 2):
            gate = reg & (coord[i] == 1) & (coord[j] == 1)
            e1, e2, e12 = r([i]), r([j]), r([i, j])
            forb = gate & (np.maximum(e1, e2) >= 3)
            guar = gate & ~forb & (e1 > 0) & (e1 == e2) & (e1 == e12) & (e1 <= 2)
            for st, m in ((FORBIDDEN, forb), (GUARANTEED, guar)):
                c = int(m.sum())
                counts[("pair", st)] = counts.get(("pair", st), 0) + c
                for p in np.argwhere(m):
                    hits.append(("pair", tuple(int(x) for x in p),
                                 (g.vertices[i], g.vertices[j]), st))
    return counts, hits


def enumerate_instances(max_vertices=5, euler_range=(-5, -1), coeff_cap=3,
                        status=FORBIDDEN, modes=("pair", "single"), *, max_yield=None,
                        per_graph=1, max_graphs=None, time_limit=None, verify=True,
                        census: CensusRecord | None = None):
    """Yield (graph, Z, vertices, G12Report) for instances with the target status.

    Graphs come in canonical order (size, then canonical encoding); cycles in
    lexicographic order. Every yielded report is re-verified by direct
    enumeration of the e-values. Resource guards (max_graphs, time_limit,
    box size) stop the search early; ``census`` records what was covered.
    """
    if max_vertices < 1 or coeff_cap < 1 or euler_range[0] > euler_range[1]:
        raise ValueError("bad enumeration parameters")
    if status not in STATUSES:
        raise ValueError(f"unknown status {status!r}")
    if status == UNDETERMINED:
        raise ValueError("enumeration targets Forbidden or Guaranteed instances")
    if (coeff_cap + 1) ** max_vertices > 10**7:
        raise SearchTooLarge("cycle box too large for the census")
    rec = census if census is not None else CensusRecord({})
    rec.params = {"max_vertices": max_vertices, "euler_range": list(euler_range),
                  "coeff_cap": coeff_cap, "status": status, "modes": list(modes)}
    t0 = time.monotonic()
    yielded = 0
    boxes = {}
    # Forbidden needs some e_Z >= 3, Guaranteed some e_Z >= 1
    threshold = -2 if status == FORBIDDEN else 0
    for size, key, (adj, eul) in decorated_trees(max_vertices, euler_range):
        if max_yield is not None and yielded >= max_yield:
            rec.stopped = f"max_yield={max_yield}"
            break
        if max_graphs is not None and rec.graphs_examined >= max_graphs:
            rec.stopped = f"max_graphs={max_graphs}"
            break
        if time_limit is not None and time.monotonic() - t0 > time_limit:
            rec.stopped = f"time_limit={time_limit}s"
            break
        rec.graphs_examined += 1
        rec.graphs_by_size[size] = rec.graphs_by_size.get(size, 0) + 1
        if _raw_rational(adj, eul):
            continue  # e_Z vanishes identically
        rec.nonrational += 1
        # for connected |Z| <= cap, h^1(O_Z) = 1 - min chi; e >= 3 needs h^1 >= 3
        if size not in boxes:
            boxes[size] = _BoxChi(size, coeff_cap)
        if boxes[size].min_chi(adj, eul) > threshold:
            rec.pruned += 1
            continue
        g = _to_graph(adj, eul)
        counts, hits = _census_graph(g, coeff_cap, modes)
        for (mode, st), c in counts.items():
            if st == status:
                rec.counts[(mode, st)] = rec.counts.get((mode, st), 0) + c
        taken = 0
        for mode, Z, verts, st in hits:
            if st != status or taken >= per_graph:
                continue
            if max_yield is not None and yielded >= max_yield:
                break
            if mode == "pair":
                rep = classify_pair(g, Z, *verts, necessary=True)
            else:
                rep = classify_single(g, Z, verts[0], necessary=True)
            if rep.status != st:
                raise AssertionError(f"vectorized census disagrees with classifier on {key} {Z}")
            if verify:
                bad = verify_report(g, rep)
                if bad:
                    raise AssertionError(f"brute-force re-verification failed: {bad}")
            taken += 1
            yielded += 1
            rec.yielded = yielded
            yield g, Z, verts, rep
    else:
        rec.exhausted = True
    rec.seconds = time.monotonic() - t0
