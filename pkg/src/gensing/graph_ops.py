"""Blow-ups of resolution graphs and the pullback of cycles."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .generic import FormulaNotApplicable, h1_resolution_natural, semigroup_member
from .lattice import GraphError, ResolutionGraph, validate_graph

DEFAULT_STEP_CAP = 16


class StepCapReached(RuntimeError):
    pass


@dataclass(frozen=True)
class BlowupResult:
    old_graph: ResolutionGraph
    new_graph: ResolutionGraph
    new_vertex: str
    parents: tuple  # old vertex ids the new curve meets

    def pullback(self, c) -> tuple:
        """Total transform: old coordinates kept, the new curve gets the sum over parents."""
        old = self.old_graph
        vals = dict(zip(old.vertices, c))
        w = sum(vals[p] for p in self.parents)
        full = dict(vals, **{self.new_vertex: w})
        return tuple(full[v] for v in self.new_graph.vertices)

    def restrict(self, c) -> tuple:
        """Forget the new coordinate."""
        vals = dict(zip(self.new_graph.vertices, c))
        return tuple(vals[v] for v in self.old_graph.vertices)

    def exceptional(self) -> tuple:
        return self.new_graph.basis(self.new_vertex)


def _fresh(g: ResolutionGraph, base: str) -> str:
    name, k = base, 1
    while name in g.index:
        k += 1
        name = f"{base}.{k}"
    return name


def _rebuild(g, euler_delta, new_vertex, drop_edges, add_edges):
    verts = [(v, e + euler_delta.get(v, 0)) for v, e in zip(g.vertices, g.euler)]
    verts.append((new_vertex, -1))
    edges = [tuple(e) for e in g.edges if frozenset(e) not in drop_edges] + add_edges
    return validate_graph(verts, edges, require_connected=False)


def blowup_edge(g: ResolutionGraph, u: str, v: str) -> BlowupResult:
    """Blow up the intersection point of E_u and E_v."""
    if frozenset((u, v)) not in {frozenset(e) for e in g.edges}:
        raise GraphError([f"{u!r}-{v!r} is not an edge"])
    w = _fresh(g, f"{min(u, v)}~{max(u, v)}")
    new = _rebuild(g, {u: -1, v: -1}, w, {frozenset((u, v))}, [(u, w), (v, w)])
    return BlowupResult(g, new, w, (u, v))


def blowup_vertex(g: ResolutionGraph, v: str, label: str | None = None) -> BlowupResult:
    """Blow up a generic (smooth, non-intersection) point of E_v."""
    if v not in g.index:
        raise GraphError([f"unknown vertex {v!r}"])
    w = _fresh(g, label or f"{v}^")
    new = _rebuild(g, {v: -1}, w, set(), [(v, w)])
    return BlowupResult(g, new, w, (v,))


@dataclass(frozen=True)
class BlowupChain:
    graph: ResolutionGraph
    chain: tuple  # new vertex ids v_1, ..., v_t
    steps: tuple  # BlowupResult per step

    def pullback(self, c) -> tuple:
        for step in self.steps:
            c = step.pullback(c)
        return c


def iterated_blowup_chain(g: ResolutionGraph, v: str, t: int) -> BlowupChain:
    """t successive blow-ups, each at a generic point of the newest curve."""
    if t < 1:
        raise ValueError("t must be at least 1")
    steps, chain, cur, at = [], [], g, v
    for i in range(1, t + 1):
        r = blowup_vertex(cur, at, label=f"{v}^{i}")
        steps.append(r)
        chain.append(r.new_vertex)
        cur, at = r.new_graph, r.new_vertex
    return BlowupChain(cur, tuple(chain), tuple(steps))


def simple_base_multiplicity(g: ResolutionGraph, lp, v: str, *, cap=DEFAULT_STEP_CAP,
                             trace=None) -> int:
    """Largest t with h^1(O(-b_t^* l' - sum_{j<=t} j E_{v_j})) = h^1(O(-l')) + t.

    Steps are scanned in order and stop at the first failure. Returns 0 when
    (l', E_v) >= 0, since base points on E_v need (l', E_v) < 0.
    With the generic h^1 formula the step-1 increment holds only if min chi over
    l' + L_{>=0} is reached at a cycle with positive E_v coefficient, which strict
    growth on S'_an rules out, so the answer on valid input is 0.
    """
    from .lattice import pairing_with_basis

    lp = tuple(Fraction(x) for x in lp)
    if not semigroup_member(g, lp):
        raise FormulaNotApplicable("l' is not in the analytic semigroup")
    if pairing_with_basis(g, lp)[g.index[v]] >= 0:
        return 0
    base = h1_resolution_natural(g, lp)
    t = 0
    for i in range(1, cap + 1):
        ch = iterated_blowup_chain(g, v, i)
        cls = list(ch.pullback(lp))
        for j, w in enumerate(ch.chain, start=1):
            cls[ch.graph.index[w]] += j
        h = h1_resolution_natural(ch.graph, cls)
        if trace is not None:
            trace.append({"step": i, "h1": h, "expected": base + i})
        if h != base + i:
            return t
        t = i
    raise StepCapReached(f"cap reached: h^1 increments held for all {cap} steps")
