"""Resolution graphs and their lattice package.

A resolution graph is a tree of rational curves decorated with Euler numbers.
Cycles are stored as tuples aligned with ``graph.vertices`` (sorted ids); use
:meth:`ResolutionGraph.cycle` to build one from a mapping.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Mapping, Sequence

IntCycle = tuple  # tuple[int, ...]
RatCycle = tuple  # tuple[Fraction, ...]


class GraphError(ValueError):
    """Raised for an invalid resolution graph; ``diagnostics`` lists every violation."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class NotInDualLattice(ValueError):
    pass


# -- exact linear algebra ---------------------------------------------------

def bareiss_minors(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Leading principal minors of an integer matrix (fraction-free elimination).

    Stops at the first zero minor; the returned list is then shorter than n.
    """
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    minors = []
    prev = 1
    for k in range(n):
        if a[k][k] == 0:
            minors.append(0)
            return minors
        minors.append(a[k][k])
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return minors


def rational_inverse(matrix: Sequence[Sequence[int]]) -> tuple:
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


# -- the graph --------------------------------------------------------------

@dataclass(frozen=True)
class ResolutionGraph:
    vertices: tuple[str, ...]
    euler: tuple[int, ...]
    edges: frozenset = field(default_factory=frozenset)
    genus: tuple[int, ...] | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj = [[] for _ in self.vertices]
        for u, v in self.edges:
            i, j = self.index[u], self.index[v]
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    def valency(self, v: str) -> int:
        return len(self.neighbors[self.index[v]])

    @cached_property
    def matrix(self) -> tuple[tuple[int, ...], ...]:
        m = [[0] * self.n for _ in range(self.n)]
        for i, e in enumerate(self.euler):
            m[i][i] = e
        for i, nb in enumerate(self.neighbors):
            for j in nb:
                m[i][j] = 1
        return tuple(tuple(r) for r in m)

    @cached_property
    def inverse(self) -> tuple[tuple[Fraction, ...], ...]:
        return rational_inverse(self.matrix)

    @cached_property
    def determinant(self) -> int:
        minors = bareiss_minors(self.matrix)
        return minors[-1] if len(minors) == self.n else 0

    @cached_property
    def canonical(self) -> tuple[Fraction, ...]:
        rhs = [e + 2 for e in self.euler]
        inv = self.inverse
        return tuple(sum((inv[i][j] * rhs[j] for j in range(self.n)), Fraction(0))
                     for i in range(self.n))

    @cached_property
    def fingerprint(self) -> str:
        from .io import emit_graph
        return hashlib.sha256(emit_graph(self).encode()).hexdigest()[:16]

    # construction helpers
    def cycle(self, coeffs: Mapping[str, int] | None = None, **kw) -> IntCycle:
        coeffs = dict(coeffs or {}, **kw)
        out = [0] * self.n
        for v, c in coeffs.items():
            if v not in self.index:
                raise KeyError(f"unknown vertex {v!r}")
            if int(c) != c:
                raise ValueError(f"non-integer coefficient {c!r} at {v!r}")
            out[self.index[v]] = int(c)
        return tuple(out)

    def rational_cycle(self, coeffs: Mapping[str, object]) -> RatCycle:
        out = [Fraction(0)] * self.n
        for v, c in coeffs.items():
            if v not in self.index:
                raise KeyError(f"unknown vertex {v!r}")
            out[self.index[v]] = Fraction(c)
        return tuple(out)

    def basis(self, v: str) -> IntCycle:
        return tuple(int(w == v) for w in self.vertices)

    @property
    def zero(self) -> IntCycle:
        return (0,) * self.n

    @property
    def reduced(self) -> IntCycle:
        """E, the sum of all exceptional curves."""
        return (1,) * self.n

    def as_dict(self, c: Sequence) -> dict[str, object]:
        return {v: x for v, x in zip(self.vertices, c) if x != 0}

    def components(self, support: Iterable[int] | None = None) -> list[tuple[int, ...]]:
        """Connected components (as sorted index tuples) of the induced subgraph on ``support``."""
        todo = set(range(self.n) if support is None else support)
        comps = []
        while todo:
            start = min(todo)
            stack, seen = [start], {start}
            while stack:
                i = stack.pop()
                for j in self.neighbors[i]:
                    if j in todo and j not in seen:
                        seen.add(j)
                        stack.append(j)
            todo -= seen
            comps.append(tuple(sorted(seen)))
        return sorted(comps)

    def induced(self, names: Iterable[str]) -> "ResolutionGraph":
        """Induced subgraph; it may be a forest."""
        keep = set(names)
        verts = tuple(v for v in self.vertices if v in keep)
        return ResolutionGraph(
            vertices=verts,
            euler=tuple(self.euler[self.index[v]] for v in verts),
            edges=frozenset(e for e in self.edges if set(e) <= keep),
        )


def validate_graph(vertices, edges=(), *, require_connected=True) -> ResolutionGraph:
    """Build a ResolutionGraph from raw data, raising GraphError with every violation.

    ``vertices`` is an iterable of ``(id, euler)`` or ``(id, euler, genus)``.
    """
    diags = []
    raw = {}
    for item in vertices:
        vid, e, *rest = item
        vid = str(vid)
        g = int(rest[0]) if rest else 0
        if vid in raw:
            diags.append(f"duplicate vertex {vid!r}")
        raw[vid] = (int(e), g)
        if g != 0:
            diags.append(f"nonzero genus {g} at vertex {vid!r}")
    if not raw:
        raise GraphError(["empty graph"])
    edge_set = set()
    for u, v in edges:
        u, v = str(u), str(v)
        for x in (u, v):
            if x not in raw:
                diags.append(f"edge endpoint {x!r} is not a vertex")
        if u == v:
            diags.append(f"loop at vertex {u!r}")
            continue
        key = tuple(sorted((u, v)))
        if key in edge_set:
            diags.append(f"repeated edge {key[0]!r}-{key[1]!r}")
        edge_set.add(key)
    if diags:
        raise GraphError(diags)

    verts = tuple(sorted(raw))
    g = ResolutionGraph(
        vertices=verts,
        euler=tuple(raw[v][0] for v in verts),
        edges=frozenset(edge_set),
        genus=tuple(raw[v][1] for v in verts),
    )
    ncomp = len(g.components())
    if len(edge_set) != g.n - ncomp:
        diags.append("not a tree: graph contains a cycle")
    if require_connected and ncomp > 1:
        diags.append(f"not a tree: graph is disconnected ({ncomp} components)")
    minors = bareiss_minors(g.matrix)
    for k, m in enumerate(minors, start=1):
        if m == 0 or (m > 0) != (k % 2 == 0):
            if m == 0:
                diags.append(f"not negative definite: determinant zero "
                             f"(leading minor of order {k} vanishes, at vertex {verts[k - 1]!r})")
            else:
                diags.append(f"not negative definite: leading minor of order {k} "
                             f"(through vertex {verts[k - 1]!r}) equals {m}")
            break
    if diags:
        raise GraphError(diags)
    return g


def check_graph(vertices, edges=(), **kw) -> list[str]:
    """Diagnostics for raw graph data; empty list means valid."""
    try:
        validate_graph(vertices, edges, **kw)
    except GraphError as exc:
        return exc.diagnostics
    return []


# -- pairing and the dual lattice ------------------------------------------

def _check_len(g, *cycles):
    for c in cycles:
        if len(c) != g.n:
            raise ValueError(f"cycle has {len(c)} coordinates, graph has {g.n} vertices")


def pairing_with_basis(g: ResolutionGraph, a: Sequence) -> tuple:
    """The vector ((a, E_v))_v."""
    _check_len(g, a)
    return tuple(g.euler[i] * a[i] + sum(a[j] for j in g.neighbors[i]) for i in range(g.n))


def intersection_pairing(g: ResolutionGraph, a: Sequence, b: Sequence):
    pa = pairing_with_basis(g, a)
    _check_len(g, b)
    return sum(x * y for x, y in zip(pa, b))


def dual_basis(g: ResolutionGraph) -> tuple[RatCycle, ...]:
    """E*_v for every vertex, in vertex order: the columns of -I^{-1}."""
    inv = g.inverse
    return tuple(tuple(-inv[i][j] for i in range(g.n)) for j in range(g.n))


def dual_vector(g: ResolutionGraph, v: str) -> RatCycle:
    return dual_basis(g)[g.index[v]]


def from_dual_coordinates(g: ResolutionGraph, a: Sequence) -> RatCycle:
    """sum_v a_v E*_v."""
    duals = dual_basis(g)
    return tuple(sum((Fraction(a[j]) * duals[j][i] for j in range(g.n)), Fraction(0))
                 for i in range(g.n))


def canonical_cycle(g: ResolutionGraph) -> RatCycle:
    """Z_K with (Z_K, E_v) = (E_v, E_v) + 2 for every v."""
    return g.canonical


def chi(g: ResolutionGraph, lp: Sequence) -> Fraction:
    """Riemann-Roch function chi(l') = -(l', l' - Z_K)/2."""
    zk = canonical_cycle(g)
    diff = tuple(Fraction(x) - z for x, z in zip(lp, zk))
    return -Fraction(intersection_pairing(g, lp, diff)) / 2


def in_dual_lattice(g: ResolutionGraph, lp: Sequence) -> bool:
    return all(Fraction(x).denominator == 1 for x in pairing_with_basis(g, lp))


def class_rep(g: ResolutionGraph, lp: Sequence) -> RatCycle:
    """The representative of [l'] in L'/L with coordinates in [0, 1)."""
    if not in_dual_lattice(g, lp):
        raise NotInDualLattice("cycle is not in the dual lattice L'")
    return tuple(Fraction(x) - (Fraction(x).numerator // Fraction(x).denominator) for x in lp)


def lipman_cone_member(g: ResolutionGraph, lp: Sequence):
    """(is_member, E*-coordinates or None); members satisfy l' = sum a_v E*_v, a_v >= 0."""
    a = tuple(-x for x in pairing_with_basis(g, lp))
    if all(x >= 0 for x in a):
        return True, a
    return False, None


def dual_coordinates(g: ResolutionGraph, lp: Sequence) -> tuple:
    """a_v = -(l', E_v), so that l' = sum a_v E*_v."""
    return tuple(-x for x in pairing_with_basis(g, lp))


def discriminant_order(g: ResolutionGraph) -> int:
    return abs(g.determinant)


def common_denominator(values: Iterable) -> int:
    d = 1
    for x in values:
        d = lcm(d, Fraction(x).denominator)
    return d


def support(c: Sequence) -> tuple[int, ...]:
    return tuple(i for i, x in enumerate(c) if x != 0)


def leq(a: Sequence, b: Sequence) -> bool:
    return all(x <= y for x, y in zip(a, b))


def cmin(a: Sequence, b: Sequence) -> tuple:
    return tuple(min(x, y) for x, y in zip(a, b))


def cmax(a: Sequence, b: Sequence) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


def add(a: Sequence, b: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def scale(k, a: Sequence) -> tuple:
    return tuple(k * x for x in a)
