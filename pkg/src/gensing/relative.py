"""Relative setup: a vertex partition V = V1 + V2 and restricted natural bundles.

Chern classes ``lp`` here follow the relative formulas: ``lp`` is c_1 of the
bundle (so -lp lies in the Lipman cone) and chi is evaluated at ``-lp + l``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable

from .generic import FormulaNotApplicable, h1_generic, h1_natural
from .lattice import (ResolutionGraph, chi, dual_coordinates, from_dual_coordinates,
                      in_dual_lattice, intersection_pairing, lipman_cone_member,
                      NotInDualLattice)
from .cycle_opt import box_limit, SearchTooLarge


@dataclass(frozen=True)
class SplitConfig:
    graph: ResolutionGraph
    V1: frozenset
    V2: frozenset
    Z: tuple

    def __post_init__(self):
        if self.V1 & self.V2 or (self.V1 | self.V2) != set(self.graph.vertices):
            raise ValueError("V1 and V2 must partition the vertex set")
        if len(self.Z) != self.graph.n or any(x < 0 for x in self.Z):
            raise ValueError("Z must be an effective cycle on the graph")

    @classmethod
    def from_v1(cls, g: ResolutionGraph, V1, Z):
        V1 = frozenset(V1)
        return cls(g, V1, frozenset(g.vertices) - V1, tuple(int(x) for x in Z))

    @property
    def sub1(self) -> ResolutionGraph:
        return self.graph.induced(self.V1)

    def part(self, c, which=1) -> tuple:
        keep = self.V1 if which == 1 else self.V2
        return tuple(x if v in keep else 0 for v, x in zip(self.graph.vertices, c))

    @property
    def Z1(self) -> tuple:
        return self.part(self.Z, 1)

    @property
    def Z2(self) -> tuple:
        return self.part(self.Z, 2)

    def to_sub1(self, c) -> tuple:
        """Coordinates of a cycle supported on V1, in the subgraph's vertex order."""
        g = self.graph
        return tuple(c[g.index[v]] for v in self.sub1.vertices)


def restrict_chern(cfg: SplitConfig, lp) -> tuple:
    """R_1: E*_v(T) -> E*_v(T_1) for v in V1, and -> 0 otherwise."""
    g, t1 = cfg.graph, cfg.sub1
    lp = tuple(Fraction(x) for x in lp)
    if not in_dual_lattice(g, lp):
        raise NotInDualLattice("Chern class is not in L'")
    a = dual_coordinates(g, lp)
    a1 = [a[g.index[v]] for v in t1.vertices]
    return from_dual_coordinates(t1, a1)


def truncate_cycle(cfg: SplitConfig, Z_minus_l) -> tuple:
    """(Z - l)_1 = min(Z - l, Z_1), clipped at 0."""
    return tuple(max(0, min(x, y)) for x, y in zip(Z_minus_l, cfg.Z1))


Oracle = Callable[[ResolutionGraph, tuple, tuple], int]


def default_inner_h1(t1: ResolutionGraph, Y, c1) -> int:
    """h^1(Y, L) for the restricted natural bundle with Chern class c1 on T_1.

    Uses the generic formula for O_Y(-m) with m = -c1; outside its range raises
    FormulaNotApplicable.
    """
    if not any(Y):
        return 0
    if not any(c1):
        return h1_generic(t1, Y)
    return h1_natural(t1, Y, tuple(-x for x in c1))


@dataclass
class RelativeEvaluation:
    value: int
    minimizer: tuple
    terms: dict = field(default_factory=dict)  # l -> chi(-l'+l) - h1((Z-l)_1, L(-l))


class _Relative:
    def __init__(self, cfg: SplitConfig, lp, inner: Oracle | None, limit=None):
        self.cfg = cfg
        self.g = cfg.graph
        self.lp = tuple(Fraction(x) for x in lp)
        ok, _ = lipman_cone_member(self.g, tuple(-x for x in self.lp))
        if not in_dual_lattice(self.g, self.lp):
            raise NotInDualLattice("Chern class is not in L'")
        if not ok:
            raise FormulaNotApplicable("-l' is not in the Lipman cone")
        self.inner = inner or default_inner_h1
        self.t1 = cfg.sub1 if cfg.V1 else None
        self.memo = {}
        vol = 1
        for x in cfg.Z:
            vol *= x + 1
        if vol > (box_limit() if limit is None else limit):
            raise SearchTooLarge(f"relative search box has {vol} points")

    def inner_h1(self, l) -> int:
        """h^1((Z - l)_1, L(-l)), memoized on (truncated cycle, shifted class)."""
        cfg = self.cfg
        trunc = truncate_cycle(cfg, tuple(z - x for z, x in zip(cfg.Z, l)))
        if not any(trunc):
            return 0
        Y = cfg.to_sub1(trunc)
        c1 = restrict_chern(cfg, tuple(a - b for a, b in zip(self.lp, l)))
        key = (Y, c1)
        if key not in self.memo:
            self.memo[key] = self.inner(self.t1, Y, c1)
        return self.memo[key]

    def term(self, l):
        neg = tuple(-x + y for x, y in zip(self.lp, l))
        return chi(self.g, neg) - self.inner_h1(l)

    def boxes(self):
        return product(*(range(x + 1) for x in self.cfg.Z))


def relative_h1(cfg: SplitConfig, lp, h1_inner: Oracle | None = None, *, detail=False):
    """chi(-l') - min_{0<=l<=Z} (chi(-l'+l) - h^1((Z-l)_1, L(-l)))."""
    r = _Relative(cfg, lp, h1_inner)
    best, arg, terms = None, None, {}
    for l in r.boxes():
        t = r.term(l)
        terms[l] = t
        if best is None or t < best:
            best, arg = t, l
    value = chi(r.g, tuple(-x for x in r.lp)) - best
    if value.denominator != 1:
        raise FormulaNotApplicable(f"non-integral relative h1 {value}")
    if detail:
        return RelativeEvaluation(int(value), arg, terms)
    return int(value)


def relative_dominant(cfg: SplitConfig, lp, h1_inner: Oracle | None = None):
    """(True, None) if chi(-l') - h^1(Z_1, L) < chi(-l'+l) - h^1((Z-l)_1, L(-l)) for all
    0 < l <= Z, else (False, first violating l in lexicographic order)."""
    r = _Relative(cfg, lp, h1_inner)
    zero = (0,) * r.g.n
    lhs = r.term(zero)
    for l in r.boxes():
        if l == zero:
            continue
        if not lhs < r.term(l):
            return False, l
    return True, None


def h1_on_Z1(cfg: SplitConfig, lp, h1_inner: Oracle | None = None) -> int:
    """h^1(Z_1, L) for L the restriction of the natural bundle of class lp."""
    r = _Relative(cfg, lp, h1_inner)
    return r.inner_h1((0,) * r.g.n)


def relative_eca_dim(cfg: SplitConfig, lp, h1_Z1_L: int) -> int:
    """h^1(Z_1, L) - h^1(O_{Z_1}) + (l', Z)."""
    h1_o = h1_generic(cfg.sub1, cfg.to_sub1(cfg.Z1)) if any(cfg.Z1) else 0
    val = h1_Z1_L - h1_o + Fraction(intersection_pairing(cfg.graph, lp, cfg.Z))
    return int(val) if val.denominator == 1 else val
