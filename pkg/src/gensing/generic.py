"""Cohomology of generic analytic structures, computed from chi alone.

The central object is :class:`SubcycleTable`: for a box ``0 <= Z' <= top`` it
holds chi, the prefix minima ``min_{0 < l <= Z'} chi(l)`` and h^1(O_{Z'}) for
every Z' at once. h^1 of a cycle with disconnected support is the sum over its
connected components.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import prod

import numpy as np

from .cycle_opt import (ScaledChi, SearchTooLarge, argmin_max_element, box_limit,
                        min_chi_box, min_chi_effective)
from .lattice import (ResolutionGraph, chi, in_dual_lattice, intersection_pairing,
                      leq, sub, support)

BIG = np.iinfo(np.int64).max // 4


class FormulaNotApplicable(ValueError):
    """The requested cohomology formula's hypotheses do not hold."""


class NonUniqueCohomologicalCycle(RuntimeError):
    def __init__(self, witnesses):
        self.witnesses = witnesses
        super().__init__(f"non-unique minimal cohomological cycle: {witnesses}")


class InvariantCache:
    """Memo table keyed by (graph fingerprint, kind, cycle, class).

    Reads are lock-free dict lookups; writes take a lock. Values are pure
    functions of the key, so racing writers store identical results.
    """

    def __init__(self):
        self._data = {}
        self._lock = threading.Lock()

    def get(self, key, compute):
        try:
            return self._data[key]
        except KeyError:
            pass
        value = compute()
        with self._lock:
            self._data.setdefault(key, value)
        return self._data[key]

    def clear(self):
        with self._lock:
            self._data.clear()

    def __len__(self):
        return len(self._data)


CACHE = InvariantCache()


def _key(g, kind, *parts):
    return (g.fingerprint, kind) + tuple(tuple(p) if isinstance(p, (list, tuple)) else p
                                         for p in parts)


# -- the subcycle table -----------------------------------------------------

class SubcycleTable:
    def __init__(self, g: ResolutionGraph, top, limit=None):
        self.g = g
        self.top = tuple(int(x) for x in top)
        if any(x < 0 for x in self.top):
            raise ValueError("top cycle must be effective")
        shape = tuple(x + 1 for x in self.top)
        limit = box_limit() if limit is None else limit
        if prod(shape) > limit:
            raise SearchTooLarge(f"subcycle box has {prod(shape)} points, limit is {limit}")
        self.shape = shape
        pts = np.indices(shape).reshape(g.n, -1).T.astype(np.int64)
        f = ScaledChi(g)  # scale 2, base 0
        self.chi = (f.values(pts) // 2).reshape(shape)
        m = self.chi.copy()
        m[(0,) * g.n] = BIG
        for ax in range(g.n):
            np.minimum.accumulate(m, axis=ax, out=m)
        self.prefix_min = m
        self.h1 = np.zeros(shape, dtype=np.int64)
        self.connected = np.zeros(shape, dtype=bool)
        self._fill()

    def _fill(self):
        g, n = self.g, self.g.n
        active = [i for i in range(n) if self.top[i] > 0]
        for mask in range(1, 1 << len(active)):
            S = [active[k] for k in range(len(active)) if mask >> k & 1]
            comps = g.components(S)
            target = tuple(slice(1, None) if i in S else 0 for i in range(n))
            total = 0
            for comp in comps:
                idx = tuple(slice(1, None) if i in comp else 0 for i in range(n))
                block = self.prefix_min[idx]
                # insert singleton axes for the S-vertices outside this component
                shape = [self.top[i] if i in comp else 1 for i in S]
                total = total + (1 - block.reshape(shape))
            self.h1[target] = np.broadcast_to(total, self.h1[target].shape)
            self.connected[target] = len(comps) == 1

    def h1_of(self, c) -> int:
        return int(self.h1[tuple(c)])

    def regular_mask(self) -> np.ndarray:
        """Boolean array: Z' has connected support and h^1 drops strictly on every Z' - E_v."""
        ok = self.connected.copy()
        ok[(0,) * self.g.n] = False
        for ax in range(self.g.n):
            if self.top[ax] == 0:
                continue
            hi = [slice(None)] * self.g.n
            lo = [slice(None)] * self.g.n
            hi[ax], lo[ax] = slice(1, None), slice(None, -1)
            drop = self.h1[tuple(hi)] > self.h1[tuple(lo)]
            ok[tuple(hi)] &= drop
        return ok

    def restricted_h1(self, zero_axes) -> np.ndarray:
        """h1 of Z' with the coordinates in ``zero_axes`` set to 0, broadcast to the table shape."""
        idx = tuple(slice(0, 1) if i in zero_axes else slice(None) for i in range(self.g.n))
        return self.h1[idx]


def subcycle_table(g: ResolutionGraph, top, cache=CACHE) -> SubcycleTable:
    top = tuple(int(x) for x in top)
    return cache.get(_key(g, "table", top), lambda: SubcycleTable(g, top))


# -- invariants of the generic structure ---------------------------------

def _effective(Z):
    if any(x < 0 for x in Z):
        raise ValueError("cycle must be effective")


def h1_generic(g: ResolutionGraph, Z, cache=CACHE) -> int:
    """h^1(O_Z) = sum over components C of |Z| of 1 - min_{0 < l <= Z|_C} chi(l)."""
    Z = tuple(int(x) for x in Z)
    _effective(Z)
    if not any(Z):
        raise ValueError("empty cycle")
    return cache.get(_key(g, "h1", Z), lambda: _h1_generic(g, Z))


def _h1_generic(g, Z):
    total = 0
    for comp in g.components(support(Z)):
        top = tuple(Z[i] if i in comp else 0 for i in range(g.n))
        table = subcycle_table(g, top)
        total += 1 - int(table.prefix_min[top])
    return total


def h1_generic_oracle(g: ResolutionGraph, Z) -> int:
    """Direct enumeration of the same formula, component by component."""
    total = 0
    for comp in g.components(support(Z)):
        top = tuple(Z[i] if i in comp else 0 for i in range(g.n))
        r = min_chi_box(g, None, g.zero, top, exclude_zero=True)
        total += 1 - int(r.minimum)
    return total


def _h1_any(g, Z):
    return 0 if not any(Z) else h1_generic(g, Z)


def h1_natural(g: ResolutionGraph, Z, lp, cache=CACHE) -> int:
    """h^1(O_Z(-l')) = chi(l') - min_{0 <= l <= Z} chi(l' + l), for l'_v > 0 on |Z|."""
    Z = tuple(int(x) for x in Z)
    lp = tuple(Fraction(x) for x in lp)
    _effective(Z)
    if not in_dual_lattice(g, lp):
        raise FormulaNotApplicable("Chern class is not in L'")
    bad = [g.vertices[i] for i in support(Z) if lp[i] <= 0]
    if bad:
        raise FormulaNotApplicable(f"formula not applicable: l' is not positive at {bad}")
    if not any(Z):
        return 0

    def compute():
        r = min_chi_box(g, lp, g.zero, Z)
        return int(chi(g, lp) - r.minimum)

    return cache.get(_key(g, "h1nat", Z, lp), compute)


def min_chi_positive(g: ResolutionGraph, cache=CACHE):
    return cache.get(_key(g, "minpos"), lambda: min_chi_effective(g, exclude_zero=True))


def is_rational(g: ResolutionGraph, cache=CACHE) -> bool:
    return min_chi_positive(g, cache).minimum >= 1


def geometric_genus(g: ResolutionGraph, cache=CACHE) -> int:
    return int(1 - min_chi_positive(g, cache).minimum)


def h1_resolution_natural(g: ResolutionGraph, lp, cache=CACHE) -> int:
    """h^1(O(-l')) on the whole resolution."""
    lp = tuple(Fraction(x) for x in lp)
    if not in_dual_lattice(g, lp):
        raise FormulaNotApplicable("Chern class is not in L'")

    def compute():
        m = min_chi_effective(g, lp).minimum
        corr = 1 if all(x <= 0 for x in lp) and not is_rational(g, cache) else 0
        return int(chi(g, lp) - m) + corr

    return cache.get(_key(g, "h1res", lp), compute)


def hfrak(g: ResolutionGraph, l0, cache=CACHE) -> int:
    """dim H^0(O)/H^0(O(-l0)) for l0 >= 0."""
    l0 = tuple(int(x) for x in l0)
    if any(x < 0 for x in l0):
        raise ValueError("l0 must be effective")
    if not any(l0):
        return 0
    a = min_chi_effective(g, l0).minimum
    b = min_chi_effective(g).minimum
    return int(a - b) + (0 if is_rational(g, cache) else 1)


def semigroup_member(g: ResolutionGraph, lp, cache=CACHE) -> bool:
    """l' in S'_an: l' = 0, or chi(l') < chi(l' + l) for every l > 0."""
    lp = tuple(Fraction(x) for x in lp)
    if not in_dual_lattice(g, lp):
        raise FormulaNotApplicable("Chern class is not in L'")
    if not any(lp):
        return True
    return cache.get(_key(g, "sg", lp),
                     lambda: min_chi_effective(g, lp, exclude_zero=True).minimum > chi(g, lp))


def maximal_ideal_cycle(g: ResolutionGraph, cache=CACHE):
    """The maximal Z > 0 with chi(Z) = min chi; only for non-rational graphs."""
    if is_rational(g, cache):
        raise FormulaNotApplicable("not defined for rational graphs")
    res = min_chi_positive(g, cache)
    ok, val = argmin_max_element(res, g)
    if not ok:
        raise RuntimeError(f"argmin set has no maximum; witnesses {val}")
    assert all(leq(a, val) for a in res.argmin)
    return val


def e_Z(g: ResolutionGraph, Z, J, cache=CACHE) -> int:
    """h^1(O_Z) - h^1(O_{Z restricted to V minus J})."""
    Z = tuple(int(x) for x in Z)
    idx = {g.index[v] if isinstance(v, str) else int(v) for v in J}
    if any(Z[i] == 0 for i in idx):
        raise ValueError("J must lie in the support of Z")
    if not idx:
        return 0
    rest = tuple(0 if i in idx else x for i, x in enumerate(Z))
    return _h1_any(g, Z) - _h1_any(g, rest)


def has_regular_canonical_section(g: ResolutionGraph, Z, cache=CACHE) -> bool:
    """H^0(O_Z(K+Z))_reg is nonempty for the generic structure.

    By duality this means h^1(O_{Z'}) < h^1(O_Z) for every 0 <= Z' < Z; since
    h^1 is monotone it suffices to test Z' = Z - E_v for v in |Z|.
    """
    Z = tuple(int(x) for x in Z)
    _effective(Z)
    if not any(Z) or len(g.components(support(Z))) != 1:
        return False
    h = h1_generic(g, Z, cache)
    for i in support(Z):
        smaller = tuple(x - (j == i) for j, x in enumerate(Z))
        if _h1_any(g, smaller) >= h:
            return False
    return True


def regular_section_chi_test(g: ResolutionGraph, Z) -> bool:
    """chi-side test: |Z| connected, chi(Z) <= 0 and chi(Z') > chi(Z) for 0 < Z' < Z."""
    Z = tuple(int(x) for x in Z)
    if not any(Z) or len(g.components(support(Z))) != 1:
        return False
    cz = chi(g, Z)
    if cz > 0:
        return False
    for zp in product(*(range(x + 1) for x in Z)):
        if any(zp) and zp != Z and chi(g, zp) <= cz:
            return False
    return True


def cohomological_cycle(g: ResolutionGraph, Z, cache=CACHE):
    """The least Z' <= Z with h^1(O_{Z'}) = h^1(O_Z)."""
    Z = tuple(int(x) for x in Z)
    _effective(Z)
    if not any(Z):
        return Z
    t = subcycle_table(g, Z, cache)
    target = t.h1_of(Z)
    same = t.h1 == target
    minimal = same.copy()
    for ax in range(g.n):
        if Z[ax] == 0:
            continue
        hi = [slice(None)] * g.n
        lo = [slice(None)] * g.n
        hi[ax], lo[ax] = slice(1, None), slice(None, -1)
        minimal[tuple(hi)] &= ~same[tuple(lo)]
    mins = [tuple(int(x) for x in p) for p in np.argwhere(minimal)]
    if len(mins) == 1:
        return mins[0]
    meet = tuple(map(min, zip(*mins)))
    if t.h1_of(meet) == target:
        return meet
    raise NonUniqueCohomologicalCycle(mins)


def cohomological_cycle_oracle(g: ResolutionGraph, Z):
    """Independent check: minimal elements of {Z' <= Z : h^1 = h^1(Z)} by enumeration."""
    Z = tuple(int(x) for x in Z)
    if not any(Z):
        return [Z]
    target = h1_generic_oracle(g, Z)
    same = [zp for zp in product(*(range(x + 1) for x in Z))
            if (h1_generic_oracle(g, zp) if any(zp) else 0) == target]
    return [a for a in same if not any(b != a and leq(b, a) for b in same)]


@dataclass
class CohomologyReport:
    h0: int
    h1: int
    chi_O: Fraction
    degree: Fraction
    formula_trace: dict = field(default_factory=dict)


def h0_natural_via_rr(g: ResolutionGraph, Z, lp, h1=None, cache=CACHE) -> CohomologyReport:
    """h^0(O_Z(-l')) by Riemann-Roch: chi(Z) + (c_1, Z) + h^1 with c_1 = -l'."""
    Z = tuple(int(x) for x in Z)
    lp = tuple(Fraction(x) for x in lp)
    trace = {}
    if h1 is None:
        h1 = h1_natural(g, Z, lp, cache) if any(lp) else (_h1_any(g, Z))
        trace["h1"] = "h1_natural" if any(lp) else "h1_generic"
    else:
        trace["h1"] = "given"
    chi_o = chi(g, Z)
    deg = -Fraction(intersection_pairing(g, lp, Z))
    h0 = chi_o + deg + h1
    if h0.denominator != 1 or h0 < 0:
        raise FormulaNotApplicable(f"Riemann-Roch gives non-integral or negative h0 = {h0}")
    trace["identity"] = "h0 - h1 = chi(Z) + (c1, Z)"
    return CohomologyReport(h0=int(h0), h1=int(h1), chi_O=chi_o, degree=deg, formula_trace=trace)


def canonical_bundle_report(g: ResolutionGraph, Z, cache=CACHE) -> CohomologyReport:
    """h^0(O_Z(K+Z)); needs a regular section, where h^1(O_Z(K+Z)) = h^0(O_Z) = 1."""
    if not has_regular_canonical_section(g, Z, cache):
        raise FormulaNotApplicable("H^0(O_Z(K+Z))_reg is empty; h^0(O_Z) not determined")
    lp = sub(g.canonical, Z)  # O_Z(K+Z) = O_Z(-(Z_K - Z))
    rep = h0_natural_via_rr(g, Z, lp, h1=1, cache=cache)
    rep.formula_trace["h1"] = "h0(O_Z) = 1 by duality"
    return rep
