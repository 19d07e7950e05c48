"""Minimization of chi(shift + l) over integer cycles l.

Values are evaluated with int64 numpy arrays after scaling by a common
denominator, so every comparison is exact.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt, prod

import numpy as np

from .lattice import (ResolutionGraph, chi, common_denominator, dual_basis,
                      pairing_with_basis)

DEFAULT_BOX_LIMIT = 10**7
DEFAULT_ARGMIN_CAP = 10**4
CHUNK = 1 << 18


class SearchTooLarge(RuntimeError):
    """A box enumeration would exceed the configured guard limit."""


def box_limit() -> int:
    return int(os.environ.get("GENSING_MAX_BOX", DEFAULT_BOX_LIMIT))


@dataclass
class MinChiResult:
    minimum: Fraction
    argmin: list
    count: int
    search_box: tuple
    truncated: bool = False
    join: tuple | None = None
    meet: tuple | None = None
    note: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.argmin:
            raise ValueError("empty argmin set")


class ScaledChi:
    """Exact integer model of l -> scale * (chi(shift + l) - chi(shift)) for integer l."""

    def __init__(self, g: ResolutionGraph, shift=None):
        self.g = g
        self.shift = tuple(Fraction(x) for x in (shift if shift is not None else g.zero))
        sigma = pairing_with_basis(g, self.shift)
        kappa = [e + 2 for e in g.euler]
        self.scale = 2 * common_denominator(sigma)
        half = self.scale // 2
        lin = [Fraction(self.scale) * (Fraction(k, 2) - s) for k, s in zip(kappa, sigma)]
        assert all(x.denominator == 1 for x in lin)
        self.lin = np.array([int(x) for x in lin], dtype=np.int64)
        self.half = half
        self.I = np.array(g.matrix, dtype=np.int64)
        self.base = chi(g, self.shift)

    def values(self, pts: np.ndarray) -> np.ndarray:
        quad = np.einsum("ij,jk,ik->i", pts, self.I, pts)
        return pts @ self.lin - self.half * quad

    def value(self, l) -> int:
        return int(self.values(np.array([l], dtype=np.int64))[0])

    def to_chi(self, v: int) -> Fraction:
        return self.base + Fraction(int(v), self.scale)

    def step(self, l, i: int, sign: int) -> int:
        """Scaled change of chi when moving from l to l + sign*E_i."""
        g = self.g
        p = g.euler[i] * l[i] + sum(l[j] for j in g.neighbors[i])
        # f(l + sE) - f(l) = s*lin_i - half*(2 s (l,E_i) + e_i)
        return int(sign * self.lin[i] - self.half * (2 * sign * p + g.euler[i]))


def _check_box(lower, upper, limit):
    if len(lower) != len(upper):
        raise ValueError("box corners have different lengths")
    if any(a > b for a, b in zip(lower, upper)):
        raise ValueError("lower corner exceeds upper corner")
    vol = prod(b - a + 1 for a, b in zip(lower, upper))
    if vol > limit:
        raise SearchTooLarge(f"search box has {vol} points, limit is {limit}")
    return vol


def iter_box(lower, upper, chunk=CHUNK):
    """Yield int64 arrays of box points, in lexicographic order."""
    lower = np.array(lower, dtype=np.int64)
    shape = tuple(int(b - a + 1) for a, b in zip(lower, upper))
    vol = prod(shape)
    if not shape:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    for start in range(0, vol, chunk):
        idx = np.arange(start, min(vol, start + chunk), dtype=np.int64)
        pts = np.stack(np.unravel_index(idx, shape), axis=1).astype(np.int64)
        yield pts + lower


def min_chi_box(g: ResolutionGraph, shift, lower, upper, *, exclude_zero=False,
                limit=None, cap=DEFAULT_ARGMIN_CAP) -> MinChiResult:
    """Exhaustive min of chi(shift + l) over integer lower <= l <= upper.

    ``exclude_zero`` drops l = 0 (the ``0 < l`` boxes of the generic formulas).
    """
    limit = box_limit() if limit is None else limit
    lower, upper = tuple(map(int, lower)), tuple(map(int, upper))
    _check_box(lower, upper, limit)
    f = ScaledChi(g, shift)
    best = None
    found: list = []
    count = 0
    join = meet = None
    for pts in iter_box(lower, upper):
        vals = f.values(pts)
        if exclude_zero:
            zero_rows = ~pts.any(axis=1)
            if zero_rows.any():
                vals = vals.copy()
                vals[zero_rows] = np.iinfo(np.int64).max
        m = int(vals.min())
        if exclude_zero and m == np.iinfo(np.int64).max:
            continue
        if best is None or m < best:
            best, found, count, join, meet = m, [], 0, None, None
        if m == best:
            hit = pts[vals == best]
            count += len(hit)
            hj, hm = hit.max(axis=0), hit.min(axis=0)
            join = hj if join is None else np.maximum(join, hj)
            meet = hm if meet is None else np.minimum(meet, hm)
            room = cap - len(found)
            if room > 0:
                found.extend(tuple(int(x) for x in row) for row in hit[:room])
    if best is None:
        raise ValueError("empty search box")
    return MinChiResult(
        minimum=f.to_chi(best),
        argmin=found,
        count=count,
        search_box=(lower, upper),
        truncated=count > len(found),
        join=tuple(int(x) for x in join),
        meet=tuple(int(x) for x in meet),
    )


def _subset_deltas(f, l, lower, upper, masks):
    """Best strictly decreasing move l -> l +- 1_S over the given subsets S."""
    pts = np.array(l, dtype=np.int64)
    base = f.values(pts[None, :])[0]
    best = None
    for sign in (1, -1):
        cand = pts[None, :] + sign * masks
        ok = np.all((cand >= lower) & (cand <= upper), axis=1)
        if not ok.any():
            continue
        vals = f.values(cand[ok]) - base
        k = int(np.argmin(vals))
        if vals[k] < 0 and (best is None or vals[k] < best[0]):
            best = (int(vals[k]), cand[ok][k])
    return best


SUBSET_MOVES_MAX_N = 14


def laufer_descent(g: ResolutionGraph, shift, start, lower, upper) -> tuple:
    """Greedy local minimizer of chi(shift + l) inside the box.

    Takes the steepest strictly decreasing move l -> l +- E_v (ties: first vertex,
    +E_v before -E_v). When no such move exists it tries l -> l +- sum_{v in S} E_v
    over all vertex subsets S (graphs up to SUBSET_MOVES_MAX_N vertices); chi is
    submodular on plumbing lattices, and these moves remove the plateaus that
    single steps get stuck on.
    """
    f = ScaledChi(g, shift)
    l = [int(x) for x in start]
    if any(not (a <= x <= b) for a, x, b in zip(lower, l, upper)):
        raise ValueError("start is outside the box")
    lo = np.array(lower, dtype=np.int64)
    hi = np.array(upper, dtype=np.int64)
    masks = None
    if g.n <= SUBSET_MOVES_MAX_N:
        idx = np.arange(1, 1 << g.n, dtype=np.int64)
        masks = ((idx[:, None] >> np.arange(g.n)) & 1).astype(np.int64)
    while True:
        best = None
        for i in range(g.n):
            for s in (1, -1):
                if not lower[i] <= l[i] + s <= upper[i]:
                    continue
                d = f.step(l, i, s)
                if d < 0 and (best is None or d < best[0]):
                    best = (d, i, s)
        if best is not None:
            l[best[1]] += best[2]
            continue
        move = _subset_deltas(f, l, lo, hi, masks) if masks is not None else None
        if move is None:
            move = _push_escape(f, l, lower, upper)
        if move is None:
            return tuple(l)
        l = [int(x) for x in move[1]]


def _push_escape(f, l, lower, upper):
    """Computation-sequence escape from a local minimum.

    From l +- E_v, keep adding (resp. subtracting) the E_w whose step does not
    increase chi, as in Laufer's sequence; return the best point met if it is
    strictly below chi(l).
    """
    g = f.g
    base = f.value(l)
    best = None
    for v in range(g.n):
        for s in (1, -1):
            if not lower[v] <= l[v] + s <= upper[v]:
                continue
            cur = list(l)
            val = base + f.step(cur, v, s)
            cur[v] += s
            while True:
                if val < base and (best is None or val < best[0]):
                    best = (val, tuple(cur))
                step = None
                for w in range(g.n):
                    if lower[w] <= cur[w] + s <= upper[w]:
                        d = f.step(cur, w, s)
                        if d <= 0 and (step is None or d < step[0]):
                            step = (d, w)
                if step is None:
                    break
                val += step[0]
                cur[step[1]] += s
    return best


def sublevel_bounds(g: ResolutionGraph, shift, level) -> tuple[tuple, tuple]:
    """Integer bounding box of the real ellipsoid {x : chi(shift + x) <= level}.

    chi(shift + x) = q0 + (x - x0)^T A (x - x0) / 2 with A = -I positive definite,
    and |x_i - x0_i| <= sqrt(2 (level - q0) (A^-1)_ii) on the sublevel set.
    """
    shift = tuple(Fraction(x) for x in shift)
    kappa = [Fraction(e + 2) for e in g.euler]
    sigma = pairing_with_basis(g, shift)
    b = [k / 2 - s for k, s in zip(kappa, sigma)]
    ainv = dual_basis(g)  # columns of -I^{-1} = A^{-1}, symmetric
    x0 = [-sum((ainv[j][i] * b[j] for j in range(g.n)), Fraction(0)) for i in range(g.n)]
    q0 = chi(g, shift) + sum((bi * xi for bi, xi in zip(b, x0)), Fraction(0)) / 2
    r = Fraction(level) - q0
    if r < 0:
        return None
    lo, hi = [], []
    for i in range(g.n):
        rad2 = 2 * r * ainv[i][i]
        rad = isqrt(-(-rad2.numerator // rad2.denominator)) + 1  # >= sqrt(rad2)
        c = x0[i]
        lo.append(int(c.numerator // c.denominator) - rad)
        hi.append(-int((-c.numerator) // c.denominator) + rad)
    return tuple(lo), tuple(hi)


def real_minimizer(g: ResolutionGraph, shift) -> tuple:
    shift = tuple(Fraction(x) for x in shift)
    sigma = pairing_with_basis(g, shift)
    b = [Fraction(e + 2, 2) - s for e, s in zip(g.euler, sigma)]
    ainv = dual_basis(g)
    return tuple(-sum((ainv[j][i] * b[j] for j in range(g.n)), Fraction(0)) for i in range(g.n))


def min_chi_effective(g: ResolutionGraph, shift=None, *, exclude_zero=False,
                      effective=True, limit=None, cap=DEFAULT_ARGMIN_CAP) -> MinChiResult:
    """Min of chi(shift + l) over all l >= 0 (or over all of L when ``effective`` is False).

    An upper bound from descent fixes a level; the sublevel ellipsoid's bounding
    box then contains every candidate, and is searched exhaustively.
    """
    shift = tuple(Fraction(x) for x in (shift if shift is not None else g.zero))
    f = ScaledChi(g, shift)
    x0 = real_minimizer(g, shift)
    start = [round(x) for x in x0]
    if effective:
        start = [max(0, s) for s in start]
    if exclude_zero and not any(start):
        start[0] = 1
    far = [s + 10**6 for s in start]
    near = [0 if effective else s - 10**6 for s in start]
    l = laufer_descent(g, shift, start, near, far)
    if exclude_zero and not any(l):
        l = start
    level = f.to_chi(f.value(l))
    lo, hi = sublevel_bounds(g, shift, level)
    if effective:
        lo = tuple(max(0, a) for a in lo)
        hi = tuple(max(0, b) for b in hi)
    res = min_chi_box(g, shift, lo, hi, exclude_zero=exclude_zero, limit=limit, cap=cap)
    res.note["certificate"] = "sublevel-ellipsoid bounding box"
    return res


def argmin_max_element(result: MinChiResult, g: ResolutionGraph | None = None, shift=None):
    """(True, max) if the argmin set has a componentwise maximum, else (False, (a, b)).

    The maximum exists iff the join of the argmin set attains the minimum. For a
    truncated set, pass ``g`` (and ``shift``) so chi can be evaluated at the join.
    """
    members = result.argmin
    join = result.join if result.join is not None else tuple(map(max, zip(*members)))
    if join in set(members):
        return True, join
    if result.truncated:
        if g is None:
            raise ValueError("truncated argmin set: graph needed to test the join")
        f = ScaledChi(g, shift)
        if f.to_chi(f.value(join)) == result.minimum:
            return True, join
    maximal = [a for a in members
               if not any(b != a and all(x <= y for x, y in zip(a, b)) for b in members)]
    if len(maximal) >= 2:
        return False, (maximal[0], maximal[1])
    return False, (members[0], join)
