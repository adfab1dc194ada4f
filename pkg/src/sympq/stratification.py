"""Orbit-type stratification of the zero fibre ``Z`` of a linear action.

For a torus the stabilizer of a point only depends on its support (the set of
complex planes where it is nonzero), so strata are unions of support patterns
grouped by stabilizer.  For a finite group strata come from fixed subspaces of
subgroups.  Sample points are exact rationals: squared radii are drawn from
the relative interior of the level polytope among rationals that are sums of
two squares, and each plane gets a point on its circle rotated by a
Pythagorean angle.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from sympy import Matrix as SymMatrix
from sympy import ZZ
from sympy.matrices.normalforms import smith_normal_form

from . import linalg
from .actions import LinearAction, Matrix, mat_mul, moment_map

log = logging.getLogger(__name__)

Point = tuple[Fraction, ...]


class StratificationError(ValueError):
    pass


# -- integer lattices ----------------------------------------------------------------


def hermite_normal_form(rows: Sequence[Sequence[int]], ncols: int) -> tuple[tuple[int, ...], ...]:
    """Row-style HNF of the integer lattice spanned by ``rows`` (zero rows dropped)."""
    a = [list(map(int, r)) for r in rows if any(r)]
    pivot_row = 0
    for col in range(ncols):
        if pivot_row >= len(a):
            break
        while True:
            nz = [r for r in range(pivot_row, len(a)) if a[r][col]]
            if not nz:
                break
            best = min(nz, key=lambda r: abs(a[r][col]))
            a[pivot_row], a[best] = a[best], a[pivot_row]
            done = True
            for r in range(pivot_row + 1, len(a)):
                if a[r][col]:
                    q = a[r][col] // a[pivot_row][col]
                    a[r] = [x - q * y for x, y in zip(a[r], a[pivot_row])]
                    if a[r][col]:
                        done = False
            if done:
                break
        if pivot_row < len(a) and a[pivot_row][col]:
            if a[pivot_row][col] < 0:
                a[pivot_row] = [-x for x in a[pivot_row]]
            p = a[pivot_row][col]
            for r in range(pivot_row):
                q = a[r][col] // p
                if q:
                    a[r] = [x - q * y for x, y in zip(a[r], a[pivot_row])]
            pivot_row += 1
    return tuple(tuple(r) for r in a[:pivot_row] if any(r))


def in_lattice(vector: Sequence[int], hnf: Sequence[Sequence[int]]) -> bool:
    v = list(vector)
    for row in hnf:
        col = next(i for i, x in enumerate(row) if x)
        if v[col] % row[col]:
            return False
        q = v[col] // row[col]
        v = [x - q * y for x, y in zip(v, row)]
    return not any(v)


def _torsion(hnf: Sequence[Sequence[int]], r: int) -> list[int]:
    if not hnf:
        return []
    snf = smith_normal_form(SymMatrix(hnf), domain=ZZ)
    diag = [abs(int(snf[i, i])) for i in range(min(snf.shape))]
    return [x for x in diag if x > 1]


# -- descriptors ---------------------------------------------------------------------


@dataclass(frozen=True)
class StabilizerDescriptor:
    """Canonical stabilizer: HNF of the character lattice (torus) or sorted element list (finite)."""

    kind: str
    data: tuple
    circle_rank: int = 0
    torsion: tuple[int, ...] = ()

    @property
    def label(self) -> str:
        if self.kind == "finite":
            return "trivial" if len(self.data) == 1 else f"order {len(self.data)}"
        parts = []
        if self.circle_rank:
            parts.append("S^1" if self.circle_rank == 1 else f"T^{self.circle_rank}")
        parts += [f"Z_{t}" for t in self.torsion]
        return " x ".join(parts) if parts else "trivial"

    @property
    def order_key(self) -> tuple:
        # larger stabilizers sort first
        if self.kind == "finite":
            return (-len(self.data),)
        return (-self.circle_rank, -math.prod(self.torsion or (1,)))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "label": self.label}
        if self.kind == "torus":
            out["lattice_hnf"] = [list(r) for r in self.data]
        else:
            out["elements"] = [[[str(x) for x in row] for row in g] for g in self.data]
        return out


@dataclass
class StratumDescriptor:
    id: int
    stabilizer: StabilizerDescriptor
    patterns: list  # supports (torus) or fixed-subspace bases (finite)
    dimension: int
    quotient_dimension: int
    is_principal: bool = False
    below: list[int] = field(default_factory=list)  # ids of strata in the closure
    maybe_disconnected: bool = False

    def to_json(self) -> dict:
        if self.stabilizer.kind == "torus":
            pats = [sorted(p) for p in self.patterns]
        else:
            pats = [len(p) for p in self.patterns]
        return {
            "id": self.id,
            "stabilizer": self.stabilizer.to_json(),
            "patterns": pats,
            "dimension": self.dimension,
            "quotient_dimension": self.quotient_dimension,
            "principal": self.is_principal,
            "covers": self.below,
            "maybe_disconnected": self.maybe_disconnected,
        }


@dataclass
class Stratification:
    action: LinearAction
    strata: list[StratumDescriptor]

    @property
    def principal(self) -> StratumDescriptor:
        return next(s for s in self.strata if s.is_principal)

    def lower(self) -> list[StratumDescriptor]:
        return [s for s in self.strata if not s.is_principal]

    def by_id(self, sid: int) -> StratumDescriptor:
        return self.strata[sid]

    def locate(self, point: Sequence) -> StratumDescriptor:
        if not on_fibre(self.action, point):
            raise StratificationError("point is not on the zero fibre")
        stab = orbit_type(self.action, point)
        for s in self.strata:
            if _same_type(self.action, s.stabilizer, stab):
                return s
        raise StratificationError("point has an unexpected orbit type")

    def contains(self, stratum: StratumDescriptor, point: Sequence) -> bool:
        return on_fibre(self.action, point) and _same_type(self.action, stratum.stabilizer, orbit_type(self.action, point))

    def leq(self, a: int, b: int) -> bool:
        """Closure order ``a ≤ b``."""
        if a == b:
            return True
        return any(self.leq(a, c) for c in self.strata[b].below)

    def to_json(self) -> dict:
        return {"action": self.action.to_json(), "strata": [s.to_json() for s in self.strata]}


# -- orbit types ---------------------------------------------------------------------


def support(point: Sequence) -> frozenset[int]:
    n = len(point) // 2
    return frozenset(i for i in range(n) if point[2 * i] or point[2 * i + 1])


def _torus_stabilizer(action: LinearAction, supp) -> StabilizerDescriptor:
    w = action.group.weights
    r = action.group.rank
    chars = [[w[j][i] for j in range(r)] for i in sorted(supp)]
    hnf = hermite_normal_form(chars, r)
    return StabilizerDescriptor("torus", hnf, r - len(hnf), tuple(_torsion(hnf, r)))


def _finite_stabilizer(elements: Sequence[Matrix], point: Sequence) -> StabilizerDescriptor:
    p = [Fraction(x) for x in point]
    fixed = tuple(g for g in elements if linalg.mat_vec(g, p) == p)
    return StabilizerDescriptor("finite", tuple(sorted(fixed)))


def orbit_type(action: LinearAction, point: Sequence) -> StabilizerDescriptor:
    if action.is_torus:
        return _torus_stabilizer(action, support(point))
    return _finite_stabilizer(action.group.elements, point)


def _conjugate_set(elements, subgroup) -> frozenset:
    out = set()
    for g in elements:
        ginv = _inverse(elements, g)
        out.add(tuple(sorted(mat_mul(mat_mul(g, h), ginv) for h in subgroup)))
    return frozenset(out)


def _inverse(elements, g):
    n = len(g)
    ident = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
    return next(h for h in elements if mat_mul(g, h) == ident)


def _same_type(action: LinearAction, a: StabilizerDescriptor, b: StabilizerDescriptor) -> bool:
    if a == b:
        return True
    if action.is_torus:
        return False
    return b.data in _conjugate_set(action.group.elements, a.data)


def on_fibre(action: LinearAction, point: Sequence) -> bool:
    if not action.is_torus:
        return True
    return all(q.evaluate(point) == 0 for q in moment_map(action).components)


# -- enumeration ---------------------------------------------------------------------


def _level_rhs(action: LinearAction) -> list[Fraction]:
    # Φ^j = -½ Σ_i W_ji q_i - level_j = 0  with q_i = |z_i|^2
    return [-2 * lv for lv in action.level]


def _interior_point(action: LinearAction, supp) -> list[Fraction] | None:
    """Rational squared radii ``q > 0`` on the support solving the level equations, or None."""
    S = sorted(supp)
    w = action.group.weights
    r = action.group.rank
    rhs = _level_rhs(action)
    if not S:
        return [] if not any(rhs) else None
    a_rows = [[Fraction(w[j][i]) for i in S] for j in range(r)]
    m = len(S)
    # exact affine parametrisation q = q0 + N c
    aug = [row + [b] for row, b in zip(a_rows, rhs)]
    reduced, pivots = linalg.rref(aug, m + 1) if aug else ([], [])
    if m in pivots:
        return None
    q0 = [Fraction(0)] * m
    for row, p in zip(reduced, pivots):
        q0[p] = row[m]
    null = linalg.nullspace([row[:m] for row in reduced], m) if reduced else linalg.nullspace([], m)
    if all(x > 0 for x in q0) and not null:
        return q0
    if not null:
        return None
    k = len(null)
    # maximise the smallest radius: variables (c, s), q0 + N c >= s, s <= 1
    nf = np.array([[float(v[i]) for v in null] for i in range(m)])
    a_ub = np.hstack([-nf, np.ones((m, 1))])
    b_ub = np.array([float(x) for x in q0])
    res = linprog(
        c=np.r_[np.zeros(k), -1.0],
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=[(-16.0, 16.0)] * k + [(None, 1.0)],
        method="highs",
    )
    if not res.success or res.x[-1] <= 1e-9:
        return None
    for denom in (1, 2, 4, 8, 16, 64, 256, 1024, 2**16):
        c = [Fraction(round(x * denom), denom) for x in res.x[:k]]
        q = [q0[i] + sum((c[j] * null[j][i] for j in range(k)), Fraction(0)) for i in range(m)]
        if all(x > 0 for x in q):
            return q
    return None


def _finite_fixed_subspaces(action: LinearAction) -> list[tuple]:
    """Fixed subspaces (as canonical rref bases) closed under intersection, including V."""
    dim = action.dim
    elements = action.group.elements

    def canon(basis):
        return tuple(tuple(r) for r in linalg.row_basis(basis, dim)) if basis else ()

    def fixed(g):
        rows = [[g[i][j] - (1 if i == j else 0) for j in range(dim)] for i in range(dim)]
        return canon(linalg.nullspace(rows, dim))

    def intersect(u, v):
        # x in U ∩ V  iff  x = U a = V b
        if not u or not v:
            return ()
        cols = len(u) + len(v)
        rows = [[u[a][i] for a in range(len(u))] + [-v[b][i] for b in range(len(v))] for i in range(dim)]
        sol = linalg.nullspace(rows, cols)
        vecs = [linalg.combine(s[: len(u)], u) for s in sol]
        return canon(vecs)

    spaces = {fixed(g) for g in elements}
    changed = True
    while changed:
        changed = False
        for u, v in combinations(list(spaces), 2):
            w = intersect(u, v)
            if w not in spaces:
                spaces.add(w)
                changed = True
    return sorted(spaces, key=lambda s: (-len(s), s))


def strata_of_Z(action: LinearAction) -> Stratification:
    if action.is_torus:
        strata = _torus_strata(action)
    else:
        strata = _finite_strata(action)
    if not strata:
        log.warning("zero fibre of %s is empty; returning the empty stratification", action.name or action)
        return Stratification(action, [])
    tops = [s for s in strata if not any(s.id in t.below for t in strata)]
    if len(tops) != 1:
        raise StratificationError("closure order has no unique maximal element")
    tops[0].is_principal = True
    return Stratification(action, strata)


def _torus_strata(action: LinearAction) -> list[StratumDescriptor]:
    n = action.space.n
    w = action.group.weights
    r = action.group.rank
    groups: dict[StabilizerDescriptor, list[frozenset]] = {}
    for size in range(n + 1):
        for S in combinations(range(n), size):
            S = frozenset(S)
            if _interior_point(action, S) is None:
                continue
            groups.setdefault(_torus_stabilizer(action, S), []).append(S)
    ordered = sorted(groups.items(), key=lambda kv: (kv[0].order_key, min(len(p) for p in kv[1]), kv[0].data))
    strata = []
    for sid, (stab, pats) in enumerate(ordered):
        dims = []
        for S in pats:
            rk = linalg.rank([[w[j][i] for i in sorted(S)] for j in range(r)], len(S)) if S and r else 0
            dims.append((2 * len(S) - rk, 2 * len(S) - 2 * rk))
        strata.append(StratumDescriptor(sid, stab, sorted(pats, key=sorted), max(d for d, _ in dims), max(q for _, q in dims)))
    for a in strata:
        for b in strata:
            if a is not b and any(pa < pb for pa in a.patterns for pb in b.patterns):
                b.below.append(a.id)
    _reduce_to_hasse(strata)
    return strata


def _finite_strata(action: LinearAction) -> list[StratumDescriptor]:
    elements = action.group.elements
    dim = action.dim
    by_type: dict[frozenset, list] = {}
    stabs: dict[frozenset, StabilizerDescriptor] = {}
    for u in _finite_fixed_subspaces(action):
        if u:
            generic = linalg.combine([Fraction(k + 2, k + 1) ** (k + 1) for k in range(len(u))], u)
            stab = _finite_stabilizer(elements, generic)
        else:
            stab = _finite_stabilizer(elements, [0] * dim)
        # U is an orbit-type piece only if it is the full fixed space of its generic stabilizer
        fix_rows = [[g[i][j] - (1 if i == j else 0) for j in range(dim)] for g in stab.data for i in range(dim)]
        if len(linalg.nullspace(fix_rows, dim)) != len(u):
            continue
        key = _conjugate_set(elements, stab.data)
        by_type.setdefault(key, []).append(u)
        stabs.setdefault(key, stab)
    ordered = sorted(by_type.items(), key=lambda kv: (stabs[kv[0]].order_key, -max(len(u) for u in kv[1])))
    strata = []
    for sid, (key, spaces) in enumerate(ordered):
        d = max(len(u) for u in spaces)
        strata.append(StratumDescriptor(sid, stabs[key], spaces, d, d, maybe_disconnected=len(spaces) > 1))
    for a in strata:
        for b in strata:
            if a is not b and any(_subspace(ua, ub, dim) and len(ua) < len(ub) for ua in a.patterns for ub in b.patterns):
                b.below.append(a.id)
    _reduce_to_hasse(strata)
    return strata


def _subspace(u, v, dim) -> bool:
    if not u:
        return True
    return linalg.rank(list(v) + list(u), dim) == len(v)


def _reduce_to_hasse(strata: list[StratumDescriptor]) -> None:
    full = {s.id: set(s.below) for s in strata}
    for s in strata:
        s.below = sorted(
            a for a in full[s.id] if not any(a in full[c] for c in full[s.id] if c != a)
        )


# -- sampling ------------------------------------------------------------------------


@dataclass(frozen=True)
class StratumSample:
    point: Point
    stratum: int
    tangent_basis: tuple[tuple[Fraction, ...], ...]
    exact: bool = True


def _sum_of_two_squares(q: Fraction) -> tuple[Fraction, Fraction] | None:
    """Rational ``(a, b)`` with ``a² + b² = q`` found by search, or None."""
    if q < 0:
        return None
    if q == 0:
        return Fraction(0), Fraction(0)
    num = q.numerator * q.denominator
    if num > 10**8:
        return None
    a = 0
    while a * a <= num:
        b2 = num - a * a
        b = math.isqrt(b2)
        if b * b == b2:
            return Fraction(max(a, b), q.denominator), Fraction(min(a, b), q.denominator)
        a += 1
    return None


def _pythagorean(rng: random.Random) -> tuple[Fraction, Fraction]:
    t = Fraction(rng.randint(-12, 12), rng.randint(1, 7))
    den = 1 + t * t
    return (1 - t * t) / den, 2 * t / den


def _random_radii(action: LinearAction, supp, rng: random.Random, attempts: int = 4000) -> list[Fraction]:
    S = sorted(supp)
    center = _interior_point(action, supp)
    if center is None:
        raise StratificationError("stratum pattern is empty")
    if not S:
        return []
    w = action.group.weights
    r = action.group.rank
    a_rows = [[Fraction(w[j][i]) for i in S] for j in range(r)]
    null = linalg.nullspace(a_rows, len(S)) if r else linalg.nullspace([], len(S))
    for _ in range(attempts):
        step = Fraction(1, rng.choice([2, 3, 4, 5, 6, 8]))
        q = list(center)
        scale = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        if null:
            coeffs = [Fraction(rng.randint(-6, 6), rng.randint(1, 6)) * step for _ in null]
            q = [x + sum((c * v[i] for c, v in zip(coeffs, null)), Fraction(0)) for i, x in enumerate(q)]
        if not any(action.level):
            # homogeneous fibre: rescaling stays on Z
            q = [x * scale for x in q]
        if any(x <= 0 for x in q):
            continue
        if all(_sum_of_two_squares(x) is not None for x in q):
            return q
    raise StratificationError("could not find rational radii; float fallback is disabled")


def sample_points(action: LinearAction, stratification: Stratification, stratum: StratumDescriptor | int,
                  count: int, seed: int = 0) -> list[StratumSample]:
    if isinstance(stratum, int):
        stratum = stratification.by_id(stratum)
    rng = random.Random(f"{seed}:{stratum.id}")
    out = []
    dim = action.dim
    for k in range(count):
        if action.is_torus:
            supp = stratum.patterns[k % len(stratum.patterns)]
            q = _random_radii(action, supp, rng)
            point = [Fraction(0)] * dim
            for i, qi in zip(sorted(supp), q):
                a, b = _sum_of_two_squares(qi)
                c, s = _pythagorean(rng)
                point[2 * i] = a * c - b * s
                point[2 * i + 1] = a * s + b * c
        else:
            u = stratum.patterns[k % len(stratum.patterns)]
            point = _generic_in_subspace(u, stratification, stratum, rng, dim)
        point = tuple(point)
        out.append(StratumSample(point, stratum.id, tuple(map(tuple, tangent_basis(action, point)))))
    return out


def _generic_in_subspace(u, stratification, stratum, rng, dim):
    if not u:
        return [Fraction(0)] * dim
    for _ in range(1000):
        coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in u]
        p = linalg.combine(coeffs, u)
        if stratification.contains(stratum, p):
            return p
    raise StratificationError("failed to find a generic point in the fixed subspace")


def fixed_subspace(action: LinearAction, point: Sequence) -> list[list[Fraction]]:
    """Basis of the subspace fixed by the stabilizer of ``point``."""
    dim = action.dim
    if action.is_torus:
        stab = _torus_stabilizer(action, support(point))
        w = action.group.weights
        r = action.group.rank
        basis = []
        for i in range(action.space.n):
            if in_lattice([w[j][i] for j in range(r)], stab.data):
                for c in (2 * i, 2 * i + 1):
                    basis.append([Fraction(int(c == j)) for j in range(dim)])
        return basis
    stab = _finite_stabilizer(action.group.elements, point)
    rows = [[g[i][j] - (1 if i == j else 0) for j in range(dim)] for g in stab.data for i in range(dim)]
    return linalg.nullspace(rows, dim)


def tangent_basis(action: LinearAction, point: Sequence) -> list[list[Fraction]]:
    """Exact basis of ``T_z(stratum)``: kernel of the moment differentials on the fixed subspace."""
    point = [Fraction(x) for x in point]
    if not on_fibre(action, point):
        raise StratificationError("point is not on the zero fibre")
    fixed = fixed_subspace(action, point)
    if not action.is_torus or not fixed:
        return fixed
    grads = []
    for phi in moment_map(action).components:
        grads.append([phi.diff(i).evaluate(point) for i in range(action.dim)])
    # restrict each gradient to the fixed basis and take the kernel
    rows = [[sum((g[i] * f[i] for i in range(action.dim)), Fraction(0)) for f in fixed] for g in grads]
    kernel = linalg.nullspace(rows, len(fixed))
    return [linalg.combine(c, fixed) for c in kernel]
