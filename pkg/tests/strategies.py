"""Seeded random generators shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from hypothesis import strategies as st

from sympq.actions import LinearAction, average
from sympq.forms import DifferentialForm, PolyMap, pullback
from sympq.homotopy import Homotopy
from sympq.poly import Poly, monomials


def rand_coeff(rng: random.Random, size: int = 5) -> Fraction:
    return Fraction(rng.randint(-size, size), rng.randint(1, 3))


def rand_poly(rng: random.Random, nvars: int, max_degree: int = 2, terms: int = 3) -> Poly:
    exps = [e for d in range(max_degree + 1) for e in monomials(nvars, d)]
    return Poly(nvars, {e: rand_coeff(rng) for e in rng.sample(exps, min(terms, len(exps)))})


def rand_form(rng: random.Random, dim: int, degree: int | None = None, max_degree: int = 2, terms: int = 3) -> DifferentialForm:
    if degree is None:
        degree = rng.randint(0, dim)
    idxs = list(combinations(range(dim), degree))
    chosen = rng.sample(idxs, min(len(idxs), rng.randint(1, 3)))
    return DifferentialForm(dim, degree, {i: rand_poly(rng, dim, max_degree, terms) for i in chosen})


def rand_field_components(rng: random.Random, dim: int, max_degree: int = 2) -> list[Poly]:
    return [rand_poly(rng, dim, max_degree, 2) for _ in range(dim)]


def rand_map(rng: random.Random, source: int, target: int, max_degree: int = 2) -> PolyMap:
    return PolyMap([rand_poly(rng, source, max_degree, 2) for _ in range(target)], source_dim=source)


def invariant_quadrics(action: LinearAction) -> list[Poly]:
    n = action.dim
    if action.is_torus:
        return [Poly.var(n, 2 * i) ** 2 + Poly.var(n, 2 * i + 1) ** 2 for i in range(action.space.n)]
    q = sum((Poly.var(n, i) ** 2 for i in range(n)), Poly.zero(n))
    return [average(action, DifferentialForm.function(q)).coefficient(())]


def random_equivariant_homotopy(action: LinearAction, rng: random.Random) -> Homotopy:
    """``F(v, t) = Σ a_k(t, q) A_k v`` with ``A_k`` in the commutant of the group."""
    n = action.dim
    m = n + 1
    t = Poly.var(m, n)
    qs = [q.embed(m, list(range(n))) for q in invariant_quadrics(action)]

    def scalar() -> Poly:
        out = Poly.const(m, rand_coeff(rng))
        out = out + t * rand_coeff(rng)
        q = rng.choice(qs)
        if rng.random() < 0.5:
            out = out + q * t * rand_coeff(rng)
        return out

    comps = [Poly.zero(m)] * n
    if action.is_torus:
        for i in range(action.space.n):
            a, b = scalar(), scalar()
            x, y = Poly.var(m, 2 * i), Poly.var(m, 2 * i + 1)
            comps[2 * i] = a * x - b * y
            comps[2 * i + 1] = a * y + b * x
    else:
        g = action.group.generators[0]
        a, b = scalar(), scalar()
        for i in range(n):
            gi = sum((Poly.var(m, j) * g[i][j] for j in range(n) if g[i][j]), Poly.zero(m))
            comps[i] = a * Poly.var(m, i) + b * gi
    return Homotopy(PolyMap(comps, source_dim=m), action, action, "random equivariant")


def flow_derivative(A, form):
    """``d/ds|_0 (I + sA)* form``: an independent route to the Lie derivative of a linear field."""
    n = form.dim
    m = n + 1  # last variable is s
    s = Poly.var(m, n)
    comps = [Poly.var(m, i) + sum((Poly.var(m, j) * A[i][j] for j in range(n) if A[i][j]), Poly.zero(m)) * s
             for i in range(n)]
    phi = PolyMap(comps, source_dim=m)
    pulled = pullback(phi, form)
    out = {}
    for idx, c in pulled.components.items():
        if n in idx:
            continue
        first = Poly._raw(n, {e[:-1]: v for e, v in c.terms.items() if e[-1] == 1})
        if first:
            out[idx] = first
    return DifferentialForm(n, form.degree, out)


# hypothesis front end: draw a seed, build the object deterministically from it
seeds = st.integers(min_value=0, max_value=2**32 - 1)
