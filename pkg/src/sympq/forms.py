"""Differential forms with exact polynomial coefficients on a coordinate space.

A form of degree ``k`` on an ``dim``-dimensional coordinate space is a map
from strictly increasing index tuples of length ``k`` to :class:`Poly`
coefficients.  Everything here is exact; there is no floating point except in
:meth:`DifferentialForm.evaluate_float`.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .poly import Poly, as_fraction

Index = tuple[int, ...]


def merge_sign(a: Index, b: Index) -> tuple[int, Index | None]:
    """Sign and sorted index of ``dx_a ∧ dx_b``; ``(0, None)`` if they overlap."""
    if set(a) & set(b):
        return 0, None
    inversions = sum(1 for i in a for j in b if i > j)
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


def det(rows: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction Gaussian elimination."""
    m = [list(map(as_fraction, r)) for r in rows]
    n = len(m)
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            f = m[r][col]
            if f:
                f /= p
                row_r, row_c = m[r], m[col]
                for c in range(col + 1, n):
                    row_r[c] -= f * row_c[c]
    return result * sign


def minors(vectors: Sequence[Sequence], k: int, dim: int) -> dict[Index, Fraction]:
    """All ``k×k`` minors ``det[v_r[i_c]]`` of the given ``k`` vectors, keyed by column index."""
    if k == 0:
        return {(): Fraction(1)}
    out = {}
    for idx in combinations(range(dim), k):
        val = det([[v[i] for i in idx] for v in vectors])
        if val:
            out[idx] = val
    return out


class DifferentialForm:
    """Homogeneous-degree differential form with polynomial coefficients."""

    __slots__ = ("dim", "degree", "components", "_hash")

    def __init__(self, dim: int, degree: int, components: Mapping[Index, Poly] | None = None):
        if degree < 0 or degree > dim:
            raise ValueError(f"form degree {degree} impossible in dimension {dim}")
        clean = {}
        for idx, coeff in (components or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index {idx} is not strictly increasing of length {degree}")
            if idx and (idx[0] < 0 or idx[-1] >= dim):
                raise ValueError(f"index {idx} out of range for dimension {dim}")
            if not isinstance(coeff, Poly):
                coeff = Poly.const(dim, coeff)
            if coeff.nvars != dim:
                raise ValueError("coefficient lives in the wrong number of variables")
            if coeff:
                clean[idx] = coeff
        self.dim = dim
        self.degree = degree
        self.components = clean
        self._hash = None

    @classmethod
    def _raw(cls, dim, degree, components) -> "DifferentialForm":
        f = cls.__new__(cls)
        f.dim, f.degree, f.components, f._hash = dim, degree, components, None
        return f

    # -- constructors ---------------------------------------------------------------

    @classmethod
    def zero(cls, dim: int, degree: int = 0) -> "DifferentialForm":
        return cls._raw(dim, degree, {})

    @classmethod
    def function(cls, f: Poly) -> "DifferentialForm":
        return cls._raw(f.nvars, 0, {(): f} if f else {})

    @classmethod
    def constant(cls, dim: int, value) -> "DifferentialForm":
        return cls.function(Poly.const(dim, value))

    @classmethod
    def basis(cls, dim: int, index: Sequence[int], coeff: Poly | None = None) -> "DifferentialForm":
        """``coeff · dx_{i1} ∧ … ∧ dx_{ik}`` for an arbitrary (unsorted) index list."""
        coeff = Poly.const(dim, 1) if coeff is None else coeff
        idx = tuple(index)
        if len(set(idx)) < len(idx):
            return cls.zero(dim, len(idx))
        order = sorted(range(len(idx)), key=lambda p: idx[p])
        sign = _perm_sign(order)
        return cls(dim, len(idx), {tuple(sorted(idx)): coeff * sign})

    @classmethod
    def dx(cls, dim: int, i: int) -> "DifferentialForm":
        return cls.basis(dim, (i,))

    # -- inspection -----------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.components

    def __bool__(self) -> bool:
        return bool(self.components)

    def coefficient(self, index: Sequence[int]) -> Poly:
        return self.components.get(tuple(index), Poly.zero(self.dim))

    def poly_degree(self) -> int:
        return max((c.degree() for c in self.components.values()), default=-1)

    def weighted_degree(self, weights: Sequence[int]) -> int:
        """Coefficient weight plus weights of the differentials; -1 for zero."""
        return max(
            (c.weighted_degree(weights) + sum(weights[i] for i in idx) for idx, c in self.components.items()),
            default=-1,
        )

    def weighted_part(self, weight: int, weights: Sequence[int]) -> "DifferentialForm":
        out = {}
        for idx, c in self.components.items():
            part = c.homogeneous_part(weight - sum(weights[i] for i in idx), weights)
            if part:
                out[idx] = part
        return DifferentialForm._raw(self.dim, self.degree, out)

    # -- linear structure -----------------------------------------------------------

    def _check(self, other: "DifferentialForm") -> None:
        if self.dim != other.dim:
            raise ValueError(f"ambient dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        self._check(other)
        if not other.components:
            return self
        if not self.components:
            return other
        if self.degree != other.degree:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")
        out = dict(self.components)
        for idx, c in other.components.items():
            s = out[idx] + c if idx in out else c
            if s:
                out[idx] = s
            else:
                out.pop(idx, None)
        return DifferentialForm._raw(self.dim, self.degree, out)

    def __neg__(self) -> "DifferentialForm":
        return DifferentialForm._raw(self.dim, self.degree, {i: -c for i, c in self.components.items()})

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, factor) -> "DifferentialForm":
        """Multiply by a rational number or by a polynomial function."""
        if isinstance(factor, DifferentialForm):
            if factor.degree != 0:
                raise TypeError("use wedge for products of positive-degree forms")
            factor = factor.coefficient(())
        out = {}
        for idx, c in self.components.items():
            p = c * factor
            if p:
                out[idx] = p
        return DifferentialForm._raw(self.dim, self.degree, out)

    def __mul__(self, factor) -> "DifferentialForm":
        return self.scale(factor)

    __rmul__ = __mul__

    def __xor__(self, other: "DifferentialForm") -> "DifferentialForm":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if not self.components and not other.components:
            return True
        return self.degree == other.degree and self.components == other.components

    def __hash__(self) -> int:
        if self._hash is None:
            key = frozenset(self.components.items())
            self._hash = hash((self.dim, self.degree if key else 0, key))
        return self._hash

    # -- evaluation -----------------------------------------------------------------

    def at(self, point: Sequence) -> dict[Index, Fraction]:
        """Coefficients evaluated at ``point``."""
        out = {}
        for idx, c in self.components.items():
            v = c.evaluate(point)
            if v:
                out[idx] = v
        return out

    def evaluate_float(self, points: np.ndarray) -> dict[Index, np.ndarray]:
        return {idx: c.evaluate_float(points) for idx, c in self.components.items()}

    # -- io -------------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "degree": self.degree,
            "components": [
                {"index": list(idx), "coeff": self.components[idx].to_json()}
                for idx in sorted(self.components)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "DifferentialForm":
        dim = data["dim"]
        comps = {tuple(c["index"]): Poly.from_json(dim, c["coeff"]) for c in data["components"]}
        return cls(dim, data["degree"], comps)

    def format(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"v{i}" for i in range(self.dim)]
        if not self.components:
            return "0"
        parts = []
        for idx in sorted(self.components):
            coeff = self.components[idx].format(names)
            if not idx:
                parts.append(coeff)
                continue
            atoms = " /\\ ".join("d" + names[i] for i in idx)
            if coeff == "1":
                parts.append(atoms)
            else:
                parts.append(f"({coeff})*{atoms}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"DifferentialForm<{self.degree}>({self.format()})"


def _perm_sign(order: Sequence[int]) -> int:
    inv = sum(1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b])
    return -1 if inv % 2 else 1


class PolyVectorField:
    """Vector field with polynomial components."""

    __slots__ = ("dim", "components")

    def __init__(self, components: Sequence[Poly]):
        if not components:
            raise ValueError("a vector field needs at least one component")
        dim = components[0].nvars
        if len(components) != dim or any(c.nvars != dim for c in components):
            raise ValueError("component count must equal the ambient dimension")
        self.dim = dim
        self.components = tuple(components)

    @classmethod
    def coordinate(cls, dim: int, i: int) -> "PolyVectorField":
        return cls([Poly.const(dim, 1 if j == i else 0) for j in range(dim)])

    @classmethod
    def linear(cls, matrix: Sequence[Sequence]) -> "PolyVectorField":
        """The field ``v ↦ A v``."""
        dim = len(matrix)
        return cls([
            sum((Poly.var(dim, j) * as_fraction(matrix[i][j]) for j in range(dim) if matrix[i][j]), Poly.zero(dim))
            for i in range(dim)
        ])

    def is_zero(self) -> bool:
        return not any(self.components)

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField([a + b for a, b in zip(self.components, other.components)])

    def scale(self, factor) -> "PolyVectorField":
        return PolyVectorField([c * factor for c in self.components])

    def __neg__(self) -> "PolyVectorField":
        return self.scale(-1)

    def at(self, point: Sequence) -> list[Fraction]:
        return [c.evaluate(point) for c in self.components]

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyVectorField) and self.components == other.components

    def __hash__(self):
        return hash(self.components)


class PolyMap:
    """Polynomial map from ``source_dim`` coordinates to ``len(components)`` coordinates."""

    __slots__ = ("source_dim", "components")

    def __init__(self, components: Sequence[Poly], source_dim: int | None = None):
        if components:
            source_dim = components[0].nvars
        if source_dim is None:
            raise ValueError("source dimension is needed for a map to a point")
        if any(c.nvars != source_dim for c in components):
            raise ValueError("all components must live on the source space")
        self.source_dim = source_dim
        self.components = tuple(components)

    @property
    def target_dim(self) -> int:
        return len(self.components)

    @classmethod
    def identity(cls, dim: int) -> "PolyMap":
        return cls([Poly.var(dim, i) for i in range(dim)])

    @classmethod
    def linear(cls, matrix: Sequence[Sequence], source_dim: int | None = None) -> "PolyMap":
        src = len(matrix[0]) if matrix else source_dim
        return cls(
            [
                sum((Poly.var(src, j) * as_fraction(row[j]) for j in range(src) if row[j]), Poly.zero(src))
                for row in matrix
            ],
            source_dim=src,
        )

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """``self ∘ inner``."""
        if inner.target_dim != self.source_dim:
            raise ValueError("dimension mismatch in composition")
        return PolyMap([c.compose(inner.components) for c in self.components], source_dim=inner.source_dim)

    def __call__(self, point: Sequence) -> list[Fraction]:
        return [c.evaluate(point) for c in self.components]

    def jacobian(self) -> list[list[Poly]]:
        return [[c.diff(j) for j in range(self.source_dim)] for c in self.components]

    def push_vector(self, point: Sequence, vector: Sequence) -> list[Fraction]:
        """Differential of the map at ``point`` applied to ``vector``."""
        out = []
        for c in self.components:
            out.append(sum((c.diff(j).evaluate(point) * vector[j] for j in range(self.source_dim) if vector[j]), Fraction(0)))
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyMap) and self.source_dim == other.source_dim and self.components == other.components

    def __hash__(self):
        return hash((self.source_dim, self.components))


# -- operators ----------------------------------------------------------------------


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    a._check(b)
    degree = a.degree + b.degree
    if degree > a.dim:
        return DifferentialForm.zero(a.dim, 0)
    if not a.components or not b.components:
        return DifferentialForm.zero(a.dim, degree)
    out: dict[Index, Poly] = {}
    for ia, ca in a.components.items():
        for ib, cb in b.components.items():
            sign, idx = merge_sign(ia, ib)
            if not sign:
                continue
            term = ca * cb
            if sign < 0:
                term = -term
            out[idx] = out[idx] + term if idx in out else term
    return DifferentialForm._raw(a.dim, degree, {i: c for i, c in out.items() if c})


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    if a.degree == a.dim or not a.components:
        return DifferentialForm.zero(a.dim, min(a.degree + 1, a.dim))
    out: dict[Index, Poly] = {}
    for idx, c in a.components.items():
        for j in range(a.dim):
            if j in idx:
                continue
            dc = c.diff(j)
            if not dc:
                continue
            sign, new = merge_sign((j,), idx)
            term = dc if sign > 0 else -dc
            out[new] = out[new] + term if new in out else term
    return DifferentialForm._raw(a.dim, a.degree + 1, {i: c for i, c in out.items() if c})


d = exterior_derivative


def interior_product(v: PolyVectorField, a: DifferentialForm) -> DifferentialForm:
    if v.dim != a.dim:
        raise ValueError(f"vector field on dimension {v.dim}, form on {a.dim}")
    if a.degree == 0 or not a.components:
        return DifferentialForm.zero(a.dim, max(a.degree - 1, 0))
    out: dict[Index, Poly] = {}
    for idx, c in a.components.items():
        for pos, i in enumerate(idx):
            vi = v.components[i]
            if not vi:
                continue
            term = vi * c
            if pos % 2:
                term = -term
            rest = idx[:pos] + idx[pos + 1:]
            out[rest] = out[rest] + term if rest in out else term
    return DifferentialForm._raw(a.dim, a.degree - 1, {i: c for i, c in out.items() if c})


def lie_derivative(v: PolyVectorField, a: DifferentialForm) -> DifferentialForm:
    """Cartan's formula ``L_v a = d i(v) a + i(v) d a``."""
    first = exterior_derivative(interior_product(v, a))
    second = interior_product(v, exterior_derivative(a))
    if not first:
        return second
    if not second:
        return first
    return first + second


def pull_with(a: DifferentialForm, coefficient_map: PolyMap, one_forms: Sequence[DifferentialForm]) -> DifferentialForm:
    """Algebra map sending coefficients ``f ↦ f∘φ`` and ``dx_i ↦ one_forms[i]``."""
    dim = coefficient_map.source_dim
    if not a.components:
        return DifferentialForm.zero(dim, min(a.degree, dim))
    # wedge the (usually small) one-forms first, sharing prefixes, then multiply
    # by the (usually large) pulled-back coefficient once per component
    products: dict[Index, DifferentialForm] = {(): DifferentialForm.constant(dim, 1)}

    def product(idx: Index) -> DifferentialForm:
        if idx not in products:
            head = product(idx[:-1])
            products[idx] = wedge(head, one_forms[idx[-1]]) if head else head
        return products[idx]

    out: dict[Index, Poly] = {}
    for idx, c in a.components.items():
        basis = product(idx)
        if not basis.components:
            continue
        pulled = c.compose(coefficient_map.components)
        if not pulled:
            continue
        for j, b in basis.components.items():
            term = b * pulled
            out[j] = out[j] + term if j in out else term
    return DifferentialForm._raw(dim, a.degree, {i: c for i, c in out.items() if c})


def pullback(phi: PolyMap, a: DifferentialForm) -> DifferentialForm:
    if phi.target_dim != a.dim:
        raise ValueError(f"map lands in dimension {phi.target_dim}, form lives in {a.dim}")
    if a.degree > phi.source_dim:
        return DifferentialForm.zero(phi.source_dim, 0)
    differentials = [exterior_derivative(DifferentialForm.function(c)) for c in phi.components]
    return pull_with(a, phi, differentials)


def evaluate(a: DifferentialForm, point: Sequence, vectors: Sequence[Sequence]) -> Fraction:
    """``a_point(v_1, …, v_k)`` exactly."""
    if len(point) != a.dim:
        raise ValueError(f"point has {len(point)} coordinates, form lives in dimension {a.dim}")
    if len(vectors) != a.degree:
        raise ValueError(f"a {a.degree}-form needs {a.degree} vectors, got {len(vectors)}")
    if any(len(v) != a.dim for v in vectors):
        raise ValueError("vector of the wrong dimension")
    point = [as_fraction(x) for x in point]
    total = Fraction(0)
    for idx, c in a.components.items():
        coeff = c.evaluate(point)
        if coeff:
            total += coeff * det([[v[i] for i in idx] for v in vectors])
    return total


def euler_field(dim: int, weights: Sequence[int] | None = None) -> PolyVectorField:
    """Weighted Euler field ``Σ w_i x_i ∂_i``."""
    weights = weights or [1] * dim
    return PolyVectorField([Poly.var(dim, i) * w for i, w in enumerate(weights)])


def symplectic_form(n: int) -> DifferentialForm:
    """``Σ dx_i ∧ dy_i`` in coordinates ``x_1, y_1, …, x_n, y_n``."""
    dim = 2 * n
    return DifferentialForm(dim, 2, {(2 * i, 2 * i + 1): Poly.const(dim, 1) for i in range(n)})


def exterior_power(a: DifferentialForm, k: int) -> DifferentialForm:
    result = DifferentialForm.constant(a.dim, 1)
    for _ in range(k):
        result = wedge(result, a)
    return result
