"""Exact linear algebra over the rationals, backed by FLINT's ``fmpq_mat``.

Vectors and matrices cross the boundary as lists of :class:`Fraction`.  The
helpers here are what the quotient complex needs: rank, kernel, span
membership, and coordinates of forms in a shared monomial basis.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from flint import fmpq, fmpq_mat

from .forms import DifferentialForm

Vector = list[Fraction]


def _fmpq(x) -> fmpq:
    t = type(x)
    if t is Fraction:
        return fmpq(x.numerator, x.denominator)
    if t is int:
        return fmpq(x)
    if t is fmpq:
        return x
    x = Fraction(x)
    return fmpq(x.numerator, x.denominator)


def _frac(x: fmpq) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def to_flint(rows: Sequence[Sequence], ncols: int | None = None) -> fmpq_mat:
    nrows = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    flat = []
    for r in rows:
        if len(r) != ncols:
            raise ValueError("ragged matrix")
        flat.extend(_fmpq(x) for x in r)
    return fmpq_mat(nrows, ncols, flat)


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    if not rows:
        return 0
    return to_flint(rows, ncols).rank()


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[Vector], list[int]]:
    """Nonzero rows of the reduced echelon form and their pivot columns."""
    if not rows:
        return [], []
    mat, r = to_flint(rows, ncols).rref()
    n = mat.ncols()
    out, pivots = [], []
    for i in range(r):
        row = [_frac(mat[i, j]) for j in range(n)]
        pivots.append(next(j for j, x in enumerate(row) if x))
        out.append(row)
    return out, pivots


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Basis of ``{c : rows · c = 0}``; deterministic (one vector per free column)."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    reduced, pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[free]
        basis.append(v)
    return basis


def nullspace_of(mat: fmpq_mat) -> list[Vector]:
    """Kernel basis of a FLINT matrix, same convention as :func:`nullspace`."""
    ncols = mat.ncols()
    reduced, r = mat.rref()
    pivots = []
    rows = []
    for i in range(r):
        row = [_frac(reduced[i, j]) for j in range(ncols)]
        pivots.append(next(j for j, x in enumerate(row) if x))
        rows.append(row)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, p in zip(rows, pivots):
            v[p] = -row[free]
        basis.append(v)
    return basis


def annihilator(basis: Sequence[Sequence], ncols: int) -> fmpq_mat:
    """Rows spanning the linear functionals that vanish on ``span(basis)``."""
    null = nullspace(basis, ncols) if basis else nullspace([], ncols)
    if not null:
        return fmpq_mat(0, ncols)
    return to_flint(null, ncols)


def in_span_by(annihilator_rows: fmpq_mat, vector: Sequence) -> bool:
    if annihilator_rows.nrows() == 0:
        return True
    col = fmpq_mat(len(vector), 1, [_fmpq(x) for x in vector])
    prod = annihilator_rows * col
    return all(prod[i, 0] == 0 for i in range(prod.nrows()))


def row_basis(rows: Sequence[Sequence], ncols: int | None = None) -> list[Vector]:
    return rref(rows, ncols)[0]


def independent_subset(vectors: Sequence[Sequence], ncols: int) -> list[int]:
    """Indices of a maximal linearly independent subfamily, greedily from the front."""
    if not vectors:
        return []
    # pivots of the transposed matrix pick out independent columns = input vectors
    cols = [[v[i] for v in vectors] for i in range(ncols)]
    return rref(cols, len(vectors))[1]


def in_span(vector: Sequence, basis: Sequence[Sequence], ncols: int) -> bool:
    return rank(list(basis) + [list(vector)], ncols) == rank(list(basis), ncols) if basis else not any(vector)


def combine(coeffs: Sequence, vectors: Sequence[Sequence]) -> Vector:
    n = len(vectors[0])
    out = [Fraction(0)] * n
    for c, v in zip(coeffs, vectors):
        if c:
            for i, x in enumerate(v):
                if x:
                    out[i] += c * x
    return out


def mat_vec(rows: Sequence[Sequence], vec: Sequence) -> Vector:
    return [sum((a * b for a, b in zip(r, vec) if a and b), Fraction(0)) for r in rows]


class FormIndexer:
    """Assigns stable coordinates ``(index, exponent)`` to the monomial forms seen so far."""

    def __init__(self):
        self.keys: dict[tuple, int] = {}

    def register(self, forms: Iterable[DifferentialForm]) -> None:
        new = set()
        for f in forms:
            for idx, c in f.components.items():
                for e in c.terms:
                    key = (idx, e)
                    if key not in self.keys:
                        new.add(key)
        for key in sorted(new):
            self.keys[key] = len(self.keys)

    def __len__(self) -> int:
        return len(self.keys)

    def vector(self, form: DifferentialForm) -> Vector:
        self.register([form])
        v = [Fraction(0)] * len(self.keys)
        for idx, c in form.components.items():
            for e, x in c.terms.items():
                v[self.keys[(idx, e)]] = x
        return v

    def vectors(self, forms: Sequence[DifferentialForm]) -> list[Vector]:
        self.register(forms)
        return [self.vector(f) for f in forms]


def combination(coeffs: Sequence, forms: Sequence[DifferentialForm], dim: int, degree: int) -> DifferentialForm:
    total = DifferentialForm.zero(dim, degree)
    for c, f in zip(coeffs, forms):
        if c and f:
            total = total + f.scale(c)
    return total
