"""Exact multivariate polynomials over the rationals.

A :class:`Poly` lives in a fixed number of variables and stores a sparse map
from exponent tuples to :class:`fractions.Fraction` coefficients.  Zero
coefficients are never stored, so equality and hashing are structural.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from math import gcd
from operator import add
import numpy as np

Exponent = tuple[int, ...]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact arithmetic; pass a Fraction or a string")
    return Fraction(value)


def term_order_key(exponent: Exponent):
    # graded lexicographic
    return (sum(exponent), exponent)


class Poly:
    """Polynomial in ``nvars`` variables with exact rational coefficients."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        self.nvars = nvars
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for exp, c in terms.items():
                if len(exp) != nvars:
                    raise ValueError(f"exponent {exp} does not have {nvars} entries")
                c = as_fraction(c)
                if c:
                    clean[tuple(exp)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exponent, Fraction]) -> "Poly":
        # trusted constructor: terms already clean
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, value) -> "Poly":
        value = as_fraction(value)
        return cls._raw(nvars, {(0,) * nvars: value} if value else {})

    @classmethod
    def var(cls, nvars: int, index: int) -> "Poly":
        exp = [0] * nvars
        exp[index] = 1
        return cls._raw(nvars, {tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff=1) -> "Poly":
        return cls(len(exponent), {tuple(exponent): coeff})

    # -- inspection -----------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        return max((sum(e) for e in self.terms), default=-1)

    def weighted_degree(self, weights: Sequence[int]) -> int:
        return max((sum(w * k for w, k in zip(weights, e)) for e in self.terms), default=-1)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def depends_on(self, index: int) -> bool:
        return any(e[index] for e in self.terms)

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), key=lambda item: term_order_key(item[0]))

    def homogeneous_part(self, degree: int, weights: Sequence[int] | None = None) -> "Poly":
        if weights is None:
            return Poly._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == degree})
        return Poly._raw(
            self.nvars,
            {e: c for e, c in self.terms.items() if sum(w * k for w, k in zip(weights, e)) == degree},
        )

    # -- arithmetic -----------------------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            a = out.get(e)
            if a is None:
                out[e] = c
                continue
            s = _fsum(a, c)
            if s:
                out[e] = s
            else:
                del out[e]
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def scale(self, factor) -> "Poly":
        factor = as_fraction(factor)
        if not factor:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.nvars)
        # clear denominators so the inner loop runs on machine-friendly integers
        d1, n1 = _integer_form(self.terms)
        d2, n2 = _integer_form(other.terms)
        acc: dict[Exponent, int] = {}
        get = acc.get
        for e1, c1 in n1:
            for e2, c2 in n2:
                e = tuple(map(add, e1, e2))
                acc[e] = get(e, 0) + c1 * c2
        den = d1 * d2
        return Poly._raw(self.nvars, {e: _reduced(c, den) for e, c in acc.items() if c})

    def __rmul__(self, other) -> "Poly":
        return self.scale(other)

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        try:
            return self == Poly.const(self.nvars, other)
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- calculus -------------------------------------------------------------------

    def diff(self, index: int) -> "Poly":
        out: dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                e2 = e[:index] + (k - 1,) + e[index + 1:]
                out[e2] = c * k
        return Poly._raw(self.nvars, out)

    def integrate_unit_interval(self, index: int) -> "Poly":
        """``∫_0^1 p dx_index``; the result no longer depends on that variable."""
        out: dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            k = e[index]
            e2 = e[:index] + (0,) + e[index + 1:]
            out[e2] = out.get(e2, 0) + c / (k + 1)
        return Poly._raw(self.nvars, {e: c for e, c in out.items() if c})

    # -- substitution ---------------------------------------------------------------

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(point)}")
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= x**k
            total += v
        return total

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        """Vectorised float evaluation; ``points`` has shape (..., nvars)."""
        points = np.asarray(points, dtype=float)
        out = np.zeros(points.shape[:-1])
        for e, c in self.terms.items():
            v = np.full(points.shape[:-1], float(c))
            for i, k in enumerate(e):
                if k:
                    v = v * points[..., i] ** k
            out = out + v
        return out

    def compose(self, substitutes: Sequence["Poly"]) -> "Poly":
        """Substitute polynomial ``substitutes[i]`` for variable ``i``."""
        if len(substitutes) != self.nvars:
            raise ValueError(f"need {self.nvars} substitutes, got {len(substitutes)}")
        if not self.terms:
            m = substitutes[0].nvars if substitutes else 0
            return Poly.zero(m)
        m = substitutes[0].nvars
        powers: list[dict[int, Poly]] = [{0: Poly.const(m, 1)} for _ in substitutes]

        def power(i: int, k: int) -> Poly:
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * substitutes[i]
            return cache[k]

        out = Poly.zero(m)
        for e, c in self.sorted_terms():
            t = Poly.const(m, c)
            for i, k in enumerate(e):
                if k:
                    t = t * power(i, k)
            out = out + t
        return out

    def embed(self, nvars: int, positions: Sequence[int]) -> "Poly":
        """Re-express in ``nvars`` variables, old variable ``i`` becoming ``positions[i]``."""
        out = {}
        for e, c in self.terms.items():
            new = [0] * nvars
            for i, k in enumerate(e):
                new[positions[i]] += k
            out[tuple(new)] = c
        return Poly(nvars, out)

    # -- io -------------------------------------------------------------------------

    def to_json(self) -> list:
        return [[list(e), str(c.numerator), str(c.denominator)] for e, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, nvars: int, data: Iterable) -> "Poly":
        return cls(nvars, {tuple(e): Fraction(int(n), int(d)) for e, n, d in data})

    def format(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"v{i}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        pieces = []
        for e, c in reversed(self.sorted_terms()):
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            if not mono:
                body = _fmt_fraction(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{_fmt_fraction(abs(c))}*{mono}"
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"Poly({self.format()})"


def _reduced(num: int, den: int) -> Fraction:
    # Fraction(num, den) without the generic constructor; den > 0
    g = gcd(num, den)
    out = object.__new__(Fraction)
    out._numerator = num // g
    out._denominator = den // g
    return out


def _fsum(a: Fraction, b: Fraction) -> Fraction:
    da, db = a._denominator, b._denominator
    if da == db:
        return _reduced(a._numerator + b._numerator, da)
    return _reduced(a._numerator * db + b._numerator * da, da * db)


def _integer_form(terms: Mapping[Exponent, Fraction]) -> tuple[int, list[tuple[Exponent, int]]]:
    den = 1
    for c in terms.values():
        q = c.denominator
        if q != 1 and den % q:
            den = den * q // gcd(den, q)
    return den, [(e, c.numerator * (den // c.denominator)) for e, c in terms.items()]


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"({c.numerator}/{c.denominator})"


def monomials(nvars: int, degree: int) -> list[Exponent]:
    """All exponent vectors of total degree exactly ``degree``, in canonical order."""
    if nvars == 0:
        return [()] if degree == 0 else []
    out: list[Exponent] = []

    def rec(prefix: list[int], remaining: int, slots: int):
        if slots == 1:
            out.append(tuple(prefix + [remaining]))
            return
        for k in range(remaining, -1, -1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], degree, nvars)
    return sorted(out)


def weighted_monomials(weights: Sequence[int], degree: int) -> list[Exponent]:
    """Exponent vectors with ``Σ weights[i]*e[i] == degree``; zero weights are not allowed."""
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    out: list[Exponent] = []

    def rec(prefix: list[int], remaining: int, i: int):
        if i == len(weights):
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for k in range(remaining // weights[i] + 1):
            rec(prefix + [k], remaining - k * weights[i], i + 1)

    rec([], degree, 0)
    return sorted(out)
