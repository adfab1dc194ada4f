"""The de Rham complex of a linear symplectic quotient as ``Ω_Φ(M) / I_Φ(M)``.

Forms are truncated by *weight*: coefficient degree plus form degree, which
``d`` preserves.  Every membership question (Φ-basic, ideal) is a family of
exact linear conditions obtained by evaluating forms on tangent multivectors at
exact rational points of the principal stratum.  Sample sets grow until the
solution space stops shrinking, so verdicts do not depend on the seed.
"""

from __future__ import annotations

import logging
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Sequence

from flint import fmpq_mat

from . import linalg
from .actions import (
    LinearAction,
    average,
    basis_vector_fields,
    is_invariant,
)
from .forms import DifferentialForm, exterior_derivative, minors, wedge
from .poly import Poly, monomials
from .stratification import (
    Stratification,
    StratumDescriptor,
    StratumSample,
    sample_points,
    strata_of_Z,
)

log = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 8
DEFAULT_CANDIDATE_CAP = 6000


class ResourceCapExceeded(RuntimeError):
    pass


class MembershipError(ValueError):
    pass


def default_seed() -> int:
    return int(os.environ.get("SYMPQ_SEED", "0"))


# -- sample bookkeeping --------------------------------------------------------------


class FibreSampler:
    """Lazily grown, seed-deterministic sample sets for every stratum of ``Z``."""

    def __init__(self, action: LinearAction, seed: int = 0):
        self.action = action
        self.seed = seed
        self.stratification: Stratification = strata_of_Z(action)
        self._cache: dict[int, list[StratumSample]] = {}

    def samples(self, stratum: StratumDescriptor | int, count: int) -> list[StratumSample]:
        sid = stratum if isinstance(stratum, int) else stratum.id
        have = self._cache.get(sid, [])
        if len(have) < count:
            # regenerate with a larger count so prefixes are stable
            have = sample_points(self.action, self.stratification, sid, max(count, 2 * len(have)), self.seed)
            self._cache[sid] = have
        return have[:count]

    def principal_samples(self, count: int) -> list[StratumSample]:
        return self.samples(self.stratification.principal, count)


@lru_cache(maxsize=64)
def sampler_for(action: LinearAction, seed: int = 0) -> FibreSampler:
    return FibreSampler(action, seed)


def _functional(point, vectors, keys: Sequence[tuple], dim: int) -> list[Fraction]:
    """Row vector ``(I, e) ↦ z^e · det(vectors restricted to I)`` over the monomial keys."""
    k = len(vectors)
    mins = minors(vectors, k, dim) if k else {(): Fraction(1)}
    powers: dict[tuple[int, int], Fraction] = {}

    def mono(e):
        v = Fraction(1)
        for i, p in enumerate(e):
            if p:
                key = (i, p)
                if key not in powers:
                    powers[key] = point[i] ** p
                v *= powers[key]
        return v

    row = []
    for idx, e in keys:
        m = mins.get(idx)
        row.append(m * mono(e) if m else Fraction(0))
    return row


def _sample_evaluations(action, samples: Sequence[StratumSample], k: int, contract: bool):
    """Yield ``(point, vectors)`` pairs whose evaluation decides the membership conditions."""
    fields = basis_vector_fields(action) if contract else []
    for s in samples:
        tangent = [list(v) for v in s.tangent_basis]
        point = list(s.point)
        if contract:
            if k == 0:
                continue
            for f in fields:
                xi = f.at(point)
                if not any(xi):
                    continue
                for combo in combinations(tangent, k - 1):
                    yield point, [xi] + list(combo)
        else:
            for combo in combinations(tangent, k):
                yield point, list(combo)


def _condition_rows(action, samples, k, contract, keys, dim):
    return [_functional(p, vecs, keys, dim) for p, vecs in _sample_evaluations(action, samples, k, contract)]


# -- certificates --------------------------------------------------------------------


@dataclass
class MembershipCertificate:
    verdict: bool
    evidence: list = field(default_factory=list)  # (point, value) witnesses, nonzero first
    sample_count: int = 0
    degree_bound: int = 0
    exact: bool = True
    mode: str = "exact evaluation at random rational points of the principal stratum"

    def __bool__(self) -> bool:
        return self.verdict

    def to_json(self) -> dict:
        return {
            "verdict": "member" if self.verdict else "non-member",
            "evidence": [
                {"point": [str(x) for x in p], "value": str(v)} for p, v in self.evidence[:8]
            ],
            "sample_count": self.sample_count,
            "degree_bound": self.degree_bound,
            "exact": self.exact,
            "mode": self.mode,
        }


def required_samples(action: LinearAction, degree: int, minimum: int = 8) -> int:
    """Sample count for a vanishing test of an expression of the given degree.

    Exceeds the number of polynomials of that degree in ``dim Z_prin``
    variables; the tangent vectors contribute at most quadratic growth per slot.
    """
    strat = sampler_for(action).stratification
    if not strat.strata:
        return 0
    zdim = strat.principal.dimension
    return max(minimum, min(comb(zdim + degree, degree) + 1, 400))


def _vanishing_certificate(action, form: DifferentialForm, contract: bool, seed: int) -> MembershipCertificate:
    sampler = sampler_for(action, seed)
    if not sampler.stratification.strata:
        raise MembershipError("the principal stratum is empty")
    k = form.degree
    deg = max(form.poly_degree(), 0) + 2 * k
    count = required_samples(action, deg)
    samples = sampler.principal_samples(count)
    fields = basis_vector_fields(action) if contract else []
    evidence = []
    from .forms import evaluate, interior_product

    targets = [interior_product(f, form) for f in fields] if contract else [form]
    for s in samples:
        tangent = [list(v) for v in s.tangent_basis]
        for t in targets:
            kk = t.degree if t else (k - 1 if contract else k)
            if kk < 0:
                continue
            if contract and k == 0:
                continue
            for combo in combinations(tangent, kk):
                val = evaluate(t, list(s.point), list(combo)) if t else Fraction(0)
                if val:
                    evidence.insert(0, (s.point, val))
                    return MembershipCertificate(False, evidence, len(samples), deg)
                if len(evidence) < 4:
                    evidence.append((s.point, val))
    return MembershipCertificate(True, evidence, len(samples), deg)


def is_horizontal_on_principal(action: LinearAction, form: DifferentialForm, seed: int | None = None) -> MembershipCertificate:
    seed = default_seed() if seed is None else seed
    if not action.is_torus:
        return MembershipCertificate(True, [], 0, 0, mode="finite group: horizontality is vacuous")
    return _vanishing_certificate(action, form, True, seed)


def is_phi_basic(action: LinearAction, form: DifferentialForm, seed: int | None = None) -> MembershipCertificate:
    if not is_invariant(action, form):
        return MembershipCertificate(False, [], 0, form.poly_degree(), mode="not invariant (Lie derivative or generator witness)")
    return is_horizontal_on_principal(action, form, seed)


def in_ideal(action: LinearAction, form: DifferentialForm, seed: int | None = None) -> MembershipCertificate:
    if not is_invariant(action, form):
        raise MembershipError("the ideal is defined inside invariant forms; input is not invariant")
    seed = default_seed() if seed is None else seed
    return _vanishing_certificate(action, form, False, seed)


# -- invariant forms -----------------------------------------------------------------


class _CForm:
    """Complex-valued form stored as a pair of real forms."""

    __slots__ = ("re", "im")

    def __init__(self, re: DifferentialForm, im: DifferentialForm):
        self.re, self.im = re, im

    def __mul__(self, other: "_CForm") -> "_CForm":
        a, b, c, d = self.re, self.im, other.re, other.im
        return _CForm(wedge(a, c) - wedge(b, d), wedge(a, d) + wedge(b, c))


def _torus_invariants(action: LinearAction, k: int, weight: int) -> list[DifferentialForm]:
    n = action.space.n
    dim = action.dim
    c = weight - k
    if c < 0 or k > dim:
        return []
    w = action.group.weights
    r = action.group.rank
    one = DifferentialForm.constant(dim, 1)
    zero0 = DifferentialForm.zero(dim, 0)

    def fn(p):
        return DifferentialForm.function(p)

    x = [fn(Poly.var(dim, 2 * i)) for i in range(n)]
    y = [fn(Poly.var(dim, 2 * i + 1)) for i in range(n)]
    dx = [DifferentialForm.dx(dim, 2 * i) for i in range(n)]
    dy = [DifferentialForm.dx(dim, 2 * i + 1) for i in range(n)]
    z = [_CForm(x[i], y[i]) for i in range(n)]
    zb = [_CForm(x[i], -y[i]) for i in range(n)]
    dz = [_CForm(dx[i], dy[i]) for i in range(n)]
    dzb = [_CForm(dx[i], -dy[i]) for i in range(n)]
    unit = _CForm(one, zero0)

    pow_cache: dict[tuple[int, int, int], _CForm] = {}

    def plane_power(i, a, b):
        key = (i, a, b)
        if key not in pow_cache:
            if a == 0 and b == 0:
                pow_cache[key] = unit
            elif a > 0:
                pow_cache[key] = plane_power(i, a - 1, b) * z[i]
            else:
                pow_cache[key] = plane_power(i, a, b - 1) * zb[i]
        return pow_cache[key]

    # symbols: (plane, +1) for dz, (plane, -1) for dzbar
    symbols = [(i, s) for i in range(n) for s in (1, -1)]
    out: list[DifferentialForm] = []
    for exps in monomials(2 * n, c):
        charge = [0] * r
        for i in range(n):
            a, b = exps[2 * i], exps[2 * i + 1]
            for j in range(r):
                charge[j] += (a - b) * w[j][i]
        for diff in combinations(symbols, k):
            tot = list(charge)
            for i, s in diff:
                for j in range(r):
                    tot[j] += s * w[j][i]
            if any(tot):
                continue
            # skip the conjugate duplicate: keep the lexicographically smaller of (monomial, conj)
            conj_exps = tuple(exps[2 * i + 1 - t] for i in range(n) for t in (0, 1))
            conj_diff = tuple(sorted((i, -s) for i, s in diff))
            if (conj_exps, conj_diff) < (tuple(exps), tuple(sorted(diff))):
                continue
            term = unit
            for i in range(n):
                a, b = exps[2 * i], exps[2 * i + 1]
                if a or b:
                    term = term * plane_power(i, a, b)
            for i, s in diff:
                term = term * (dz[i] if s > 0 else dzb[i])
            out.extend(f for f in (term.re, term.im) if f)
    return out


def _finite_invariants(action: LinearAction, k: int, weight: int) -> list[DifferentialForm]:
    dim = action.dim
    c = weight - k
    if c < 0 or k > dim:
        return []
    seen = set()
    out = []
    for idx in combinations(range(dim), k):
        for e in monomials(dim, c):
            f = average(action, DifferentialForm(dim, k, {idx: Poly.monomial(e)}))
            if f and f not in seen:
                seen.add(f)
                out.append(f)
    return out


def independent(forms: Sequence[DifferentialForm]) -> list[DifferentialForm]:
    if not forms:
        return []
    ix = linalg.FormIndexer()
    vecs = ix.vectors(list(forms))
    keep = linalg.independent_subset(vecs, len(ix))
    return [forms[i] for i in keep]


@lru_cache(maxsize=512)
def invariant_forms(action: LinearAction, k: int, weight: int) -> tuple[DifferentialForm, ...]:
    """Basis of invariant ``k``-forms of exact weight ``weight`` (coefficient degree ``weight - k``)."""
    if action.is_torus:
        raw = _torus_invariants(action, k, weight)
    else:
        raw = _finite_invariants(action, k, weight)
    return tuple(independent(raw))


# -- the truncated complex -----------------------------------------------------------


@dataclass
class QuotientFormClass:
    representative: DifferentialForm
    truncation: int
    degree: int

    def to_json(self) -> dict:
        return {"degree": self.degree, "truncation": self.truncation, "representative": self.representative.to_json()}


@dataclass
class _Piece:
    """One graded (or filtered) slice: candidates, Φ-basic subspace and ideal subspace."""

    k: int
    candidates: list[DifferentialForm]
    basic: list[list[Fraction]]  # coefficient vectors in candidate coordinates
    ideal: list[list[Fraction]]
    _solver: tuple | None = field(default=None, repr=False)
    _ideal_ann: object = field(default=None, repr=False)
    _basic_ann: object = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.basic) - len(self.ideal)


def _solve_subspace(action, forms, k, contract, sampler: FibreSampler, extra_rows_from=None) -> list[list[Fraction]]:
    """Coefficient vectors ``c`` with ``Σ c_i forms_i`` vanishing (after contraction) on ``Z_prin`` tangents."""
    m = len(forms)
    if m == 0:
        return []
    if contract and (not action.is_torus or k == 0):
        return linalg.nullspace([], m)
    ix = linalg.FormIndexer()
    vecs = ix.vectors(forms)
    keys = list(ix.keys)
    dim = action.dim
    cand = linalg.to_flint([[v[i] for v in vecs] for i in range(len(keys))], m)
    rows_total = None
    count = max(4, m // max(1, comb(sampler.stratification.principal.dimension, max(k - int(contract), 0))) + 4)
    prev_rank = -1
    while True:
        samples = sampler.principal_samples(count)
        rows = _condition_rows(action, samples, k, contract, keys, dim)
        if not rows:
            return linalg.nullspace([], m)
        cond = linalg.to_flint(rows, len(keys)) * cand
        rk = cond.rank()
        if rk == prev_rank or rk == m:
            rows_total = cond
            break
        prev_rank = rk
        count *= 2
        if count > 4000:
            raise ResourceCapExceeded("sample count cap reached before the conditions stabilised")
    return linalg.nullspace_of(rows_total)


def _mat_rows(mat: fmpq_mat) -> list[list[Fraction]]:
    return [[Fraction(int(x.p), int(x.q)) for x in row] for row in mat.table()]


def _weights_of(action) -> list[int]:
    return [1] * action.dim


class QuotientComplex:
    """Truncated model of ``Ω(X)`` for a linear action.

    At level zero everything is graded by weight and each weight is handled on
    its own; at nonzero levels the filtered space of weight ``≤ D`` is used.
    """

    def __init__(self, action: LinearAction, truncation: int = DEFAULT_TRUNCATION, seed: int | None = None,
                 candidate_cap: int = DEFAULT_CANDIDATE_CAP):
        if truncation < 0:
            raise ValueError("truncation must be nonnegative")
        self.action = action
        self.truncation = truncation
        self.seed = default_seed() if seed is None else seed
        self.candidate_cap = candidate_cap
        self.sampler = sampler_for(action, self.seed)
        self.graded = action.at_zero_level
        self._pieces: dict[tuple[int, int], _Piece] = {}
        if not self.sampler.stratification.strata:
            raise MembershipError("empty zero fibre: the quotient is empty")

    # slices are keyed by (k, w) with w = weight when graded, else w = -1 for "≤ D"
    def _weights(self) -> list[int]:
        return list(range(self.truncation + 1)) if self.graded else [-1]

    def candidates(self, k: int, w: int) -> list[DifferentialForm]:
        if w >= 0:
            return list(invariant_forms(self.action, k, w))
        out = []
        for ww in range(self.truncation + 1):
            out.extend(invariant_forms(self.action, k, ww))
        return out

    def piece(self, k: int, w: int) -> _Piece:
        key = (k, w)
        if key not in self._pieces:
            cands = self.candidates(k, w)
            if len(cands) > self.candidate_cap:
                raise ResourceCapExceeded(
                    f"{len(cands)} candidate forms in degree {k} exceed the cap {self.candidate_cap}"
                )
            basic = _solve_subspace(self.action, cands, k, True, self.sampler)
            basic_forms = [linalg.combination(c, cands, self.action.dim, k) for c in basic]
            ideal_in_basic = _solve_subspace(self.action, basic_forms, k, False, self.sampler)
            ideal = [linalg.combine(c, basic) for c in ideal_in_basic] if ideal_in_basic else []
            self._pieces[key] = _Piece(k, cands, basic, ideal)
        return self._pieces[key]

    def form_of(self, piece: _Piece, coeffs) -> DifferentialForm:
        return linalg.combination(coeffs, piece.candidates, self.action.dim, piece.k)

    def basis(self, k: int) -> list[QuotientFormClass]:
        """Representatives of a basis of ``Ω^k_Φ / I^k_Φ`` at this truncation."""
        if k > self.action.dim:
            return []
        out = []
        for w in self._weights():
            pc = self.piece(k, w)
            if not pc.basic:
                continue
            # complement of the ideal inside the Φ-basic space
            order = linalg.independent_subset(pc.ideal + pc.basic, len(pc.candidates))
            for i in order:
                if i >= len(pc.ideal):
                    out.append(QuotientFormClass(self.form_of(pc, pc.basic[i - len(pc.ideal)]), self.truncation, k))
        return out

    def dimension(self, k: int) -> int:
        if k > self.action.dim:
            return 0
        return sum(self.piece(k, w).dimension for w in self._weights())

    def _d_matrix(self, src: _Piece, dst: _Piece) -> list[list[Fraction]]:
        """Coordinates of ``d(candidate)`` in the target candidates (columns = source candidates)."""
        images = [exterior_derivative(f) for f in src.candidates]
        ix = linalg.FormIndexer()
        tvecs = ix.vectors(dst.candidates)
        ivecs = ix.vectors(images)
        tvecs = [v + [Fraction(0)] * (len(ix) - len(v)) for v in tvecs]
        n = len(ix)
        m = len(dst.candidates)
        cols = []
        aug = [[tvecs[j][i] for j in range(m)] + [iv[i] if i < len(iv) else Fraction(0) for iv in ivecs] for i in range(n)]
        reduced, pivots = linalg.rref(aug, m + len(ivecs))
        if pivots[:m] != list(range(m)) or any(p >= m for p in pivots):
            raise ArithmeticError("d of an invariant form left the invariant span")
        for s in range(len(ivecs)):
            cols.append([reduced[r][m + s] for r in range(m)])
        return cols  # one coordinate vector per source candidate

    def betti(self, k: int) -> int:
        """``dim ker d_k − dim im d_{k−1}`` on the quotient, summed over slices."""
        dim = self.action.dim
        if k > dim:
            return 0
        total = 0
        for w in self._weights():
            total += self._betti_slice(k, w)
        return total

    def _image_of_basic(self, src: _Piece, dst: _Piece) -> list[list[Fraction]]:
        if not src.basic or not dst.candidates:
            return []
        dmat = self._d_matrix(src, dst)
        m = len(dst.candidates)
        out = []
        for c in src.basic:
            v = [Fraction(0)] * m
            for ci, col in zip(c, dmat):
                if ci:
                    for r in range(m):
                        if col[r]:
                            v[r] += ci * col[r]
            out.append(v)
        return out

    def _betti_slice(self, k: int, w: int) -> int:
        dim = self.action.dim
        pc = self.piece(k, w)
        if not pc.basic:
            return 0
        # closed classes: {b : d b ∈ I^{k+1}}
        if k + 1 <= dim:
            nxt = self.piece(k + 1, w)
            images = self._image_of_basic(pc, nxt)
            m = len(nxt.candidates)
            if m:
                cols = images + [[-x for x in v] for v in nxt.ideal]
                rows = [[col[r] for col in cols] for r in range(m)]
                closed = len(linalg.nullspace(rows, len(cols)))
            else:
                closed = len(pc.basic)
        else:
            closed = len(pc.basic)
        # exact classes: d B^{k-1} + I^k
        if k >= 1:
            prev = self.piece(k - 1, w)
            images = self._image_of_basic(prev, pc)
            exact = linalg.rank(images + pc.ideal, len(pc.candidates)) if (images or pc.ideal) else 0
        else:
            exact = len(pc.ideal)
        return closed - exact

    def betti_numbers(self) -> list[int]:
        return [self.betti(k) for k in range(self.action.dim + 1)]

    # -- classes ----------------------------------------------------------------------

    def make_class(self, form: DifferentialForm) -> QuotientFormClass:
        return QuotientFormClass(form, self.truncation, form.degree)

    def differential(self, cls: QuotientFormClass) -> QuotientFormClass:
        return QuotientFormClass(exterior_derivative(cls.representative), cls.truncation, cls.degree + 1)

    def equal(self, a: QuotientFormClass, b: QuotientFormClass) -> bool:
        diff = a.representative - b.representative
        if not diff:
            return True
        return bool(in_ideal(self.action, diff, self.seed))

    def closed_classes(self, k: int) -> list[QuotientFormClass]:
        """Representatives of a basis of closed elements (``dγ ∈ I``) of ``Φ``-basic ``k``-forms modulo nothing."""
        dim = self.action.dim
        out = []
        for w in self._weights():
            pc = self.piece(k, w)
            if not pc.basic:
                continue
            if k + 1 > dim:
                coeffs = pc.basic
            else:
                nxt = self.piece(k + 1, w)
                images = self._image_of_basic(pc, nxt)
                m = len(nxt.candidates)
                if m == 0:
                    coeffs = pc.basic
                else:
                    cols = images + [[-x for x in v] for v in nxt.ideal]
                    rows = [[col[r] for col in cols] for r in range(m)]
                    null = linalg.nullspace(rows, len(cols))
                    coeffs = [linalg.combine(v[: len(pc.basic)], pc.basic) for v in null]
            out.extend(QuotientFormClass(self.form_of(pc, c), self.truncation, k) for c in coeffs)
        return out

    def _solver(self, pc: _Piece):
        """Cached data to express forms in the candidate basis of a slice."""
        if pc._solver is None:
            ix = linalg.FormIndexer()
            cvecs = ix.vectors(pc.candidates)
            n = len(ix)
            cvecs = [v + [Fraction(0)] * (n - len(v)) for v in cvecs]
            m = len(cvecs)
            cols = linalg.to_flint([[cvecs[j][i] for j in range(m)] for i in range(n)], m)
            rows = linalg.independent_subset([[cvecs[j][i] for j in range(m)] for i in range(n)], m)
            square = linalg.to_flint([[cvecs[j][i] for j in range(m)] for i in rows], m)
            pc._solver = (ix, cols, rows, square)
        return pc._solver

    def _slice_coordinates(self, pc: _Piece, part: DifferentialForm) -> list[Fraction] | None:
        if not pc.candidates:
            return None
        ix, cols, rows, square = self._solver(pc)
        keys = ix.keys
        target = [Fraction(0)] * len(keys)
        for idx, c in part.components.items():
            for e, x in c.terms.items():
                pos = keys.get((idx, e))
                if pos is None:
                    return None
                target[pos] = x
        rhs = linalg.to_flint([[target[i]] for i in rows], 1)
        sol = square.solve(rhs)
        if cols * sol != linalg.to_flint([[x] for x in target], 1):
            return None
        return [Fraction(int(sol[i, 0].p), int(sol[i, 0].q)) for i in range(sol.nrows())]

    def coordinates(self, form: DifferentialForm) -> list[tuple[_Piece, list[Fraction]]] | None:
        """Express an invariant form in the candidate bases of the slices; None if impossible."""
        k = form.degree
        weights = _weights_of(self.action)
        if form.weighted_degree(weights) > self.truncation:
            return None
        if self.graded:
            parts = [(w, form.weighted_part(w, weights)) for w in range(self.truncation + 1)]
        else:
            parts = [(-1, form)]
        out = []
        for w, part in parts:
            if not part:
                continue
            pc = self.piece(k, w)
            coeffs = self._slice_coordinates(pc, part)
            if coeffs is None:
                return None
            out.append((pc, coeffs))
        return out

    def in_ideal_span(self, form: DifferentialForm) -> bool:
        """Membership in the computed ideal subspace (exact linear algebra)."""
        if not form:
            return True
        coords = self.coordinates(form)
        if coords is None:
            raise MembershipError("form is not an invariant form within the truncation")
        for pc, c in coords:
            if pc._ideal_ann is None:
                pc._ideal_ann = linalg.annihilator(pc.ideal, len(pc.candidates))
            if any(c) and not linalg.in_span_by(pc._ideal_ann, c):
                return False
        return True

    def in_basic_span(self, form: DifferentialForm) -> bool:
        if not form:
            return True
        coords = self.coordinates(form)
        if coords is None:
            return False
        for pc, c in coords:
            if pc._basic_ann is None:
                pc._basic_ann = linalg.annihilator(pc.basic, len(pc.candidates))
            if any(c) and not linalg.in_span_by(pc._basic_ann, c):
                return False
        return True

    def random_basic(self, k: int, rng: random.Random, terms: int = 3) -> DifferentialForm:
        return self._random(k, rng, terms, ideal=False)

    def random_ideal(self, k: int, rng: random.Random, terms: int = 3) -> DifferentialForm:
        return self._random(k, rng, terms, ideal=True)

    def _random(self, k, rng, terms, ideal) -> DifferentialForm:
        pieces = [self.piece(k, w) for w in self._weights()]
        pool = [(pc, v) for pc in pieces for v in (pc.ideal if ideal else pc.basic)]
        total = DifferentialForm.zero(self.action.dim, k)
        if not pool:
            return total
        for pc, v in rng.sample(pool, min(terms, len(pool))):
            c = Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4))
            total = total + self.form_of(pc, v).scale(c)
        return total

    def report(self) -> dict:
        return {
            "action": self.action.to_json(),
            "truncation": self.truncation,
            "graded": self.graded,
            "label": "model cohomology at truncation D" if not self.graded else "truncated cohomology",
            "dimensions": [self.dimension(k) for k in range(self.action.dim + 1)],
            "betti": self.betti_numbers(),
            "seed": self.seed,
        }


@lru_cache(maxsize=32)
def complex_for(action: LinearAction, truncation: int = DEFAULT_TRUNCATION, seed: int = 0) -> QuotientComplex:
    return QuotientComplex(action, truncation, seed)


def quotient_basis(action: LinearAction, k: int, truncation: int, seed: int | None = None) -> list[QuotientFormClass]:
    seed = default_seed() if seed is None else seed
    return complex_for(action, truncation, seed).basis(k)


def differential(action: LinearAction, cls: QuotientFormClass) -> QuotientFormClass:
    return QuotientFormClass(exterior_derivative(cls.representative), cls.truncation, cls.degree + 1)


@dataclass
class CohomologyReport:
    truncation: int
    betti: list[int]
    betti_next: list[int]
    stable: bool
    label: str

    def to_json(self) -> dict:
        return {
            "truncation": self.truncation,
            "betti": self.betti,
            "betti_at_truncation_plus_2": self.betti_next,
            "stable": self.stable,
            "label": self.label,
        }


def cohomology(action: LinearAction, truncation: int = DEFAULT_TRUNCATION, seed: int | None = None,
               check_next: bool = True) -> CohomologyReport:
    seed = default_seed() if seed is None else seed
    cx = complex_for(action, truncation, seed)
    b = cx.betti_numbers()
    if check_next:
        b2 = complex_for(action, truncation + 2, seed).betti_numbers()
    else:
        b2 = list(b)
    label = "truncated cohomology" if cx.graded else "model cohomology at truncation D"
    return CohomologyReport(truncation, b, b2, b == b2, label)


# -- restriction to strata -----------------------------------------------------------


@dataclass
class RestrictionData:
    stratum: int
    values: list[tuple[tuple, Fraction]]  # (point, value of the form on a tangent k-tuple)
    contractions: list[tuple[tuple, Fraction]]  # (point, value of i(ξ)form on a tangent (k-1)-tuple)

    @property
    def horizontal(self) -> bool:
        return all(v == 0 for _, v in self.contractions)

    @property
    def vanishes(self) -> bool:
        return all(v == 0 for _, v in self.values)


def restrict_to_stratum(action: LinearAction, cls: QuotientFormClass | DifferentialForm, stratum: StratumDescriptor | int,
                        count: int = 20, seed: int | None = None) -> RestrictionData:
    seed = default_seed() if seed is None else seed
    form = cls.representative if isinstance(cls, QuotientFormClass) else cls
    sampler = sampler_for(action, seed)
    sid = stratum if isinstance(stratum, int) else stratum.id
    samples = sampler.samples(sid, count)
    values, contractions = evaluate_on_samples(action, [form], samples)
    return RestrictionData(sid, values[0], contractions[0])


def evaluate_on_samples(action, forms: Sequence[DifferentialForm], samples: Sequence[StratumSample]):
    """Batched evaluation of forms (and their contractions with ``ξ_M``) on stratum tangents."""
    dim = action.dim
    by_degree: dict[int, list[int]] = {}
    for i, f in enumerate(forms):
        by_degree.setdefault(f.degree, []).append(i)
    values = [[] for _ in forms]
    contractions = [[] for _ in forms]
    for k, idxs in by_degree.items():
        group = [forms[i] for i in idxs]
        ix = linalg.FormIndexer()
        vecs = ix.vectors(group)
        keys = list(ix.keys)
        if not keys:
            continue
        cand = linalg.to_flint([[v[i] if i < len(v) else 0 for v in vecs] for i in range(len(keys))], len(group))
        for contract, sink in ((False, values), (True, contractions)):
            pairs = list(_sample_evaluations(action, samples, k, contract))
            if not pairs:
                continue
            rows = [_functional(p, vv, keys, dim) for p, vv in pairs]
            res = _mat_rows(linalg.to_flint(rows, len(keys)) * cand)
            for r, (p, _) in enumerate(pairs):
                for j, fi in enumerate(idxs):
                    sink[fi].append((tuple(p), res[r][j]))
    return values, contractions


@dataclass
class RestrictionLemmaReport:
    action: str
    basic_forms: int
    ideal_forms: int
    points_per_stratum: int
    lower_strata: list[int]
    contraction_failures: list[dict]
    ideal_failures: list[dict]
    evaluations: int

    @property
    def passed(self) -> bool:
        return not self.contraction_failures and not self.ideal_failures

    def to_json(self) -> dict:
        return {
            "action": self.action,
            "basic_forms": self.basic_forms,
            "ideal_forms": self.ideal_forms,
            "points_per_stratum": self.points_per_stratum,
            "lower_strata": self.lower_strata,
            "evaluations": self.evaluations,
            "contraction_failures": self.contraction_failures[:5],
            "ideal_failures": self.ideal_failures[:5],
            "passed": self.passed,
        }


def verify_restriction_lemma(action: LinearAction, forms: int = 500, points: int = 100, truncation: int = 4,
                             seed: int | None = None) -> RestrictionLemmaReport:
    """Φ-basic forms stay horizontal, and ideal elements vanish, on every lower stratum.

    Forms are random combinations from the truncated complex; the check is
    exact evaluation at rational sample points of each lower stratum.
    """
    seed = default_seed() if seed is None else seed
    cx = complex_for(action, truncation, seed)
    rng = random.Random(f"restrict:{seed}:{action.name}")
    degrees = list(range(action.dim + 1))
    basic = [cx.random_basic(rng.choice(degrees), rng) for _ in range(forms)]
    ideal = [cx.random_ideal(rng.choice(degrees), rng) for _ in range(forms)]
    basic = [b for b in basic if b]
    ideal = [f for f in ideal if f]
    sampler = sampler_for(action, seed)
    lower = sampler.stratification.lower()
    bad_c, bad_i = [], []
    count = 0
    for stratum in lower:
        samples = sampler.samples(stratum.id, points)
        _, contractions = evaluate_on_samples(action, basic, samples)
        values, _ = evaluate_on_samples(action, ideal, samples)
        for f, vals in zip(basic, contractions):
            count += len(vals)
            for p, v in vals:
                if v:
                    bad_c.append({"stratum": stratum.id, "form": f.format(action.space.coordinate_names()),
                                  "point": [str(x) for x in p], "value": str(v)})
                    break
        for f, vals in zip(ideal, values):
            count += len(vals)
            for p, v in vals:
                if v:
                    bad_i.append({"stratum": stratum.id, "form": f.format(action.space.coordinate_names()),
                                  "point": [str(x) for x in p], "value": str(v)})
                    break
    return RestrictionLemmaReport(action.name, len(basic), len(ideal), points, [s.id for s in lower], bad_c, bad_i, count)
