"""Homogeneous bundles, the extension homomorphism, and reduction in stages.

A form on ``E = (G × F)/H`` is represented by an ``H``-basic form on ``G × F``
whose coefficients do not depend on the angles of the torus ``G``; the
angle-independence is exactly ``G``-invariance, so nothing is lost for the
forms that matter here.  Coordinates on ``G × F`` are the angles
``θ_1 … θ_r`` followed by the coordinates of ``F``.

``H`` is either a finite cyclic group ``Z_k`` inside the circle with direction
``η`` (flat connection, ``Θ = 0``) or the circle ``exp(R η)`` inside a rank-two
torus.  A rational projection ``pr: g → h`` with ``pr(η) = 1`` gives the
connection form ``Θ = Σ pr_j dθ_j``, and the extension homomorphism replaces
``dp_i`` by ``dp_i + ζ_i(p) Θ``, ``ζ`` being the generator of ``h`` acting on
``F``.  Equivalently ``e(γ) = γ + Θ ∧ i(ζ) γ``.

The induced Hamiltonian ``G``-space is modelled the same way on
``G × m* × F`` with moment map ``Φ = α + pr*Ψ(p)``.  Angles are weightless,
``α`` has weight 2 (matching the quadratic ``Ψ``) and ``p`` weight 1, which
makes ``d`` and the restriction ``f*`` weight-preserving.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import linalg
from .actions import (
    LinearAction,
    act,
    induced_vector_field,
    is_invariant,
    moment_map,
    torus_action,
)
from .forms import (
    DifferentialForm,
    PolyMap,
    PolyVectorField,
    exterior_derivative,
    interior_product,
    lie_derivative,
    pull_with,
    pullback,
    wedge,
)
from .poly import Poly, monomials
from .quotient import (
    QuotientComplex,
    ResourceCapExceeded,
    _functional,
    default_seed,
    invariant_forms,
    sampler_for,
)

log = logging.getLogger(__name__)


class BundleError(ValueError):
    pass


# -- bundle data ------------------------------------------------------------------------


@dataclass(frozen=True)
class BundleSpec:
    """``G = T^r``, ``H ⊂ G`` (cyclic or circle), an ``H``-module ``F`` and a projection ``g → h``."""

    rank: int
    h_kind: str  # "cyclic" or "circle"
    eta: tuple[int, ...]  # direction of H in the Lie algebra of G
    fibre: LinearAction  # the H-action on F
    projection: tuple[Fraction, ...]  # zero for a finite H
    order: int = 0  # |H| for the cyclic case

    def __post_init__(self):
        if self.rank < 1 or self.rank > 2:
            raise BundleError("G must be a torus of rank 1 or 2")
        if len(self.eta) != self.rank or len(self.projection) != self.rank:
            raise BundleError("eta and the projection need one entry per circle factor of G")
        object.__setattr__(self, "projection", tuple(Fraction(x) for x in self.projection))
        if self.h_kind not in ("circle", "cyclic"):
            raise BundleError(f"unknown subgroup kind {self.h_kind!r}")
        if self.h_kind == "cyclic" and self.order <= 0:
            raise BundleError("a cyclic subgroup needs a positive order")
        if self.fibre.dim == 0:
            if self.h_kind == "circle" and sum(p * e for p, e in zip(self.projection, self.eta)) != 1:
                raise BundleError("the projection must restrict to the identity on h")
            if self.h_kind == "cyclic" and any(self.projection):
                raise BundleError("h = 0 for a finite subgroup, so the projection must vanish")
            return
        if self.h_kind == "circle":
            if not self.fibre.is_torus or self.fibre.group.rank != 1:
                raise BundleError("a circle subgroup needs a circle action on the fibre")
            if sum(p * e for p, e in zip(self.projection, self.eta)) != 1:
                raise BundleError("the projection must restrict to the identity on h")
        elif self.h_kind == "cyclic":
            if self.fibre.is_torus:
                raise BundleError("a cyclic subgroup needs a finite group action on the fibre")
            if any(self.projection):
                raise BundleError("h = 0 for a finite subgroup, so the projection must vanish")
            if self.order % self.fibre.group.order:
                raise BundleError("the fibre group order must divide |H|")

    @property
    def fibre_dim(self) -> int:
        return self.fibre.dim

    @property
    def dim(self) -> int:
        return self.rank + self.fibre.dim

    def coordinate_names(self) -> list[str]:
        return [f"th{j + 1}" for j in range(self.rank)] + self.fibre.space.coordinate_names()

    def with_projection(self, projection: Sequence) -> "BundleSpec":
        return BundleSpec(self.rank, self.h_kind, self.eta, self.fibre, tuple(Fraction(x) for x in projection), self.order)

    def with_fibre(self, fibre: LinearAction) -> "BundleSpec":
        return BundleSpec(self.rank, self.h_kind, self.eta, fibre, self.projection, self.order)

    def to_json(self) -> dict:
        return {
            "G_rank": self.rank,
            "H": self.h_kind,
            "eta": list(self.eta),
            "order": self.order,
            "projection": [str(x) for x in self.projection],
            "fibre": self.fibre.to_json(),
        }


def cyclic_bundle(k: int, fibre: LinearAction | None = None) -> BundleSpec:
    """``G = S¹ ⊃ H = Z_k`` acting on ``F`` (default: ``C`` with the order-``k`` generator)."""
    from .actions import cyclic_action

    fibre = fibre or cyclic_action(k)
    return BundleSpec(1, "cyclic", (1,), fibre, (Fraction(0),), k)


def circle_bundle(weights: Sequence[int] = (1,), projection: Sequence = (1, 0), eta: Sequence[int] = (1, 0)) -> BundleSpec:
    """``G = T² ⊃ H = exp(R η)`` acting on ``C^n`` with the given weights."""
    fibre = torus_action([list(weights)], level=[0], name=f"S1 weights {tuple(weights)}")
    return BundleSpec(2, "circle", tuple(eta), fibre, tuple(Fraction(x) for x in projection))


def point_fibre() -> LinearAction:
    """``F = {0}``; the induced space is then the cotangent bundle of ``G/H``."""
    return torus_action([[]], name="point")


# -- embedding fibre forms ------------------------------------------------------------------


def embed_form(form: DifferentialForm, dim: int, offset: int) -> DifferentialForm:
    """Re-express a form on ``F`` in coordinates ``(…, p)`` with ``p`` starting at ``offset``."""
    positions = list(range(offset, offset + form.dim))
    comps = {}
    for idx, c in form.components.items():
        comps[tuple(offset + i for i in idx)] = c.embed(dim, positions)
    return DifferentialForm(dim, form.degree, comps)


def _fibre_field(spec: BundleSpec, dim: int, offset: int) -> list[Poly]:
    """Components of the generator ``ζ`` of ``h`` acting on ``F``, in ambient coordinates."""
    if spec.h_kind != "circle" or spec.fibre_dim == 0:
        return [Poly.zero(dim)] * spec.fibre_dim
    zeta = induced_vector_field(spec.fibre, [1])
    return [c.embed(dim, list(range(offset, offset + spec.fibre_dim))) for c in zeta.components]


def connection_form(spec: BundleSpec, dim: int | None = None) -> DifferentialForm:
    """``Θ = Σ pr_j dθ_j``."""
    dim = dim or spec.dim
    return DifferentialForm(dim, 1, {(j,): Poly.const(dim, spec.projection[j]) for j in range(spec.rank) if spec.projection[j]})


def h_field(spec: BundleSpec, dim: int | None = None, offset: int | None = None) -> PolyVectorField:
    """Generator of the diagonal ``H``-action ``h·(g, p) = (g h⁻¹, h p)`` (circle case)."""
    dim = dim or spec.dim
    offset = spec.rank if offset is None else offset
    comps = [Poly.zero(dim)] * dim
    for j in range(spec.rank):
        if spec.eta[j]:
            comps[j] = Poly.const(dim, -spec.eta[j])
    for i, c in enumerate(_fibre_field(spec, dim, offset)):
        comps[offset + i] = c
    return PolyVectorField(comps)


# -- forms on E -----------------------------------------------------------------------------


@dataclass
class BundleForm:
    """A form on ``G × F`` standing for a form on ``E``."""

    spec: BundleSpec
    form: DifferentialForm

    def angle_free(self) -> bool:
        return all(not c.depends_on(j) for c in self.form.components.values() for j in range(self.spec.rank))

    def h_invariant(self) -> bool:
        if not self.angle_free():
            return False
        if self.spec.h_kind == "circle":
            return not lie_derivative(h_field(self.spec), self.form)
        r, m = self.spec.rank, self.spec.fibre_dim
        if m == 0:
            return True
        for g in self.spec.fibre.group.generators:
            block = [[Fraction(int(i == j)) for j in range(r + m)] for i in range(r)]
            block += [[Fraction(0)] * r + list(g[i]) for i in range(m)]
            if act(block, self.form) != self.form:
                return False
        return True

    def h_horizontal(self) -> bool:
        if self.spec.h_kind != "circle":
            return True
        return not interior_product(h_field(self.spec), self.form)

    def descends(self) -> bool:
        """``H``-basic on ``G × F``: a genuine form on ``E``."""
        return self.h_invariant() and self.h_horizontal()

    def g_basic(self) -> bool:
        if not self.descends():
            return False
        dim = self.spec.dim
        return all(not interior_product(PolyVectorField.coordinate(dim, j), self.form) for j in range(self.spec.rank))

    def format(self) -> str:
        return self.form.format(self.spec.coordinate_names())

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(), "form": self.form.to_json()}


def extension(spec: BundleSpec, gamma: DifferentialForm) -> BundleForm:
    """``e(γ)``: substitute ``dp_i ↦ dp_i + ζ_i(p) Θ`` in an ``H``-invariant form on ``F``."""
    if gamma.dim != spec.fibre_dim:
        raise BundleError(f"form lives in dimension {gamma.dim}, fibre has dimension {spec.fibre_dim}")
    if spec.fibre_dim and not is_invariant(spec.fibre, gamma):
        raise BundleError("the extension homomorphism is defined on H-invariant forms")
    dim, r = spec.dim, spec.rank
    if spec.fibre_dim == 0:
        return BundleForm(spec, DifferentialForm.constant(dim, gamma.coefficient(()).constant_term()))
    coeff_map = PolyMap([Poly.var(dim, r + i) for i in range(spec.fibre_dim)], source_dim=dim)
    theta = connection_form(spec)
    zeta = _fibre_field(spec, dim, r)
    one_forms = []
    for i in range(spec.fibre_dim):
        dp = DifferentialForm.dx(dim, r + i)
        if zeta[i] and theta:
            dp = dp + wedge(DifferentialForm.function(zeta[i]), theta)
        one_forms.append(dp)
    return BundleForm(spec, pull_with(gamma, coeff_map, one_forms))


def extension_closed_form(spec: BundleSpec, gamma: DifferentialForm) -> DifferentialForm:
    """The same map written as ``γ + Θ ∧ i(ζ) γ`` (an independent expansion)."""
    dim, r = spec.dim, spec.rank
    g = embed_form(gamma, dim, r)
    if spec.h_kind != "circle" or gamma.degree == 0:
        return g
    zeta = PolyVectorField([Poly.zero(dim)] * r + _fibre_field(spec, dim, r))
    extra = wedge(connection_form(spec), interior_product(zeta, g))
    return g + extra if extra else g


def restrict_to_fibre(spec: BundleSpec, beta: BundleForm | DifferentialForm) -> DifferentialForm:
    """``f*β`` along ``f(p) = [1, p]``: angles and their differentials set to zero."""
    form = beta.form if isinstance(beta, BundleForm) else beta
    m, r = spec.fibre_dim, spec.rank
    if m == 0:
        if form.degree:
            return DifferentialForm.zero(0, form.degree)
        return DifferentialForm.constant(0, form.coefficient(()).evaluate([0] * form.dim))
    f = PolyMap([Poly.zero(m)] * r + [Poly.var(m, i) for i in range(m)], source_dim=m)
    return pullback(f, form)


def extension_formula_value(spec: BundleSpec, gamma: DifferentialForm, point: Sequence, vectors: Sequence[Sequence]) -> Fraction:
    """``γ_p(θ_E v_1, …, θ_E v_k)`` from the defining formula, with ``θ_E(a, w) = w + pr(a) ζ(p)``."""
    from .forms import evaluate

    r = spec.rank
    p = [Fraction(x) for x in point[r:]]
    if spec.h_kind == "circle" and spec.fibre_dim:
        zeta = [c.evaluate(p) for c in induced_vector_field(spec.fibre, [1]).components]
    else:
        zeta = [Fraction(0)] * spec.fibre_dim
    projected = []
    for v in vectors:
        a, w = v[:r], v[r:]
        s = sum((Fraction(pj) * Fraction(aj) for pj, aj in zip(spec.projection, a)), Fraction(0))
        projected.append([Fraction(wi) + s * zi for wi, zi in zip(w, zeta)])
    return evaluate(gamma, p, projected)


# -- random inputs ------------------------------------------------------------------------------


def _h_basic_basis(fibre: LinearAction, k: int, weight: int, circle: bool) -> list[DifferentialForm]:
    cands = list(invariant_forms(fibre, k, weight))
    if not circle or k == 0 or not cands:
        return cands
    zeta = induced_vector_field(fibre, [1])
    images = [interior_product(zeta, c) for c in cands]
    ix = linalg.FormIndexer()
    vecs = ix.vectors(images)
    n = len(ix)
    if n == 0:
        return cands
    vecs = [v + [Fraction(0)] * (n - len(v)) for v in vecs]
    null = linalg.nullspace([[v[i] for v in vecs] for i in range(n)], len(cands))
    return [linalg.combination(c, cands, fibre.dim, k) for c in null]


def random_invariant_form(fibre: LinearAction, rng: random.Random, max_weight: int = 4, degree: int | None = None,
                          basic: bool = False, circle: bool = False) -> DifferentialForm:
    """Random rational combination of invariant (or ``H``-basic) forms on the fibre."""
    if fibre.dim == 0:
        return DifferentialForm.constant(0, Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
    for _ in range(50):
        k = rng.randint(0, min(fibre.dim, 3)) if degree is None else degree
        w = rng.randint(k, max_weight + k)
        basis = _h_basic_basis(fibre, k, w, circle) if basic else list(invariant_forms(fibre, k, w))
        if not basis:
            continue
        total = DifferentialForm.zero(fibre.dim, k)
        for b in rng.sample(basis, min(3, len(basis))):
            total = total + b.scale(Fraction(rng.randint(-6, 6) or 1, rng.randint(1, 3)))
        if total:
            return total
    return DifferentialForm.constant(fibre.dim, rng.randint(1, 5))


def random_g_basic_form(spec: BundleSpec, rng: random.Random, max_weight: int = 4) -> BundleForm:
    """``G``-basic forms on ``E`` have no ``dθ`` and an ``H``-basic fibre part."""
    gamma = random_invariant_form(spec.fibre, rng, max_weight, basic=True, circle=spec.h_kind == "circle")
    return BundleForm(spec, embed_form(gamma, spec.dim, spec.rank))


# -- extension and functoriality lemmas ----------------------------------------------------------


@dataclass
class LemmaReport:
    name: str
    cases: int
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {"name": self.name, "cases": self.cases, "passed": self.passed, "failures": self.failures[:3]}


def verify_extension_lemma(spec: BundleSpec, cases: int = 200, seed: int = 0) -> list[LemmaReport]:
    """Items (1) ``f*e(γ) = γ``, (2) ``e`` preserves basic forms, (3) ``e(f*β) = β`` on basic ``β``."""
    rng = random.Random(f"extension:{seed}")
    circle = spec.h_kind == "circle"
    item1, item2, item3, formula = (LemmaReport(n, cases) for n in
                                     ("f*e(gamma) = gamma", "e(basic) is basic", "e(f*beta) = beta", "extension formula"))
    for case in range(cases):
        gamma = random_invariant_form(spec.fibre, rng)
        ext = extension(spec, gamma)
        if restrict_to_fibre(spec, ext) != gamma:
            item1.failures.append({"case": case, "gamma": gamma.format()})
        if not ext.descends():
            item1.failures.append({"case": case, "reason": "e(gamma) does not descend to E"})
        if ext.form != extension_closed_form(spec, gamma):
            formula.failures.append({"case": case, "gamma": gamma.format()})
        # pointwise comparison with the defining formula
        point = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(spec.dim)]
        vecs = [[Fraction(rng.randint(-4, 4)) for _ in range(spec.dim)] for _ in range(gamma.degree)]
        from .forms import evaluate

        if evaluate(ext.form, point, vecs) != extension_formula_value(spec, gamma, point, vecs):
            formula.failures.append({"case": case, "point": [str(x) for x in point]})

        basic = random_invariant_form(spec.fibre, rng, basic=True, circle=circle)
        if not BundleForm(spec, extension(spec, basic).form).g_basic():
            item2.failures.append({"case": case, "gamma": basic.format()})

        beta = random_g_basic_form(spec, rng)
        if not beta.g_basic():
            item3.failures.append({"case": case, "reason": "generated beta is not G-basic"})
        elif extension(spec, restrict_to_fibre(spec, beta)).form != beta.form:
            item3.failures.append({"case": case, "beta": beta.format()})
    return [item1, item2, item3, formula]


def extension_negative_test(spec: BundleSpec) -> dict:
    """``e∘f* ≠ id`` on the invariant, non-basic form ``dθ_1``."""
    beta = BundleForm(spec, DifferentialForm.dx(spec.dim, 0))
    back = extension(spec, restrict_to_fibre(spec, beta)).form
    return {
        "form": beta.format(),
        "g_basic": beta.g_basic(),
        "e_f_star": back.format(),
        "differs": back != beta.form,
    }


def verify_functoriality(spec: BundleSpec, spec2: BundleSpec, j: PolyMap, cases: int = 100, seed: int = 0) -> LemmaReport:
    """``e∘j* = ȷ̄*∘e'`` for an ``H``-equivariant polynomial map ``j: F → F'``."""
    if (spec.rank, spec.h_kind, spec.eta, spec.projection, spec.order) != (
            spec2.rank, spec2.h_kind, spec2.eta, spec2.projection, spec2.order):
        raise BundleError("functoriality needs the same G, H and projection on both bundles")
    if j.source_dim != spec.fibre_dim or j.target_dim != spec2.fibre_dim:
        raise BundleError("j must map F to F'")
    _check_h_equivariant(spec, spec2, j)
    rng = random.Random(f"functor:{seed}")
    report = LemmaReport("e o j* = jbar* o e'", cases)
    r = spec.rank
    dim = spec.dim
    jbar = PolyMap([Poly.var(dim, i) for i in range(r)]
                   + [c.embed(dim, list(range(r, dim))) for c in j.components], source_dim=dim)
    for case in range(cases):
        gamma = random_invariant_form(spec2.fibre, rng)
        lhs = extension(spec, pullback(j, gamma)).form
        rhs = pullback(jbar, extension(spec2, gamma).form)
        if lhs != rhs:
            report.failures.append({"case": case, "gamma": gamma.format()})
    return report


def _check_h_equivariant(spec: BundleSpec, spec2: BundleSpec, j: PolyMap) -> None:
    if spec.h_kind == "circle":
        z1 = induced_vector_field(spec.fibre, [1])
        z2 = induced_vector_field(spec2.fibre, [1])
        for i, c in enumerate(j.components):
            lhs = sum((c.diff(t) * z1.components[t] for t in range(j.source_dim) if z1.components[t]), Poly.zero(j.source_dim))
            if lhs != z2.components[i].compose(list(j.components)):
                raise BundleError("j is not H-equivariant")
    else:
        for g1, g2 in zip(spec.fibre.group.generators, spec2.fibre.group.generators):
            if j.compose(PolyMap.linear(g1)) != PolyMap.linear(g2).compose(j):
                raise BundleError("j is not H-equivariant")


def connection_independence(spec: BundleSpec, projections: Sequence[Sequence], cases: int = 50, seed: int = 0) -> dict:
    """Lemma verdicts under several projections ``g → h``: ``e`` changes, the verdicts do not."""
    verdicts = {}
    for pr in projections:
        variant = spec.with_projection(pr)
        verdicts[",".join(str(Fraction(x)) for x in pr)] = all(r.passed for r in verify_extension_lemma(variant, cases, seed))
    return {"verdicts": verdicts, "independent": len(set(verdicts.values())) <= 1 and all(verdicts.values())}


def appendix_report(cases: int = 200, seed: int = 0) -> dict:
    """Extension and functoriality lemmas on the flat (``Z_3 ⊂ S¹``) and curved (``S¹ ⊂ T²``) bundles."""
    flat = cyclic_bundle(3)
    curved = circle_bundle((1,))
    out: dict = {"bundles": {}}
    for label, spec in (("Z3 in S1, F = C", flat), ("S1 in T2, F = C weight 1", curved)):
        reports = verify_extension_lemma(spec, cases, seed)
        out["bundles"][label] = {
            "spec": spec.to_json(),
            "extension_lemma": [r.to_json() for r in reports],
            "negative_test": extension_negative_test(spec),
        }
    wide = circle_bundle((1, 0))
    fixed = curved.with_fibre(torus_action([[0]], level=[0], name="fixed plane"))
    functor = [
        verify_functoriality(flat, flat, PolyMap.identity(2), cases // 2, seed),
        verify_functoriality(flat, flat, PolyMap.linear([[0, -1], [1, -1]]), cases // 2, seed),
        verify_functoriality(curved, wide, PolyMap.linear([[1, 0], [0, 1], [0, 0], [0, 0]]), cases // 2, seed),
        verify_functoriality(fixed, wide, PolyMap.linear([[0, 0], [0, 0], [1, 0], [0, 1]]), cases // 2, seed),
    ]
    names = ["identity", "Z3 generator", "equivariant inclusion", "fixed-subspace inclusion"]
    out["functoriality"] = {n: r.to_json() for n, r in zip(names, functor)}
    out["connection_independence"] = connection_independence(curved, [(1, 0), (1, 5), (1, Fraction(-1, 2))], cases // 4, seed)
    out["passed"] = (
        all(all(r["passed"] for r in b["extension_lemma"]) and b["negative_test"]["differs"] for b in out["bundles"].values())
        and all(r.passed for r in functor)
        and out["connection_independence"]["independent"]
    )
    return out


# -- induced Hamiltonian spaces -------------------------------------------------------------------


@dataclass
class InducedModel:
    """``M ≅ (G × m* × N)/H`` with ``Φ = α + pr*Ψ``; coordinates ``(θ, α, p)``."""

    spec: BundleSpec
    annihilator: list[list[int]]  # basis of m* = {λ ∈ g* : λ(η) = 0}
    moment: list[Poly]

    @property
    def r(self) -> int:
        return self.spec.rank

    @property
    def s(self) -> int:
        return len(self.annihilator)

    @property
    def m(self) -> int:
        return self.spec.fibre_dim

    @property
    def dim(self) -> int:
        return self.r + self.s + self.m

    @property
    def weights(self) -> list[int]:
        return [0] * self.r + [2] * self.s + [1] * self.m

    def coordinate_names(self) -> list[str]:
        return ([f"th{j + 1}" for j in range(self.r)] + [f"a{j + 1}" for j in range(self.s)]
                + self.spec.fibre.space.coordinate_names())

    def zero_fibre_description(self) -> str:
        return "Z = (G x Z_N)/H: alpha = 0 and Psi(p) = 0"

    def to_json(self) -> dict:
        names = self.coordinate_names()
        return {
            "spec": self.spec.to_json(),
            "coordinates": names,
            "m_star_basis": self.annihilator,
            "moment_map": [c.format(names) for c in self.moment],
            "zero_fibre": self.zero_fibre_description(),
        }


def induced_space(spec: BundleSpec) -> InducedModel:
    r = spec.rank
    if spec.h_kind == "circle":
        eta = list(spec.eta)
        # integer basis of η^⊥ (rank two: a single vector)
        # m is the kernel of the projection; its dual sits in g* as the annihilator of h = R η
        ann = [[-eta[1], eta[0]]] if r == 2 else []
        if r == 2 and eta[0] == 0 and eta[1] == 0:
            raise BundleError("eta must be nonzero")
    else:
        ann = [[int(i == j) for j in range(r)] for i in range(r)]
    s = len(ann)
    m = spec.fibre_dim
    dim = r + s + m
    psi = Poly.zero(dim)
    if spec.h_kind == "circle" and m:
        psi = moment_map(spec.fibre).components[0].embed(dim, list(range(r + s, dim)))
    moment = []
    for jj in range(r):
        comp = Poly.zero(dim)
        for a in range(s):
            if ann[a][jj]:
                comp = comp + Poly.var(dim, r + a) * ann[a][jj]
        if spec.projection[jj]:
            comp = comp + psi * spec.projection[jj]
        moment.append(comp)
    return InducedModel(spec, ann, moment)


# -- reduction in stages -----------------------------------------------------------------------------


def _model_candidates(model: InducedModel, k: int, w: int) -> list[DifferentialForm]:
    """``G``-invariant forms on the model of degree ``k`` and weight ``w`` that descend along ``H``."""
    r, s, m, dim = model.r, model.s, model.m, model.dim
    spec = model.spec
    out = []
    for kt in range(0, min(k, r) + 1):
        for ka in range(0, min(k - kt, s) + 1):
            kp = k - kt - ka
            if kp > m:
                continue
            for wa in range(2 * ka, w + 1, 2):
                wp = w - wa
                if wp < kp:
                    continue
                fibre_forms = invariant_forms(spec.fibre, kp, wp) if m else (
                    [DifferentialForm.constant(0, 1)] if (kp == 0 and wp == 0) else [])
                if not fibre_forms:
                    continue
                alpha_deg = (wa - 2 * ka) // 2
                for th in combinations(range(r), kt):
                    for ai in combinations(range(s), ka):
                        for e in (monomials(s, alpha_deg) if s else [()] if alpha_deg == 0 else []):
                            base_exp = [0] * dim
                            for a, ea in enumerate(e):
                                base_exp[r + a] = ea
                            idx = tuple(th) + tuple(r + a for a in ai)
                            base = DifferentialForm(dim, kt + ka, {idx: Poly.monomial(base_exp)})
                            for ff in fibre_forms:
                                g = embed_form(ff, dim, r + s) if m else DifferentialForm.constant(dim, ff.coefficient(()).constant_term())
                                prod = wedge(base, g)
                                if prod:
                                    out.append(prod)
    if spec.h_kind == "circle" and out and k > 0:
        fld = h_field(spec, dim, r + s)
        images = [interior_product(fld, f) for f in out]
        ix = linalg.FormIndexer()
        vecs = ix.vectors(images)
        n = len(ix)
        if n:
            vecs = [v + [Fraction(0)] * (n - len(v)) for v in vecs]
            null = linalg.nullspace([[v[i] for v in vecs] for i in range(n)], len(out))
            out = [linalg.combination(c, out, dim, k) for c in null]
    return out


def _model_conditions(model: InducedModel, forms: Sequence[DifferentialForm], k: int, contract: bool,
                      seed: int) -> list[list[Fraction]]:
    """Kernel of the sampled restriction (or ``∂θ``-contraction) conditions on ``Z_prin``."""
    mcount = len(forms)
    if mcount == 0:
        return []
    if contract and k == 0:
        return linalg.nullspace([], mcount)
    r, s, dim = model.r, model.s, model.dim
    sampler = sampler_for(model.spec.fibre, seed) if model.m else None
    ix = linalg.FormIndexer()
    vecs = ix.vectors(list(forms))
    keys = list(ix.keys)
    if not keys:
        return linalg.nullspace([], mcount)
    vecs = [v + [Fraction(0)] * (len(keys) - len(v)) for v in vecs]
    cand = linalg.to_flint([[v[i] for v in vecs] for i in range(len(keys))], mcount)
    angle_dirs = [[Fraction(int(i == j)) for i in range(dim)] for j in range(r)]
    count = 8
    prev = -1
    while True:
        rows = []
        samples = sampler.principal_samples(count) if sampler else [None]
        for smp in samples:
            if smp is None:
                point = [Fraction(0)] * dim
                tangents = []
            else:
                point = [Fraction(0)] * (r + s) + list(smp.point)
                tangents = [[Fraction(0)] * (r + s) + list(t) for t in smp.tangent_basis]
            tangent_all = angle_dirs + tangents
            if contract:
                for j in range(r):
                    for combo in combinations(tangent_all, k - 1):
                        rows.append(_functional(point, [angle_dirs[j]] + list(combo), keys, dim))
            else:
                for combo in combinations(tangent_all, k):
                    rows.append(_functional(point, list(combo), keys, dim))
        if not rows:
            return linalg.nullspace([], mcount)
        cond = linalg.to_flint(rows, len(keys)) * cand
        rk = cond.rank()
        if rk == prev or rk == mcount or sampler is None:
            return linalg.nullspace_of(cond)
        prev = rk
        count *= 2
        if count > 2000:
            raise ResourceCapExceeded("sample cap reached while solving conditions on the induced model")


@dataclass
class StagesSlice:
    k: int
    w: int
    dim_X: int
    dim_Y: int
    rank_r: int
    chain_map: bool

    @property
    def bijective(self) -> bool:
        return self.rank_r == self.dim_X == self.dim_Y


@dataclass
class StagesReport:
    truncation: int
    slices: list[StagesSlice]
    label: str = "evidence at truncation D (polynomial model), not a proof"

    @property
    def bijective(self) -> bool:
        return all(s.bijective for s in self.slices)

    @property
    def chain_map(self) -> bool:
        return all(s.chain_map for s in self.slices)

    @property
    def passed(self) -> bool:
        return self.bijective and self.chain_map

    def dims(self) -> tuple[list[int], list[int]]:
        kmax = max((s.k for s in self.slices), default=0)
        x = [0] * (kmax + 1)
        y = [0] * (kmax + 1)
        for s in self.slices:
            x[s.k] += s.dim_X
            y[s.k] += s.dim_Y
        return x, y

    def to_json(self) -> dict:
        x, y = self.dims()
        return {
            "truncation": self.truncation,
            "dims_X_by_degree": x,
            "dims_Y_by_degree": y,
            "bijective": self.bijective,
            "chain_map": self.chain_map,
            "passed": self.passed,
            "label": self.label,
            "non_bijective_slices": [s.__dict__ for s in self.slices if not s.bijective][:5],
        }


def verify_reduction_in_stages(model: InducedModel, truncation: int = 6, seed: int | None = None,
                               candidate_cap: int = 4000) -> StagesReport:
    """Rank check that ``r = f*: Ω(X) → Ω(Y)`` is a bijective chain map at each degree and weight."""
    seed = default_seed() if seed is None else seed
    spec = model.spec
    r, s, m, dim = model.r, model.s, model.m, model.dim
    if m:
        restriction = PolyMap([Poly.zero(m)] * (r + s) + [Poly.var(m, i) for i in range(m)], source_dim=m)
        cx_y = QuotientComplex(spec.fibre, truncation, seed)
    else:
        restriction = None
        cx_y = None
    slices = []
    for w in range(truncation + 1):
        for k in range(0, dim + 1):
            cands = _model_candidates(model, k, w)
            if len(cands) > candidate_cap:
                raise ResourceCapExceeded(f"{len(cands)} model candidates in degree {k}, weight {w}")
            basic = _model_conditions(model, cands, k, True, seed)
            basic_forms = [linalg.combination(c, cands, dim, k) for c in basic]
            ideal_in_basic = _model_conditions(model, basic_forms, k, False, seed)
            dim_x = len(basic) - len(ideal_in_basic)
            if m:
                pc = cx_y.piece(k, w) if k <= m else None
                dim_y = (len(pc.basic) - len(pc.ideal)) if pc else 0
            else:
                pc = None
                dim_y = 1 if (k == 0 and w == 0) else 0
            if dim_x == 0 and dim_y == 0 and not basic_forms:
                continue
            images = []
            chain_ok = True
            for b in basic_forms:
                if m:
                    img = pullback(restriction, b)
                    if k < dim:
                        db = exterior_derivative(b)
                        lhs = pullback(restriction, db) if db else None
                        rhs = exterior_derivative(img) if (img and k < m) else None
                        if (lhs or None) != (rhs or None) and not (not lhs and not rhs):
                            chain_ok = False
                    if img and pc is None:
                        raise BundleError("restriction landed outside the fibre complex")
                    coords = cx_y._slice_coordinates(pc, img) if (img and pc) else ([Fraction(0)] * len(pc.candidates) if pc else [])
                    if coords is None:
                        raise BundleError("restriction is not an invariant form of the expected weight")
                    images.append(coords)
                else:
                    images.append([b.coefficient(()).constant_term()] if k == 0 else [])
            if m and pc is not None:
                ncols = len(pc.candidates)
                base = linalg.rank(pc.ideal, ncols) if pc.ideal else 0
                rank_r = (linalg.rank(images + pc.ideal, ncols) if (images or pc.ideal) else 0) - base
            else:
                # no fibre: Y is a point
                rank_r = linalg.rank(images, 1) if images and any(any(v) for v in images) else 0
            slices.append(StagesSlice(k, w, dim_x, dim_y, rank_r, chain_ok))
    return StagesReport(truncation, slices)
