"""Allowable maps and homotopies, the homotopy operator ``κ_F`` and the Poincaré lemma.

A homotopy is a polynomial map ``F(v, t)`` whose last source coordinate is the
parameter ``t``.  Because ``F`` is polynomial in ``t``, the operator

    κ_F γ = ∫₀¹ i(∂/∂t) F*γ dt

is computed exactly: pull back, contract with ``∂/∂t`` and integrate every
coefficient over the unit interval.

"Almost all t" in the allowability conditions is realised as "all t outside a
finite exceptional set", where the exceptional set is computed symbolically per
sample (rational roots of univariate polynomials in ``t``).  Jump values shared
by every sample form the exceptional set; jumps whose location moves with the
sample point sweep out a continuum of ``t`` and are judged on their merits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import sympy

from . import linalg
from .actions import (
    LinearAction,
    act,
    average,
    basis_vector_fields,
    zero_fibre_quadrics,
)
from .forms import (
    DifferentialForm,
    PolyMap,
    PolyVectorField,
    exterior_derivative,
    interior_product,
    pullback,
)
from .poly import Poly
from .quotient import (
    QuotientComplex,
    complex_for,
    default_seed,
    is_phi_basic,
    in_ideal,
    required_samples,
    sampler_for,
)
from .stratification import (
    on_fibre,
    orbit_type,
    tangent_basis,
)

log = logging.getLogger(__name__)

DEFAULT_GRID = tuple(Fraction(k, 8) for k in range(9))


# -- homotopies -----------------------------------------------------------------------


@dataclass(frozen=True)
class Homotopy:
    """``F: M × [0,1] → M'`` with ``t`` the last source coordinate."""

    F: PolyMap
    source: LinearAction
    target: LinearAction
    name: str = ""

    def __post_init__(self):
        if self.F.source_dim != self.source.dim + 1:
            raise ValueError(f"F must have {self.source.dim + 1} source coordinates (the last one is t)")
        if self.F.target_dim != self.target.dim:
            raise ValueError(f"F must land in dimension {self.target.dim}")

    @property
    def t_index(self) -> int:
        return self.source.dim

    def at(self, t) -> PolyMap:
        """The map ``F_t``."""
        n = self.source.dim
        subs = [Poly.var(n, i) for i in range(n)] + [Poly.const(n, Fraction(t))]
        return PolyMap([c.compose(subs) for c in self.F.components], source_dim=n)

    def velocity(self) -> PolyMap:
        """``∂F/∂t`` as a polynomial map of ``(v, t)``."""
        return PolyMap([c.diff(self.t_index) for c in self.F.components], source_dim=self.F.source_dim)

    def along(self, point: Sequence) -> list[Poly]:
        """Components of ``t ↦ F(point, t)`` as univariate polynomials."""
        subs = [Poly.const(1, Fraction(x)) for x in point] + [Poly.var(1, 0)]
        return [c.compose(subs) for c in self.F.components]


def radial_contraction(action: LinearAction) -> Homotopy:
    """``F(v, t) = t v``."""
    n = action.dim
    t = Poly.var(n + 1, n)
    return Homotopy(PolyMap([Poly.var(n + 1, i) * t for i in range(n)]), action, action, "radial contraction")


def constant_homotopy(action: LinearAction) -> Homotopy:
    """``F(v, t) = v``."""
    n = action.dim
    return Homotopy(PolyMap([Poly.var(n + 1, i) for i in range(n)]), action, action, "constant homotopy")


def dilation(action: LinearAction, t) -> PolyMap:
    """The linear map ``v ↦ t v``."""
    n = action.dim
    t = Fraction(t)
    return PolyMap.linear([[t if i == j else 0 for j in range(n)] for i in range(n)])


def _drop_last(p: Poly) -> Poly:
    return Poly._raw(p.nvars - 1, {e[:-1]: c for e, c in p.terms.items()})


def kappa(F: Homotopy, gamma: DifferentialForm) -> DifferentialForm:
    """``κ_F γ = ∫₀¹ i(∂/∂t) F*γ dt``; degree drops by one (a 0-form maps to 0)."""
    n = F.source.dim
    if gamma.dim != F.target.dim:
        raise ValueError(f"form lives in dimension {gamma.dim}, homotopy lands in {F.target.dim}")
    if gamma.degree == 0 or not gamma:
        return DifferentialForm.zero(n, max(gamma.degree - 1, 0))
    pulled = pullback(F.F, gamma)
    contracted = interior_product(PolyVectorField.coordinate(n + 1, n), pulled)
    out = {}
    for idx, c in contracted.components.items():
        if n in idx:  # impossible after contraction with ∂/∂t; kept as a guard
            raise AssertionError("dt survived the contraction")
        integrated = _drop_last(c.integrate_unit_interval(n))
        if integrated:
            out[idx] = integrated
    return DifferentialForm._raw(n, gamma.degree - 1, out)


def _forms_equal(a: DifferentialForm, b: DifferentialForm) -> bool:
    if not a and not b:
        return True
    if not a or not b:
        return False
    return a == b


def _sum(*forms: DifferentialForm) -> DifferentialForm:
    nonzero = [f for f in forms if f]
    if not nonzero:
        return forms[0]
    total = nonzero[0]
    for f in nonzero[1:]:
        total = total + f
    return total


@dataclass
class IdentityCheck:
    """Outcome of an exact identity check; ``residual`` is ``lhs − rhs``."""

    passed: bool
    name: str
    residual: DifferentialForm | None = None

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {
            "identity": self.name,
            "passed": self.passed,
            "residual": None if self.residual is None or not self.residual else self.residual.to_json(),
        }


def chain_homotopy_check(F: Homotopy, gamma: DifferentialForm) -> IdentityCheck:
    """``F₁*γ − F₀*γ = κ dγ + d κ γ`` as an exact identity."""
    lhs = pullback(F.at(1), gamma) - pullback(F.at(0), gamma)
    k_d = kappa(F, exterior_derivative(gamma)) if gamma.degree < F.target.dim else DifferentialForm.zero(F.source.dim, gamma.degree)
    d_k = exterior_derivative(kappa(F, gamma)) if gamma.degree > 0 else DifferentialForm.zero(F.source.dim, 0)
    rhs = _sum(k_d, d_k)
    passed = _forms_equal(lhs, rhs)
    residual = None if passed else (lhs - rhs if lhs.degree == rhs.degree else lhs)
    return IdentityCheck(passed, "F1* - F0* = kappa d + d kappa", residual)


def equivariance_identities_check(F: Homotopy, gamma: DifferentialForm) -> list[IdentityCheck]:
    """``κ∘g* = g*∘κ`` for the group generators and ``κ∘i(ξ_{M'}) = −i(ξ_M)∘κ`` for a torus basis."""
    out = []
    src, dst = F.source, F.target
    if src.is_torus:
        for j, (xs, xt) in enumerate(zip(basis_vector_fields(src), basis_vector_fields(dst))):
            lhs = kappa(F, interior_product(xt, gamma)) if gamma.degree > 0 else DifferentialForm.zero(src.dim, 0)
            rhs = -interior_product(xs, kappa(F, gamma)) if gamma.degree > 1 else DifferentialForm.zero(src.dim, 0)
            ok = _forms_equal(lhs, rhs)
            out.append(IdentityCheck(ok, f"kappa i(xi_{j}) = -i(xi_{j}) kappa", None if ok else lhs - rhs))
    else:
        for j, (gs, gt) in enumerate(zip(src.group.generators, dst.group.generators)):
            lhs = kappa(F, act(gt, gamma))
            rhs = act(gs, kappa(F, gamma))
            ok = _forms_equal(lhs, rhs)
            out.append(IdentityCheck(ok, f"kappa g{j}* = g{j}* kappa", None if ok else lhs - rhs))
    return out


# -- equivariance of polynomial maps ---------------------------------------------------


def _extend_field(v: PolyVectorField, extra: int) -> list[Poly]:
    n = v.dim
    comps = [c.embed(n + extra, list(range(n))) for c in v.components]
    return comps + [Poly.zero(n + extra)] * extra


def map_equivariance_witness(f: PolyMap, src: LinearAction, dst: LinearAction, extra: int = 0) -> dict | None:
    """``None`` if ``f`` (with ``extra`` trailing parameters) is equivariant, else a witness.

    Finite groups: ``f∘g = g'∘f`` for paired generators.  Tori: the
    infinitesimal identity ``df(ξ_M) = ξ_{M'}∘f`` for a basis of the Lie algebra.
    """
    if src.is_torus != dst.is_torus:
        return {"reason": "source and target groups are of different kinds"}
    n = src.dim
    total = n + extra
    if src.is_torus:
        if src.group.rank != dst.group.rank:
            return {"reason": "torus ranks differ"}
        for j, (xs, xt) in enumerate(zip(basis_vector_fields(src), basis_vector_fields(dst))):
            vs = _extend_field(xs, extra)
            for i, c in enumerate(f.components):
                lhs = sum((c.diff(k) * vs[k] for k in range(total) if vs[k]), Poly.zero(total))
                rhs = xt.components[i].compose(list(f.components))
                if lhs != rhs:
                    return {"generator": j, "component": i, "lhs": lhs.format(), "rhs": rhs.format()}
        return None
    if len(src.group.generators) != len(dst.group.generators):
        return {"reason": "generator lists differ in length"}
    for j, (gs, gt) in enumerate(zip(src.group.generators, dst.group.generators)):
        block = [list(r) + [0] * extra for r in gs] + [[0] * n + [int(a == b) for b in range(extra)] for a in range(extra)]
        inner = PolyMap.linear(block, source_dim=total)
        lhs = f.compose(inner)
        rhs = PolyMap.linear(gt).compose(f)
        if lhs != rhs:
            return {"generator": j}
    return None


# -- allowability ----------------------------------------------------------------------


@dataclass
class AllowabilityReport:
    kind: str  # "map" or "homotopy"
    conditions: dict[str, bool]
    witnesses: dict[str, Any] = field(default_factory=dict)
    evidence: dict[str, Any] = field(default_factory=dict)
    exceptional_t: list[Fraction] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "conditions": dict(self.conditions),
            "witnesses": _jsonable(self.witnesses),
            "evidence": _jsonable(self.evidence),
            "exceptional_t": [str(t) for t in self.exceptional_t],
        }


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _z_samples(action: LinearAction, count: int, seed: int):
    sampler = sampler_for(action, seed)
    strat = sampler.stratification
    out = list(sampler.principal_samples(count))
    for s in strat.lower():
        out.extend(sampler.samples(s, max(2, count // 4)))
    return out


def _image_tangent_witness(f: PolyMap, dst: LinearAction, point, tangents) -> dict | None:
    image = f(point)
    if not on_fibre(dst, image):
        return {"point": list(point), "image": image, "reason": "image is off the target zero fibre"}
    target_tangent = tangent_basis(dst, image)
    for v in tangents:
        pushed = f.push_vector(point, v)
        if not any(pushed):
            continue
        if not target_tangent or not linalg.in_span(pushed, target_tangent, dst.dim):
            return {"point": list(point), "image": image, "vector": list(v), "pushed": pushed,
                    "target_stabilizer": orbit_type(dst, image).label}
    return None


def check_allowable_map(f: PolyMap, src: LinearAction, dst: LinearAction, samples: int | None = None,
                        seed: int | None = None) -> AllowabilityReport:
    """Conditions (1) equivariance, (2) ``f(Z) ⊂ Z'`` and (3) the tangent condition on ``Z_prin``."""
    seed = default_seed() if seed is None else seed
    if f.source_dim != src.dim or f.target_dim != dst.dim:
        raise ValueError("map dimensions do not match the actions")
    conditions, witnesses, evidence = {}, {}, {}

    w = map_equivariance_witness(f, src, dst)
    conditions["1_equivariant"] = w is None
    if w is not None:
        witnesses["1_equivariant"] = w

    strat = sampler_for(src, seed).stratification
    if not strat.strata:
        conditions["2_maps_Z_into_Z'"] = True
        conditions["3_tangent"] = True
        evidence["note"] = "empty zero fibre"
        return AllowabilityReport("map", conditions, witnesses, evidence)

    composed = [q.compose(list(f.components)) for q in zero_fibre_quadrics(dst)]
    deg = max((q.degree() for q in composed), default=0)
    count = samples or required_samples(src, max(deg, 1))
    pts = _z_samples(src, count, seed)
    bad = None
    for s in pts:
        for q in composed:
            val = q.evaluate(s.point)
            if val:
                bad = {"point": list(s.point), "value": val}
                break
        if bad:
            break
    conditions["2_maps_Z_into_Z'"] = bad is None
    evidence["2_samples"] = len(pts)
    if bad:
        witnesses["2_maps_Z_into_Z'"] = bad

    tangent_bad = None
    principal = [s for s in pts if s.stratum == strat.principal.id]
    if bad is None:
        for s in principal:
            tangent_bad = _image_tangent_witness(f, dst, s.point, s.tangent_basis)
            if tangent_bad:
                break
    else:
        tangent_bad = {"reason": "condition (2) failed"}
    conditions["3_tangent"] = tangent_bad is None
    evidence["3_samples"] = len(principal)
    if tangent_bad:
        witnesses["3_tangent"] = tangent_bad
    return AllowabilityReport("map", conditions, witnesses, evidence)


# -- symbolic jump detection -----------------------------------------------------------

_T = sympy.Symbol("t")


def _to_sympy(p: Poly) -> sympy.Poly:
    coeffs = {e[0]: c for e, c in p.terms.items()}
    top = max(coeffs, default=0)
    return sympy.Poly([sympy.Rational(coeffs.get(k, 0).numerator, coeffs.get(k, 0).denominator)
                       for k in range(top, -1, -1)], _T, domain="QQ")


def _common_roots(polys: Sequence[Poly]) -> tuple[list[Fraction], int, bool]:
    """Rational common roots, number of irrational ones, and whether all polys vanish identically."""
    g = None
    for p in polys:
        if not p:
            continue
        sp = _to_sympy(p)
        g = sp if g is None else sympy.gcd(g, sp)
    if g is None:
        return [], 0, True
    if g.degree() <= 0:
        return [], 0, False
    roots = g.ground_roots()
    rational = sorted(Fraction(int(r.p), int(r.q)) for r in roots)
    irrational = g.degree() - sum(roots.values())
    return rational, irrational, False


def _jump_times(F: Homotopy, point) -> tuple[list[Fraction], int]:
    """Values of ``t`` where the stabilizer of ``F(point, t)`` is larger than generically."""
    dst = F.target
    comps = F.along(point)
    times: set[Fraction] = set()
    irrational = 0
    if dst.is_torus:
        for i in range(dst.space.n):
            pair = [comps[2 * i], comps[2 * i + 1]]
            roots, irr, ident = _common_roots(pair)
            if not ident:
                times.update(roots)
                irrational += irr
    else:
        n = dst.dim
        for g in dst.group.elements:
            moved = [sum((comps[j] * (g[i][j] - (1 if i == j else 0)) for j in range(n) if g[i][j] != (1 if i == j else 0)),
                         Poly.zero(1)) for i in range(n)]
            roots, irr, ident = _common_roots(moved)
            if not ident:
                times.update(roots)
                irrational += irr
    return sorted(times), irrational


def check_allowable_homotopy(F: Homotopy, samples: int = 12, grid: Sequence = DEFAULT_GRID,
                             seed: int | None = None) -> AllowabilityReport:
    """Conditions (1′) equivariance, (2′) ``F_t`` allowable off a finite set, (3′) velocity tangency."""
    seed = default_seed() if seed is None else seed
    src, dst = F.source, F.target
    conditions, witnesses, evidence = {}, {}, {}

    w = map_equivariance_witness(F.F, src, dst, extra=1)
    conditions["1'_equivariant"] = w is None
    if w is not None:
        witnesses["1'_equivariant"] = w

    strat = sampler_for(src, seed).stratification
    if not strat.strata:
        conditions["2'_allowable_for_almost_all_t"] = True
        conditions["3'_velocity_tangent"] = True
        return AllowabilityReport("homotopy", conditions, witnesses, {"note": "empty zero fibre"})

    principal = sampler_for(src, seed).principal_samples(samples)
    # symbolic jump detection per sample
    per_sample = []
    irrational = 0
    for s in principal:
        times, irr = _jump_times(F, s.point)
        per_sample.append([t for t in times if 0 <= t <= 1])
        irrational += irr
    shared = set(per_sample[0]) if per_sample else set()
    for ts in per_sample[1:]:
        shared &= set(ts)
    exceptional = sorted(shared)
    moving = sorted({t for ts in per_sample for t in ts} - shared)
    evidence["jump_times_per_sample"] = per_sample
    evidence["irrational_jump_count"] = irrational
    evidence["moving_jumps"] = moving

    velocity = F.velocity()

    # (2′): grid values outside the exceptional set, plus the moving jumps
    failures2 = []
    for t in grid:
        t = Fraction(t)
        if t in shared:
            continue
        rep = check_allowable_map(F.at(t), src, dst, seed=seed)
        if not rep.passed:
            failures2.append({"t": t, "report": rep.to_json()})
    for s, ts in zip(principal, per_sample):
        for t in ts:
            if t in shared:
                continue
            ft = F.at(t)
            bad = _image_tangent_witness(ft, dst, s.point, s.tangent_basis)
            if bad:
                failures2.append({"t": t, "sample_dependent": True, **bad})
    conditions["2'_allowable_for_almost_all_t"] = not failures2
    if failures2:
        witnesses["2'_allowable_for_almost_all_t"] = failures2[:3]

    # (3′): velocity at grid times and at every moving jump
    failures3 = []
    for s, ts in zip(principal, per_sample):
        times = [Fraction(t) for t in grid if Fraction(t) not in shared] + [t for t in ts if t not in shared]
        for t in times:
            point = list(s.point) + [t]
            image = F.F(point)
            vel = velocity(point)
            if not on_fibre(dst, image):
                failures3.append({"point": list(s.point), "t": t, "reason": "F(z,t) is off the target zero fibre"})
                break
            if not any(vel):
                continue
            tb = tangent_basis(dst, image)
            if not tb or not linalg.in_span(vel, tb, dst.dim):
                failures3.append({"point": list(s.point), "t": t, "velocity": vel, "image": image,
                                  "target_stabilizer": orbit_type(dst, image).label})
                break
    conditions["3'_velocity_tangent"] = not failures3
    if failures3:
        witnesses["3'_velocity_tangent"] = failures3[:3]
    evidence["grid"] = [Fraction(t) for t in grid]
    evidence["samples"] = len(principal)
    return AllowabilityReport("homotopy", conditions, witnesses, evidence, exceptional)


def shrinking_homotopy(action: LinearAction, c=1) -> Homotopy:
    """``F(v, t) = (1 − c·t·q(v)) v`` with ``q`` an invariant positive quadric.

    Equivariant, but crushes a moving level set of ``q`` to the origin: for
    each ``t`` some points of ``Z_prin`` land on ``0`` with nonzero velocity, so
    condition (3′) fails on a continuum of ``t``.  Used as a negative control.
    """
    n = action.dim
    t = Poly.var(n + 1, n)
    q = sum((Poly.var(n, i) ** 2 for i in range(n)), Poly.zero(n))
    if not action.is_torus:
        q = average(action, DifferentialForm.function(q)).coefficient(())
    r2 = q.embed(n + 1, list(range(n)))
    factor = Poly.const(n + 1, 1) - r2 * t * Fraction(c)
    return Homotopy(PolyMap([Poly.var(n + 1, i) * factor for i in range(n)]), action, action, "shrinking sphere")


# -- the lemma on Φ-basic forms and the ideal -----------------------------------------


@dataclass
class SubcomplexVerdict:
    input_basic: bool
    input_ideal: bool
    output_basic: bool | None
    output_ideal: bool | None

    @property
    def passed(self) -> bool:
        if self.input_basic and not self.output_basic:
            return False
        if self.input_ideal and not self.output_ideal:
            return False
        return True

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {"input_basic": self.input_basic, "input_ideal": self.input_ideal,
                "output_basic": self.output_basic, "output_ideal": self.output_ideal, "passed": self.passed}


def kappa_preserves_subcomplex(F: Homotopy, gamma: DifferentialForm, seed: int | None = None) -> SubcomplexVerdict:
    """If ``γ`` is Φ-basic (resp. in the ideal) then so is ``κ_F γ``."""
    seed = default_seed() if seed is None else seed
    basic = bool(is_phi_basic(F.target, gamma, seed))
    ideal = basic and bool(in_ideal(F.target, gamma, seed))
    out = kappa(F, gamma)
    out_basic = bool(is_phi_basic(F.source, out, seed)) if basic else None
    out_ideal = bool(in_ideal(F.source, out, seed)) if ideal else None
    return SubcomplexVerdict(basic, ideal, out_basic, out_ideal)


# -- Poincaré lemma --------------------------------------------------------------------


@dataclass
class PoincareReport:
    truncation: int
    closed_counts: list[int]
    failures: list[dict]
    constants_only_in_degree0: bool
    primitives_basic: bool
    betti: list[int]
    stable: bool | None = None

    @property
    def passed(self) -> bool:
        return not self.failures and self.constants_only_in_degree0 and self.primitives_basic \
            and self.stable is not False

    def to_json(self) -> dict:
        return {
            "truncation": self.truncation,
            "closed_counts": self.closed_counts,
            "failures": _jsonable(self.failures[:5]),
            "failure_count": len(self.failures),
            "constants_only_in_degree0": self.constants_only_in_degree0,
            "primitives_basic": self.primitives_basic,
            "betti": self.betti,
            "stable_under_D_plus_2": self.stable,
            "passed": self.passed,
        }


def _poincare_once(action: LinearAction, cx: QuotientComplex) -> PoincareReport:
    F = radial_contraction(action)
    dim = action.dim
    failures = []
    counts = []
    constants_ok = True
    primitives_ok = True
    for k in range(dim + 1):
        closed = cx.closed_classes(k)
        counts.append(len(closed))
        for cls in closed:
            gamma = cls.representative
            if k == 0:
                value = gamma.coefficient(()).constant_term()
                rest = gamma - DifferentialForm.constant(dim, value)
                if rest and not cx.in_ideal_span(rest):
                    constants_ok = False
                    failures.append({"degree": 0, "form": gamma.format()})
                continue
            primitive = kappa(F, gamma)
            if primitive and not cx.in_basic_span(primitive):
                primitives_ok = False
                failures.append({"degree": k, "form": gamma.format(), "reason": "primitive is not Φ-basic"})
                continue
            residual = (exterior_derivative(primitive) - gamma) if primitive else -gamma
            if residual and not cx.in_ideal_span(residual):
                failures.append({"degree": k, "form": gamma.format(), "primitive": primitive.format()})
    return PoincareReport(cx.truncation, counts, failures, constants_ok, primitives_ok, cx.betti_numbers())


def poincare_verify(action: LinearAction, truncation: int = 8, seed: int | None = None,
                    check_stability: bool = True) -> PoincareReport:
    """Exhibit ``κγ`` with ``d(κγ) ≡ γ mod I`` for every closed class of positive degree.

    Uses the radial contraction, which is an allowable homotopy of a linear
    quotient at level zero.
    """
    if not action.at_zero_level:
        raise ValueError("the Poincaré lemma is verified for linear quotients at level zero")
    seed = default_seed() if seed is None else seed
    report = _poincare_once(action, complex_for(action, truncation, seed))
    if check_stability:
        bigger = _poincare_once(action, complex_for(action, truncation + 2, seed))
        report.stable = bigger.passed == (not report.failures and report.constants_only_in_degree0
                                          and report.primitives_basic) and bigger.betti == report.betti
    return report
