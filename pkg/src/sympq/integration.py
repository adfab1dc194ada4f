"""Integration over the principal stratum of a two-dimensional quotient.

Each built-in example comes with a hand-built chart: a section of
``Z_prin → X_prin`` over an open parameter box.  The pullback of ``ω`` along
the section is the reduced symplectic form, so ``μ = ω_prin`` (``n = 1``) is the
density ``ω(∂_inner s, ∂_outer s)``.  Independently, the quotient Riemannian
density is computed from the horizontal projections of the same tangent
vectors; the two must agree pointwise.

Quadrature is Gauss–Legendre in the inner variable (split at the cutoff knots)
against the trapezoidal rule (periodic outer variable) or Gauss–Legendre; the
error estimate is the change under doubling.  The Monte Carlo cross-check uses
independently scrambled Sobol sequences and reports the spread between
randomisations.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import sympy
from scipy.stats import qmc

from .actions import LinearAction, average, basis_vector_fields, builtin
from .forms import DifferentialForm, exterior_derivative, wedge
from .poly import Poly
from .quotient import QuotientFormClass, default_seed, quotient_basis
from .stratification import strata_of_Z

log = logging.getLogger(__name__)


class IntegrationError(ValueError):
    pass


# -- cutoff functions -------------------------------------------------------------------


def _smoothstep(s: np.ndarray) -> np.ndarray:
    return s**3 * (10 - 15 * s + 6 * s**2)


def _smoothstep_prime(s: np.ndarray) -> np.ndarray:
    return 30 * s**2 * (1 - s) ** 2


@dataclass(frozen=True)
class CutoffFamily:
    """``χ_k(p) = χ(k ρ(p))`` with a C² piecewise-polynomial profile.

    ``χ`` is 0 on ``[0, stretch/4]``, rises by a quintic smoothstep and equals 1
    on ``[stretch, ∞)``; ``ρ`` is the chart's distance-like function to the
    singular set, so ``1 − χ_k`` is supported in ``S_{k/stretch} = {ρ ≤ stretch/k}``.
    """

    stretch: float = 1.0

    @property
    def knots(self) -> tuple[float, float]:
        return (self.stretch / 4, self.stretch)

    def profile(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.knots
        s = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        return _smoothstep(s)

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.knots
        s = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        return _smoothstep_prime(s) / (hi - lo)

    def chi(self, k: float, rho) -> np.ndarray:
        return self.profile(k * np.asarray(rho))

    def cuts(self, k: float) -> list[float]:
        """Values of ``ρ`` where ``χ_k`` changes regime."""
        return [c / k for c in self.knots]


# -- charts -------------------------------------------------------------------------------


@dataclass
class QuotientChart:
    """Section of ``Z_prin → X_prin`` over ``inner × outer`` parameters.

    ``section(inner, outer)`` returns points, ``tangents`` the pair
    ``(∂_inner s, ∂_outer s)``, both of shape ``(N, dim)``.  ``rho_poly`` is a
    polynomial whose square root is the distance-like function to the singular
    set used by cutoffs; ``inner_at_rho(outer, r)`` solves ``ρ = r`` for the
    inner parameter.
    """

    name: str
    action: LinearAction
    outer_range: tuple[float, float]
    outer_periodic: bool
    inner_range: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    section: Callable[[np.ndarray, np.ndarray], np.ndarray]
    tangents: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    rho_poly: Poly
    inner_at_rho: Callable[[np.ndarray, float], np.ndarray]
    singular: bool
    compact: bool
    cone_radius: float = math.inf  # S_k = {ρ ≤ 1/k} is an exact cone neighbourhood while 1/k ≤ this
    note: str = ""

    def rho(self, points: np.ndarray) -> np.ndarray:
        return np.sqrt(np.maximum(self.rho_poly.evaluate_float(points), 0.0))

    def liouville(self, inner, outer) -> np.ndarray:
        """``ω(∂_inner s, ∂_outer s)``."""
        t1, t2 = self.tangents(inner, outer)
        n = self.action.space.n
        total = np.zeros(t1.shape[0])
        for i in range(n):
            total += t1[:, 2 * i] * t2[:, 2 * i + 1] - t1[:, 2 * i + 1] * t2[:, 2 * i]
        return total

    def riemannian(self, inner, outer) -> np.ndarray:
        """Quotient metric density from horizontal projections (orthogonal to the orbit)."""
        pts = self.section(inner, outer)
        t1, t2 = self.tangents(inner, outer)
        if self.action.is_torus:
            for field_ in basis_vector_fields(self.action):
                xi = np.stack([c.evaluate_float(pts) for c in field_.components], axis=1)
                nrm = np.einsum("ij,ij->i", xi, xi)
                nrm = np.where(nrm > 0, nrm, 1.0)
                t1 = t1 - (np.einsum("ij,ij->i", t1, xi) / nrm)[:, None] * xi
                t2 = t2 - (np.einsum("ij,ij->i", t2, xi) / nrm)[:, None] * xi
        g11 = np.einsum("ij,ij->i", t1, t1)
        g22 = np.einsum("ij,ij->i", t2, t2)
        g12 = np.einsum("ij,ij->i", t1, t2)
        return np.sqrt(np.maximum(g11 * g22 - g12**2, 0.0))


def _circle_chart(action: LinearAction) -> QuotientChart:
    w1, w2 = action.group.weights[0]
    c = -action.level[0]
    if w1 != 1 or w2 <= 0 or c <= 0:
        raise IntegrationError("the circle chart needs weights (1, w) with w > 0 and a nonempty level set")
    a = math.sqrt(2 * float(c))  # |z1| = a cos θ
    b = math.sqrt(2 * float(c) / w2)  # |z2| = b sin θ
    dim = action.dim

    def section(th, ph):
        return np.stack([a * np.cos(th), np.zeros_like(th), b * np.sin(th) * np.cos(ph), b * np.sin(th) * np.sin(ph)], axis=1)

    def tangents(th, ph):
        z = np.zeros_like(th)
        t_th = np.stack([-a * np.sin(th), z, b * np.cos(th) * np.cos(ph), b * np.cos(th) * np.sin(ph)], axis=1)
        t_ph = np.stack([z, z, -b * np.sin(th) * np.sin(ph), b * np.sin(th) * np.cos(ph)], axis=1)
        return t_th, t_ph

    def inner_range(ph):
        return np.zeros_like(ph), np.full_like(ph, math.pi / 2)

    def inner_at_rho(ph, r):
        # ρ = |z1| = a cos θ
        x = r / a
        return np.full_like(ph, math.acos(x) if x < 1 else 0.0)

    rho = Poly.var(dim, 0) ** 2 + Poly.var(dim, 1) ** 2
    singular = len(strata_of_Z(action).strata) > 1
    return QuotientChart(
        name=action.name or "circle quotient",
        action=action,
        outer_range=(0.0, 2 * math.pi),
        outer_periodic=True,
        inner_range=inner_range,
        section=section,
        tangents=tangents,
        rho_poly=rho,
        inner_at_rho=inner_at_rho,
        singular=singular,
        compact=True,
        cone_radius=a,
        note="slice z1 > 0 real; misses the two poles z1 = 0 and z2 = 0 (measure zero)",
    )


def _cyclic_chart(action: LinearAction, radius: float = 4.0) -> QuotientChart:
    if action.dim != 2:
        raise IntegrationError("the cone chart needs a cyclic group acting on C")
    # fundamental sector: from e1 counterclockwise to the nearest image of e1
    angles = []
    for g in action.group.elements:
        x, y = float(g[0][0]), float(g[1][0])
        ang = math.atan2(y, x) % (2 * math.pi)
        if ang > 1e-12:
            angles.append(ang)
    phi_max = min(angles)
    q = average(action, DifferentialForm.function(Poly.var(2, 0) ** 2 + Poly.var(2, 1) ** 2)).coefficient(())
    qf = [float(q.terms.get(e, 0)) for e in ((2, 0), (1, 1), (0, 2))]

    def q_dir(ph):
        return qf[0] * np.cos(ph) ** 2 + qf[1] * np.cos(ph) * np.sin(ph) + qf[2] * np.sin(ph) ** 2

    def section(r, ph):
        return np.stack([r * np.cos(ph), r * np.sin(ph)], axis=1)

    def tangents(r, ph):
        return (np.stack([np.cos(ph), np.sin(ph)], axis=1), np.stack([-r * np.sin(ph), r * np.cos(ph)], axis=1))

    def inner_range(ph):
        # the chart covers ρ ≤ radius
        return np.zeros_like(ph), radius / np.sqrt(q_dir(ph))

    def inner_at_rho(ph, r):
        return r / np.sqrt(q_dir(ph))

    return QuotientChart(
        name=action.name or "cyclic cone",
        action=action,
        outer_range=(0.0, phi_max),
        outer_periodic=False,
        inner_range=inner_range,
        section=section,
        tangents=tangents,
        rho_poly=q,
        inner_at_rho=inner_at_rho,
        singular=True,
        compact=False,
        cone_radius=radius,
        note=f"polar sector of opening {phi_max:.6f}, truncated at invariant radius {radius}",
    )


def chart_for(action: LinearAction | str) -> QuotientChart:
    if isinstance(action, str):
        action = builtin(action)
    if action.is_torus:
        if action.group.rank == 1 and action.space.n == 2 and not action.at_zero_level:
            return _circle_chart(action)
    elif action.dim == 2:
        return _cyclic_chart(action)
    raise IntegrationError(f"no chart atlas for {action.name or 'this action'}")


# -- quadrature -----------------------------------------------------------------------


def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _nodes(chart: QuotientChart, n_inner: int, n_outer: int, cuts: Sequence[float] = (),
           inner_limit: float | None = None, inner_from: float | None = None):
    """Quadrature nodes ``(inner, outer, weight)`` with inner splits at ``ρ = cut``."""
    lo_o, hi_o = chart.outer_range
    if chart.outer_periodic:
        outer = lo_o + (hi_o - lo_o) * (np.arange(n_outer) + 0.5) / n_outer
        w_outer = np.full(n_outer, (hi_o - lo_o) / n_outer)
    else:
        x, w = _gauss(n_outer)
        outer = lo_o + (hi_o - lo_o) * (x + 1) / 2
        w_outer = w * (hi_o - lo_o) / 2
    lo_i, hi_i = chart.inner_range(outer)
    bounds = [lo_i, hi_i]
    for c in cuts:
        bounds.append(np.clip(chart.inner_at_rho(outer, c), lo_i, hi_i))
    if inner_limit is not None:
        lim = np.clip(chart.inner_at_rho(outer, inner_limit), lo_i, hi_i)
        bounds.append(lim)
    if inner_from is not None:
        frm = np.clip(chart.inner_at_rho(outer, inner_from), lo_i, hi_i)
        bounds.append(frm)
    edges = np.sort(np.stack(bounds, axis=1), axis=1)
    x, w = _gauss(n_inner)
    inner_all, outer_all, weight_all = [], [], []
    for j in range(edges.shape[1] - 1):
        a, b = edges[:, j], edges[:, j + 1]
        half = (b - a) / 2
        mid = (a + b) / 2
        inner = mid[:, None] + half[:, None] * x[None, :]
        weight = (half[:, None] * w[None, :]) * w_outer[:, None]
        inner_all.append(inner.ravel())
        outer_all.append(np.repeat(outer, n_inner))
        weight_all.append(weight.ravel())
    return np.concatenate(inner_all), np.concatenate(outer_all), np.concatenate(weight_all)


def _form_on_chart(form: DifferentialForm, chart: QuotientChart, inner, outer) -> np.ndarray:
    """``form(∂_inner s, ∂_outer s)`` for a 2-form, or ``form(s)`` for a function."""
    pts = chart.section(inner, outer)
    if form.degree == 0:
        return form.coefficient(()).evaluate_float(pts)
    if form.degree != 2:
        raise IntegrationError("only top-degree (2-form) integrands are supported on two-dimensional quotients")
    t1, t2 = chart.tangents(inner, outer)
    total = np.zeros(pts.shape[0])
    for (i, j), c in form.components.items():
        total += c.evaluate_float(pts) * (t1[:, i] * t2[:, j] - t1[:, j] * t2[:, i])
    return total


@dataclass
class IntegrationResult:
    value: float
    error: float
    mc_value: float | None
    mc_error: float | None
    quadrature_nodes: int
    mc_samples: int
    seed: int
    ambient_bound_holds: bool = True
    tail_bound: float | None = None

    @property
    def agree(self) -> bool:
        if self.mc_value is None:
            return True
        return abs(self.value - self.mc_value) <= 5 * (self.error + self.mc_error) + 1e-12

    @property
    def interval(self) -> tuple[float, float]:
        return (self.value - self.error, self.value + self.error)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "mc_value": self.mc_value,
            "mc_error": self.mc_error,
            "quadrature_nodes": self.quadrature_nodes,
            "mc_samples": self.mc_samples,
            "seed": self.seed,
            "quadrature_mc_agree": self.agree,
            "ambient_norm_bound_holds": self.ambient_bound_holds,
            "tail_bound": self.tail_bound,
        }


def _quad(chart, integrand, cuts=(), n=32, tol=1e-12, max_n=512, **kw) -> tuple[float, float, int]:
    """Doubling quadrature; returns value, |Q(n) − Q(2n)| and the node count used."""
    prev = None
    while True:
        inner, outer, w = _nodes(chart, n, n, cuts, **kw)
        val = float(np.sum(integrand(inner, outer) * w))
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * max(1.0, abs(val)) or n >= max_n:
                return val, err, len(w)
        prev = val
        n *= 2


def _qmc(chart, integrand, samples: int, seed: int, randomisations: int = 8,
         rho_max: float | None = None) -> tuple[float, float]:
    """Scrambled-Sobol estimate over the chart box; spread over independent scramblings."""
    per = max(2 ** int(round(math.log2(max(samples // randomisations, 2)))), 2)
    lo_o, hi_o = chart.outer_range
    estimates = []
    for r in range(randomisations):
        eng = qmc.Sobol(d=2, scramble=True, seed=np.random.default_rng([seed, r]))
        u = eng.random(per)
        outer = lo_o + (hi_o - lo_o) * u[:, 1]
        lo_i, hi_i = chart.inner_range(outer)
        if rho_max is not None:
            hi_i = np.minimum(hi_i, chart.inner_at_rho(outer, rho_max))
        inner = lo_i + (hi_i - lo_i) * u[:, 0]
        jac = (hi_o - lo_o) * (hi_i - lo_i)
        vals = np.zeros(per)
        for s in range(0, per, 1 << 16):
            sl = slice(s, s + (1 << 16))
            vals[sl] = integrand(inner[sl], outer[sl]) * jac[sl]
        estimates.append(math.fsum(vals) / per)
    est = np.array(estimates)
    mean = float(np.mean(est))
    spread = float(np.std(est, ddof=1) / math.sqrt(len(est))) if len(est) > 1 else float("nan")
    # identical estimates happen for very regular integrands; report rounding-level error then
    return mean, max(spread, 1e-14 * abs(mean))


def _as_form(cls) -> DifferentialForm:
    return cls.representative if isinstance(cls, QuotientFormClass) else cls


def _ambient_bound(form: DifferentialForm, chart: QuotientChart, inner, outer) -> tuple[bool, np.ndarray]:
    """Pointwise check ``|α(T1,T2)| ≤ |α̃| |T1 ∧ T2|`` with ``|α̃|`` the Frobenius norm."""
    pts = chart.section(inner, outer)
    t1, t2 = chart.tangents(inner, outer)
    norm2 = np.zeros(pts.shape[0])
    for _, c in form.components.items():
        norm2 += 2 * c.evaluate_float(pts) ** 2
    area = np.sqrt(np.maximum(np.einsum("ij,ij->i", t1, t1) * np.einsum("ij,ij->i", t2, t2)
                              - np.einsum("ij,ij->i", t1, t2) ** 2, 0.0))
    bound = np.sqrt(norm2) * area
    val = np.abs(_form_on_chart(form, chart, inner, outer))
    return bool(np.all(val <= bound * (1 + 1e-12) + 1e-14)), bound


def integrate(action: LinearAction | str, cls, mc_samples: int = 1 << 16, seed: int | None = None,
              tol: float = 1e-12, tail_k: int = 16) -> IntegrationResult:
    """``∫_{X_prin} α`` for a top-degree class, by quadrature with a Monte Carlo cross-check."""
    seed = default_seed() if seed is None else seed
    chart = chart_for(action)
    form = _as_form(cls)
    if form.degree != 2:
        raise IntegrationError(f"expected a top-degree form (degree 2), got degree {form.degree}")
    if not chart.compact:
        raise IntegrationError("integration of forms is only defined on the compact examples")
    if not form:
        return IntegrationResult(0.0, 0.0, 0.0, 0.0, 0, 0, seed)
    integrand = lambda i, o: _form_on_chart(form, chart, i, o)  # noqa: E731
    value, err, nodes = _quad(chart, integrand, tol=tol)
    mc_val = mc_err = None
    if mc_samples:
        mc_val, mc_err = _qmc(chart, integrand, mc_samples, seed)
    inner, outer, w = _nodes(chart, 32, 32)
    ok, bound = _ambient_bound(form, chart, inner, outer)
    tail = None
    if chart.singular:
        ti, to, tw = _nodes(chart, 32, 32, inner_from=1.0 / tail_k)
        near = chart.rho(chart.section(ti, to)) <= 1.0 / tail_k
        _, b = _ambient_bound(form, chart, ti, to)
        tail = float(np.sum(b * tw * near))
    return IntegrationResult(value, err + 1e-15 * abs(value), mc_val, mc_err, nodes, mc_samples, seed, ok, tail)


# -- Duistermaat–Heckman oracle ----------------------------------------------------------


def duistermaat_heckman_volume(action: LinearAction | str) -> Fraction:
    """Symplectic volume of a circle reduction of ``C^n`` divided by ``π``, computed analytically.

    The Liouville volume of ``{Σ w_i p_i ≤ c}`` (``p_i = |z_i|²/2``) is
    ``(2π)^n`` times the simplex volume ``c^n / (n! Π w_i)``; differentiating in
    ``c`` and dividing by the orbit length ``2π/g`` (``g`` = gcd of the weights,
    the order of the generic stabilizer) gives the reduced volume.  Returned as
    a rational multiple of ``π^{n-1}``.
    """
    if isinstance(action, str):
        action = builtin(action)
    if not action.is_torus or action.group.rank != 1:
        raise IntegrationError("the oracle covers circle actions only")
    w = action.group.weights[0]
    if any(x <= 0 for x in w):
        raise IntegrationError("the oracle needs positive weights (compact reduction)")
    c_sym, p = sympy.Symbol("c", positive=True), sympy.symbols(f"p0:{len(w)}", nonnegative=True)
    # simplex volume by iterated integration
    expr = sympy.Integer(1)
    limits = []
    for i in range(len(w) - 1, -1, -1):
        rest = c_sym - sum(w[j] * p[j] for j in range(i))
        limits.append((p[i], 0, rest / w[i]))
    for var, lo, hi in limits:
        expr = sympy.integrate(expr, (var, lo, hi))
    liouville = (2 ** len(w)) * expr  # (2π)^n / π^n... keep powers of π separate
    g = math.gcd(*w)
    reduced = sympy.diff(liouville, c_sym) * g / 2  # divide by orbit length 2π/g, one π absorbed
    level = Fraction(action.level[0])
    value = sympy.nsimplify(reduced.subs(c_sym, sympy.Rational(-level.numerator, level.denominator)))
    return Fraction(int(value.p), int(value.q))


def dh_volume_float(action: LinearAction | str) -> float:
    if isinstance(action, str):
        action = builtin(action)
    n = action.space.n
    return float(duistermaat_heckman_volume(action)) * math.pi ** (n - 1)


# -- consistency of the chart -----------------------------------------------------------------


def liouville_riemannian_check(action: LinearAction | str, points: int = 200, seed: int = 0) -> float:
    """Largest relative gap between the Liouville and Riemannian densities at random parameters."""
    chart = chart_for(action)
    rng = np.random.default_rng(seed)
    lo_o, hi_o = chart.outer_range
    outer = rng.uniform(lo_o, hi_o, points)
    lo_i, hi_i = chart.inner_range(outer)
    inner = lo_i + (hi_i - lo_i) * rng.uniform(0.02, 0.98, points)
    mu = chart.liouville(inner, outer)
    sigma = chart.riemannian(inner, outer)
    if np.any(mu <= 0):
        raise IntegrationError("Liouville density is not positive on the chart interior")
    return float(np.max(np.abs(mu - sigma) / np.abs(mu)))


# -- Stokes ---------------------------------------------------------------------------------


@dataclass
class StokesResult:
    residual: float
    normalizer: float
    ratio: float
    error: float
    mc_residual: float | None = None
    mc_normalizer: float | None = None
    mc_ratio: float | None = None
    mc_samples: int = 0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _cutoff_derivative_integrand(beta: DifferentialForm, chart: QuotientChart, cutoff: CutoffFamily, k: float,
                                 inside: bool):
    """Integrand of ``d(χ_k β)`` (or ``d((1−χ_k) β)``) on the chart."""
    u = DifferentialForm.function(chart.rho_poly)
    du_beta = wedge(exterior_derivative(u), beta)
    dbeta = exterior_derivative(beta)
    sign = -1.0 if inside else 1.0

    def integrand(i, o):
        pts = chart.section(i, o)
        rho = np.sqrt(np.maximum(chart.rho_poly.evaluate_float(pts), 1e-300))
        chi = cutoff.chi(k, rho)
        dchi = cutoff.derivative(k * rho) * k / (2 * rho)  # dχ_k = χ'(kρ) k dρ, dρ = du / 2ρ
        fac = chi if not inside else 1.0 - chi
        val = sign * dchi * (_form_on_chart(du_beta, chart, i, o) if du_beta else 0.0)
        if dbeta:
            val = val + fac * _form_on_chart(dbeta, chart, i, o)
        return val

    return integrand


def stokes_check(action: LinearAction | str, beta, cutoff: CutoffFamily | None = None, k: float = 2.0,
                 inside: bool = False, mc_samples: int = 0, seed: int | None = None) -> StokesResult:
    """``|∫ dγ| / ∫ |dγ| μ`` for ``γ = χ_k β`` (or ``(1−χ_k) β`` when ``inside``)."""
    seed = default_seed() if seed is None else seed
    chart = chart_for(action)
    beta = _as_form(beta)
    if beta.degree != 1:
        raise IntegrationError("Stokes' theorem is checked for forms of degree dim X − 1 = 1")
    if not beta:
        return StokesResult(0.0, 0.0, 0.0, 0.0)
    cutoff = cutoff or CutoffFamily()
    integrand = _cutoff_derivative_integrand(beta, chart, cutoff, k, inside)
    cuts = cutoff.cuts(k)
    res, err, _ = _quad(chart, integrand, cuts, tol=1e-14, max_n=256)
    norm, _, _ = _quad(chart, lambda i, o: np.abs(integrand(i, o)), cuts, tol=1e-10, max_n=256)
    out = StokesResult(abs(res), norm, abs(res) / norm if norm else 0.0, err)
    if mc_samples:
        mres, _ = _qmc(chart, integrand, mc_samples, seed)
        mnorm, _ = _qmc(chart, lambda i, o: np.abs(integrand(i, o)), mc_samples, seed + 1)
        out.mc_residual, out.mc_normalizer = abs(mres), mnorm
        out.mc_ratio = abs(mres) / mnorm if mnorm else 0.0
        out.mc_samples = mc_samples
    return out


def random_stokes_forms(action: LinearAction | str, count: int, seed: int = 0, truncation: int = 4) -> list[DifferentialForm]:
    """Random Φ-basic 1-forms (rational combinations of a quotient basis)."""
    if isinstance(action, str):
        action = builtin(action)
    basis = [c.representative for c in quotient_basis(action, 1, truncation, seed)]
    if not basis:
        raise IntegrationError("no Φ-basic 1-forms at this truncation")
    rng = random.Random(f"stokes:{seed}")
    out = []
    for _ in range(count):
        total = DifferentialForm.zero(action.dim, 1)
        for b in rng.sample(basis, min(4, len(basis))):
            total = total + b.scale(Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4)))
        out.append(total)
    return out


# -- volumes ------------------------------------------------------------------------------


def _volume(chart: QuotientChart, rho_min: float | None = None, rho_max: float | None = None) -> tuple[float, float]:
    integrand = chart.liouville
    if rho_min is not None:
        val, err, _ = _quad(chart, lambda i, o: chart.liouville(i, o) * (chart.rho(chart.section(i, o)) >= rho_min * (1 - 1e-13)),
                            cuts=(rho_min,), tol=1e-13)
        return val, err
    if rho_max is not None:
        val, err, _ = _quad(chart, lambda i, o: chart.liouville(i, o) * (chart.rho(chart.section(i, o)) <= rho_max * (1 + 1e-13)),
                            cuts=(rho_max,), tol=1e-13)
        return val, err
    val, err, _ = _quad(chart, integrand, tol=1e-13)
    return val, err


@dataclass
class VolumeReport:
    ks: list[int]
    volumes: list[float]
    monotone: bool
    relative_increments: list[float]
    extrapolated: float
    total: float | None

    def to_json(self) -> dict:
        return dict(self.__dict__)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["k", "volume", "relative_increment"])
        for k, v, r in zip(self.ks, self.volumes, [float("nan")] + self.relative_increments):
            w.writerow([k, repr(v), repr(r)])
        return buf.getvalue()


def volume_finiteness(action: LinearAction | str, K: int = 32) -> VolumeReport:
    """``vol(X_prin ∖ S_k)`` for ``k = 1..K`` with ``S_k = {ρ ≤ 1/k}``."""
    chart = chart_for(action)
    if not chart.compact:
        raise IntegrationError("volume finiteness is reported for compact examples")
    ks = list(range(1, K + 1))
    vols = [_volume(chart, rho_min=1.0 / k)[0] for k in ks]
    incs = [(vols[i] - vols[i - 1]) / vols[i] for i in range(1, len(vols))]
    monotone = all(b >= a - 1e-13 * abs(b) for a, b in zip(vols, vols[1:]))
    if len(vols) >= 2:
        # Richardson extrapolation for an O(k^-2) remainder
        kk = ks[-1]
        extrap = vols[-1] + (vols[-1] - vols[-2]) * (kk - 1) ** 2 / (kk**2 - (kk - 1) ** 2)
    else:
        extrap = vols[-1]
    total = _volume(chart)[0]
    return VolumeReport(ks, vols, monotone, incs, extrap, total)


@dataclass
class ScalingReport:
    ks: list[int]
    volumes: list[float]
    slope: float
    intercept: float
    expected: float
    smooth: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def cone_scaling_experiment(action: LinearAction | str, cutoff: CutoffFamily | None = None, K: int = 16,
                            smooth: bool = True) -> ScalingReport:
    """Fit ``log vol(S_k)`` against ``log k``; the cone identity predicts slope ``−2m``.

    With ``smooth`` the neighbourhood volume is ``∫ (1 − χ_k) μ``; otherwise the
    sharp ball ``{ρ ≤ 1/k}`` is measured.
    """
    chart = chart_for(action)
    if not chart.singular:
        raise IntegrationError("the example has no singular stratum")
    cutoff = cutoff or CutoffFamily()
    reach = cutoff.stretch if smooth else 1.0
    k0 = max(1, math.ceil(reach / chart.cone_radius - 1e-12))
    ks = list(range(k0, k0 + K))
    vols = []
    for k in ks:
        if smooth:
            cuts = cutoff.cuts(k)
            f = lambda i, o, k=k: chart.liouville(i, o) * (1.0 - cutoff.chi(k, chart.rho(chart.section(i, o))))  # noqa: E731
            val, _, _ = _quad(chart, f, cuts, tol=1e-13)
        else:
            val = _volume(chart, rho_max=1.0 / k)[0]
        vols.append(val)
    x = np.log(np.array(ks, dtype=float))
    y = np.log(np.array(vols))
    slope, intercept = np.polyfit(x, y, 1)
    m = chart.action.dim // 2 if not chart.action.is_torus else (chart.action.dim - 2 * chart.action.group.rank) // 2
    return ScalingReport(ks, vols, float(slope), float(intercept), -2.0 * m, smooth)


# -- symplectic class -----------------------------------------------------------------------


@dataclass
class PairingReport:
    k: int
    value: float
    error: float
    dh: float | None
    positive: bool
    relative_dh_gap: float | None

    def to_json(self) -> dict:
        return dict(self.__dict__)


def symplectic_class_pairing(action: LinearAction | str, k: int, mc_samples: int = 1 << 16,
                             seed: int | None = None) -> PairingReport:
    """Pair ``ω^k`` against ``ω^{n−k}`` over ``X``; a nonzero value certifies both classes.

    On a two-dimensional quotient ``n = 1``, so ``k = 1`` integrates ``ω`` and
    ``k = 0`` pairs the constant ``1`` with ``ω`` (the total volume).
    """
    if isinstance(action, str):
        action = builtin(action)
    chart = chart_for(action)
    if not chart.compact:
        raise IntegrationError("the pairing needs a compact quotient")
    n = 1
    if not 0 <= k <= n:
        raise IntegrationError(f"k must lie in [0, {n}]")
    omega = action.space.omega()
    res = integrate(action, omega, mc_samples=mc_samples, seed=seed)
    try:
        dh = dh_volume_float(action)
    except IntegrationError:
        dh = None
    positive = res.value - max(res.error, 5 * (res.mc_error or 0)) > 0
    gap = abs(res.value - dh) / dh if dh else None
    return PairingReport(k, res.value, max(res.error, res.mc_error or 0.0), dh, positive, gap)
