from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from sympq.actions import builtin, moment_map
from sympq.dsl import parse_form
from sympq.forms import DifferentialForm, PolyMap, euler_field, interior_product
from sympq.homotopy import (
    Homotopy,
    chain_homotopy_check,
    check_allowable_homotopy,
    check_allowable_map,
    constant_homotopy,
    dilation,
    equivariance_identities_check,
    kappa,
    kappa_preserves_subcomplex,
    poincare_verify,
    radial_contraction,
    shrinking_homotopy,
)
from sympq.poly import Poly

from strategies import rand_form, random_equivariant_homotopy, seeds

Z3 = builtin("zk-cone")
CONE = builtin("cone11")


def test_kappa_examples():
    F = radial_contraction(Z3)
    assert kappa(F, parse_form("dx1 /\\ dy1")) == parse_form("(1/2)*(x1*dy1 - y1*dx1)")
    assert kappa(F, parse_form("dx1", n=1)) == parse_form("x1")
    assert not kappa(F, parse_form("x1^2"))
    assert not kappa(constant_homotopy(Z3), parse_form("dx1 /\\ dy1"))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_radial_kappa_matches_euler_oracle(seed):
    # for F(v,t) = t v and γ homogeneous of weight w: κγ = i(E)γ / w
    rng = random.Random(seed)
    k = rng.randint(1, 4)
    deg = rng.randint(0, 2)
    gamma = rand_form(rng, 4, k, deg).weighted_part(deg + k, [1, 1, 1, 1])
    if not gamma:
        return
    expected = interior_product(euler_field(4), gamma).scale(Fraction(1, deg + k))
    assert kappa(radial_contraction(CONE), gamma) == expected


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_chain_homotopy_and_equivariance_identities(seed):
    rng = random.Random(seed)
    action = [CONE, Z3, builtin("teardrop")][seed % 3]
    F = random_equivariant_homotopy(action, rng)
    gamma = rand_form(rng, action.dim, rng.randint(0, action.dim), 1)
    assert chain_homotopy_check(F, gamma)
    assert all(equivariance_identities_check(F, gamma))


def test_identity_check_reports_residual_on_broken_kappa(monkeypatch):
    import sympq.homotopy as h

    F = radial_contraction(Z3)
    gamma = parse_form("x1*dy1")
    monkeypatch.setattr(h, "kappa", lambda F, g: g.scale(2) if g.degree else g)
    res = h.chain_homotopy_check(F, gamma)
    assert not res and res.residual is not None


def test_homotopy_validation():
    with pytest.raises(ValueError):
        Homotopy(PolyMap([Poly.var(2, 0), Poly.var(2, 1)]), Z3, Z3)


@pytest.mark.parametrize("action", [CONE, Z3], ids=["cone11", "zk-cone"])
def test_radial_contraction_is_allowable(action):
    rep = check_allowable_homotopy(radial_contraction(action), samples=6)
    assert rep.passed
    assert rep.exceptional_t == [0]
    assert check_allowable_homotopy(constant_homotopy(action), samples=6).passed


@pytest.mark.parametrize("action", [CONE, Z3], ids=["cone11", "zk-cone"])
def test_shrinking_homotopy_is_rejected(action):
    rep = check_allowable_homotopy(shrinking_homotopy(action), samples=6)
    assert rep.conditions["1'_equivariant"]
    assert not rep.passed
    assert not rep.conditions["3'_velocity_tangent"]


def test_allowable_maps():
    for t in (2, 0, Fraction(1, 3)):
        assert check_allowable_map(dilation(CONE, t), CONE, CONE, samples=6).passed
    generic = PolyMap.linear([[1, 2, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    rep = check_allowable_map(generic, CONE, CONE, samples=6)
    assert not rep.conditions["1_equivariant"]
    assert not rep.conditions["2_maps_Z_into_Z'"]
    assert "1_equivariant" in rep.witnesses


def test_kappa_preserves_basic_forms_and_ideal():
    F = radial_contraction(CONE)
    assert kappa_preserves_subcomplex(F, CONE.space.omega()).passed
    phi = DifferentialForm.function(moment_map(CONE).components[0])
    # Φ dx1∧dy1 is invariant and vanishes on Z: basic and in the ideal
    v = kappa_preserves_subcomplex(F, DifferentialForm(4, 2, {(0, 1): phi.coefficient(())}), seed=1)
    assert v.input_ideal and v.output_ideal and v.passed


@pytest.mark.parametrize("action", [CONE, Z3], ids=["cone11", "zk-cone"])
def test_poincare_lemma_small_truncation(action):
    rep = poincare_verify(action, 4)
    assert rep.passed, rep.to_json()
    assert rep.betti == [1] + [0] * action.dim


def test_poincare_requires_level_zero():
    with pytest.raises(ValueError):
        poincare_verify(builtin("cp1"), 2)
