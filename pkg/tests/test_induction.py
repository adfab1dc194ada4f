from __future__ import annotations

import random
from fractions import Fraction

import pytest

from sympq.actions import cyclic_action, torus_action
from sympq.dsl import parse_form
from sympq.forms import DifferentialForm, PolyMap, exterior_derivative
from sympq.induction import (
    BundleError,
    BundleForm,
    BundleSpec,
    circle_bundle,
    connection_form,
    connection_independence,
    cyclic_bundle,
    extension,
    extension_closed_form,
    extension_negative_test,
    induced_space,
    point_fibre,
    random_g_basic_form,
    random_invariant_form,
    restrict_to_fibre,
    verify_extension_lemma,
    verify_functoriality,
    verify_reduction_in_stages,
)


def test_bundle_validation():
    with pytest.raises(BundleError):
        circle_bundle((1,), projection=(0, 1))  # pr(η) ≠ 1
    with pytest.raises(BundleError):
        BundleSpec(1, "cyclic", (1,), cyclic_action(3), (Fraction(1),), 3)
    with pytest.raises(BundleError):
        BundleSpec(1, "cyclic", (1,), cyclic_action(3), (Fraction(0),), 4)
    with pytest.raises(BundleError):
        BundleSpec(3, "circle", (1, 0, 0), torus_action([[1]]), (1, 0, 0))


def test_rotation_form_extension_by_hand():
    spec = circle_bundle((1,))
    gamma = parse_form("x1*dy1 - y1*dx1", n=1)
    beta = extension(spec, gamma)
    expected = parse_form("(x1^2 + y1^2)*dth1 - y1*dx1 + x1*dy1", n=1, angles=2)
    assert beta.form == expected
    # γ is invariant but not horizontal (i(ζ)γ = |z|²), so e(γ) is invariant, not basic
    assert beta.h_invariant() and beta.angle_free() and not beta.g_basic()
    assert restrict_to_fibre(spec, beta) == gamma
    # a different connection adds the second angle
    tilted = extension(spec.with_projection((1, 5)), gamma).form
    assert tilted - expected == parse_form("5*(x1^2 + y1^2)*dth2", n=1, angles=2)


def test_non_invariant_form_rejected():
    with pytest.raises(BundleError):
        extension(circle_bundle((1,)), parse_form("dx1", n=1))


def test_connection_form_is_closed_for_torus():
    spec = circle_bundle((1,), projection=(1, 5))
    theta = connection_form(spec)
    assert exterior_derivative(theta) == DifferentialForm.zero(spec.dim, 2)


@pytest.mark.parametrize("spec", [cyclic_bundle(3), circle_bundle((1,)), circle_bundle((1, 2))])
def test_extension_lemma(spec):
    reports = verify_extension_lemma(spec, cases=25, seed=4)
    assert all(r.passed for r in reports), [r.to_json() for r in reports if not r.passed]


@pytest.mark.parametrize("spec", [cyclic_bundle(3), circle_bundle((1,))])
def test_negative_control(spec):
    out = extension_negative_test(spec)
    assert out["differs"] and not out["g_basic"]


def test_closed_form_formula_agrees():
    spec = circle_bundle((1, 2))
    rng = random.Random(0)
    for _ in range(10):
        gamma = random_invariant_form(spec.fibre, rng, basic=True)
        assert extension(spec, gamma).form == extension_closed_form(spec, gamma)


def test_random_basic_forms_are_basic():
    spec = circle_bundle((1,))
    rng = random.Random(1)
    for _ in range(5):
        assert random_g_basic_form(spec, rng).g_basic()


def test_functoriality():
    flat = cyclic_bundle(3)
    assert verify_functoriality(flat, flat, PolyMap.linear([[0, -1], [1, -1]]), cases=10).passed
    curved, wide = circle_bundle((1,)), circle_bundle((1, 0))
    j = PolyMap.linear([[1, 0], [0, 1], [0, 0], [0, 0]])
    assert verify_functoriality(curved, wide, j, cases=10).passed
    with pytest.raises(BundleError):
        # swapping the planes does not intertwine weights (1) and (1, 0)
        verify_functoriality(curved, wide, PolyMap.linear([[0, 0], [0, 0], [1, 0], [0, 1]]), cases=1)


def test_connection_independence():
    out = connection_independence(circle_bundle((1,)), [(1, 0), (1, 5)], cases=10)
    assert out["independent"]


def test_bundle_form_checks():
    spec = circle_bundle((1,))
    dth1 = BundleForm(spec, DifferentialForm.dx(spec.dim, 0))
    assert dth1.h_invariant() and not dth1.h_horizontal()
    x = BundleForm(spec, DifferentialForm.function(parse_form("x1", n=1, angles=2).coefficient(())))
    assert not x.h_invariant()


def test_induced_model_shapes():
    cyc = induced_space(cyclic_bundle(3))
    assert (cyc.r, cyc.s, cyc.m) == (1, 1, 2)
    circ = induced_space(circle_bundle((1,), projection=(1, 0)))
    assert (circ.r, circ.s, circ.m) == (2, 1, 2)
    pt = induced_space(cyclic_bundle(1, fibre=point_fibre()))
    assert pt.dim == 2 and pt.m == 0


def test_stages_cyclic_small():
    rep = verify_reduction_in_stages(induced_space(cyclic_bundle(3)), truncation=4, seed=0)
    x, y = rep.dims()
    assert x == y and rep.passed
    assert "not a proof" in rep.label


def test_stages_point_fibre():
    rep = verify_reduction_in_stages(induced_space(cyclic_bundle(1, fibre=point_fibre())), truncation=4, seed=0)
    assert rep.passed and rep.dims()[0] == [1, 0, 0]
