from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from sympq.forms import (
    DifferentialForm,
    PolyMap,
    PolyVectorField,
    evaluate,
    exterior_derivative as d,
    exterior_power,
    interior_product,
    lie_derivative,
    merge_sign,
    pullback,
    symplectic_form,
    wedge,
)
from sympq.poly import Poly

from strategies import flow_derivative, rand_field_components, rand_form, rand_map, seeds


def test_basis_sign_conventions():
    assert merge_sign((0,), (1,)) == (1, (0, 1))
    assert merge_sign((1,), (0,)) == (-1, (0, 1))
    assert merge_sign((0,), (0,))[0] == 0
    dx, dy = DifferentialForm.dx(2, 0), DifferentialForm.dx(2, 1)
    assert wedge(dy, dx) == -wedge(dx, dy)
    assert not wedge(dx, dx)


def test_d_of_function_and_simple_forms():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    f = DifferentialForm.function(x**2 * y)
    assert d(f) == DifferentialForm(2, 1, {(0,): 2 * x * y, (1,): x**2})
    # d(x dy - y dx) = 2 dx∧dy
    a = DifferentialForm(2, 1, {(1,): x, (0,): -y})
    assert d(a) == DifferentialForm(2, 2, {(0, 1): Poly.const(2, 2)})


def test_symplectic_form_and_powers():
    w = symplectic_form(2)
    assert w.degree == 2 and len(w.components) == 2
    top = exterior_power(w, 2)
    # ω∧ω = 2 dx1∧dy1∧dx2∧dy2
    assert top.components == {(0, 1, 2, 3): Poly.const(4, 2)}


def test_evaluate_against_determinant_formula():
    dx, dy = DifferentialForm.dx(2, 0), DifferentialForm.dx(2, 1)
    area = wedge(dx, dy)
    assert evaluate(area, [0, 0], [[1, 2], [3, 4]]) == -2
    assert evaluate(DifferentialForm.function(Poly.var(2, 0) + 1), [Fraction(1, 2), 0], []) == Fraction(3, 2)


def test_interior_product_example():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    euler = PolyVectorField([x, y])
    area = wedge(DifferentialForm.dx(2, 0), DifferentialForm.dx(2, 1))
    assert interior_product(euler, area) == DifferentialForm(2, 1, {(1,): x, (0,): -y})


def test_form_validation():
    with pytest.raises(ValueError):
        DifferentialForm(2, 1, {(0, 1): Poly.const(2, 1)})
    with pytest.raises(ValueError):
        wedge(DifferentialForm.dx(2, 0), DifferentialForm.dx(3, 0))


def test_json_round_trip():
    rng = random.Random(2)
    f = rand_form(rng, 4, 2)
    assert DifferentialForm.from_json(f.to_json()) == f


# -- randomized identities (the exact algebra suite also runs these at scale) --


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_d_squared_is_zero(seed):
    rng = random.Random(seed)
    a = rand_form(rng, 4, rng.randint(0, 2), 3)
    assert not d(d(a))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_wedge_associative_and_graded_commutative(seed):
    rng = random.Random(seed)
    a, b, c = (rand_form(rng, 4, rng.randint(0, 2)) for _ in range(3))
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
    sign = -1 if (a.degree * b.degree) % 2 else 1
    assert wedge(a, b) == wedge(b, a).scale(sign)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_leibniz_rule(seed):
    rng = random.Random(seed)
    a, b = rand_form(rng, 4, rng.randint(0, 2)), rand_form(rng, 4, rng.randint(0, 1))
    if a.degree + b.degree >= 4:
        return
    sign = -1 if a.degree % 2 else 1
    assert d(wedge(a, b)) == wedge(d(a), b) + wedge(a, d(b)).scale(sign)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_cartan_formula_against_linear_flow(seed):
    rng = random.Random(seed)
    n = 4
    A = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
    v = PolyVectorField.linear(A)
    a = rand_form(rng, n, rng.randint(0, 3), 2)
    assert lie_derivative(v, a) == flow_derivative(A, a)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_interior_product_is_antiderivation(seed):
    rng = random.Random(seed)
    v = PolyVectorField(rand_field_components(rng, 4))
    a, b = rand_form(rng, 4, rng.randint(1, 2)), rand_form(rng, 4, 1)
    sign = -1 if a.degree % 2 else 1
    assert interior_product(v, wedge(a, b)) == wedge(interior_product(v, a), b) + wedge(a, interior_product(v, b)).scale(sign)
    assert not interior_product(v, interior_product(v, a)) or a.degree < 2


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_pullback_functorial_and_natural(seed):
    rng = random.Random(seed)
    f = rand_map(rng, 3, 4, 2)
    g = rand_map(rng, 4, 4, 1)
    a = rand_form(rng, 4, rng.randint(0, 2), 2)
    assert pullback(g.compose(f), a) == pullback(f, pullback(g, a))
    assert pullback(f, d(a)) == d(pullback(f, a))
    b = rand_form(rng, 4, 1, 1)
    assert pullback(f, wedge(a, b)) == wedge(pullback(f, a), pullback(f, b))
    assert pullback(PolyMap.identity(4), a) == a
