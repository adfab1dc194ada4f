from __future__ import annotations

import random
from fractions import Fraction

import pytest

from sympq.actions import (
    ActionError,
    LinearAction,
    act,
    all_builtins,
    average,
    basis_vector_fields,
    builtin,
    cyclic_action,
    finite_action,
    induced_vector_field,
    is_invariant,
    moment_map,
    torus_action,
    verify_moment_condition,
)
from sympq.forms import DifferentialForm, lie_derivative
from sympq.poly import Poly

from strategies import rand_form


@pytest.mark.parametrize("action", all_builtins(), ids=lambda a: a.name)
def test_moment_identity_on_builtins(action):
    assert verify_moment_condition(action).passed


def test_moment_identity_on_rank_two_torus():
    a = torus_action([[1, 0, 1], [0, 1, -2]], level=[Fraction(-1), 0])
    assert verify_moment_condition(a).passed


def test_moment_map_convention():
    # Φ = −½ Σ w_i |z_i|² − level, so cp1 (level −1) has Φ = 1 − ½|z|²
    phi = moment_map(builtin("cp1")).components[0]
    x1 = Poly.var(4, 0)
    assert phi.terms[(0, 0, 0, 0)] == 1
    assert phi.terms[(2, 0, 0, 0)] == Fraction(-1, 2)
    assert (phi - Poly.const(4, 1)).homogeneous_part(2) == phi - Poly.const(4, 1)
    assert x1.degree() == 1


def test_broken_moment_map_is_detected():
    a = builtin("teardrop")
    wrong = moment_map(builtin("cp1"))
    assert not verify_moment_condition(a, wrong).passed


def test_symplectic_form_is_invariant():
    for a in all_builtins():
        assert is_invariant(a, a.space.omega())


def test_induced_field_preserves_omega_and_moment_level_sets():
    a = builtin("teardrop")
    (xi,) = basis_vector_fields(a)
    assert not lie_derivative(xi, a.space.omega())
    phi = DifferentialForm.function(moment_map(a).components[0])
    assert not lie_derivative(xi, phi)


def test_finite_group_closure_and_averaging():
    z3 = cyclic_action(3)
    assert z3.group.order == 3
    rng = random.Random(0)
    f = rand_form(rng, 2, 1)
    avg = average(z3, f)
    assert is_invariant(z3, avg)
    assert average(z3, avg) == avg
    for g in z3.group.elements:
        assert act(g, avg) == avg


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
def test_cyclic_generators_have_the_right_order(k):
    assert cyclic_action(k).group.order == k


def test_errors():
    with pytest.raises(ActionError):
        cyclic_action(5)
    with pytest.raises(ActionError):
        finite_action([[[2, 0], [0, 1]]])  # not symplectic
    with pytest.raises(ActionError):
        torus_action([[1, 1]], level=[1, 2])
    with pytest.raises(ActionError):
        induced_vector_field(builtin("cp1"), [1, 2])
    with pytest.raises(ActionError):
        builtin("nonsense")
    with pytest.raises(ActionError):
        average(builtin("cp1"), DifferentialForm.constant(4, 1))


def test_json_round_trip():
    for a in all_builtins():
        assert LinearAction.from_json(a.to_json()) == a
