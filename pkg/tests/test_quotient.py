from __future__ import annotations

import random
from fractions import Fraction

import pytest

from sympq import linalg
from sympq.actions import builtin, moment_map
from sympq.dsl import parse_form
from sympq.forms import DifferentialForm, exterior_derivative, wedge
from sympq.quotient import (
    MembershipError,
    QuotientComplex,
    cohomology,
    complex_for,
    in_ideal,
    invariant_forms,
    is_phi_basic,
    quotient_basis,
    restrict_to_stratum,
    verify_restriction_lemma,
)


@pytest.fixture(scope="module")
def cone11():
    return builtin("cone11")


def test_omega_is_basic_and_phi_is_in_the_ideal(cone11):
    omega = cone11.space.omega()
    assert is_phi_basic(cone11, omega)
    assert not in_ideal(cone11, omega)
    phi = DifferentialForm.function(moment_map(cone11).components[0])
    assert in_ideal(cone11, phi)
    # dΦ and Φ·ω vanish on Z as well
    assert in_ideal(cone11, exterior_derivative(phi))
    assert in_ideal(cone11, wedge(phi, omega))


def test_connection_like_form_is_not_basic(cone11):
    alpha = parse_form("x1*dy1 - y1*dx1 - x2*dy2 + y2*dx2", action=cone11)
    cert = is_phi_basic(cone11, alpha)
    assert not cert and cert.evidence and cert.evidence[0][1] != 0


def test_non_invariant_inputs(cone11):
    x1 = parse_form("x1", action=cone11)
    assert not is_phi_basic(cone11, x1)
    with pytest.raises(MembershipError):
        in_ideal(cone11, x1)


def test_finite_group_membership():
    z3 = builtin("zk-cone")
    inv = invariant_forms(z3, 1, 3)
    assert inv
    for f in inv:
        assert is_phi_basic(z3, f)
        assert not in_ideal(z3, f)  # Z is all of C: the ideal is zero


def test_invariant_forms_have_the_requested_weight():
    a = builtin("teardrop")
    for f in invariant_forms(a, 1, 4):
        for idx, c in f.components.items():
            for e in c.terms:
                assert sum(e) + len(idx) == 4


@pytest.mark.parametrize("name,betti", [("cone11", [1, 0, 0, 0, 0]), ("zk-cone", [1, 0, 0]),
                                        ("cp1", [1, 0, 1, 0, 0]), ("teardrop", [1, 0, 1, 0, 0])])
def test_truncated_cohomology(name, betti):
    rep = cohomology(builtin(name), 4)
    assert rep.betti == betti
    assert rep.stable


def test_quotient_complex_is_a_complex(cone11):
    cx = complex_for(cone11, 4, 0)
    for k in range(cone11.dim):
        for cls in cx.basis(k):
            dd = cx.differential(cx.differential(cls))
            assert cx.equal(dd, cx.make_class(DifferentialForm.zero(cone11.dim, min(k + 2, cone11.dim))))


def test_basis_classes_are_independent_mod_ideal(cone11):
    cx = complex_for(cone11, 4, 0)
    basis = quotient_basis(cone11, 1, 4, 0)
    assert len(basis) == cx.dimension(1)
    for cls in basis:
        assert is_phi_basic(cone11, cls.representative)
        assert not in_ideal(cone11, cls.representative)


def test_span_membership_helpers(cone11):
    cx = QuotientComplex(cone11, 4, 0)
    rng = random.Random(4)
    for _ in range(5):
        b = cx.random_basic(2, rng)
        i = cx.random_ideal(2, rng)
        assert cx.in_basic_span(b)
        assert cx.in_ideal_span(i)
        assert cx.in_basic_span(b + i)
    alpha = parse_form("x1*dy1 - y1*dx1 - x2*dy2 + y2*dx2", action=cone11)
    assert not cx.in_basic_span(alpha)


def test_restriction_to_the_singular_stratum():
    a = builtin("teardrop")
    omega = a.space.omega()
    data = restrict_to_stratum(a, omega, 0, count=5)
    assert data.horizontal
    phi = DifferentialForm.function(moment_map(a).components[0])
    assert restrict_to_stratum(a, phi, 0, count=5).vanishes


@pytest.mark.parametrize("name", ["cp1", "teardrop", "cone11", "zk-cone"])
def test_restriction_lemma_small_batch(name):
    rep = verify_restriction_lemma(builtin(name), forms=40, points=10)
    assert rep.passed


def test_linalg_helpers():
    rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert linalg.rank(rows) == 2
    null = linalg.nullspace(rows, 3)
    assert len(null) == 1
    assert linalg.mat_vec(rows, null[0]) == [0, 0, 0]
    assert linalg.in_span([1, 3, 4], rows, 3)
    assert not linalg.in_span([0, 0, 1], rows, 3)
    assert linalg.independent_subset(rows, 3) == [0, 2]
    ann = linalg.annihilator([[1, 0, 0]], 3)
    assert linalg.in_span_by(ann, [Fraction(5), 0, 0])
    assert not linalg.in_span_by(ann, [0, 1, 0])
