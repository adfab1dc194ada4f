from __future__ import annotations

from fractions import Fraction

import pytest

from sympq.actions import builtin, torus_action
from sympq.forms import PolyVectorField
from sympq.stratification import (
    StratificationError,
    fixed_subspace,
    hermite_normal_form,
    in_lattice,
    on_fibre,
    orbit_type,
    sample_points,
    strata_of_Z,
    tangent_basis,
)
from sympq.actions import moment_map

EXPECTED = {
    # name: [(stabilizer label, dim of stratum in Z, dim of its image in X)] lower strata first
    "cp1": [("trivial", 3, 2)],
    "teardrop": [("Z_2", 1, 0), ("trivial", 3, 2)],
    "cone11": [("S^1", 0, 0), ("trivial", 3, 2)],
    "zk-cone": [("order 3", 0, 0), ("trivial", 2, 2)],
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_strata_of_builtins(name):
    s = strata_of_Z(builtin(name))
    got = [(x.stabilizer.label, x.dimension, x.quotient_dimension) for x in s.strata]
    assert got == EXPECTED[name]
    assert s.principal.is_principal
    for x in s.lower():
        assert s.leq(x.id, s.principal.id)


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_samples_lie_on_their_stratum(name):
    a = builtin(name)
    s = strata_of_Z(a)
    for st in s.strata:
        for smp in sample_points(a, s, st, 5, seed=3):
            assert on_fibre(a, smp.point)
            assert s.contains(st, smp.point)
            assert s.locate(smp.point).id == st.id
            assert len(smp.tangent_basis) == st.dimension
            assert all(isinstance(x, Fraction) for x in smp.point)


def test_tangent_vectors_are_tangent_to_the_fibre():
    a = builtin("teardrop")
    s = strata_of_Z(a)
    phi = moment_map(a).components[0]
    grads = [phi.diff(i) for i in range(a.dim)]
    for smp in sample_points(a, s, s.principal, 5, seed=1):
        for v in smp.tangent_basis:
            assert sum(g.evaluate(smp.point) * vi for g, vi in zip(grads, v)) == 0


def test_orbit_types_and_fixed_subspaces():
    a = builtin("teardrop")
    one = Fraction(1)
    assert orbit_type(a, [0, 0, one, 0]).label == "Z_2"
    assert orbit_type(a, [one, 0, one, 0]).label == "trivial"
    z3 = builtin("zk-cone")
    assert orbit_type(z3, [0, 0]).label == "order 3"
    assert len(fixed_subspace(z3, [0, 0])) == 0
    assert len(fixed_subspace(z3, [1, 0])) == 2


def test_tangent_basis_at_principal_point_contains_orbit_direction():
    a = builtin("cp1")
    p = [Fraction(1), 0, Fraction(1), 0]
    basis = tangent_basis(a, p)
    assert len(basis) == 3
    from sympq.actions import induced_vector_field
    from sympq import linalg

    xi = induced_vector_field(a, [1]).at(p)
    assert linalg.in_span(xi, basis, 4)
    assert isinstance(induced_vector_field(a, [1]), PolyVectorField)


def test_degenerate_zero_fibre():
    a = torus_action([[1, 1, 0], [0, 1, 1]], level=[0, 0])
    s = strata_of_Z(a)
    assert len(s.strata) == 1 and s.principal.dimension == 0


def test_locate_rejects_points_off_the_fibre():
    a = builtin("cp1")
    with pytest.raises(StratificationError):
        strata_of_Z(a).locate([Fraction(5), 0, 0, 0])


def test_lattice_helpers():
    h = hermite_normal_form([[2, 4], [0, 6]], 2)
    assert in_lattice([2, 10], h)
    assert not in_lattice([1, 0], h)
