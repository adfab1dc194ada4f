from __future__ import annotations

import math

import numpy as np
import pytest

from sympq.actions import builtin, torus_action
from sympq.dsl import parse_form
from sympq.forms import DifferentialForm
from sympq.integration import (
    CutoffFamily,
    IntegrationError,
    chart_for,
    cone_scaling_experiment,
    dh_volume_float,
    duistermaat_heckman_volume,
    integrate,
    liouville_riemannian_check,
    random_stokes_forms,
    stokes_check,
    symplectic_class_pairing,
    volume_finiteness,
)


def test_duistermaat_heckman_oracle_values():
    assert duistermaat_heckman_volume("cp1") == 2  # 2π
    assert duistermaat_heckman_volume("teardrop") == 1  # π: the Z_2 orbifold halves nothing, the weight 2 does
    # CP^2 from S^5: (2π)^2 c^2 / 2! with c = 1
    assert duistermaat_heckman_volume(torus_action([[1, 1, 1]], [-1])) == 2
    # volume scales linearly with the level on a 2-dimensional quotient
    assert duistermaat_heckman_volume(torus_action([[1, 1]], [-3])) == 6
    with pytest.raises(IntegrationError):
        duistermaat_heckman_volume("cone11")


def test_cutoff_profile():
    cut = CutoffFamily(2.0)
    x = np.linspace(0, 3, 3001)
    p = cut.profile(x)
    assert np.all(p[x <= 0.5] == 0) and np.all(p[x >= 2.0] == 1)
    assert np.all(np.diff(p) >= 0)
    # C^1 across the knots: the derivative vanishes there
    assert cut.derivative(0.5) == 0 and cut.derivative(2.0) == 0
    assert cut.cuts(4) == [0.125, 0.5]


@pytest.mark.parametrize("name", ["cp1", "teardrop"])
def test_liouville_density_matches_riemannian(name):
    assert liouville_riemannian_check(name) < 1e-12


@pytest.mark.parametrize("name", ["cp1", "teardrop"])
def test_integral_of_omega(name):
    a = builtin(name)
    res = integrate(a, a.space.omega(), mc_samples=1 << 14, seed=3)
    assert abs(res.value - dh_volume_float(a)) < 1e-9
    assert res.agree and res.ambient_bound_holds
    lo, hi = res.interval
    assert lo <= res.value <= hi


def test_integrate_rejects_bad_input():
    with pytest.raises(IntegrationError):
        integrate("cp1", parse_form("dx1", n=2))
    with pytest.raises(IntegrationError):
        integrate("cone11", builtin("cone11").space.omega())
    assert integrate("cp1", DifferentialForm.zero(4, 2)).value == 0


def test_ideal_forms_integrate_to_zero():
    a = builtin("cp1")
    # Φ·ω vanishes on Z
    phi = parse_form("1 - (1/2)*(x1^2 + y1^2 + x2^2 + y2^2)", n=2)
    from sympq.forms import wedge

    res = integrate(a, wedge(phi, a.space.omega()), mc_samples=0)
    assert abs(res.value) < 1e-12


@pytest.mark.parametrize("name", ["cp1", "teardrop"])
def test_stokes_quadrature(name):
    for beta in random_stokes_forms(name, 3, seed=5):
        res = stokes_check(name, beta, k=2.0)
        assert res.ratio < 1e-6 and res.normalizer > 0


def test_stokes_monte_carlo_small():
    beta = random_stokes_forms("teardrop", 1, seed=2)[0]
    res = stokes_check("teardrop", beta, mc_samples=1 << 14, seed=2)
    assert res.mc_ratio is not None and res.mc_ratio < 1e-2


def test_stokes_needs_compact_support_to_vanish():
    # without the cutoff a non-closed form on the non-compact cone would not integrate to zero;
    # with it the boundary term is exactly absorbed
    beta = random_stokes_forms("zk-cone", 1, seed=1)[0]
    assert stokes_check("zk-cone", beta, k=1.0, inside=True).ratio < 1e-6


def test_volume_finiteness_teardrop():
    rep = volume_finiteness("teardrop", 32)
    assert rep.monotone
    assert rep.relative_increments[-1] < 1e-3
    assert abs(rep.total - math.pi) < 1e-9
    assert rep.to_csv().startswith("k,volume,relative_increment")
    with pytest.raises(IntegrationError):
        volume_finiteness("cone11")


@pytest.mark.parametrize("name", ["teardrop", "zk-cone"])
def test_cone_scaling(name):
    for smooth in (True, False):
        rep = cone_scaling_experiment(name, K=8, smooth=smooth)
        assert abs(rep.slope - rep.expected) < 0.05
    with pytest.raises(IntegrationError):
        cone_scaling_experiment("cp1")


def test_pairing():
    rep = symplectic_class_pairing("cp1", 1, mc_samples=1 << 12, seed=1)
    assert rep.positive and rep.relative_dh_gap < 5e-3
    with pytest.raises(IntegrationError):
        symplectic_class_pairing("cp1", 2)


def test_charts():
    assert chart_for("cp1").compact and not chart_for("cp1").singular
    assert chart_for("teardrop").singular
    assert not chart_for("zk-cone").compact
    with pytest.raises(IntegrationError):
        chart_for("cone11")
