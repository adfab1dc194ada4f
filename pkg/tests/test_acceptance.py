"""Acceptance criteria 1–11.

Each test prints one ``CRITERION n: PASS|FAIL`` line with the measured
quantities and wall time, at the tolerances and budgets stated for the
criterion.  Run ``pytest tests/test_acceptance.py -v`` to see the lines.
"""

from __future__ import annotations

import math
import random
import time
from contextlib import contextmanager

import pytest

from sympq.actions import all_builtins, builtin, verify_moment_condition
from sympq.forms import PolyVectorField, exterior_derivative as d
from sympq.forms import lie_derivative, pullback, wedge
from sympq.homotopy import chain_homotopy_check, equivariance_identities_check, poincare_verify
from sympq.induction import appendix_report, cyclic_bundle, induced_space, verify_reduction_in_stages
from sympq.integration import (
    cone_scaling_experiment,
    dh_volume_float,
    integrate,
    random_stokes_forms,
    stokes_check,
    symplectic_class_pairing,
    volume_finiteness,
)
from sympq.quotient import verify_restriction_lemma

from strategies import flow_derivative, rand_form, rand_map, random_equivariant_homotopy

pytestmark = pytest.mark.acceptance

CASES = 1000


@contextmanager
def criterion(capsys, number: int, budget: float):
    """Time the block, then print one verdict line (outside pytest's capture)."""
    state: dict = {"ok": False, "detail": ""}
    t0 = time.perf_counter()
    try:
        yield state
    finally:
        elapsed = time.perf_counter() - t0
        ok = state["ok"] and elapsed < budget
        with capsys.disabled():
            print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} {state['detail']} "
                  f"[{elapsed:.1f}s / budget {budget:.0f}s]")
    assert state["ok"], state["detail"]
    assert elapsed < budget, f"over budget: {elapsed:.1f}s > {budget}s"


def test_criterion_01_exact_algebra(capsys):
    with criterion(capsys, 1, 60) as st:
        rng = random.Random(101)
        bad = {"d^2": 0, "wedge": 0, "cartan": 0, "pullback": 0}
        for _ in range(CASES):
            a = rand_form(rng, 4, rng.randint(0, 2), 3)
            if d(d(a)):
                bad["d^2"] += 1
            x, y, z = (rand_form(rng, 4, rng.randint(0, 2)) for _ in range(3))
            sign = -1 if (x.degree * y.degree) % 2 else 1
            if wedge(wedge(x, y), z) != wedge(x, wedge(y, z)) or wedge(x, y) != wedge(y, x).scale(sign):
                bad["wedge"] += 1
            A = [[rng.randint(-2, 2) for _ in range(4)] for _ in range(4)]
            b = rand_form(rng, 4, rng.randint(0, 3), 2)
            if lie_derivative(PolyVectorField.linear(A), b) != flow_derivative(A, b):
                bad["cartan"] += 1
            f, g = rand_map(rng, 3, 4, 2), rand_map(rng, 4, 4, 1)
            c = rand_form(rng, 4, rng.randint(0, 2), 2)
            if pullback(g.compose(f), c) != pullback(f, pullback(g, c)) or pullback(f, d(c)) != d(pullback(f, c)):
                bad["pullback"] += 1
        st["ok"] = not any(bad.values())
        st["detail"] = f"{CASES} cases each, failures {bad}"


def test_criterion_02_moment_identity(capsys):
    with criterion(capsys, 2, 1) as st:
        reports = {a.name: verify_moment_condition(a).passed for a in all_builtins()}
        st["ok"] = all(reports.values())
        st["detail"] = f"exact dPhi^xi = i(xi_M)omega: {reports}"


def test_criterion_03_restriction_lemma(capsys):
    with criterion(capsys, 3, 300) as st:
        reps = [verify_restriction_lemma(a, forms=500, points=100, seed=3) for a in all_builtins()]
        st["ok"] = all(r.passed for r in reps)
        st["detail"] = "; ".join(f"{r.action}: {r.basic_forms} basic/{r.ideal_forms} ideal, "
                                 f"{r.evaluations} evaluations, {'ok' if r.passed else 'FAILED'}" for r in reps)


def test_criterion_04_chain_homotopy(capsys):
    with criterion(capsys, 4, 300) as st:
        rng = random.Random(404)
        actions = [builtin("cone11"), builtin("zk-cone"), builtin("teardrop")]
        chain_bad = equiv_bad = 0
        for case in range(CASES):
            action = actions[case % 3]
            F = random_equivariant_homotopy(action, rng)
            gamma = rand_form(rng, action.dim, rng.randint(0, action.dim), 1)
            chain_bad += not chain_homotopy_check(F, gamma)
            equiv_bad += not all(equivariance_identities_check(F, gamma))
        st["ok"] = chain_bad == 0 and equiv_bad == 0
        st["detail"] = f"{CASES} pairs: chain-homotopy failures {chain_bad}, equivariance failures {equiv_bad}"


def test_criterion_05_poincare_lemma(capsys):
    with criterion(capsys, 5, 600) as st:
        out = {}
        for name in ("cone11", "zk-cone"):
            rep = poincare_verify(builtin(name), truncation=8, seed=5)
            trivial = rep.betti[0] == 1 and not any(rep.betti[1:])
            out[name] = (rep.passed and trivial and rep.stable, rep.betti)
        st["ok"] = all(v[0] for v in out.values())
        st["detail"] = "D=8, stable at D=10: " + ", ".join(f"{n} betti {b}" for n, (_, b) in out.items())


def test_criterion_06_reduction_in_stages(capsys):
    with criterion(capsys, 6, 600) as st:
        rep = verify_reduction_in_stages(induced_space(cyclic_bundle(3)), truncation=6, seed=6)
        x, y = rep.dims()
        st["ok"] = rep.passed and x == y
        st["detail"] = f"G=S1, H=Z3, F=C at D=6: dims X {x}, Y {y}, bijective {rep.bijective}, chain map {rep.chain_map}"


def test_criterion_07_appendix(capsys):
    with criterion(capsys, 7, 300) as st:
        rep = appendix_report(cases=200, seed=7)
        neg = all(b["negative_test"]["differs"] for b in rep["bundles"].values())
        st["ok"] = rep["passed"] and neg
        st["detail"] = f"200-case batches on {len(rep['bundles'])} bundles, negative test e.f* != id: {neg}"


def test_criterion_08_stokes(capsys):
    with criterion(capsys, 8, 600) as st:
        worst_q = worst_mc = 0.0
        for name in ("teardrop", "cp1"):
            for beta in random_stokes_forms(name, 20, seed=8):
                res = stokes_check(name, beta, mc_samples=10**6, seed=8)
                worst_q = max(worst_q, res.ratio)
                worst_mc = max(worst_mc, res.mc_ratio)
        st["ok"] = worst_q < 1e-6 and worst_mc < 1e-3
        st["detail"] = f"40 forms: worst quadrature ratio {worst_q:.2e} (<1e-6), worst MC ratio {worst_mc:.2e} (<1e-3)"


def test_criterion_09_symplectic_class(capsys):
    with criterion(capsys, 9, 300) as st:
        parts = []
        ok = True
        for name in ("cp1", "teardrop"):
            a = builtin(name)
            res = integrate(a, a.space.omega(), mc_samples=1 << 16, seed=9)
            oracle = dh_volume_float(a)
            gap = abs(res.value - oracle) / oracle
            lo, hi = res.interval
            top = symplectic_class_pairing(a, 1, mc_samples=1 << 14, seed=9)
            ok &= gap < 5e-3 and lo > 0 and res.agree and top.positive
            parts.append(f"{name}: {res.value:.10f} vs DH {oracle:.10f} (gap {gap:.1e}, interval [{lo:.6f}, {hi:.6f}])")
        st["ok"] = ok
        st["detail"] = "; ".join(parts)


def test_criterion_10_cone_scaling(capsys):
    with criterion(capsys, 10, 300) as st:
        reps = {n: cone_scaling_experiment(n, K=16) for n in ("teardrop", "zk-cone")}
        st["ok"] = all(abs(r.slope - r.expected) <= 0.05 for r in reps.values())
        st["detail"] = ", ".join(f"{n}: slope {r.slope:.4f} (expected {r.expected:g})" for n, r in reps.items())


def test_criterion_11_volume(capsys):
    with criterion(capsys, 11, 120) as st:
        rep = volume_finiteness("teardrop", 32)
        last = rep.relative_increments[-1]
        st["ok"] = rep.monotone and last < 1e-3
        st["detail"] = (f"monotone {rep.monotone}, relative increment at k=32 {last:.2e} (<1e-3), "
                        f"limit {rep.total:.10f} vs pi {math.pi:.10f}")
