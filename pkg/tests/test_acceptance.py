"""Acceptance criteria 1-11, one PASS/FAIL line each (run with ``pytest -s`` to see them)."""

import math
import time

import numpy as np
import pytest
import scipy.linalg as sla

from torsionlab.generators import SplitMix64, random_chirality, random_complex, random_parity_operator
from torsionlab.rs_metric import harmonic_cohomology, mathai_wu_element, rs_metric_norm
from torsionlab.signature import eta_identity_blocks, flux_invariance, flux_variation_check
from torsionlab.suites import (
    _run,
    eta_identity_case,
    exact_identity_suite,
    float_duality_case,
    lambda_independence_case,
    rho_equals_detgr_case,
    rs_duality_case,
    rs_norm_case,
    sign_congruences,
    theta_independence_case,
)
from torsionlab.torus_model import (
    TorusConfig,
    duality_chain,
    full_cohomology_dims,
    metric_invariance,
    torus_rs_norm,
)
from torsionlab.z2complex import Chirality, variation_check

GENERIC = (0.31, 0.17, 0.23)


def report(number: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_sign_identities():
    start = time.perf_counter()
    congruences = sign_congruences(3)
    suites = [exact_identity_suite(kind, seed, 1000, 3) for seed, kind in enumerate(("diagram", "direct_sum"))]
    elapsed = time.perf_counter() - start
    failures = congruences.failures + sum(s.failures for s in suites)
    cases = [s.cases for s in suites]
    ok = failures == 0 and min(cases) >= 1000 and elapsed < 60
    report(1, ok, f"{congruences.cases} congruence tuples, exact cases {cases}, {failures} failures, {elapsed:.1f}s")


def test_criterion_02_rho_equals_graded_det():
    start = time.perf_counter()
    res = _run("rho = Det_gr", 1e-9, 200, 2002, rho_equals_detgr_case)
    elapsed = time.perf_counter() - start
    report(2, res.passed and res.cases == 200 and elapsed < 30, f"worst {res.worst:.2e} over {res.cases}, {elapsed:.1f}s")


def test_criterion_03_cut_independence():
    res = _run("cut independence", 1e-8, 100, 2003, lambda rng: lambda_independence_case(rng, 3))
    report(3, res.passed and res.cases == 100, f"worst spread {res.worst:.2e} over {res.cases}")


def test_criterion_04_eta_identity():
    res = _run("eta identity", 1e-9, 100, 2004, eta_identity_case)
    hand = eta_identity_blocks(np.array([[2.0]]), np.array([[3.0]]), -math.pi / 4)
    hand_err = abs(hand.ldet_gr - (math.log(2 / 3) - 1j * math.pi))
    ok = res.passed and res.cases == 100 and hand_err <= 1e-12
    report(4, ok, f"worst {res.worst:.2e} over {res.cases}, hand case error {hand_err:.1e}")


def test_criterion_05_variation_slope():
    rng = SplitMix64(2005)
    cx = random_complex(rng, 3)
    g = random_chirality(rng, 3)
    s0, s1 = 0.3 * rng.complex_matrix(3, 3), 0.3 * rng.complex_matrix(3, 3)

    def family(t: float) -> Chirality:
        e0, e1 = sla.expm(t * s0), sla.expm(t * s1)
        return Chirality(e1 @ g.g0 @ np.linalg.inv(e0), e0 @ g.g1 @ np.linalg.inv(e1))

    hs = [1e-2, 1e-3, 1e-4]
    residuals = [variation_check(family, cx, 0.2, h).residual for h in hs]
    slope = np.polyfit(np.log(hs), np.log(residuals), 1)[0]
    report(5, abs(slope - 2.0) <= 0.1, f"log-log slope {slope:.3f}")


@pytest.mark.parametrize("K", [1, 2])
def test_criterion_06_torus_metric_invariance(K):
    start = time.perf_counter()
    cfg = TorusConfig(K=K, a=GENERIC, h=0.8)
    inv = metric_invariance(cfg, lambda t: (t, t ** 0.5, 1 / t), list(np.linspace(1, 2, 9)))
    elapsed = time.perf_counter() - start
    st = max(abs(s) for s in inv.supertraces)
    ok = st <= 1e-12 and inv.defect <= 1e-8 and elapsed < 60
    report(6, ok, f"K={K}: supertrace {st:.1e}, defect {inv.defect:.2e}, {elapsed:.1f}s")


def test_criterion_07_flux_invariance_and_drift():
    rng = SplitMix64(2007)
    worst = 0.0
    for _ in range(10):
        n = rng.integer(2, 5)
        cx = random_complex(rng, n)
        g = random_chirality(rng, n)
        b0, b1 = random_parity_operator(rng, n, n, supertrace=0.0)
        inv = flux_invariance(cx, g, (0.2 * b0, 0.2 * b1), 0.0, list(np.linspace(-0.2, 0.2, 9)))
        worst = max(worst, inv.defect)
    cx = random_complex(rng, 4)
    g = random_chirality(rng, 4)
    b0, b1 = random_parity_operator(rng, 4, 4)
    b0 = 0.2 * b0 + (5 - 0.2 * (np.trace(b0) - np.trace(b1))) / 4 * np.eye(4)
    var = flux_variation_check(cx, g, (b0, 0.2 * b1), 0.0, 1e-4)
    drift_err = abs(var.combined_rate + var.trace_full) / abs(var.trace_full)
    ok = worst <= 1e-7 and drift_err <= 1e-3
    report(7, ok, f"worst defect {worst:.2e}, drift relative error {drift_err:.1e}")


def test_criterion_08_duality():
    exact = exact_identity_suite("duality", 2008, 300, 3)
    floats = _run("duality", 1e-10, 100, 2108, float_duality_case)
    cfg = TorusConfig(K=1, a=(0.3 + 0.1j, 0.2, -0.15j), h=0.7 + 0.2j, metric=(1, 1.3, 0.8))
    chain = duality_chain(cfg)
    ok = exact.passed and floats.passed and chain.residual <= 1e-8
    detail = f"exact {exact.cases} cases/{exact.failures} failures, float {floats.worst:.1e}, torus chain {chain.residual:.1e}"
    report(8, ok, detail)


def test_criterion_09_torus_cohomology():
    trivial = full_cohomology_dims(TorusConfig(K=1, h=1.0))
    generic = full_cohomology_dims(TorusConfig(K=1, a=GENERIC, h=1.0))
    report(9, trivial == (3, 3) and generic == (0, 0), f"a=0 {trivial}, generic {generic}")


def test_criterion_10_ray_singer():
    rng = SplitMix64(2010)
    mw = 0.0
    for _ in range(50):
        cx = random_complex(rng, rng.integer(1, 5), metric=True)
        mw = max(mw, abs(rs_metric_norm(mathai_wu_element(cx), cx, harmonic_cohomology(cx)) - 1))
    herm = abs(torus_rs_norm(TorusConfig(K=1, a=GENERIC, h=0.6)).norm - 1)
    general = _run("Ray-Singer norm", 1e-7, 50, 2110, rs_norm_case)
    dual = _run("Ray-Singer duality", 1e-9, 50, 2210, rs_duality_case)
    ok = mw <= 1e-10 and herm <= 1e-8 and general.passed and general.cases == 50 and dual.passed
    detail = f"self-test {mw:.1e}, Hermitian torus {herm:.1e}, general {general.worst:.1e}, duality {dual.worst:.1e}"
    report(10, ok, detail)


def test_criterion_11_angle_independence():
    res = _run("angle independence", 1e-10, 100, 2011, theta_independence_case)
    report(11, res.passed and res.cases == 100, f"worst {res.worst:.2e} over {res.cases}")
