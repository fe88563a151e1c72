import cmath
import math

import numpy as np
import pytest

from torsionlab.generators import SplitMix64, isometric_chirality, random_acyclic, random_complex
from torsionlab.rs_metric import (
    harmonic_cohomology,
    laplacian,
    mathai_wu_element,
    rs_duality_check,
    rs_metric_log_norm,
    rs_metric_norm,
    rs_norm_of_rho_an,
    rs_window_torsion,
)
from torsionlab.signature import build_signature
from torsionlab.torus_model import TorusConfig, build_mode_complex
from torsionlab.z2complex import Chirality, PreconditionError, Z2Complex, direct_sum


def one_by_one(phase=0.0):
    one = np.eye(1, dtype=complex)
    return Z2Complex(2 * cmath.exp(1j * phase) * one, 0 * one, one, one), Chirality(one, one)


def test_needs_metric():
    with pytest.raises(PreconditionError):
        laplacian(Z2Complex(np.eye(1, dtype=complex), np.zeros((1, 1), complex)))


def test_laplacian_zero_differential():
    cx = random_complex(SplitMix64(1), 2, 2, 0, 0, metric=True)
    lap = laplacian(cx)
    assert np.allclose(lap.delta0, 0) and np.allclose(lap.delta1, 0)
    assert harmonic_cohomology(cx).dims == (2, 2)


def test_laplacian_one_by_one():
    lap = laplacian(one_by_one()[0])
    assert np.allclose(lap.delta0, [[4]]) and np.allclose(lap.delta1, [[4]])


def test_laplacian_is_signature_square_on_hermitian_mode():
    mode = build_mode_complex((1, 0, 1), TorusConfig(a=(0.2, 0.3, 0.1), h=0.6, metric=(1.0, 1.4, 0.7)))
    lap = laplacian(mode.complex)
    sig = build_signature(mode.complex, mode.gamma)
    scale = np.linalg.norm(lap.delta0)
    assert np.linalg.norm(lap.delta0 - sig.square(0)) <= 1e-12 * scale
    assert np.linalg.norm(lap.delta1 - sig.square(1)) <= 1e-12 * scale


def test_window_torsion_one_by_one():
    cx, _ = one_by_one()
    assert rs_window_torsion(cx) == pytest.approx(0.5, rel=1e-14)
    assert rs_window_torsion(cx, 0.0, 1.0) == 1.0


def test_window_torsion_of_direct_sum():
    rng = SplitMix64(4)
    a, b = random_complex(rng, 3, metric=True), random_complex(rng, 2, metric=True)
    assert rs_window_torsion(direct_sum(a, b)) == pytest.approx(rs_window_torsion(a) * rs_window_torsion(b), rel=1e-12)


def test_mathai_wu_self_test():
    rng = SplitMix64(12)
    for _ in range(10):
        cx = random_complex(rng, rng.integer(1, 5), metric=True)
        mw = mathai_wu_element(cx)
        assert abs(rs_metric_norm(mw, cx, harmonic_cohomology(cx)) - 1) < 1e-10


def test_mathai_wu_zero_differential_has_unit_coefficient():
    one = np.eye(2, dtype=complex)
    cx = Z2Complex(0 * one, 0 * one, one, one)
    assert abs(abs(mathai_wu_element(cx).as_complex()) - 1) < 1e-14


def test_mathai_wu_acyclic_coefficient_is_inverse_torsion():
    rng = SplitMix64(7)
    cx = random_acyclic(rng, 4, metric=True)
    coeff = mathai_wu_element(cx).as_complex()
    assert abs(abs(coeff) * rs_window_torsion(cx) - 1) < 1e-12


def test_rs_norm_independent_of_cut():
    rng = SplitMix64(9)
    cx = random_complex(rng, 4, metric=True)
    co = harmonic_cohomology(cx)
    x = co.element(1.3 - 0.4j)
    lap = laplacian(cx)
    vals = np.sort(np.linalg.eigvals(np.linalg.solve(cx.G0, cx.G0 @ lap.delta0)).real)
    vals = vals[vals > 1e-8]
    cuts = [0.0] + [0.5 * (a + b) for a, b in zip(vals, vals[1:]) if b > 1.01 * a][:2]
    logs = [rs_metric_log_norm(x, cx, co, c) for c in cuts]
    assert len(logs) >= 2
    assert max(abs(v - logs[0]) for v in logs) < 1e-9


@pytest.mark.parametrize("phase", [0.0, 0.9])
def test_norm_of_rho_an_one_by_one(phase):
    res = rs_norm_of_rho_an(*one_by_one(phase))
    assert res.eta_imag == 0.0
    assert abs(res.norm - 1) < 1e-12
    assert abs(res.ratio - 1) < 1e-7


def test_norm_of_rho_an_hermitian_mode():
    mode = build_mode_complex((0, 1, 1), TorusConfig(a=(0.25, 0.1, 0.4), h=1.0))
    res = rs_norm_of_rho_an(mode.complex, mode.gamma)
    assert abs(res.norm - 1) < 1e-10


def test_rs_duality_self_dual_and_small_cases():
    one = np.eye(2, dtype=complex)
    zero = Z2Complex(0 * one, 0 * one, one, one)
    assert rs_duality_check(zero, Chirality(one, one)) == 0.0
    assert rs_duality_check(*one_by_one()) < 1e-14


def test_rs_duality_random_three_plus_three():
    rng = SplitMix64(31)
    for _ in range(5):
        cx = random_complex(rng, 3, metric=True)
        assert rs_duality_check(cx, isometric_chirality(rng, cx)) < 1e-9
