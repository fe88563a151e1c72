import math

import numpy as np
import pytest
import scipy.linalg as sla

from torsionlab.detline import fuse_graded, graded_element
from torsionlab.generators import SplitMix64, random_chirality, random_complex
from torsionlab.linalg_core import as_exact, det, gaussian, inverse
from torsionlab.z2complex import (
    Chirality,
    Z2Complex,
    alpha_on_cohomology,
    c_gamma,
    cohomology,
    decompose,
    direct_sum,
    direct_sum_chirality,
    direct_sum_cohomology,
    dual_chirality,
    dual_cohomology,
    dual_complex,
    format_complex,
    parse_complex,
    phi_iso,
    refined_torsion,
    supertrace,
    variation_check,
)


def ex(rows):
    return as_exact(rows)


def one_by_one(exact=True):
    if exact:
        return Z2Complex(ex([[2]]), ex([[0]])), Chirality(ex([[1]]), ex([[1]]))
    one = np.eye(1, dtype=complex)
    return Z2Complex(2 * one, 0 * one, one, one), Chirality(one, one)


def test_complex_rejects_nonzero_square():
    with pytest.raises(ValueError):
        Z2Complex(np.eye(2, dtype=complex), np.eye(2, dtype=complex))


def test_chirality_rejects_non_involution():
    with pytest.raises(ValueError):
        Chirality(np.eye(2, dtype=complex), 2 * np.eye(2, dtype=complex))


def test_decompose_zero_differential():
    cx = Z2Complex(ex([[0, 0], [0, 0]]), ex([[0, 0], [0, 0]]))
    dec = decompose(cx)
    assert dec.dims(0) == (0, 2, 0)
    assert dec.dims(1) == (0, 2, 0)


def test_decompose_one_by_one():
    cx, _ = one_by_one()
    dec = decompose(cx)
    assert dec.dims(0) == (0, 0, 1)
    assert dec.dims(1) == (1, 0, 0)
    assert cohomology(cx).dims == (0, 0)


def test_decompose_acyclic_two_plus_two():
    cx = random_complex(SplitMix64(4), 2, 2, 1, 1, exact=True)
    dec = decompose(cx)
    for k in (0, 1):
        b, h, a = dec.dims(k)
        assert h == 0 and b <= 1 and a <= 1
    dec.validate(cx)


def test_phi_on_zero_differential_keeps_coefficient():
    cx = Z2Complex(ex([[0, 0], [0, 0]]), ex([[0, 0], [0, 0]]))
    c = graded_element(gaussian(3, 1), 2, 2)
    assert phi_iso(cx, c).coeff == gaussian(3, 1)


def test_phi_of_unit_on_one_by_one():
    # A0 = C0 and B1 = d(A0): the defining equation gives 2 times (-1)^N(1, 0) = -2
    cx, _ = one_by_one()
    assert phi_iso(cx, graded_element(gaussian(1), 1, 1)).coeff == gaussian(-2)


def test_phi_commutes_with_direct_sums_up_to_sign():
    # the sign is (-1)^(rk d1(C) dim H(D) + dim H(C) rk d1(D)); it vanishes for torsion
    # elements, whose complexes have even total cohomology
    rng = SplitMix64(11)
    for _ in range(40):
        a = random_complex(rng, rng.integer(0, 3), rng.integer(0, 3), exact=True)
        b = random_complex(rng, rng.integer(0, 3), rng.integer(0, 3), exact=True)
        ca, cb = cohomology(a), cohomology(b)
        x = graded_element(gaussian(1, 2), a.n0, a.n1)
        y = graded_element(gaussian(-3, 1), b.n0, b.n1)
        lhs = phi_iso(direct_sum(a, b), fuse_graded(x, y), cohom=direct_sum_cohomology(ca, cb))
        rhs = fuse_graded(phi_iso(a, x, cohom=ca), phi_iso(b, y, cohom=cb))
        ra, rb = decompose(a).dims(1)[2], decompose(b).dims(1)[2]
        sign = (-1) ** (ra * sum(cb.dims) + sum(ca.dims) * rb)
        assert lhs.coeff == rhs.coeff * sign


@pytest.mark.parametrize("n0, expected", [(1, -1), (2, -1), (3, 1)])
def test_c_gamma_identity_chirality(n0, expected):
    eye = ex(np.eye(n0, dtype=int))
    cx = Z2Complex(ex(np.zeros((n0, n0), dtype=int)), ex(np.zeros((n0, n0), dtype=int)))
    assert c_gamma(cx, Chirality(eye, eye)).coeff == gaussian(expected)


def test_c_gamma_independent_of_c0():
    rng = SplitMix64(2)
    cx = random_complex(rng, 3, 3, exact=True)
    g = random_chirality(rng, 3, exact=True)
    ref = c_gamma(cx, g).coeff
    for s in (gaussian(2), gaussian(0, 5), gaussian(-1, 3)):
        assert c_gamma(cx, g, s).coeff == ref


def test_refined_torsion_one_by_one():
    cx, g = one_by_one()
    assert refined_torsion(cx, g).coeff == gaussian(2)
    fcx, fg = one_by_one(exact=False)
    assert abs(refined_torsion(fcx, fg).as_complex() - 2) < 1e-14


def test_refined_torsion_zero_differential():
    rng = SplitMix64(8)
    g = random_chirality(rng, 3, exact=True)
    cx = Z2Complex(ex(np.zeros((3, 3), dtype=int)), ex(np.zeros((3, 3), dtype=int)))
    # R(3) = 6 is even; phi is the identity on the standard reference
    assert refined_torsion(cx, g).coeff == gaussian(1) / det(g.g0)


def test_refined_torsion_of_direct_sum():
    rng = SplitMix64(5)
    for _ in range(20):
        n, m = rng.integer(1, 3), rng.integer(1, 3)
        a, b = random_complex(rng, n, exact=True), random_complex(rng, m, exact=True)
        ga, gb = random_chirality(rng, n, exact=True), random_chirality(rng, m, exact=True)
        ca, cb = cohomology(a), cohomology(b)
        whole = refined_torsion(direct_sum(a, b), direct_sum_chirality(ga, gb), cohom=direct_sum_cohomology(ca, cb))
        parts = fuse_graded(refined_torsion(a, ga, cohom=ca), refined_torsion(b, gb, cohom=cb))
        assert whole.coeff == parts.coeff


def test_supertrace_examples():
    eye = np.eye(2)
    assert supertrace(eye, eye) == 0
    assert supertrace(np.diag([1.0, 2.0]), np.zeros((2, 2))) == 3


def test_dual_of_zero_complex():
    cx = Z2Complex(ex([[0]]), ex([[0]]))
    dual = dual_complex(cx)
    assert all(x == gaussian(0) for x in dual.d0.reshape(-1))
    assert all(x == gaussian(0) for x in dual.d1.reshape(-1))


def test_duality_one_by_one():
    cx, g = one_by_one()
    co = cohomology(cx)
    rho = refined_torsion(cx, g, cohom=co)
    rho_dual = refined_torsion(dual_complex(cx), dual_chirality(g), cohom=dual_cohomology(cx, co))
    assert rho_dual.coeff == gaussian(2)
    assert alpha_on_cohomology(rho).coeff == rho_dual.coeff


def test_duality_random_three_plus_three():
    rng = SplitMix64(33)
    for _ in range(10):
        cx = random_complex(rng, 3, exact=True)
        g = random_chirality(rng, 3, exact=True)
        co = cohomology(cx)
        rho = refined_torsion(cx, g, cohom=co)
        rho_dual = refined_torsion(dual_complex(cx), dual_chirality(g), cohom=dual_cohomology(cx, co))
        assert alpha_on_cohomology(rho).coeff == rho_dual.coeff


def _conjugated_family(g: Chirality, s0: np.ndarray, s1: np.ndarray):
    def family(t: float) -> Chirality:
        e0, e1 = sla.expm(t * s0), sla.expm(t * s1)
        return Chirality(e1 @ g.g0 @ np.linalg.inv(e0), e0 @ g.g1 @ np.linalg.inv(e1))

    return family


def test_variation_constant_family():
    rng = SplitMix64(1)
    cx = random_complex(rng, 2)
    g = random_chirality(rng, 2)
    res = variation_check(lambda t: g, cx, 0.0, 1e-3)
    assert res.residual == 0.0


def test_variation_conjugation_family_is_second_order():
    rng = SplitMix64(21)
    cx = random_complex(rng, 2, 2, 1, 1)
    g = random_chirality(rng, 2)
    family = _conjugated_family(g, 0.3 * rng.complex_matrix(2, 2), 0.3 * rng.complex_matrix(2, 2))
    hs = [1e-2, 1e-3]
    res = [variation_check(family, cx, 0.2, h).residual for h in hs]
    slope = math.log(res[0] / res[1]) / math.log(hs[0] / hs[1])
    assert abs(slope - 2.0) < 0.1


def test_variation_scaling_family_slope():
    # g0 -> e^t g0 scales det(g0) by e^t, so rho ~ 1/det(g0) has log-slope -1
    cx, g = one_by_one(exact=False)
    family = lambda t: Chirality(math.exp(t) * g.g0, math.exp(-t) * g.g1)  # noqa: E731
    res = variation_check(family, cx, 0.0, 1e-4)
    assert abs(res.derivative / res.rho - (-1.0)) < 1e-7
    assert res.residual < 1e-7


@pytest.mark.parametrize("exact, metric", [(True, False), (False, True)])
def test_complex_text_round_trip(exact, metric):
    cx = random_complex(SplitMix64(9), 3, 2, exact=exact, metric=metric)
    back = parse_complex(format_complex(cx))
    assert back.exact == exact and back.has_metric == metric
    for a, b in ((cx.d0, back.d0), (cx.d1, back.d1)):
        assert all(x == y for x, y in zip(a.reshape(-1), b.reshape(-1)))


def test_exact_inverse_chirality_is_involution():
    g0 = ex([[1, 2], [0, 1]])
    Chirality(g0, inverse(g0))
