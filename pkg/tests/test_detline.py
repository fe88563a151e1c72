import itertools

import numpy as np
import pytest

from torsionlab.detline import (
    BasedSpace,
    adjoint_transport,
    alpha_graded,
    alpha_graded_inverse,
    alpha_line,
    beta_line,
    fuse,
    fuse_graded,
    graded_element,
    line_element,
    reexpress_swapped,
    sign_F,
    sign_M,
    sign_N,
    sign_R,
)
from torsionlab.linalg_core import as_exact, gaussian


@pytest.mark.parametrize("dims, expected", [((0, 0), 0), ((1, 1), 1), ((2, 2), 0)])
def test_sign_N_examples(dims, expected):
    assert sign_N(*dims) == expected
    assert sign_N(*dims, convention="literal") == expected


def test_sign_N_conventions_differ_only_on_mixed_parity():
    for a, b in itertools.product(range(6), repeat=2):
        same = sign_N(a, b) == sign_N(a, b, "literal")
        assert same == ((a - b) % 2 == 0)


def test_sign_M_and_R_examples():
    assert sign_M(2, 3) == 0
    assert sign_R(2) == 1
    assert all(sign_M(0, n) == 0 for n in range(5))
    assert sign_R(4) == 0


def test_sign_F_vanishes_for_consistent_convention():
    assert all(sign_F(a, b) == 0 for a, b in itertools.product(range(8), repeat=2))
    assert sign_F(0, 1, "literal") == 1


def test_R_is_additive_up_to_M():
    for a, b in itertools.product(range(7), repeat=2):
        assert (sign_R(a + b) - sign_R(a) - sign_R(b) - sign_M(a, b)) % 2 == 0


def test_fuse_one_dimensional_lines_and_swap():
    v = line_element(BasedSpace("V", 1), 2.0)
    w = line_element(BasedSpace("W", 1), 3.0)
    vw = fuse(v, w)
    assert vw.coeff == 6.0
    assert reexpress_swapped(fuse(w, v), 1, 1).coeff == -6.0


def test_fuse_with_zero_space_is_identity():
    v = line_element(BasedSpace("V", 0), 1.0)
    w = line_element(BasedSpace("W", 3), 1.5 - 2j)
    assert fuse(v, w).coeff == w.coeff


def test_fuse_two_plus_one():
    v = line_element(BasedSpace("V", 2), 1.0)
    w = line_element(BasedSpace("W", 1), 1.0)
    assert fuse(v, w).coeff == 1.0
    assert reexpress_swapped(fuse(w, v), 1, 2).coeff == 1.0


@pytest.mark.parametrize("c1, d0, sign", [(1, 1, -1), (2, 1, 1), (0, 3, 1)])
def test_fuse_graded_sign(c1, d0, sign):
    x = graded_element(1.0, 1, c1)
    y = graded_element(1.0, d0, 2)
    assert fuse_graded(x, y).coeff == sign


def test_fuse_graded_with_zero_complex():
    x = graded_element(2.5j, 2, 3)
    z = graded_element(1.0, 0, 0, prefix="D")
    assert fuse_graded(x, z).coeff == 2.5j


def test_alpha_line_normalization_and_conjugation():
    dual = BasedSpace("V", 1).dualize()
    assert alpha_line(line_element(dual, 1.0)).coeff == 1.0
    assert alpha_line(line_element(dual, 2j)).coeff == -2j


def test_beta_line_sign():
    assert beta_line(line_element(BasedSpace("V", 1), 1.0)).coeff == -1.0
    assert beta_line(line_element(BasedSpace("V", 2), 1.0)).coeff == 1.0


@pytest.mark.parametrize("dims, sign", [((0, 0), 1), ((1, 1), 1), ((2, 1), 1), ((1, 0), -1), ((1, 2), -1)])
def test_alpha_graded_unit_signs(dims, sign):
    # coefficient rule (-1)^(n0 n1 + n0) tau(c)
    assert alpha_graded(graded_element(1.0, *dims)).coeff == sign


def test_alpha_graded_is_conjugate_linear_and_invertible():
    for dims in itertools.product(range(4), repeat=2):
        x = graded_element(gaussian(2, -3), *dims)
        y = alpha_graded(x)
        assert y.dims == dims[::-1]
        assert alpha_graded_inverse(y).coeff == x.coeff
        assert alpha_graded(x.scaled(gaussian(0, 1))).coeff == y.coeff * gaussian(0, -1)


@pytest.mark.parametrize(
    "t",
    [np.eye(2, dtype=int), np.diag([2]), np.array([[0, 1], [1, 0]]), np.array([[1, 2], [3, 4]])],
)
def test_adjoint_transport_is_one(t):
    n = t.shape[0]
    v = line_element(BasedSpace("V", n), gaussian(1, 1))
    assert adjoint_transport(as_exact(t), v) == gaussian(1)
