import math

import numpy as np
import pytest

from torsionlab.linalg_core import (
    NumericalAmbiguity,
    as_exact,
    choose_agmon_angle,
    det,
    gaussian,
    format_matrix,
    generalized_eigenspaces,
    inverse,
    is_exact,
    kernel_image,
    ldet_branch,
    matmul,
    parse_matrix,
    rank,
)


@pytest.mark.parametrize("exact", [False, True])
@pytest.mark.parametrize(
    "entries, kdim, idim",
    [
        ([[0, 0], [0, 0]], 2, 0),
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 0, 3),
        ([[1, 2], [2, 4]], 1, 1),
    ],
)
def test_kernel_image_dimensions(entries, kdim, idim, exact):
    a = as_exact(entries) if exact else np.array(entries, dtype=complex)
    k, im = kernel_image(a)
    assert k.shape[1] == kdim
    assert im.shape[1] == idim
    product = matmul(a, k)
    if exact:
        assert all(x == gaussian(0) for x in product.reshape(-1))
    else:
        assert np.allclose(product, 0)


def test_float_rank_refuses_values_near_threshold():
    a = np.diag([1.0, 1e-14]).astype(complex)
    with pytest.raises(NumericalAmbiguity) as info:
        rank(a)
    assert info.value.kind == "ill-conditioned rank"


def test_float_rank_respects_ambient_scale():
    a = np.diag([1.0, 1e-9]).astype(complex)
    assert rank(a) == 2
    assert rank(a, scale=1e6) == 1


def test_exact_det_and_inverse():
    a = as_exact([[2, 1], [1, 1]])
    assert det(a) == gaussian(1)
    inv = inverse(a)
    assert is_exact(inv)
    assert all(x == y for x, y in zip(matmul(a, inv).reshape(-1), as_exact(np.eye(2, dtype=int)).reshape(-1)))


def test_windows_of_diagonal_matrix():
    split = generalized_eigenspaces(np.diag([1.0, 5.0, 10.0]).astype(complex), [2.0])
    assert [w.dim for w in split.windows] == [1, 2]
    assert split.windows[0].label == "[0,2]"
    assert split.windows[1].label == "(2,inf)"


def test_window_of_jordan_block_keeps_jordan_structure():
    j = np.array([[3.0, 1.0], [0.0, 3.0]], dtype=complex)
    split = generalized_eigenspaces(j, [1.0])
    big = split.window("(1,inf)")
    assert big.dim == 2
    op = big.operator
    assert np.allclose(np.linalg.eigvals(op), [3, 3])
    # not diagonalizable: (op - 3)^1 != 0 but (op - 3)^2 = 0
    n = op - 3 * np.eye(2)
    assert np.linalg.norm(n) > 0.5
    assert np.allclose(n @ n, 0)


def test_window_with_nilpotent_restriction():
    split = generalized_eigenspaces(np.diag([0.0, 0.0, 4.0]).astype(complex), [1.0])
    small = split.window("[0,1]")
    assert small.dim == 2
    assert np.allclose(small.operator, 0)


def test_window_bases_are_invariant():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    mags = np.sort(np.abs(np.linalg.eigvals(a)))
    cut = 0.5 * (mags[2] + mags[3])
    split = generalized_eigenspaces(a, [cut])
    for w in split.windows:
        assert np.allclose(a @ w.basis, w.basis @ w.operator)
        assert np.all((np.abs(w.eigenvalues()) <= cut) == (w.label.startswith("[")))


@pytest.mark.parametrize(
    "diag, theta, expected",
    [
        ([1.0], -math.pi, 0.0),
        ([-1.0], -math.pi / 2, 1j * math.pi),
        ([2.0, 3.0], -math.pi, math.log(6)),
    ],
)
def test_ldet_branch(diag, theta, expected):
    assert abs(ldet_branch(np.diag(diag).astype(complex), theta) - expected) < 1e-14


def test_ldet_branch_refuses_eigenvalue_on_ray():
    with pytest.raises(NumericalAmbiguity):
        ldet_branch(np.diag([-1j]), -math.pi / 2)


def test_agmon_angle_single_positive_eigenvalue():
    assert choose_agmon_angle([np.array([1.0 + 0j])]).theta == pytest.approx(-math.pi / 2)


def test_agmon_angle_for_one_and_i():
    # both gaps of the folded spectrum have length pi/2; the first one wins
    sector = choose_agmon_angle([np.array([1.0, 1j])])
    assert sector.theta == pytest.approx(-3 * math.pi / 4)
    assert sector.min_gap == pytest.approx(math.pi / 4)


def test_agmon_angle_saturated_sector():
    args = np.arange(-math.pi / 2 + 0.005, 0.0, 0.01)
    with pytest.raises(NumericalAmbiguity) as info:
        choose_agmon_angle([np.exp(1j * args)], sector=(-math.pi / 2, 0.0))
    assert info.value.kind == "no admissible angle"


@pytest.mark.parametrize("exact", [False, True])
def test_matrix_text_round_trip(exact):
    a = as_exact([[1, -2], [3, 0], [0, 5]]) if exact else np.array([[1.5 + 2j, -0.25], [1e-17, 3j]])
    b = parse_matrix(format_matrix(a))
    assert b.shape == a.shape
    assert is_exact(b) == exact
    assert all(x == y for x, y in zip(a.reshape(-1), b.reshape(-1)))
