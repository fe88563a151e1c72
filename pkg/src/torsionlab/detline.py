"""Determinant lines in coordinates.

An element of a tensor word of determinant lines, such as
``Det(V0) ⊗ Det(V1)^-1``, is stored as one scalar: its coordinate relative to
the tensor product of the reference wedges (and their duals).  Every map in
this module is therefore a rule for transforming that scalar, and every sign
is an explicit parity exponent that can be audited in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg_core import conj_transpose, det, is_exact_scalar, scalar_inverse, scalar_one, sign_power, tau, to_complex


@dataclass(frozen=True)
class BasedSpace:
    """A coordinate space with its standard basis as reference basis."""

    name: str
    dim: int
    dual: bool = False

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("dimension must be non-negative")

    def dualize(self) -> "BasedSpace":
        return BasedSpace(self.name, self.dim, not self.dual)

    def direct_sum(self, other: "BasedSpace") -> "BasedSpace":
        if self.dual != other.dual:
            raise ValueError("cannot sum a space with a dual space")
        return BasedSpace(f"({self.name}+{other.name})", self.dim + other.dim, self.dual)

    @property
    def label(self) -> str:
        return self.name + ("*" if self.dual else "")


Word = tuple[tuple[BasedSpace, int], ...]


@dataclass(frozen=True, eq=False)
class DetElement:
    """Coordinate ``coeff`` of an element of the line named by ``word``."""

    word: Word
    coeff: object

    def __post_init__(self):
        for _, exp in self.word:
            if exp not in (1, -1):
                raise ValueError("word exponents must be +1 or -1")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(space.dim for space, _ in self.word)

    def with_coeff(self, coeff) -> "DetElement":
        return DetElement(self.word, coeff)

    def scaled(self, s) -> "DetElement":
        return DetElement(self.word, self.coeff * s)

    def inverse(self) -> "DetElement":
        """The dual element: the word with exponents flipped, coefficient inverted."""
        return DetElement(tuple((s, -e) for s, e in self.word), scalar_inverse(self.coeff))

    def as_complex(self) -> complex:
        return to_complex(self.coeff)

    def same_line(self, other: "DetElement") -> bool:
        return len(self.word) == len(other.word) and all(
            a.dim == b.dim and a.dual == b.dual and ea == eb
            for (a, ea), (b, eb) in zip(self.word, other.word)
        )

    def ratio(self, other: "DetElement"):
        if not self.same_line(other):
            raise ValueError("elements live on different lines")
        return self.coeff / other.coeff


def line_element(space: BasedSpace, coeff) -> DetElement:
    return DetElement(((space, 1),), coeff)


def inverse_line_element(space: BasedSpace, coeff) -> DetElement:
    return DetElement(((space, -1),), coeff)


def graded_element(coeff, n0: int, n1: int, prefix: str = "C") -> DetElement:
    """Element of Det(V0) ⊗ Det(V1)^-1 for coordinate spaces of dims n0, n1."""
    return DetElement(((BasedSpace(prefix + "0", n0), 1), (BasedSpace(prefix + "1", n1), -1)), coeff)


def _require_graded(x: DetElement) -> tuple[BasedSpace, BasedSpace]:
    if len(x.word) != 2 or x.word[0][1] != 1 or x.word[1][1] != -1:
        raise ValueError("expected a graded word Det(V0) ⊗ Det(V1)^-1")
    return x.word[0][0], x.word[1][0]


def _require_single(x: DetElement, exp: int) -> BasedSpace:
    if len(x.word) != 1 or x.word[0][1] != exp:
        raise ValueError(f"expected a single-space word with exponent {exp:+d}")
    return x.word[0][0]


# ---------------------------------------------------------------------------
# parity exponents


def sign_N(dim_a0: int, dim_a1: int, convention: str = "consistent") -> int:
    """Parity of the exponent attached to the canonical isomorphism onto cohomology.

    ``consistent`` uses 1/2 [a0 (a0 + 1) + a1 (a1 - 1)], the form under which the
    refined torsion equals the graded determinant of the signature operator.
    ``literal`` uses 1/2 [a0 (a0 - 1) + a1 (a1 + 1)].  The two agree whenever
    a0 and a1 have equal parity.
    """
    if convention == "consistent":
        value = dim_a0 * (dim_a0 + 1) + dim_a1 * (dim_a1 - 1)
    elif convention == "literal":
        value = dim_a0 * (dim_a0 - 1) + dim_a1 * (dim_a1 + 1)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return (value // 2) % 2


def sign_M(dim_c1: int, dim_d0: int) -> int:
    return (dim_c1 * dim_d0) % 2


def sign_R(dim_c0: int) -> int:
    return (dim_c0 * (dim_c0 + 1) // 2) % 2


def sign_F(dim_c0_plus: int, dim_c1_plus: int, convention: str = "consistent") -> int:
    """Total parity relating the refined torsion to the graded determinant.

    Vanishes identically exactly when the sign conventions are coherent.
    """
    a, b = dim_c0_plus, dim_c1_plus
    return (sign_R(a + b) + a * b + sign_N(a, b, convention) + b) % 2


# ---------------------------------------------------------------------------
# fusion


def fuse(v: DetElement, w: DetElement) -> DetElement:
    """Det(V) ⊗ Det(W) -> Det(V ⊕ W); reference basis of V ⊕ W is V's then W's."""
    space_v = _require_single(v, 1)
    space_w = _require_single(w, 1)
    return line_element(space_v.direct_sum(space_w), v.coeff * w.coeff)


def fuse_inverse(v: DetElement, w: DetElement) -> DetElement:
    """Transpose-inverse fusion Det(V)^-1 ⊗ Det(W)^-1 -> Det(V ⊕ W)^-1."""
    space_v = _require_single(v, -1)
    space_w = _require_single(w, -1)
    return inverse_line_element(space_v.direct_sum(space_w), v.coeff * w.coeff)


def swap_sign(dim_v: int, dim_w: int) -> int:
    return sign_power(dim_v * dim_w)


def reexpress_swapped(x: DetElement, dim_first: int, dim_second: int) -> DetElement:
    """Coordinates of an element of Det(W ⊕ V) in the reference order of Det(V ⊕ W).

    ``dim_first`` is dim W (the leading block of x's order).
    """
    space = _require_single(x, 1)
    if space.dim != dim_first + dim_second:
        raise ValueError("dimension mismatch")
    return line_element(space, x.coeff * swap_sign(dim_first, dim_second))


def fuse_graded(x: DetElement, y: DetElement) -> DetElement:
    """Graded fusion Det(C) ⊗ Det(D) -> Det(C ⊕ D) with sign (-1)^(dim C1 dim D0)."""
    c0, c1 = _require_graded(x)
    d0, d1 = _require_graded(y)
    coeff = x.coeff * y.coeff * sign_power(sign_M(c1.dim, d0.dim))
    return DetElement(((c0.direct_sum(d0), 1), (c1.direct_sum(d1), -1)), coeff)


# ---------------------------------------------------------------------------
# tau-duality


def alpha_line(x: DetElement) -> DetElement:
    """α_V : Det(V*) -> Det(V)^-1, normalized on the dual reference wedge."""
    space = _require_single(x, 1)
    if not space.dual:
        raise ValueError("alpha_line expects an element of Det(V*)")
    return inverse_line_element(space.dualize(), tau(x.coeff))


def alpha_line_inverse(x: DetElement) -> DetElement:
    """α_V^-1 : Det(V)^-1 -> Det(V*)."""
    space = _require_single(x, -1)
    if space.dual:
        raise ValueError("alpha_line_inverse expects an element of Det(V)^-1")
    if not x.coeff:
        raise ZeroDivisionError("zero element")
    return line_element(space.dualize(), tau(x.coeff))


def beta_line(v: DetElement) -> DetElement:
    """β_V : Det(V) -> Det(V*)^-1, pinned by (α_V^-1(v^-1))^-1 = (-1)^dim V β_V(v)."""
    space = _require_single(v, 1)
    if not v.coeff:
        raise ZeroDivisionError("zero element")
    transported = alpha_line_inverse(v.inverse()).inverse()
    return transported.scaled(sign_power(space.dim))


def alpha_graded(x: DetElement) -> DetElement:
    """α on Det(V0) ⊗ Det(V1)^-1 -> Det(V1*) ⊗ Det(V0*)^-1.

    Built as (-1)^(dim V0 dim V1) α_{V1}^-1(v1^-1) ⊗ β_{V0}(v0): the degree-0
    factor is the β map, which is the reading under which the duality identities
    for refined torsion hold.
    """
    v0, v1 = _require_graded(x)
    if not x.coeff:
        raise ZeroDivisionError("zero element")
    part1 = alpha_line_inverse(inverse_line_element(v1, scalar_one(is_exact_scalar(x.coeff))))
    part0 = beta_line(line_element(v0, x.coeff))
    coeff = part1.coeff * part0.coeff * sign_power(sign_M(v0.dim, v1.dim))
    return DetElement(((v1.dualize(), 1), (v0.dualize(), -1)), coeff)


def alpha_graded_inverse(y: DetElement) -> DetElement:
    """Inverse of :func:`alpha_graded` (it is an involution up to relabeling)."""
    w0, w1 = _require_graded(y)
    x = DetElement(((w1.dualize(), 1), (w0.dualize(), -1)), tau(y.coeff))
    return x.scaled(sign_power(sign_M(w1.dim, w0.dim) + w1.dim))


def adjoint_transport(t: np.ndarray, v: DetElement):
    """Ratio T* α_W^-1((Tv)^-1) / α_V^-1(v^-1); equals 1 for bijective T."""
    space = _require_single(v, 1)
    if t.shape != (space.dim, space.dim):
        raise ValueError("T must be square of size dim V")
    det_t = det(t)
    if not det_t:
        raise ZeroDivisionError("T is singular")
    tv = line_element(BasedSpace("W", space.dim), det_t * v.coeff)
    pulled = alpha_line_inverse(tv.inverse())
    transported = pulled.scaled(det(conj_transpose(t)))
    reference = alpha_line_inverse(v.inverse())
    return transported.coeff / reference.coeff
