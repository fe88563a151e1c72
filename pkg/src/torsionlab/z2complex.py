"""Finite Z2-graded complexes, their cohomology, and refined torsion.

A complex is stored as two square-compatible matrices ``d0: C0 -> C1`` and
``d1: C1 -> C0`` in standard coordinates, optionally with Gram matrices.
Determinant-line elements are :class:`~torsionlab.detline.DetElement`
coordinates relative to the standard bases of C0, C1, and to a chosen
cohomology reference (:class:`CohomologySpaces`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .detline import BasedSpace, DetElement, graded_element, sign_N, sign_R
from .linalg_core import (
    RANK_SAFETY,
    NumericalAmbiguity,
    as_float,
    block_diag,
    conj_transpose,
    coordinates,
    det,
    format_matrix,
    hstack,
    identity,
    image,
    inverse,
    is_exact,
    is_zero_matrix,
    kernel,
    matmul,
    orthonormalize,
    parse_matrix_tokens,
    scalar_inverse,
    scalar_one,
    sign_power,
    to_complex,
    trace,
    zeros,
)

NILPOTENCY_RTOL = 1e-12
RESTRICTED_RTOL = 1e-8
LEAK_FACTOR = 100.0
INVOLUTION_RTOL = 1e-9


class PreconditionError(ValueError):
    """Raised when an operation's stated precondition does not hold."""


def _norm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(as_float(a)))


def _close(a: np.ndarray, b: np.ndarray, rtol: float) -> bool:
    if is_exact(a) and is_exact(b):
        return is_zero_matrix(a - b)
    diff = as_float(a) - as_float(b)
    return _norm(diff) <= rtol * max(_norm(a), _norm(b), 1.0)


@dataclass(frozen=True, eq=False)
class Z2Complex:
    d0: np.ndarray
    d1: np.ndarray
    G0: np.ndarray | None = None
    G1: np.ndarray | None = None
    scale: float = 0.0  # ambient operator norm used for float rank decisions
    nilpotency_rtol: float = NILPOTENCY_RTOL

    def __post_init__(self):
        n1, n0 = self.d0.shape
        if self.d1.shape != (n0, n1):
            raise ValueError(f"d1 must be {n0}x{n1}, got {self.d1.shape}")
        if (self.G0 is None) != (self.G1 is None):
            raise ValueError("inner products must be given for both parities or neither")
        for name, prod, scale in (
            ("d1 d0", matmul(self.d1, self.d0), _norm(self.d0) * _norm(self.d1)),
            ("d0 d1", matmul(self.d0, self.d1), _norm(self.d0) * _norm(self.d1)),
        ):
            if not is_zero_matrix(prod, self.nilpotency_rtol, scale):
                raise ValueError(f"{name} != 0: not a complex")
        if self.G0 is not None:
            for g, n in ((self.G0, n0), (self.G1, n1)):
                if g.shape != (n, n):
                    raise ValueError("inner product has the wrong size")
                gf = as_float(g)
                if not np.allclose(gf, gf.conj().T, rtol=1e-12, atol=1e-12 * max(_norm(g), 1.0)):
                    raise ValueError("inner product is not Hermitian")
                if n and np.min(np.linalg.eigvalsh(0.5 * (gf + gf.conj().T))) <= 0:
                    raise ValueError("inner product is not positive definite")

    @property
    def n0(self) -> int:
        return self.d0.shape[1]

    @property
    def n1(self) -> int:
        return self.d0.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact(self.d0)

    @property
    def has_metric(self) -> bool:
        return self.G0 is not None

    def dim(self, k: int) -> int:
        return self.n0 if k % 2 == 0 else self.n1

    def d(self, k: int) -> np.ndarray:
        """Differential leaving parity k."""
        return self.d0 if k % 2 == 0 else self.d1

    def gram(self, k: int) -> np.ndarray:
        g = self.G0 if k % 2 == 0 else self.G1
        return identity(self.dim(k), self.exact) if g is None else g

    @property
    def rank_scale(self) -> float:
        return max(self.scale, _norm(self.d0), _norm(self.d1))

    def to_float(self) -> "Z2Complex":
        conv = (lambda m: None if m is None else as_float(m))
        return Z2Complex(as_float(self.d0), as_float(self.d1), conv(self.G0), conv(self.G1), self.scale, self.nilpotency_rtol)

    def with_metric(self, G0: np.ndarray | None, G1: np.ndarray | None) -> "Z2Complex":
        return Z2Complex(self.d0, self.d1, G0, G1, self.scale, self.nilpotency_rtol)


@dataclass(frozen=True, eq=False)
class Chirality:
    g0: np.ndarray  # C0 -> C1
    g1: np.ndarray  # C1 -> C0

    def __post_init__(self):
        n1, n0 = self.g0.shape
        if self.g1.shape != (n0, n1) or n0 != n1:
            raise ValueError("a chirality needs square blocks of equal size")
        scale = 1e3 * INVOLUTION_RTOL * (1.0 + _norm(self.g0) * _norm(self.g1))
        for prod in (matmul(self.g1, self.g0), matmul(self.g0, self.g1)):
            if not _close(prod, identity(n0, is_exact(prod)), INVOLUTION_RTOL if is_exact(prod) else scale):
                raise ValueError("Gamma is not an involution")

    @classmethod
    def from_g0(cls, g0: np.ndarray) -> "Chirality":
        return cls(g0, inverse(g0))

    def block(self, k: int) -> np.ndarray:
        """Gamma restricted to parity k."""
        return self.g0 if k % 2 == 0 else self.g1

    def full(self) -> np.ndarray:
        n = self.g0.shape[0]
        out = zeros(2 * n, 2 * n, is_exact(self.g0))
        out[n:, :n] = self.g0
        out[:n, n:] = self.g1
        return out

    def to_float(self) -> "Chirality":
        return Chirality(as_float(self.g0), as_float(self.g1))

    def is_self_adjoint(self, cx: Z2Complex, rtol: float = 1e-9) -> bool:
        lhs = matmul(conj_transpose(self.g0), cx.gram(1))
        rhs = matmul(cx.gram(0), self.g1)
        return _close(lhs, rhs, rtol)


def check_chirality(cx: Z2Complex, gamma: Chirality) -> None:
    if gamma.g0.shape != (cx.n1, cx.n0):
        raise ValueError("chirality dimensions do not match the complex")


# ---------------------------------------------------------------------------
# decompositions and cohomology


@dataclass(frozen=True, eq=False)
class Decomposition:
    """C^k = B^k + H^k + A^k, with B^k = d(A^{k+1}) as an ordered basis."""

    B: tuple[np.ndarray, np.ndarray]
    H: tuple[np.ndarray, np.ndarray]
    A: tuple[np.ndarray, np.ndarray]

    def frame(self, k: int) -> np.ndarray:
        k %= 2
        return hstack([self.B[k], self.H[k], self.A[k]], rows=self.B[k].shape[0])

    def dims(self, k: int) -> tuple[int, int, int]:
        k %= 2
        return self.B[k].shape[1], self.H[k].shape[1], self.A[k].shape[1]

    def validate(self, cx: Z2Complex) -> None:
        for k in (0, 1):
            other = 1 - k
            if not _close(self.B[k], matmul(cx.d(other), self.A[other]), 1e-12):
                raise ValueError("B must equal d applied to the A basis of the other parity")
            if self.frame(k).shape != (cx.dim(k), cx.dim(k)):
                raise ValueError("B + H + A does not fill the space")
            if not is_zero_matrix(matmul(cx.d(k), self.H[k]), 1e-10, _norm(cx.d(k)) * _norm(self.H[k])):
                raise ValueError("H is not closed")
            f = self.frame(k)
            if f.shape[0] and (not det(f) if cx.exact else np.linalg.cond(as_float(f)) > 1e12):
                raise ValueError("B + H + A is not a direct sum")


def _harmonic_part(kern: np.ndarray, bnd: np.ndarray, gram: np.ndarray) -> np.ndarray:
    if bnd.shape[1] == 0:
        return orthonormalize(kern, gram)
    pairing = matmul(conj_transpose(bnd), gram, kern)
    return orthonormalize(matmul(kern, kernel(pairing)), gram)


def decompose(cx: Z2Complex) -> Decomposition:
    """Deterministic decomposition: A^k is the G-orthogonal complement of ker d_k,
    H^k the G-orthogonal complement of B^k inside ker d_k."""
    scale = 0.0 if cx.exact else cx.rank_scale
    a = []
    for k in (0, 1):
        g = cx.gram(k)
        img = image(conj_transpose(cx.d(k)), scale)
        a.append(matmul(inverse(g), img) if cx.has_metric else img)
    b = [matmul(cx.d1, a[1]), matmul(cx.d0, a[0])]
    h = [_harmonic_part(kernel(cx.d(k), scale), b[k], cx.gram(k)) for k in (0, 1)]
    return Decomposition(tuple(b), tuple(h), tuple(a))


@dataclass(frozen=True, eq=False)
class CohomologySpaces:
    """Reference representatives of H^0, H^1 plus boundary bases for class coordinates."""

    ref: tuple[np.ndarray, np.ndarray]
    boundary: tuple[np.ndarray, np.ndarray]

    @property
    def dims(self) -> tuple[int, int]:
        return self.ref[0].shape[1], self.ref[1].shape[1]

    @property
    def euler(self) -> int:
        return self.dims[0] - self.dims[1]

    def space(self, k: int, prefix: str = "H") -> BasedSpace:
        return BasedSpace(f"{prefix}{k % 2}", self.dims[k % 2])

    def class_coords(self, k: int, vectors: np.ndarray) -> np.ndarray:
        """Coordinates of the classes of closed ``vectors`` in the reference basis."""
        k %= 2
        frame = hstack([self.boundary[k], self.ref[k]], rows=vectors.shape[0])
        y = coordinates(frame, vectors)
        return y[self.boundary[k].shape[1]:, :]

    def element(self, coeff) -> DetElement:
        return graded_element(coeff, *self.dims, prefix="H")

    def with_reference(self, ref0: np.ndarray, ref1: np.ndarray) -> "CohomologySpaces":
        return CohomologySpaces((ref0, ref1), self.boundary)


def cohomology(cx: Z2Complex, dec: Decomposition | None = None) -> CohomologySpaces:
    dec = dec or decompose(cx)
    return CohomologySpaces(dec.H, dec.B)


def transport_factor(cohom: CohomologySpaces, ref0: np.ndarray, ref1: np.ndarray):
    """Factor turning a coordinate relative to (ref0, ref1) into one relative to ``cohom``."""
    p0 = cohom.class_coords(0, ref0)
    p1 = cohom.class_coords(1, ref1)
    return det(p0) / det(p1)


# ---------------------------------------------------------------------------
# canonical isomorphism and refined torsion


def _coeff_of(c) -> object:
    return c.coeff if isinstance(c, DetElement) else c


def phi_iso(
    cx: Z2Complex,
    c: DetElement,
    dec: Decomposition | None = None,
    cohom: CohomologySpaces | None = None,
    convention: str = "consistent",
) -> DetElement:
    """Image in Det(H) of an element of Det(C0) ⊗ Det(C1)^-1.

    Solves c_k = det[B^k | H^k | A^k] h_k for each parity and applies the
    parity sign; the result is expressed in the reference of ``cohom``
    (by default the representatives of ``dec``).
    """
    coeff = _coeff_of(c)
    if not coeff:
        raise ZeroDivisionError("phi of the zero element")
    dec = dec or decompose(cx)
    m0, m1 = det(dec.frame(0)), det(dec.frame(1))
    a0, a1 = dec.dims(0)[2], dec.dims(1)[2]
    value = coeff * m1 / m0 * sign_power(sign_N(a0, a1, convention))
    if cohom is None:
        cohom = CohomologySpaces(dec.H, dec.B)
    else:
        value = value * transport_factor(cohom, dec.H[0], dec.H[1])
    return cohom.element(value)


def c_gamma(cx: Z2Complex, gamma: Chirality, c0=None) -> DetElement:
    """(-1)^R c0 ⊗ (Gamma c0)^-1 with Gamma c0 = det(g0) c0."""
    check_chirality(cx, gamma)
    one = scalar_one(cx.exact)
    c0 = one if c0 is None else c0
    if not c0:
        raise ZeroDivisionError("c0 must be nonzero")
    gc0 = det(gamma.g0) * c0
    coeff = c0 * scalar_inverse(gc0) * sign_power(sign_R(cx.n0))
    return graded_element(coeff, cx.n0, cx.n1)


def refined_torsion(
    cx: Z2Complex,
    gamma: Chirality,
    cohom: CohomologySpaces | None = None,
    dec: Decomposition | None = None,
    convention: str = "consistent",
    c0=None,
) -> DetElement:
    return phi_iso(cx, c_gamma(cx, gamma, c0), dec=dec, cohom=cohom, convention=convention)


def supertrace(x0: np.ndarray, x1: np.ndarray):
    if x0.shape[0] != x0.shape[1] or x1.shape[0] != x1.shape[1]:
        raise ValueError("supertrace needs square blocks")
    return trace(x0) - trace(x1)


# ---------------------------------------------------------------------------
# direct sums


def direct_sum(cx: Z2Complex, other: Z2Complex) -> Z2Complex:
    if cx.has_metric != other.has_metric:
        raise ValueError("both summands need inner products, or neither")
    metric = (block_diag(cx.G0, other.G0), block_diag(cx.G1, other.G1)) if cx.has_metric else (None, None)
    return Z2Complex(block_diag(cx.d0, other.d0), block_diag(cx.d1, other.d1), *metric)


def direct_sum_chirality(gamma: Chirality, other: Chirality) -> Chirality:
    return Chirality(block_diag(gamma.g0, other.g0), block_diag(gamma.g1, other.g1))


def direct_sum_cohomology(cohom: CohomologySpaces, other: CohomologySpaces) -> CohomologySpaces:
    return CohomologySpaces(
        tuple(block_diag(cohom.ref[k], other.ref[k]) for k in (0, 1)),
        tuple(block_diag(cohom.boundary[k], other.boundary[k]) for k in (0, 1)),
    )


def require_zero_euler(*items: CohomologySpaces | Z2Complex) -> None:
    for item in items:
        chi = item.euler if isinstance(item, CohomologySpaces) else item.n0 - item.n1
        if chi != 0:
            raise PreconditionError(f"fusion needs Euler characteristic 0, got {chi}")


# ---------------------------------------------------------------------------
# duality


def dual_complex(cx: Z2Complex) -> Z2Complex:
    """Complex on (C1*, C0*) with the conjugate-transposed differentials.

    Inner products, when present, become the inverse Gram matrices so that the
    Riesz maps C^k -> (C^k)* are isometries.
    """
    metric = (None, None)
    if cx.has_metric:
        metric = (inverse(cx.G1), inverse(cx.G0))
    return Z2Complex(conj_transpose(cx.d0), conj_transpose(cx.d1), *metric)


def dual_chirality(gamma: Chirality) -> Chirality:
    return Chirality(conj_transpose(gamma.g0), conj_transpose(gamma.g1))


def dual_cohomology(cx: Z2Complex, cohom: CohomologySpaces) -> CohomologySpaces:
    """Cohomology of the dual complex with the pairing-dual reference.

    The reference of the dual H^k pairs to the identity with the reference of H^{k+1}.
    """
    dual = dual_complex(cx)
    base = cohomology(dual)
    refs = []
    for k in (0, 1):
        partner = cohom.ref[1 - k]
        f = base.ref[k]
        pairing = matmul(conj_transpose(partner), f)
        refs.append(matmul(f, inverse(pairing)))
    return base.with_reference(*refs)


def alpha_on_cohomology(x: DetElement) -> DetElement:
    """Det(H) -> Det(dual H), with dual references as in :func:`dual_cohomology`."""
    from .detline import alpha_graded

    out = alpha_graded(x)
    return graded_element(out.coeff, out.word[0][0].dim, out.word[1][0].dim, prefix="H*")


def metric_adjoints(cx: Z2Complex) -> tuple[np.ndarray, np.ndarray]:
    """G-adjoints (d0^dag: C1 -> C0, d1^dag: C0 -> C1)."""
    if not cx.has_metric:
        raise PreconditionError("adjoints need inner products")
    d0_adj = matmul(inverse(cx.G0), conj_transpose(cx.d0), cx.G1)
    d1_adj = matmul(inverse(cx.G1), conj_transpose(cx.d1), cx.G0)
    return d0_adj, d1_adj


def chiral_dual(cx: Z2Complex, gamma: Chirality) -> Z2Complex:
    """The complex (C, Gamma d^dag Gamma) on the same spaces and metrics."""
    d0_adj, d1_adj = metric_adjoints(cx)
    e0 = matmul(gamma.g0, d0_adj, gamma.g0)
    e1 = matmul(gamma.g1, d1_adj, gamma.g1)
    return Z2Complex(e0, e1, cx.G0, cx.G1, nilpotency_rtol=RESTRICTED_RTOL)


def chiral_dual_iso(cx: Z2Complex, gamma: Chirality) -> tuple[np.ndarray, np.ndarray]:
    """Isomorphism of (C, Gamma d^dag Gamma) onto :func:`dual_complex`, w -> G Gamma w."""
    return matmul(cx.G1, gamma.g0), matmul(cx.G0, gamma.g1)


# ---------------------------------------------------------------------------
# restriction to invariant subspaces


def restrict(cx: Z2Complex, basis0: np.ndarray, basis1: np.ndarray, noise: float = 0.0) -> Z2Complex:
    """Subcomplex on span(basis0) ⊕ span(basis1), in the coordinates of those bases.

    ``noise`` is an a priori bound on the error of the restricted differentials
    (for instance from the accuracy of an invariant-subspace basis).
    """
    scale = 0.0 if cx.exact else cx.rank_scale
    e0 = coordinates(basis1, matmul(cx.d0, basis0), scale=scale)
    e1 = coordinates(basis0, matmul(cx.d1, basis1), scale=scale)
    metric = (None, None)
    if cx.has_metric:
        metric = tuple(
            _hermitize(matmul(conj_transpose(b), cx.gram(k), b)) for k, b in ((0, basis0), (1, basis1))
        )
    scale = cx.rank_scale
    if not cx.exact:
        # the bases are only approximately invariant; ranks inside the window are
        # decided well above the part of d that leaks out of the span
        leak = max(_norm(cx.d0 @ basis0 - basis1 @ e0), _norm(cx.d1 @ basis1 - basis0 @ e1), noise)
        n = max(basis0.shape[1], basis1.shape[1], 1)
        scale = max(scale, LEAK_FACTOR * leak / (np.finfo(float).eps * RANK_SAFETY * n))
    # invariant subspaces give a complex by construction; only basis conditioning enters the residual
    return Z2Complex(e0, e1, *metric, scale=scale, nilpotency_rtol=RESTRICTED_RTOL)


def restrict_chirality(gamma: Chirality, basis0: np.ndarray, basis1: np.ndarray) -> Chirality:
    g0 = coordinates(basis1, matmul(gamma.g0, basis0))
    g1 = coordinates(basis0, matmul(gamma.g1, basis1))
    return Chirality(g0, g1)


def _hermitize(g: np.ndarray) -> np.ndarray:
    if is_exact(g):
        return g
    return 0.5 * (g + g.conj().T)


def pushforward_cohomology(sub_cohom: CohomologySpaces, basis0: np.ndarray, basis1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ambient representatives of a subcomplex's reference classes."""
    return matmul(basis0, sub_cohom.ref[0]), matmul(basis1, sub_cohom.ref[1])


# ---------------------------------------------------------------------------
# variation of the chirality


@dataclass
class VariationResult:
    t0: float
    h: float
    derivative: complex
    predicted: complex
    residual: float
    rho: complex
    supertrace: complex
    extras: dict = field(default_factory=dict)


def chirality_supertrace(dg0: np.ndarray, dg1: np.ndarray, gamma: Chirality) -> complex:
    """Tr_s(dGamma Gamma): even block dg1 g0, odd block dg0 g1."""
    return to_complex(supertrace(matmul(dg1, gamma.g0), matmul(dg0, gamma.g1)))


def variation_check(
    family: Callable[[float], Chirality],
    cx: Z2Complex,
    t0: float,
    h: float,
    cohom: CohomologySpaces | None = None,
) -> VariationResult:
    """Central-difference test of d/dt rho = 1/2 Tr_s(dGamma Gamma) rho."""
    cx = cx.to_float() if cx.exact else cx
    cohom = cohom or cohomology(cx)
    gammas = {}
    for t in (t0 - h, t0, t0 + h):
        g = family(t)
        gammas[t] = g.to_float() if is_exact(g.g0) else g
    rho = {t: refined_torsion(cx, g, cohom=cohom).as_complex() for t, g in gammas.items()}
    deriv = (rho[t0 + h] - rho[t0 - h]) / (2 * h)
    dg0 = (gammas[t0 + h].g0 - gammas[t0 - h].g0) / (2 * h)
    dg1 = (gammas[t0 + h].g1 - gammas[t0 - h].g1) / (2 * h)
    st = chirality_supertrace(dg0, dg1, gammas[t0])
    predicted = 0.5 * st * rho[t0]
    return VariationResult(t0, h, deriv, predicted, abs(deriv - predicted), rho[t0], st)


# ---------------------------------------------------------------------------
# text format


def format_complex(cx: Z2Complex) -> str:
    """Header "n0 n1 has_metric", then d0, d1 (and G0, G1) as matrix text."""
    parts = [f"{cx.n0} {cx.n1} {int(cx.has_metric)}\n", format_matrix(cx.d0), format_matrix(cx.d1)]
    if cx.has_metric:
        parts += [format_matrix(cx.G0), format_matrix(cx.G1)]
    return "".join(parts)


def parse_complex(text: str, exact: bool | None = None) -> Z2Complex:
    tokens = text.split()
    n0, n1, has_metric = int(tokens[0]), int(tokens[1]), bool(int(tokens[2]))
    pos = 3
    mats = []
    for _ in range(4 if has_metric else 2):
        m, pos = parse_matrix_tokens(tokens, exact, pos)
        mats.append(m)
    if mats[0].shape != (n1, n0) or mats[1].shape != (n0, n1):
        raise ValueError("header dimensions do not match the differentials")
    return Z2Complex(*mats)


__all__ = [
    "Chirality",
    "CohomologySpaces",
    "Decomposition",
    "NumericalAmbiguity",
    "PreconditionError",
    "VariationResult",
    "Z2Complex",
    "alpha_on_cohomology",
    "c_gamma",
    "chiral_dual",
    "chiral_dual_iso",
    "chirality_supertrace",
    "cohomology",
    "decompose",
    "direct_sum",
    "direct_sum_chirality",
    "direct_sum_cohomology",
    "format_complex",
    "dual_chirality",
    "dual_cohomology",
    "dual_complex",
    "metric_adjoints",
    "parse_complex",
    "phi_iso",
    "pushforward_cohomology",
    "refined_torsion",
    "require_zero_euler",
    "restrict",
    "restrict_chirality",
    "supertrace",
    "transport_factor",
    "variation_check",
]
