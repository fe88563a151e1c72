"""Odd signature operator, spectral windows, graded determinants and eta invariants."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla

from .detline import DetElement
from .linalg_core import (
    NumericalAmbiguity,
    SpectralSplit,
    as_float,
    choose_agmon_angle,
    coordinates,
    generalized_eigenspaces,
    ldet_branch,
)
from .z2complex import (
    Chirality,
    CohomologySpaces,
    RESTRICTED_RTOL,
    PreconditionError,
    Z2Complex,
    cohomology,
    refined_torsion,
    restrict,
    restrict_chirality,
    transport_factor,
)

IMAG_AXIS_RTOL = 1e-10
AXIS_WARN_RTOL = 1e-6
CONJUGATION_RTOL = 1e-12


# ---------------------------------------------------------------------------
# log-form scalars


@dataclass(frozen=True)
class TorsionScalar:
    log_modulus: float
    phase: float

    @classmethod
    def from_complex(cls, z: complex) -> "TorsionScalar":
        z = complex(z)
        if z == 0:
            raise ZeroDivisionError("torsion scalars are nonzero")
        return cls(math.log(abs(z)), cmath.phase(z))

    @classmethod
    def from_log(cls, w: complex) -> "TorsionScalar":
        w = complex(w)
        return cls(w.real, _wrap(w.imag))

    @property
    def value(self) -> complex:
        return cmath.exp(complex(self.log_modulus, self.phase))

    @property
    def log(self) -> complex:
        return complex(self.log_modulus, self.phase)

    def __mul__(self, other: "TorsionScalar") -> "TorsionScalar":
        return TorsionScalar(self.log_modulus + other.log_modulus, _wrap(self.phase + other.phase))

    def __truediv__(self, other: "TorsionScalar") -> "TorsionScalar":
        return TorsionScalar(self.log_modulus - other.log_modulus, _wrap(self.phase - other.phase))

    def conjugate(self) -> "TorsionScalar":
        return TorsionScalar(self.log_modulus, _wrap(-self.phase))

    def distance(self, other: "TorsionScalar") -> float:
        """Relative distance |x/y - 1| computed without overflow."""
        q = self / other
        return abs(cmath.exp(complex(q.log_modulus, q.phase)) - 1.0)

    def to_dict(self) -> dict:
        return {"log_modulus": self.log_modulus, "phase": self.phase}


def _wrap(phase: float) -> float:
    """Reduce to (-pi, pi]."""
    out = math.remainder(phase, 2 * math.pi)
    return math.pi if out == -math.pi else out


# ---------------------------------------------------------------------------
# eta invariant


@dataclass
class EtaResult:
    eta0: int
    m_plus: int
    m_minus: int
    m_zero: int
    eta: Fraction
    warnings: list = field(default_factory=list)
    n_positive: int = 0
    n_negative: int = 0

    @property
    def value(self) -> float:
        return float(self.eta)

    @property
    def dim(self) -> int:
        return self.n_positive + self.n_negative + self.m_plus + self.m_minus + self.m_zero

    def to_dict(self) -> dict:
        return {
            "eta0": self.eta0,
            "m_plus": self.m_plus,
            "m_minus": self.m_minus,
            "m_zero": self.m_zero,
            "eta": str(self.eta),
            "warnings": list(self.warnings),
        }


def eta_from_eigenvalues(eigs, zero_tol: float | None = None) -> EtaResult:
    eigs = np.asarray(eigs, dtype=complex).reshape(-1)
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    if zero_tol is None:
        zero_tol = 1e-10 * max(radius, 1.0)
    pos = neg = mp = mm = mz = 0
    warnings = []
    for z in eigs:
        mag = abs(z)
        if mag <= zero_tol:
            mz += 1
            continue
        if abs(z.real) <= IMAG_AXIS_RTOL * mag:
            if z.imag > 0:
                mp += 1
            else:
                mm += 1
            continue
        if abs(z.real) <= AXIS_WARN_RTOL * mag:
            warnings.append(f"axis ambiguity: eigenvalue {z!r} is close to the imaginary axis")
        if z.real > 0:
            pos += 1
        else:
            neg += 1
    eta0 = pos - neg
    return EtaResult(eta0, mp, mm, mz, Fraction(eta0 + mp - mm + mz, 2), warnings, pos, neg)


def eta_invariant(d: np.ndarray, zero_tol: float | None = None) -> EtaResult:
    d = as_float(d)
    eigs = sla.eigvals(d) if d.shape[0] else np.zeros(0, complex)
    return eta_from_eigenvalues(eigs, zero_tol)


# ---------------------------------------------------------------------------
# signature operator and windows


@dataclass(frozen=True, eq=False)
class SignatureData:
    cx: Z2Complex
    gamma: Chirality
    B0: np.ndarray
    B1: np.ndarray

    def block(self, k: int) -> np.ndarray:
        return self.B0 if k % 2 == 0 else self.B1

    def square(self, k: int) -> np.ndarray:
        b = self.block(k)
        return b @ b


def build_signature(cx: Z2Complex, gamma: Chirality) -> SignatureData:
    """B0 = g1 d0 + d1 g0 on C0 and B1 = g0 d1 + d0 g1 on C1."""
    if gamma.g0.shape != (cx.n1, cx.n0):
        raise ValueError("inconsistent dimensions between complex and chirality")
    cx = cx.to_float() if cx.exact else cx
    gamma = gamma.to_float() if gamma.g0.dtype == object else gamma
    g0, g1 = gamma.g0, gamma.g1
    b0 = g1 @ cx.d0 + cx.d1 @ g0
    b1 = g0 @ cx.d1 + cx.d0 @ g1
    conj = g1 @ b1 @ g0
    scale = max(np.linalg.norm(b0), np.linalg.norm(conj), 1.0)
    if np.linalg.norm(b0 - conj) > 1e3 * CONJUGATION_RTOL * scale * max(1.0, np.linalg.norm(g0) * np.linalg.norm(g1)):
        raise ValueError("signature blocks violate B0 = Gamma B1 Gamma")
    return SignatureData(cx, gamma, b0, b1)


@dataclass(frozen=True, eq=False)
class Window:
    label: str
    lower: float
    upper: float
    basis0: np.ndarray
    basis1: np.ndarray
    sub: Z2Complex
    gamma: Chirality

    @property
    def dim(self) -> int:
        return self.basis0.shape[1]

    @property
    def contains_zero(self) -> bool:
        return self.lower < 0

    def signature_block(self, k: int) -> np.ndarray:
        return build_signature(self.sub, self.gamma).block(k)

    def eigenvalues(self) -> np.ndarray:
        b = self.signature_block(0)
        return sla.eigvals(b) if b.shape[0] else np.zeros(0, complex)


@dataclass(frozen=True, eq=False)
class WindowSplit:
    cuts: tuple[float, ...]
    windows: tuple[Window, ...]
    splits: tuple[SpectralSplit, SpectralSplit]

    def window(self, label: str) -> Window:
        for w in self.windows:
            if w.label == label:
                return w
        raise KeyError(label)

    @property
    def small(self) -> Window:
        return self.windows[0]

    @property
    def large(self) -> Window:
        return self.windows[-1]

    def dual_rows(self, label: str, k: int) -> np.ndarray:
        """Rows r with r @ basis = I on the window and r @ basis = 0 on the other windows."""
        blocks = [w.basis0 if k % 2 == 0 else w.basis1 for w in self.windows]
        joint = np.hstack([b for b in blocks])
        inv = np.linalg.inv(joint)
        start = 0
        for w, b in zip(self.windows, blocks):
            if w.label == label:
                return inv[start:start + b.shape[1], :]
            start += b.shape[1]
        raise KeyError(label)

    def window_trace(self, label: str, op0: np.ndarray, op1: np.ndarray) -> complex:
        """Graded trace of (op0, op1) compressed by the spectral projection of a window."""
        w = self.window(label)
        t0 = np.trace(self.dual_rows(label, 0) @ op0 @ w.basis0) if w.dim else 0.0
        t1 = np.trace(self.dual_rows(label, 1) @ op1 @ w.basis1) if w.dim else 0.0
        return complex(t0 - t1)


def spectral_windows(sig: SignatureData, cuts, tol: float | None = None) -> WindowSplit:
    """Windows of generalized eigenspaces of B^2 by |eigenvalue|, per parity.

    Each window is invariant under d and Gamma, so it carries a subcomplex
    with the restricted chirality.
    """
    cuts = tuple(sorted(set(float(c) for c in cuts)))
    if tol is None:
        radius = max(
            [float(np.max(np.abs(sla.eigvals(sig.square(k))))) for k in (0, 1) if sig.block(k).shape[0]] or [0.0]
        )
        tol = 1e-8 * radius if radius > 0 else 1e-14
    s0 = generalized_eigenspaces(sig.square(0), cuts, tol)
    s1 = generalized_eigenspaces(sig.square(1), cuts, tol)
    windows = []
    for w0, w1 in zip(s0.windows, s1.windows):
        if w0.dim != w1.dim:
            raise NumericalAmbiguity(
                "defective ambiguity", f"window {w0.label} has unequal even/odd dimensions {w0.dim}, {w1.dim}"
            )
        noise = sig.cx.rank_scale * max(_basis_error(sig.square(0), s0, w0), _basis_error(sig.square(1), s1, w1))
        sub = restrict(sig.cx, w0.basis, w1.basis, noise)
        gamma = restrict_chirality(sig.gamma, w0.basis, w1.basis)
        windows.append(Window(w0.label, w0.lower, w0.upper, w0.basis, w1.basis, sub, gamma))
    return WindowSplit(cuts, tuple(windows), (s0, s1))


def _basis_error(square: np.ndarray, split: SpectralSplit, window) -> float:
    """eps ||B^2|| / separation: the angular accuracy of a Schur window basis."""
    if window.dim == 0 or window.dim == split.dim:
        return 0.0
    inside = np.diag(window.operator)
    others = np.concatenate([np.diag(w.operator) for w in split.windows if w is not window and w.dim])
    gap = float(np.min(np.abs(inside[:, None] - others[None, :])))
    return float(np.finfo(float).eps * np.linalg.norm(square) / max(gap, np.finfo(float).tiny))


@dataclass(frozen=True, eq=False)
class PMSplit:
    """Positive/negative halves of a window, in window coordinates."""

    plus: tuple[np.ndarray, np.ndarray]
    minus: tuple[np.ndarray, np.ndarray]
    b_plus: tuple[np.ndarray, np.ndarray]

    @property
    def d_minus(self) -> tuple[int, int]:
        return self.minus[0].shape[1], self.minus[1].shape[1]

    @property
    def d_plus(self) -> tuple[int, int]:
        return self.plus[0].shape[1], self.plus[1].shape[1]


def pm_split(window: Window) -> PMSplit:
    """C^k_- = ker d_k and C^k_+ = Gamma(ker d_{k+1}); B+ = Gamma d on C_+.

    On a window without 0 the square of B splits as X + Y with X = (Gamma d)^2
    and Y = (d Gamma)^2, so X B^-2 and Y B^-2 are complementary projectors onto
    C_+ and C_-; their images are read off with a rank cut at 1/2.  Since
    X = Gamma d B, the projectors are formed as Gamma d B^-1 and d Gamma B^-1,
    which costs cond(B) rather than cond(B)^2.
    """
    if window.contains_zero:
        raise PreconditionError("window contains 0: the +/- split is not guaranteed")
    sub, gamma = window.sub, window.gamma
    gd = (gamma.g1 @ sub.d0, gamma.g0 @ sub.d1)
    dg = (sub.d1 @ gamma.g0, sub.d0 @ gamma.g1)
    plus, minus = [], []
    for k in (0, 1):
        if sub.dim(k) == 0:
            plus.append(np.zeros((0, 0), complex))
            minus.append(np.zeros((0, 0), complex))
            continue
        b = gd[k] + dg[k]
        n_plus = _projector_image(np.linalg.solve(b.T, gd[k].T).T).shape[1]
        n_minus = _projector_image(np.linalg.solve(b.T, dg[k].T).T).shape[1]
        # the projectors fix the dimensions; the bases come from the images of Gamma d and d Gamma
        plus.append(_leading_left_vectors(gd[k], n_plus))
        minus.append(_leading_left_vectors(dg[k], n_minus))
        if plus[k].shape[1] + minus[k].shape[1] != sub.dim(k):
            raise NumericalAmbiguity("defective ambiguity", f"C_+ and C_- do not fill window {window.label}")
    b_plus = tuple(coordinates(plus[k], gd[k] @ plus[k]) for k in (0, 1))
    return PMSplit(tuple(plus), tuple(minus), b_plus)


def _leading_left_vectors(a: np.ndarray, r: int) -> np.ndarray:
    u, _, _ = np.linalg.svd(a)
    return u[:, :r].copy()


def _projector_image(p: np.ndarray) -> np.ndarray:
    u, s, _ = np.linalg.svd(p)
    if np.any((s > 0.1) & (s < 0.9)):
        raise NumericalAmbiguity("defective ambiguity", "spectral projector is far from idempotent")
    return u[:, : int(np.sum(s > 0.5))].copy()


# ---------------------------------------------------------------------------
# graded determinants


def ldet_graded_blocks(bp0: np.ndarray, bp1: np.ndarray, theta: float) -> complex:
    """LDet(B+_0) - LDet(-B+_1) on the branch arg in (theta, theta + 2 pi)."""
    return ldet_branch(bp0, theta) - ldet_branch(-as_float(bp1), theta)


def graded_det_blocks(bp0: np.ndarray, bp1: np.ndarray, theta: float) -> TorsionScalar:
    return TorsionScalar.from_log(ldet_graded_blocks(bp0, bp1, theta))


def agmon_angle_for(pm: PMSplit, sector=(-math.pi, 0.0), eta_admissible: bool = False) -> float:
    spectra = [pm.b_plus[0], -as_float(pm.b_plus[1])]
    return choose_agmon_angle(spectra, sector=sector, eta_admissible=eta_admissible).theta


def graded_det(window: Window, theta: float | None = None) -> tuple[TorsionScalar, float]:
    """Graded determinant of the signature operator on a window without 0."""
    pm = pm_split(window)
    if theta is None:
        theta = agmon_angle_for(pm)
    return graded_det_blocks(pm.b_plus[0], pm.b_plus[1], theta), theta


def xi_blocks(bp0: np.ndarray, bp1: np.ndarray, theta: float) -> complex:
    bp0, bp1 = as_float(bp0), as_float(bp1)
    return 0.5 * (ldet_branch(bp0 @ bp0, 2 * theta) - ldet_branch(bp1 @ bp1, 2 * theta))


def xi_window(window: Window, theta: float) -> complex:
    pm = pm_split(window)
    return xi_blocks(pm.b_plus[0], pm.b_plus[1], theta)


def window_eta(window: Window) -> EtaResult:
    """eta of B0 restricted to the window."""
    return eta_invariant(window.signature_block(0))


def eta_admissible_angle(window: Window) -> float:
    """theta in (-pi/2, 0) with no eigenvalue of B in the two forbidden solid angles."""
    b = window.signature_block(0)
    return choose_agmon_angle([b], sector=(-math.pi / 2, 0.0), eta_admissible=True).theta


@dataclass
class EtaIdentity:
    theta: float
    ldet_gr: complex
    xi: complex
    eta: EtaResult
    d_minus: tuple[int, int]
    residual: float

    @property
    def rhs(self) -> complex:
        return self.xi - 1j * math.pi * float(self.eta.eta) - 0.5j * math.pi * (self.d_minus[0] - self.d_minus[1])


def eta_identity_blocks(bp0: np.ndarray, bm0: np.ndarray, theta: float) -> EtaIdentity:
    """Identity check from B+_0 and B-_0 directly (B+_1 is similar to B-_0)."""
    bp0, bm0 = as_float(bp0), as_float(bm0)
    lhs = ldet_graded_blocks(bp0, bm0, theta)
    xi = xi_blocks(bp0, bm0, theta)
    eta = eta_invariant(sla.block_diag(bp0, bm0))
    d_minus = (bm0.shape[0], bp0.shape[0])
    rhs = xi - 1j * math.pi * float(eta.eta) - 0.5j * math.pi * (d_minus[0] - d_minus[1])
    return EtaIdentity(theta, lhs, xi, eta, d_minus, abs(lhs - rhs))


def eta_identity_check(window: Window, theta: float | None = None) -> EtaIdentity:
    """LDet_gr = xi - i pi eta - (i pi / 2) sum (-1)^k d^-_k on a window without 0."""
    pm = pm_split(window)
    if theta is None:
        theta = eta_admissible_angle(window)
    elif not -math.pi / 2 < theta < 0:
        raise NumericalAmbiguity("no admissible angle", "theta must lie in (-pi/2, 0)")
    lhs = ldet_graded_blocks(pm.b_plus[0], pm.b_plus[1], theta)
    xi = xi_blocks(pm.b_plus[0], pm.b_plus[1], theta)
    eta = window_eta(window)
    d_minus = pm.d_minus
    rhs = xi - 1j * math.pi * float(eta.eta) - 0.5j * math.pi * (d_minus[0] - d_minus[1])
    return EtaIdentity(theta, lhs, xi, eta, d_minus, abs(lhs - rhs))


# ---------------------------------------------------------------------------
# torsion elements


def window_torsion(window: Window, cohom: CohomologySpaces) -> DetElement:
    """Refined torsion of a window subcomplex, expressed in the ambient cohomology reference."""
    sub_cohom = cohomology(window.sub)
    rho = refined_torsion(window.sub, window.gamma, cohom=sub_cohom)
    amb0 = window.basis0 @ sub_cohom.ref[0]
    amb1 = window.basis1 @ sub_cohom.ref[1]
    return cohom.element(rho.coeff * transport_factor(cohom, amb0, amb1))


@dataclass
class RhoH:
    element: DetElement
    det_gr: TorsionScalar
    small: DetElement
    theta: float
    cut: float
    split: WindowSplit

    @property
    def scalar(self) -> TorsionScalar:
        return TorsionScalar.from_complex(self.element.as_complex())


def rho_H(
    cx: Z2Complex,
    gamma: Chirality,
    cut: float,
    theta: float | None = None,
    cohom: CohomologySpaces | None = None,
    sig: SignatureData | None = None,
) -> RhoH:
    """Det_gr over (cut, inf) times the refined torsion of the [0, cut] subcomplex."""
    sig = sig or build_signature(cx, gamma)
    cohom = cohom or cohomology(sig.cx)
    split = spectral_windows(sig, [cut])
    large = split.large
    if large.dim:
        dg, theta = graded_det(large, theta)
    else:
        dg, theta = TorsionScalar(0.0, 0.0), (theta if theta is not None else -math.pi / 2)
    small = window_torsion(split.small, cohom)
    return RhoH(small.scaled(dg.value), dg, small, theta, cut, split)


def rho_an(rho_h: DetElement, eta_trivial: float = 0.0, rank: int = 1) -> DetElement:
    return rho_h.scaled(cmath.exp(1j * math.pi * rank * eta_trivial))


# ---------------------------------------------------------------------------
# flux deformation


@dataclass
class FluxVariation:
    h: float
    xi_rate: complex
    small_rate: complex
    combined_rate: complex
    trace_large: complex
    trace_small: complex
    trace_full: complex
    residuals: dict
    discrepancy: complex

    @property
    def drift(self) -> complex:
        return self.combined_rate


def deform_complex(cx: Z2Complex, beta: tuple[np.ndarray, np.ndarray], v: float) -> Z2Complex:
    """d_v = e^{v beta} d e^{-v beta}."""
    e0, e1 = sla.expm(v * beta[0]), sla.expm(v * beta[1])
    f0, f1 = sla.expm(-v * beta[0]), sla.expm(-v * beta[1])
    return Z2Complex(e1 @ cx.d0 @ f0, e0 @ cx.d1 @ f1, cx.G0, cx.G1, nilpotency_rtol=RESTRICTED_RTOL)


def _log_ratio(a: complex, b: complex) -> complex:
    return cmath.log(a / b)


def _flux_terms(
    cx: Z2Complex,
    gamma: Chirality,
    beta: tuple[np.ndarray, np.ndarray],
    v: float,
    cut: float,
    theta: float,
    cohom0: CohomologySpaces,
    large_dim: int,
) -> tuple[complex, complex]:
    """(xi over the large window, small-window torsion) for d_v, with the reference moved by e^{v beta}."""
    cxv = deform_complex(cx, beta, v)
    split = spectral_windows(build_signature(cxv, gamma), [cut])
    if split.large.dim != large_dim:
        raise NumericalAmbiguity("window collision", "window dimensions changed along the deformation", v=v)
    xi = xi_window(split.large, theta) if split.large.dim else 0.0j
    moved = cohomology(cxv).with_reference(sla.expm(v * beta[0]) @ cohom0.ref[0], sla.expm(v * beta[1]) @ cohom0.ref[1])
    return complex(xi), window_torsion(split.small, moved).as_complex()


def _flux_setup(cx, gamma, beta, cut, theta):
    cx = cx.to_float() if cx.exact else cx
    beta = (as_float(beta[0]), as_float(beta[1]))
    cohom0 = cohomology(cx)
    split0 = spectral_windows(build_signature(cx, gamma), [cut])
    if theta is None and split0.large.dim:
        theta = agmon_angle_for(pm_split(split0.large))
    theta = -math.pi / 2 if theta is None else theta
    return cx, beta, cohom0, split0, theta


def common_agmon_angle(complexes, gamma: Chirality, cut: float) -> float:
    """One angle admissible for the large windows of every complex in a family."""
    spectra = []
    for c in complexes:
        large = spectral_windows(build_signature(c, gamma), [cut]).large
        if large.dim:
            pm = pm_split(large)
            spectra += [pm.b_plus[0], -as_float(pm.b_plus[1])]
    return choose_agmon_angle(spectra).theta if spectra else -math.pi / 2


@dataclass
class FluxInvariance:
    vs: list
    log_values: list
    defect: float
    slope: complex
    supertrace: complex
    branch_crossings: int = 0


def flux_invariance(
    cx: Z2Complex,
    gamma: Chirality,
    beta: tuple[np.ndarray, np.ndarray],
    cut: float,
    vs,
    theta: float | None = None,
) -> FluxInvariance:
    """log of e^{xi}·(small-window torsion in the moved reference) along v.

    The moved reference realizes Det(ε_v)^{-1}, so the values drift at rate
    -Tr_s(beta) and are constant for supertraceless beta.
    """
    explicit = theta is not None
    cx, beta, cohom0, split0, theta = _flux_setup(cx, gamma, beta, cut, theta)
    if not explicit and split0.large.dim:
        theta = common_agmon_angle([deform_complex(cx, beta, v) for v in vs], gamma, cut)
    logs = []
    for v in vs:
        xi, small = _flux_terms(cx, gamma, beta, v, cut, theta, cohom0, split0.large.dim)
        logs.append(xi + cmath.log(small))
    # xi at a fixed angle jumps by i*pi when an eigenvalue of (B+)^2 crosses the ray 2*theta;
    # follow the continuous branch along the grid instead
    rel = [logs[0]]
    crossings = 0
    for prev, w in zip(logs, logs[1:]):
        step = w - prev
        turns = round(step.imag / math.pi)
        step -= 1j * math.pi * turns
        if abs(step.imag) > math.pi / 4:
            raise NumericalAmbiguity("grid too coarse", "phase step too large to continue the branch", step=step)
        crossings += turns != 0
        rel.append(rel[-1] + step)
    st = complex(np.trace(beta[0]) - np.trace(beta[1]))
    drift = [w - rel[0] + st * (v - vs[0]) for v, w in zip(vs, rel)]
    vv = np.asarray(vs, dtype=float)
    slope = complex(np.polyfit(vv, np.real(rel), 1)[0] + 1j * np.polyfit(vv, np.imag(rel), 1)[0]) if len(vs) > 1 else 0j
    return FluxInvariance(list(vs), rel, max(abs(d) for d in drift), slope, st, crossings)


def flux_variation_check(
    cx: Z2Complex,
    gamma: Chirality,
    beta: tuple[np.ndarray, np.ndarray],
    cut: float,
    h: float,
    theta: float | None = None,
) -> FluxVariation:
    """Central differences of xi, the transported small-window torsion, and their product."""
    cx, beta, cohom0, split0, theta = _flux_setup(cx, gamma, beta, cut, theta)
    large0 = split0.large
    values = {v: _flux_terms(cx, gamma, beta, v, cut, theta, cohom0, large0.dim) for v in (-h, h)}
    xi_rate = (values[h][0] - values[-h][0]) / (2 * h)
    small_rate = _log_ratio(values[h][1], values[-h][1]) / (2 * h)
    combined_rate = xi_rate + small_rate
    trace_large = split0.window_trace(large0.label, *beta)
    trace_small = split0.window_trace(split0.small.label, *beta)
    trace_full = complex(np.trace(beta[0]) - np.trace(beta[1]))
    residuals = {
        "xi": abs(xi_rate + trace_large),
        "small": abs(small_rate + trace_small),
        "combined": abs(combined_rate + trace_full),
    }
    window_rate = trace_small
    finite_rate = -trace_large
    return FluxVariation(
        h, xi_rate, small_rate, combined_rate, trace_large, trace_small, trace_full, residuals, window_rate - finite_rate
    )
