"""Laplacians, Ray-Singer window torsions and metrics on the cohomology determinant line."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .detline import DetElement, graded_element
from .linalg_core import NumericalAmbiguity, rank, rank_threshold
from .signature import build_signature, eta_invariant, rho_H, rho_an
from .z2complex import (
    Chirality,
    CohomologySpaces,
    PreconditionError,
    Z2Complex,
    chiral_dual,
    cohomology,
    metric_adjoints,
    phi_iso,
    restrict,
    transport_factor,
)

GAP_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class LaplacianData:
    delta0: np.ndarray
    delta1: np.ndarray
    d0_adj: np.ndarray
    d1_adj: np.ndarray

    def block(self, k: int) -> np.ndarray:
        return self.delta0 if k % 2 == 0 else self.delta1


def _require_metric(cx: Z2Complex) -> Z2Complex:
    if not cx.has_metric:
        raise PreconditionError("Ray-Singer quantities need inner products")
    return cx.to_float() if cx.exact else cx


def laplacian(cx: Z2Complex) -> LaplacianData:
    cx = _require_metric(cx)
    d0_adj, d1_adj = metric_adjoints(cx)
    delta0 = d0_adj @ cx.d0 + cx.d1 @ d1_adj
    delta1 = d1_adj @ cx.d1 + cx.d0 @ d0_adj
    return LaplacianData(delta0, delta1, d0_adj, d1_adj)


def _self_adjoint_spectrum(op: np.ndarray, gram: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and G-orthonormal eigenvectors of a G-self-adjoint operator."""
    if op.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), complex)
    form = gram @ op
    form = 0.5 * (form + form.conj().T)
    return sla.eigh(form, gram)


def _nonzero_spectrum(op: np.ndarray, gram: np.ndarray, expected_kernel: int) -> np.ndarray:
    vals, _ = _self_adjoint_spectrum(op, gram)
    if vals.size == 0:
        return vals
    tol = rank_threshold(np.array([float(np.max(np.abs(vals)))]), op.shape)
    zero = int(np.sum(np.abs(vals) <= tol))
    if zero != expected_kernel:
        raise NumericalAmbiguity(
            "ill-conditioned rank",
            f"{zero} near-zero eigenvalues where the kernel has dimension {expected_kernel}",
        )
    return np.sort(vals[np.abs(vals) > tol])


def _in_window(vals: np.ndarray, lower: float, upper: float) -> np.ndarray:
    return vals[(vals > lower) & (vals <= upper)]


def rs_window_log_torsion(cx: Z2Complex, lower: float = 0.0, upper: float = math.inf) -> float:
    """log T_I = 1/2 sum_k (-1)^(k+1) sum log nu over nonzero eigenvalues nu of d_k^dag d_k in I = (lower, upper]."""
    cx = _require_metric(cx)
    lap = laplacian(cx)
    total = 0.0
    for k, (d, d_adj) in enumerate(((cx.d0, lap.d0_adj), (cx.d1, lap.d1_adj))):
        op = d_adj @ d
        kernel_dim = cx.dim(k) - (rank(d, cx.rank_scale) if d.size else 0)
        vals = _nonzero_spectrum(op, cx.gram(k), kernel_dim)
        total += 0.5 * (-1) ** (k + 1) * float(np.sum(np.log(_in_window(vals, lower, upper))))
    return total


def rs_window_torsion(cx: Z2Complex, lower: float = 0.0, upper: float = math.inf) -> float:
    return math.exp(rs_window_log_torsion(cx, lower, upper))


def harmonic_cohomology(cx: Z2Complex) -> CohomologySpaces:
    """Cohomology referenced by G-orthonormal bases of the kernels of the Laplacians."""
    cx = _require_metric(cx)
    lap = laplacian(cx)
    refs = []
    for k in (0, 1):
        vals, vecs = _self_adjoint_spectrum(lap.block(k), cx.gram(k))
        top = float(np.max(np.abs(vals))) if vals.size else 0.0
        tol = rank_threshold(np.array([top]), lap.block(k).shape, cx.rank_scale ** 2)
        refs.append(vecs[:, np.abs(vals) <= tol] if vals.size else vecs)
    base = cohomology(cx)
    if tuple(r.shape[1] for r in refs) != base.dims:
        raise NumericalAmbiguity("ill-conditioned rank", "harmonic space and cohomology have different dimensions")
    return base.with_reference(*refs)


def mathai_wu_element(cx: Z2Complex, cohom: CohomologySpaces | None = None) -> DetElement:
    """(T_(0,inf))^-1 times the unit volume element of the harmonic representatives."""
    cx = _require_metric(cx)
    harmonic = harmonic_cohomology(cx)
    coeff = math.exp(-rs_window_log_torsion(cx, 0.0, math.inf)) + 0.0j
    if cohom is not None:
        coeff *= transport_factor(cohom, harmonic.ref[0], harmonic.ref[1])
        return cohom.element(coeff)
    return harmonic.element(coeff)


def _laplace_window_bases(cx: Z2Complex, upper: float) -> tuple[np.ndarray, np.ndarray]:
    lap = laplacian(cx)
    bases = []
    for k in (0, 1):
        vals, vecs = _self_adjoint_spectrum(lap.block(k), cx.gram(k))
        if vals.size and upper <= 0.0:
            top = float(np.max(np.abs(vals)))
            tol = rank_threshold(np.array([top]), vals.shape * 2, cx.rank_scale ** 2)
            bases.append(vecs[:, np.abs(vals) <= tol])
        elif vals.size:
            scale = max(float(np.max(np.abs(vals))), 1.0)
            if np.any(np.abs(vals - upper) <= GAP_RTOL * scale):
                raise NumericalAmbiguity("cut through cluster", f"Laplace eigenvalue at the cut {upper}")
            bases.append(vecs[:, vals <= upper])
        else:
            bases.append(vecs)
    return bases[0], bases[1]


def lambda_log_norm(x: DetElement, cx: Z2Complex, cohom: CohomologySpaces, upper: float) -> float:
    """log of the lambda-metric: the unit element of the Laplace window [0, upper] has norm 1."""
    cx = _require_metric(cx)
    b0, b1 = _laplace_window_bases(cx, upper)
    sub = restrict(cx, b0, b1)
    sub_cohom = cohomology(sub)
    unit = graded_element(1.0 + 0.0j, sub.n0, sub.n1)
    z = phi_iso(sub, unit, cohom=sub_cohom).coeff
    z *= transport_factor(cohom, b0 @ sub_cohom.ref[0], b1 @ sub_cohom.ref[1])
    return math.log(abs(x.as_complex())) - math.log(abs(z))


def rs_metric_log_norm(x: DetElement, cx: Z2Complex, cohom: CohomologySpaces, cut: float = 0.0) -> float:
    """log ||x||^RS = log ||x||_cut + log T_(cut, inf)."""
    return lambda_log_norm(x, cx, cohom, cut) + rs_window_log_torsion(cx, cut, math.inf)


def rs_metric_norm(x: DetElement, cx: Z2Complex, cohom: CohomologySpaces, cut: float = 0.0) -> float:
    return math.exp(rs_metric_log_norm(x, cx, cohom, cut))


@dataclass
class NormComparison:
    norm: float
    predicted: float
    eta_imag: float

    @property
    def ratio(self) -> float:
        return self.norm / self.predicted


def rs_norm_of_rho_an(
    cx: Z2Complex,
    gamma: Chirality,
    cut: float = 0.0,
    rs_cut: float = 0.0,
    eta_trivial: float = 0.0,
    rank: int = 1,
) -> NormComparison:
    """||rho_an||^RS against the prediction exp(pi Im eta)."""
    cx = _require_metric(cx)
    cohom = harmonic_cohomology(cx)
    rho = rho_an(rho_H(cx, gamma, cut, cohom=cohom).element, eta_trivial, rank)
    norm = rs_metric_norm(rho, cx, cohom, rs_cut)
    # a finite-dimensional eta is a rational count of eigenvalues, so Im eta = 0
    eta = eta_invariant(build_signature(cx, gamma).B0)
    eta_imag = float(complex(eta.value).imag)
    return NormComparison(norm, math.exp(math.pi * eta_imag), eta_imag)


def rs_duality_check(cx: Z2Complex, gamma: Chirality) -> float:
    """Relative difference of T_(0,inf) between (C, Gamma d^dag Gamma) and (C, d)."""
    cx = _require_metric(cx)
    dual = chiral_dual(cx, gamma)
    a = rs_window_log_torsion(cx)
    b = rs_window_log_torsion(dual)
    return abs(math.expm1(b - a))


def norm_duality_check(cx: Z2Complex, gamma: Chirality, cut: float = 0.0) -> dict:
    """||rho_an||^RS of a complex and of its chiral dual; both equal exp(pi Im eta) = 1."""
    first = rs_norm_of_rho_an(cx, gamma, cut)
    second = rs_norm_of_rho_an(chiral_dual(cx, gamma), gamma, cut)
    ratio = first.norm / second.norm
    predicted = math.exp(2 * math.pi * first.eta_imag)
    return {"norm": first.norm, "dual_norm": second.norm, "ratio": ratio, "predicted": predicted,
            "residual": abs(ratio - predicted)}

