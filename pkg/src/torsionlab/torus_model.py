"""Fourier-truncated twisted de Rham complexes of the flat 3-torus.

Each lattice mode k carries the 8 exterior monomials; the even space is
Λ⁰ ⊕ Λ² and the odd space is Λ¹ ⊕ Λ³.  The twisted differential on a mode is
exterior multiplication by i(k + a)·dx plus h dx¹∧dx²∧dx³, and the chirality
is a signed Hodge star.  Global quantities are assembled from per-mode ones
in lexicographic mode order.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .detline import DetElement, fuse_graded, graded_element
from .linalg_core import NumericalAmbiguity
from .signature import (
    EtaResult,
    RhoH,
    TorsionScalar,
    build_signature,
    eta_invariant,
    rho_H,
    spectral_windows,
    window_eta,
    window_torsion,
    xi_window,
)
from .z2complex import (
    Chirality,
    CohomologySpaces,
    Z2Complex,
    alpha_on_cohomology,
    chiral_dual_iso,
    chirality_supertrace,
    cohomology,
    direct_sum_cohomology,
    dual_cohomology,
    metric_adjoints,
)

MONOMIALS: tuple[tuple[int, ...], ...] = ((), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2))
EVEN = (0, 4, 5, 6)
ODD = (1, 2, 3, 7)
VOLUME = 7
_INDEX = {m: i for i, m in enumerate(MONOMIALS)}


@dataclass(frozen=True)
class TorusConfig:
    K: int = 1
    a: tuple[complex, complex, complex] = (0.0, 0.0, 0.0)
    h: complex = 1.0
    metric: tuple[float, float, float] = (1.0, 1.0, 1.0)
    rank: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(x) for x in self.a))
        object.__setattr__(self, "h", complex(self.h))
        object.__setattr__(self, "metric", tuple(float(x) for x in self.metric))
        if self.K < 0:
            raise ValueError("truncation radius must be non-negative")
        if len(self.a) != 3 or len(self.metric) != 3:
            raise ValueError("holonomy and metric need three entries")
        if min(self.metric) <= 0:
            raise ValueError("metric entries must be positive")
        if self.rank != 1:
            raise ValueError("only rank 1 is supported")

    @property
    def hermitian(self) -> bool:
        return all(x.imag == 0 for x in self.a) and self.h.imag == 0

    def to_dict(self) -> dict:
        def enc(z: complex):
            return z.real if z.imag == 0 else [z.real, z.imag]

        return {"K": self.K, "a": [enc(x) for x in self.a], "h": enc(self.h), "metric": list(self.metric), "rank": 1}

    @classmethod
    def from_dict(cls, data: dict) -> "TorusConfig":
        def dec(v) -> complex:
            if isinstance(v, (list, tuple)):
                return complex(v[0], v[1])
            if isinstance(v, str):
                return complex(v.replace(" ", "").replace("i", "j"))
            return complex(v)

        return cls(
            K=int(data.get("K", 1)),
            a=tuple(dec(x) for x in data.get("a", (0, 0, 0))),
            h=dec(data.get("h", 1.0)),
            metric=tuple(float(x) for x in data.get("metric", (1, 1, 1))),
            rank=int(data.get("rank", 1)),
        )


def modes(K: int) -> list[tuple[int, int, int]]:
    """Lattice vectors with |k_j| <= K in lexicographic order."""
    return list(itertools.product(range(-K, K + 1), repeat=3))


# ---------------------------------------------------------------------------
# exterior algebra on one mode


def _wedge_sign(left: tuple[int, ...], right: tuple[int, ...]) -> int:
    if set(left) & set(right):
        return 0
    inversions = sum(1 for x in left for y in right if x > y)
    return -1 if inversions % 2 else 1


def wedge_operator(form: dict[tuple[int, ...], complex]) -> np.ndarray:
    """8x8 matrix of exterior multiplication from the left by a constant form."""
    out = np.zeros((8, 8), dtype=complex)
    for mono, coeff in form.items():
        for j, target in enumerate(MONOMIALS):
            s = _wedge_sign(mono, target)
            if s:
                out[_INDEX[tuple(sorted(mono + target))], j] += s * coeff
    return out


def _split(full: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(even -> odd, odd -> even) blocks of an 8x8 operator."""
    return full[np.ix_(ODD, EVEN)], full[np.ix_(EVEN, ODD)]


def _product(scales: Sequence[float], mono: tuple[int, ...]) -> float:
    return math.prod(scales[i] for i in mono)


def hodge_star(metric: Sequence[float]) -> np.ndarray:
    """Hodge star for the diagonal metric with coframe scalings (a, b, c)."""
    out = np.zeros((8, 8))
    for j, mono in enumerate(MONOMIALS):
        comp = tuple(i for i in range(3) if i not in mono)
        out[_INDEX[comp], j] = _wedge_sign(mono, comp) * _product(metric, comp) / _product(metric, mono)
    return out


def _degree_signs() -> np.ndarray:
    # i^2 (-1)^(q(q+1)/2) for q = 0..3
    return np.array([-1.0 if (len(m) * (len(m) + 1) // 2) % 2 == 0 else 1.0 for m in MONOMIALS])


def chirality_matrix(metric: Sequence[float]) -> np.ndarray:
    """Full 8x8 chirality: the Hodge star twisted by the degree-dependent sign."""
    return hodge_star(metric) * _degree_signs()[None, :]


def build_chirality(metric: Sequence[float]) -> Chirality:
    g0, g1 = _split(chirality_matrix(metric).astype(complex))
    return Chirality(g0, g1)


def mode_gram(metric: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Induced L2 inner products on the even and odd monomials."""
    volume = math.prod(metric)
    diag = np.array([volume / _product(metric, m) ** 2 for m in MONOMIALS], dtype=complex)
    return np.diag(diag[list(EVEN)]), np.diag(diag[list(ODD)])


def mode_differential(k: Sequence[int], a: Sequence[complex], h: complex) -> np.ndarray:
    form = {(j,): 1j * (k[j] + a[j]) for j in range(3)}
    form[(0, 1, 2)] = h
    return wedge_operator(form)


@dataclass(frozen=True, eq=False)
class ModeComplex:
    k: tuple[int, int, int]
    complex: Z2Complex
    gamma: Chirality


def build_mode_complex(k: Sequence[int], config: TorusConfig) -> ModeComplex:
    d0, d1 = _split(mode_differential(k, config.a, config.h))
    g0, g1 = mode_gram(config.metric)
    return ModeComplex(tuple(int(x) for x in k), Z2Complex(d0, d1, g0, g1), build_chirality(config.metric))


def mode_complexes(config: TorusConfig) -> list[ModeComplex]:
    return [build_mode_complex(k, config) for k in modes(config.K)]


# ---------------------------------------------------------------------------
# full truncated complex


def full_complex(config: TorusConfig, flux_harmonics: dict | None = None) -> tuple[Z2Complex, Chirality]:
    """The whole truncated complex as one pair of block matrices.

    ``flux_harmonics`` maps nonzero lattice vectors p to coefficients of
    e^{i p.x} dx¹∧dx²∧dx³; such terms couple mode k to mode k + p and are
    truncated at the box boundary.
    """
    ks = modes(config.K)
    index = {k: i for i, k in enumerate(ks)}
    n = len(ks)
    full = np.zeros((8 * n, 8 * n), dtype=complex)
    for i, k in enumerate(ks):
        full[8 * i:8 * i + 8, 8 * i:8 * i + 8] = mode_differential(k, config.a, config.h)
    top = wedge_operator({(0, 1, 2): 1.0})
    for p, coeff in (flux_harmonics or {}).items():
        for i, k in enumerate(ks):
            target = tuple(k[j] + p[j] for j in range(3))
            if target in index:
                t = index[target]
                full[8 * t:8 * t + 8, 8 * i:8 * i + 8] += coeff * top
    even = [8 * i + e for i in range(n) for e in EVEN]
    odd = [8 * i + o for i in range(n) for o in ODD]
    d0 = full[np.ix_(odd, even)]
    d1 = full[np.ix_(even, odd)]
    g0, g1 = mode_gram(config.metric)
    gamma = build_chirality(config.metric)
    cx = Z2Complex(d0, d1, sla.block_diag(*[g0] * n), sla.block_diag(*[g1] * n))
    return cx, Chirality(sla.block_diag(*[gamma.g0] * n), sla.block_diag(*[gamma.g1] * n))


def full_cohomology_dims(config: TorusConfig) -> tuple[int, int]:
    """Cohomology dimensions from SVD ranks of the assembled truncated differential."""
    cx, _ = full_complex(config)

    def rank(m: np.ndarray) -> int:
        s = np.linalg.svd(m, compute_uv=False)
        return int(np.sum(s > 1e-9 * max(1.0, s[0]))) if s.size else 0

    r0, r1 = rank(cx.d0), rank(cx.d1)
    return cx.n0 - r0 - r1, cx.n1 - r1 - r0


# ---------------------------------------------------------------------------
# metric families, duals, trivial eta


def metric_family_supertrace(family: Callable[[float], Sequence[float]], t: float, h: float = 1e-6) -> complex:
    """Tr_s(dΓ/dt Γ) for a diagonal metric family, from the logarithmic derivatives of the scalings.

    Every entry of Γ is ±s_J/s_I, so its derivative is the entry times
    u_J - u_I with u the logarithmic derivatives.
    """
    scales = np.asarray(family(t), dtype=float)
    u = (np.log(np.asarray(family(t + h), dtype=float)) - np.log(np.asarray(family(t - h), dtype=float))) / (2 * h)
    full = chirality_matrix(scales)
    rate = np.array([sum(u[i] for i in m) for m in MONOMIALS])
    dfull = full * (rate[:, None] - rate[None, :])
    dg0, dg1 = _split(dfull.astype(complex))
    return chirality_supertrace(dg0, dg1, build_chirality(scales))


def dual_config(config: TorusConfig) -> TorusConfig:
    return replace(config, a=tuple(x.conjugate() for x in config.a), h=config.h.conjugate())


def signature_adjoint_residual(k: Sequence[int], config: TorusConfig) -> float:
    """max over parities of ||(B_k)^dag - B'_k|| with B' the dual model's signature operator."""
    mode = build_mode_complex(k, config)
    dual = build_mode_complex(k, dual_config(config))
    sig = build_signature(mode.complex, mode.gamma)
    sig_dual = build_signature(dual.complex, dual.gamma)
    g0, g1 = mode.complex.G0, mode.complex.G1
    adj0 = np.linalg.solve(g0, sig.B0.conj().T @ g0)
    adj1 = np.linalg.solve(g1, sig.B1.conj().T @ g1)
    return max(float(np.linalg.norm(adj0 - sig_dual.B0)), float(np.linalg.norm(adj1 - sig_dual.B1)))


def chiral_dual_residual(k: Sequence[int], config: TorusConfig) -> float:
    """||Γ d^dag Γ - d'|| per parity, d' the dual model's differential."""
    mode = build_mode_complex(k, config)
    dual = build_mode_complex(k, dual_config(config))
    a0, a1 = metric_adjoints(mode.complex)
    e0 = mode.gamma.g0 @ a0 @ mode.gamma.g0
    e1 = mode.gamma.g1 @ a1 @ mode.gamma.g1
    return max(float(np.linalg.norm(e0 - dual.complex.d0)), float(np.linalg.norm(e1 - dual.complex.d1)))


def trivial_eta(config: TorusConfig) -> EtaResult:
    """Eta record of B0 summed over the modes of the a = 0 model with the same metric and flux."""
    trivial = replace(config, a=(0.0, 0.0, 0.0))
    records = []
    for mode in mode_complexes(trivial):
        records.append(eta_invariant(build_signature(mode.complex, mode.gamma).B0))
    return _sum_eta(records)


def eta_trivial(config: TorusConfig, full: bool = False) -> float:
    """Half the signed eigenvalue count of the trivial-connection model (or its full eta)."""
    rec = trivial_eta(config)
    return float(rec.eta) if full else rec.eta0 / 2


def _sum_eta(records: Iterable[EtaResult]) -> EtaResult:
    records = list(records)
    eta0 = sum(r.eta0 for r in records)
    mp = sum(r.m_plus for r in records)
    mm = sum(r.m_minus for r in records)
    mz = sum(r.m_zero for r in records)
    warnings = [w for r in records for w in r.warnings]
    return EtaResult(
        eta0,
        mp,
        mm,
        mz,
        Fraction(eta0 + mp - mm + mz, 2),
        warnings,
        sum(r.n_positive for r in records),
        sum(r.n_negative for r in records),
    )


# ---------------------------------------------------------------------------
# per-mode torsion and aggregation


@dataclass
class ModeTorsion:
    k: tuple[int, int, int]
    cohomology: CohomologySpaces
    rho: RhoH
    xi: complex
    eta_large: EtaResult
    eta_full: EtaResult
    d_minus: tuple[int, int]

    @property
    def dims(self) -> tuple[int, int]:
        return self.cohomology.dims

    @property
    def small_scaled(self) -> complex:
        """e^{xi} times the small-window torsion coefficient."""
        return cmath.exp(self.xi) * self.rho.small.as_complex()


def _window_d_minus(window) -> tuple[int, int]:
    from .signature import pm_split

    return pm_split(window).d_minus if window.dim else (0, 0)


def mode_torsion(
    mode: ModeComplex, cut: float, theta: float | None = None, cohom: CohomologySpaces | None = None
) -> ModeTorsion:
    sig = build_signature(mode.complex, mode.gamma)
    cohom = cohom or cohomology(mode.complex)
    rho = rho_H(mode.complex, mode.gamma, cut, theta, cohom=cohom, sig=sig)
    large = rho.split.large
    xi = xi_window(large, rho.theta) if large.dim else 0.0j
    eta_large = window_eta(large) if large.dim else EtaResult(0, 0, 0, 0, Fraction(0))
    return ModeTorsion(mode.k, cohom, rho, complex(xi), eta_large, eta_invariant(sig.B0), _window_d_minus(large))


@dataclass
class TorusTorsion:
    config: TorusConfig | None
    cut: float
    modes: list[ModeTorsion]
    rho_H: DetElement
    small_scaled: DetElement
    cohomology: CohomologySpaces
    xi: complex
    eta_large: EtaResult
    eta_full: EtaResult
    d_minus: tuple[int, int]
    extras: dict = field(default_factory=dict)

    @property
    def dims(self) -> tuple[int, int]:
        return self.cohomology.dims

    @property
    def acyclic(self) -> bool:
        return self.dims == (0, 0)

    def rho_an(self, eta_trivial_value: float) -> DetElement:
        return self.rho_H.scaled(cmath.exp(1j * math.pi * eta_trivial_value))


def aggregate(results: Sequence[ModeTorsion], config: TorusConfig | None = None, cut: float = 0.0) -> TorusTorsion:
    """Fuse per-mode results in lexicographic order."""
    ks = [r.k for r in results]
    if len(set(ks)) != len(ks) or ks != sorted(ks):
        raise ValueError("mode results must be distinct and in lexicographic order")
    if config is not None and ks != modes(config.K):
        raise ValueError("mode results do not cover the truncation box")
    if not results:
        raise ValueError("no modes")
    rho = results[0].rho.element
    small = results[0].cohomology.element(results[0].small_scaled)
    cohom = results[0].cohomology
    for r in results[1:]:
        rho = fuse_graded(rho, r.rho.element)
        small = fuse_graded(small, r.cohomology.element(r.small_scaled))
        cohom = direct_sum_cohomology(cohom, r.cohomology)
    rho = graded_element(rho.coeff, *cohom.dims, prefix="H")
    small = graded_element(small.coeff, *cohom.dims, prefix="H")
    return TorusTorsion(
        config,
        cut,
        list(results),
        rho,
        small,
        cohom,
        complex(sum(r.xi for r in results)),
        _sum_eta(r.eta_large for r in results),
        _sum_eta(r.eta_full for r in results),
        (sum(r.d_minus[0] for r in results), sum(r.d_minus[1] for r in results)),
    )


def signature_spectra(config: TorusConfig) -> list[np.ndarray]:
    """|eigenvalues| of B0^2 for every mode."""
    out = []
    for mode in mode_complexes(config):
        sig = build_signature(mode.complex, mode.gamma)
        out.append(np.abs(sla.eigvals(sig.square(0))))
    return out


def auto_cut(configs: Sequence[TorusConfig] | TorusConfig, rtol: float = 1e-8) -> float:
    """Half the smallest nonzero |eigenvalue| of B^2 over all modes (and all configs given)."""
    if isinstance(configs, TorusConfig):
        configs = [configs]
    values = np.concatenate([np.concatenate(signature_spectra(c)) for c in configs])
    top = float(np.max(values)) if values.size else 0.0
    nonzero = values[values > rtol * max(top, 1.0)]
    return 0.5 * float(np.min(nonzero)) if nonzero.size else 1.0


def torus_torsion(
    config: TorusConfig,
    cut: float | None = None,
    theta: float | None = None,
    cohoms: dict | None = None,
) -> TorusTorsion:
    """Per-mode pipeline plus aggregation; ``cohoms`` optionally fixes the per-mode references."""
    cut = auto_cut(config) if cut is None else cut
    results = []
    for mode in mode_complexes(config):
        cohom = cohoms.get(mode.k) if cohoms else None
        results.append(mode_torsion(mode, cut, theta, cohom))
    return aggregate(results, config, cut)


# ---------------------------------------------------------------------------
# experiments


@dataclass
class MetricInvariance:
    ts: list[float]
    supertraces: list[complex]
    values: list[complex]
    defect: float
    cut: float
    etas: list[EtaResult] = field(default_factory=list)
    d_minus: list[tuple[int, int]] = field(default_factory=list)


def metric_invariance(
    config: TorusConfig,
    family: Callable[[float], Sequence[float]],
    ts: Sequence[float],
    cut: float | None = None,
) -> MetricInvariance:
    """e^{xi}·(small-window torsion) along a metric family with fixed cohomology references."""
    configs = [replace(config, metric=tuple(family(t))) for t in ts]
    cut = auto_cut(configs) if cut is None else cut
    base = {m.k: cohomology(m.complex) for m in mode_complexes(configs[0])}
    values, sts, etas, dms = [], [], [], []
    for t, cfg in zip(ts, configs):
        res = torus_torsion(cfg, cut, cohoms=base)
        values.append(res.small_scaled.as_complex())
        sts.append(metric_family_supertrace(family, t))
        etas.append(res.eta_full)
        dms.append(res.d_minus)
    logs = [cmath.log(v / values[0]) for v in values]
    defect = max(abs(w) for w in logs)
    return MetricInvariance(list(ts), sts, values, defect, cut, etas, dms)


@dataclass
class DualityChain:
    alpha_rho: complex
    rho_dual: complex
    ratio: complex
    eta: Fraction
    eta_trivial: float
    predicted: complex
    residual: float
    adjoint_residual: float


def duality_chain(config: TorusConfig, cut: float | None = None) -> DualityChain:
    """Compare α(ρ_an) with the dual model's ρ_an times exp(2πi(η - r η_trivial)).

    The dual model's cohomology reference is the pairing-dual reference
    pulled back along w -> GΓw.
    """
    dual = dual_config(config)
    cut = auto_cut([config, dual]) if cut is None else cut
    eta_t = eta_trivial(config)
    eta_t_dual = eta_trivial(dual)
    originals, duals = [], []
    adjoint_residual = 0.0
    for mode in mode_complexes(config):
        dmode = build_mode_complex(mode.k, dual)
        cohom = cohomology(mode.complex)
        tau_cohom = dual_cohomology(mode.complex, cohom)
        iota0, iota1 = chiral_dual_iso(mode.complex, mode.gamma)
        pulled = cohomology(dmode.complex).with_reference(
            np.linalg.solve(iota0, tau_cohom.ref[0]), np.linalg.solve(iota1, tau_cohom.ref[1])
        )
        originals.append(mode_torsion(mode, cut, cohom=cohom))
        duals.append(mode_torsion(dmode, cut, cohom=pulled))
        adjoint_residual = max(adjoint_residual, signature_adjoint_residual(mode.k, config))
    first = aggregate(originals, config, cut)
    second = aggregate(duals, dual, cut)
    alpha_rho = alpha_on_cohomology(first.rho_an(eta_t)).as_complex()
    rho_dual = second.rho_an(eta_t_dual).as_complex()
    eta = first.eta_full.eta
    predicted = cmath.exp(2j * math.pi * (float(eta) - config.rank * eta_t))
    ratio = alpha_rho / rho_dual
    return DualityChain(alpha_rho, rho_dual, ratio, eta, eta_t, predicted, abs(ratio - predicted), adjoint_residual)


@dataclass
class TorusNorm:
    norm: float
    predicted: float
    eta_imag: float
    mathai_wu_norm: float
    per_mode_worst: float


def torus_rs_norm(config: TorusConfig, cut: float | None = None) -> TorusNorm:
    """||rho_an||^RS of the truncated model as the product of per-mode norms (the modes are orthogonal)."""
    from .rs_metric import mathai_wu_element, rs_metric_log_norm, rs_norm_of_rho_an, harmonic_cohomology

    cut = auto_cut(config) if cut is None else cut
    log_norm = 0.0
    log_mw = 0.0
    eta_imag = 0.0
    worst = 0.0
    for mode in mode_complexes(config):
        res = rs_norm_of_rho_an(mode.complex, mode.gamma, cut)
        log_norm += math.log(res.norm)
        eta_imag += res.eta_imag
        worst = max(worst, abs(res.norm - res.predicted))
        mw = mathai_wu_element(mode.complex)
        log_mw += rs_metric_log_norm(mw, mode.complex, harmonic_cohomology(mode.complex))
    # |exp(i pi eta_trivial)| = 1 because the trivial eta is real
    return TorusNorm(math.exp(log_norm), math.exp(math.pi * eta_imag), eta_imag, math.exp(log_mw), worst)


@dataclass
class BoundaryLeak:
    K: int
    defect: float


def boundary_leak(
    config: TorusConfig, harmonic: tuple[int, int, int] = (0, 0, 1), amplitude: complex = 0.3, Ks: Sequence[int] = (1, 2)
) -> list[BoundaryLeak]:
    """Invariance defect of e^{xi}·(small-window torsion) when an exact non-constant flux term is added.

    The term c e^{ip.x} dx¹∧dx²∧dx³ equals dB with B = c/(i p_3) e^{ip.x} dx¹∧dx²;
    the cohomology reference is moved by the truncated e^{-B∧}.
    """
    p = harmonic
    if p[2] == 0:
        raise ValueError("the harmonic needs a nonzero third component")
    out = []
    for K in Ks:
        cfg = replace(config, K=K)
        base_cx, gamma = full_complex(cfg)
        moved_cx, _ = full_complex(cfg, {p: amplitude})
        b_op = _truncated_two_form(cfg, p, amplitude / (1j * p[2]))
        cut = auto_cut(cfg)
        cohom0 = cohomology(base_cx)
        moved = cohomology(moved_cx).with_reference(
            (np.eye(base_cx.n0) - b_op[0]) @ cohom0.ref[0], (np.eye(base_cx.n1) - b_op[1]) @ cohom0.ref[1]
        )
        q0 = _scaled_small(base_cx, gamma, cut, cohom0)
        q1 = _scaled_small(moved_cx, gamma, cut, moved)
        out.append(BoundaryLeak(K, abs(cmath.log(q1 / q0))))
    return out


def _truncated_two_form(config: TorusConfig, p, coeff) -> tuple[np.ndarray, np.ndarray]:
    ks = modes(config.K)
    index = {k: i for i, k in enumerate(ks)}
    n = len(ks)
    full = np.zeros((8 * n, 8 * n), dtype=complex)
    local = wedge_operator({(0, 1): coeff})
    for i, k in enumerate(ks):
        target = tuple(k[j] + p[j] for j in range(3))
        if target in index:
            t = index[target]
            full[8 * t:8 * t + 8, 8 * i:8 * i + 8] += local
    even = [8 * i + e for i in range(n) for e in EVEN]
    odd = [8 * i + o for i in range(n) for o in ODD]
    return full[np.ix_(even, even)], full[np.ix_(odd, odd)]


def _scaled_small(cx: Z2Complex, gamma: Chirality, cut: float, cohom: CohomologySpaces) -> complex:
    split = spectral_windows(build_signature(cx, gamma), [cut])
    large = split.large
    if large.dim:
        from .signature import agmon_angle_for, pm_split

        theta = agmon_angle_for(pm_split(large))
        xi = xi_window(large, theta)
    else:
        xi = 0.0
    return cmath.exp(xi) * window_torsion(split.small, cohom).as_complex()


__all__ = [
    "BoundaryLeak",
    "DualityChain",
    "MetricInvariance",
    "ModeComplex",
    "ModeTorsion",
    "NumericalAmbiguity",
    "TorsionScalar",
    "TorusConfig",
    "TorusNorm",
    "TorusTorsion",
    "aggregate",
    "auto_cut",
    "boundary_leak",
    "build_chirality",
    "build_mode_complex",
    "chiral_dual_residual",
    "chirality_matrix",
    "dual_config",
    "duality_chain",
    "eta_trivial",
    "full_cohomology_dims",
    "full_complex",
    "hodge_star",
    "metric_family_supertrace",
    "metric_invariance",
    "mode_complexes",
    "mode_gram",
    "mode_torsion",
    "modes",
    "signature_adjoint_residual",
    "torus_rs_norm",
    "torus_torsion",
    "trivial_eta",
    "wedge_operator",
]
