"""Property suites run by ``torsionlab --command verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .detline import alpha_graded, fuse_graded, graded_element, sign_F, sign_M, sign_N, sign_R
from .generators import (
    SplitMix64,
    isometric_chirality,
    random_acyclic,
    random_chirality,
    random_complex,
)
from .linalg_core import NumericalAmbiguity, gaussian
from .rs_metric import rs_duality_check, rs_norm_of_rho_an
from .signature import (
    build_signature,
    eta_identity_check,
    graded_det,
    pm_split,
    rho_H,
    spectral_windows,
)
from .z2complex import (
    alpha_on_cohomology,
    c_gamma,
    cohomology,
    direct_sum,
    direct_sum_chirality,
    direct_sum_cohomology,
    dual_chirality,
    dual_cohomology,
    dual_complex,
    phi_iso,
    refined_torsion,
)


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: int
    worst: float
    tolerance: float
    counterexample: dict | None = None
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": self.failures,
            "worst_residual": self.worst,
            "tolerance": self.tolerance,
            "counterexample": self.counterexample,
            "skipped": self.skipped,
        }


# ---------------------------------------------------------------------------
# exact suites


def sign_congruences(max_dim: int = 3, convention: str = "consistent") -> SuiteResult:
    """Parity identities over every dimension tuple up to max_dim."""
    failures, cases, first = 0, 0, None
    rng = range(max_dim + 1)
    for a, b in itertools.product(rng, rng):
        cases += 1
        if sign_F(a, b, convention):
            failures += 1
            first = first or {"identity": "F", "dims": [a, b]}
    for a, b in itertools.product(range(2 * max_dim + 1), repeat=2):
        cases += 1
        # R is a quadratic form whose polarization is the fusion sign M
        if (sign_R(a + b) - sign_R(a) - sign_R(b) - sign_M(a, b)) % 2:
            failures += 1
            first = first or {"identity": "R(a+b) = R(a) + R(b) + M(a, b)", "dims": [a, b]}
    for a0, a1 in itertools.product(rng, rng):
        cases += 1
        if a0 % 2 == a1 % 2 and sign_N(a0, a1, "consistent") != sign_N(a0, a1, "literal"):
            failures += 1
            first = first or {"identity": "N conventions agree on equal parity", "dims": [a0, a1]}
    return SuiteResult("sign congruences", cases, failures, float(failures), 0.0, first)


def _dim_tuples(max_dim: int, square: bool):
    for n0, n1 in itertools.product(range(max_dim + 1), repeat=2):
        if square and n0 != n1:
            continue
        for r0 in range(min(n0, n1) + 1):
            for r1 in range(min(n0 - r0, n1 - r0) + 1):
                yield n0, n1, r0, r1


def _exact_case(kind: str, rng: SplitMix64, dims, convention: str) -> bool:
    """Run one exact identity; True on exact equality."""
    n0, n1, r0, r1 = dims
    cx = random_complex(rng, n0, n1, r0, r1, exact=True)
    co = cohomology(cx)
    if kind == "diagram":
        x = graded_element(gaussian(rng.integer(1, 3), rng.integer(-2, 2)), n0, n1)
        lhs = alpha_on_cohomology(phi_iso(cx, x, cohom=co, convention=convention))
        ax = alpha_graded(x)
        rhs = phi_iso(dual_complex(cx), graded_element(ax.coeff, n1, n0), cohom=dual_cohomology(cx, co),
                      convention=convention)
        return lhs.coeff == rhs.coeff
    gamma = random_chirality(rng, n0, exact=True)
    if kind == "duality":
        rho = refined_torsion(cx, gamma, cohom=co, convention=convention)
        rho_dual = refined_torsion(dual_complex(cx), dual_chirality(gamma), cohom=dual_cohomology(cx, co),
                                   convention=convention)
        return alpha_on_cohomology(rho).coeff == rho_dual.coeff
    if kind == "direct_sum":
        m = rng.integer(0, 3)
        other = random_complex(rng, m, m, exact=True)
        g2 = random_chirality(rng, m, exact=True)
        co2 = cohomology(other)
        summed = refined_torsion(direct_sum(cx, other), direct_sum_chirality(gamma, g2),
                                 cohom=direct_sum_cohomology(co, co2), convention=convention)
        fused = fuse_graded(refined_torsion(cx, gamma, cohom=co, convention=convention),
                            refined_torsion(other, g2, cohom=co2, convention=convention))
        c_sum = c_gamma(direct_sum(cx, other), direct_sum_chirality(gamma, g2))
        c_fused = fuse_graded(c_gamma(cx, gamma), c_gamma(other, g2))
        return summed.coeff == fused.coeff and c_sum.coeff == c_fused.coeff
    raise ValueError(kind)


def _shrink(kind: str, seed: int, max_dim: int, convention: str) -> dict | None:
    """Smallest dimension tuple (by total size) on which the identity fails."""
    tuples = sorted(_dim_tuples(max_dim, kind != "diagram"), key=lambda t: (t[0] + t[1], t))
    for dims in tuples:
        rng = SplitMix64(seed)
        for _ in range(8):
            if not _exact_case(kind, rng, dims, convention):
                return {"identity": kind, "dims": list(dims), "seed": seed}
    return None


def exact_identity_suite(
    kind: str, seed: int = 0, random_cases: int = 300, max_dim: int = 3, convention: str = "consistent"
) -> SuiteResult:
    """Every dimension/rank tuple up to max_dim, then seeded random tuples."""
    rng = SplitMix64(seed)
    square = kind != "diagram"
    tuples = list(_dim_tuples(max_dim, square))
    failures = cases = 0
    for dims in tuples:
        cases += 1
        failures += not _exact_case(kind, rng, dims, convention)
    for _ in range(random_cases):
        dims = tuples[rng.integer(0, len(tuples) - 1)]
        cases += 1
        failures += not _exact_case(kind, rng, dims, convention)
    counter = _shrink(kind, seed, max_dim, convention) if failures else None
    names = {"diagram": "alpha-phi diagram", "duality": "torsion duality", "direct_sum": "direct sum fusion"}
    return SuiteResult(names[kind] + " (exact)", cases, failures, float(failures), 0.0, counter)


# ---------------------------------------------------------------------------
# float suites


def _relative(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _run(name: str, tol: float, count: int, seed: int, case: Callable[[SplitMix64], float | None]) -> SuiteResult:
    rng = SplitMix64(seed)
    worst, failures, skipped, first = 0.0, 0, 0, None
    done = 0
    attempts = 0
    while done < count and attempts < 20 * count:
        attempts += 1
        state = rng.state
        try:
            r = case(rng)
        except NumericalAmbiguity:
            skipped += 1
            continue
        if r is None:
            skipped += 1
            continue
        done += 1
        worst = max(worst, r)
        if not r <= tol:
            failures += 1
            first = first or {"state": state, "residual": r}
    return SuiteResult(name, done, failures, worst, tol, first, skipped)


def rho_equals_detgr_case(rng: SplitMix64, max_dim: int = 8) -> float:
    n = rng.integer(1, max_dim)
    cx = random_acyclic(rng, n)
    gamma = random_chirality(rng, n)
    rho = refined_torsion(cx, gamma).as_complex()
    split = spectral_windows(build_signature(cx, gamma), [0.0])
    if split.small.dim:
        return None
    dg, _ = graded_det(split.large)
    return _relative(dg.value, rho)


def gap_cuts(cx, gamma, count: int = 3, rgap: float = 1e-3) -> list[float] | None:
    """Up to ``count`` cuts placed in well-separated gaps of |spec B^2|, including 0."""
    sig = build_signature(cx, gamma)
    mags = np.sort(np.abs(np.linalg.eigvals(sig.square(0))))
    top = float(mags[-1]) if mags.size else 0.0
    mags = mags[mags > 1e-8 * max(top, 1.0)]
    cuts = [0.0]
    for lo, hi in zip(mags, mags[1:]):
        if hi - lo > rgap * hi and len(cuts) < count:
            cuts.append(float(np.sqrt(lo * hi)))
    return cuts if len(cuts) == count else None


def lambda_independence_case(rng: SplitMix64, cuts_per: int = 3) -> float | None:
    n = rng.integer(2, 6)
    cx = random_complex(rng, n)
    gamma = random_chirality(rng, n)
    cuts = gap_cuts(cx, gamma, cuts_per)
    if cuts is None:
        return None
    co = cohomology(cx)
    vals = [rho_H(cx, gamma, c, cohom=co).element.as_complex() for c in cuts]
    return max(_relative(v, vals[0]) for v in vals)


def eta_identity_case(rng: SplitMix64) -> float:
    n = rng.integer(1, 6)
    cx = random_complex(rng, n)
    gamma = random_chirality(rng, n)
    split = spectral_windows(build_signature(cx, gamma), [0.0])
    if not split.large.dim:
        return None
    return eta_identity_check(split.large).residual


def theta_independence_case(rng: SplitMix64) -> float | None:
    n = rng.integer(1, 6)
    cx = random_acyclic(rng, n)
    gamma = random_chirality(rng, n)
    split = spectral_windows(build_signature(cx, gamma), [0.0])
    if not split.large.dim:
        return None
    thetas = admissible_angles(split.large)
    if len(thetas) < 2:
        return None
    a, _ = graded_det(split.large, thetas[0])
    b, _ = graded_det(split.large, thetas[1])
    return _relative(a.value, b.value)


def admissible_angles(window, count: int = 2, min_gap: float = 1e-3) -> list[float]:
    """Midpoints of the widest sectors in (-pi, 0) free of the graded-determinant spectra."""
    pm = pm_split(window)
    eigs = np.concatenate([np.linalg.eigvals(pm.b_plus[0]), -np.linalg.eigvals(pm.b_plus[1])])
    args = sorted({-math.pi + ((a + math.pi) % math.pi) for a in np.angle(eigs[np.abs(eigs) > 0])})
    points = [-math.pi] + [a for a in args if -math.pi < a < 0] + [0.0]
    gaps = sorted(zip(points, points[1:]), key=lambda p: p[0] - p[1])
    return [0.5 * (lo + hi) for lo, hi in gaps if hi - lo > 2 * min_gap][:count]


def float_duality_case(rng: SplitMix64) -> float:
    n = rng.integer(1, 5)
    cx = random_complex(rng, n)
    gamma = random_chirality(rng, n)
    co = cohomology(cx)
    rho = refined_torsion(cx, gamma, cohom=co)
    rho_dual = refined_torsion(dual_complex(cx), dual_chirality(gamma), cohom=dual_cohomology(cx, co))
    return _relative(alpha_on_cohomology(rho).as_complex(), rho_dual.as_complex())


def rs_norm_case(rng: SplitMix64) -> float:
    n = rng.integer(1, 5)
    cx = random_complex(rng, n, metric=True)
    gamma = isometric_chirality(rng, cx)
    res = rs_norm_of_rho_an(cx, gamma, 0.0)
    return abs(res.norm - res.predicted)


def rs_duality_case(rng: SplitMix64) -> float:
    n = rng.integer(1, 5)
    cx = random_complex(rng, n, metric=True)
    return rs_duality_check(cx, isometric_chirality(rng, cx))


@dataclass
class VerifyPlan:
    seed: int = 0
    exact_cases: int = 300
    float_cases: int = 50
    convention: str = "consistent"
    tolerances: dict = field(default_factory=dict)
    include_float: bool = True


DEFAULT_TOLERANCES = {
    "rho_detgr": 1e-9,
    "lambda": 1e-8,
    "eta": 1e-9,
    "theta": 1e-10,
    "duality": 1e-10,
    "rs_norm": 1e-7,
    "rs_duality": 1e-9,
}


def run_verify(plan: VerifyPlan) -> list[SuiteResult]:
    tol = {**DEFAULT_TOLERANCES, **plan.tolerances}
    s = plan.seed
    n = plan.float_cases
    results = [sign_congruences(3, plan.convention)]
    for i, kind in enumerate(("diagram", "duality", "direct_sum")):
        results.append(exact_identity_suite(kind, s + i, plan.exact_cases, 3, plan.convention))
    if not plan.include_float:
        return results
    results += [
        _run("rho = Det_gr", tol["rho_detgr"], n, s + 10, rho_equals_detgr_case),
        _run("cut independence", tol["lambda"], n, s + 11, lambda_independence_case),
        _run("eta identity", tol["eta"], n, s + 12, eta_identity_case),
        _run("angle independence", tol["theta"], n, s + 13, theta_independence_case),
        _run("torsion duality (float)", tol["duality"], n, s + 14, float_duality_case),
        _run("Ray-Singer norm", tol["rs_norm"], n, s + 15, rs_norm_case),
        _run("Ray-Singer torsion duality", tol["rs_duality"], n, s + 16, rs_duality_case),
    ]
    return results
