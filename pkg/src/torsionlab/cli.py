"""Command-line driver with JSON configs and reproducible JSON reports.

Exit codes: 0 when every asserted check passes, 1 when one fails, 2 when a
numerical decision was refused (or the configuration is unusable).
"""

from __future__ import annotations

import argparse
import cmath
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .generators import (
    SplitMix64,
    isometric_chirality,
    random_chirality,
    random_complex,
    random_parity_operator,
)
from .linalg_core import NumericalAmbiguity, as_exact, exact_to_fraction_pair, is_exact_scalar, parse_matrix
from .rs_metric import (
    harmonic_cohomology,
    mathai_wu_element,
    rs_duality_check,
    rs_metric_norm,
    rs_norm_of_rho_an,
)
from .signature import (
    TorsionScalar,
    build_signature,
    deform_complex,
    eta_identity_check,
    eta_invariant,
    flux_invariance,
    flux_variation_check,
    pm_split,
    rho_H,
    rho_an,
    spectral_windows,
    xi_window,
)
from .suites import VerifyPlan, run_verify
from .torus_model import (
    TorusConfig,
    aggregate,
    auto_cut,
    build_mode_complex,
    chiral_dual_residual,
    duality_chain,
    full_cohomology_dims,
    metric_invariance,
    mode_torsion,
    modes,
    torus_rs_norm,
)
from .z2complex import (
    Chirality,
    PreconditionError,
    Z2Complex,
    alpha_on_cohomology,
    cohomology,
    dual_chirality,
    dual_cohomology,
    dual_complex,
    format_complex,
    parse_complex,
    refined_torsion,
)

log = logging.getLogger("torsionlab")

COMMANDS = ("verify", "torsion", "torus", "deform", "dual", "rsnorm")
MODEL_KINDS = ("torus", "random", "file", "fixture")
SIG_DIGITS = 12
ORACLE_MAX_K = 2

DEFAULT_TOLERANCES = {
    "rho_h": 1e-8,
    "eta": 1e-9,
    "metric": 1e-8,
    "supertrace": 1e-12,
    "flux": 1e-7,
    "drift": 1e-3,
    "duality": 1e-10,
    "chain": 1e-8,
    "rs_duality": 1e-9,
    "mathai_wu": 1e-10,
    "rs_norm": 1e-7,
    "rs_norm_hermitian": 1e-8,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: dict | None = None
    cuts: list[float] | None = None
    theta: float | None = None
    backend: str = "float"
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0
    jobs: int = 1
    figures: str | None = None
    options: dict = field(default_factory=dict)

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def echo(self) -> dict:
        return {
            "command": self.command,
            "model": self.model,
            "lambda": self.cuts,
            "theta": "auto" if self.theta is None else self.theta,
            "backend": self.backend,
            "tolerances": {**DEFAULT_TOLERANCES, **self.tolerances},
            "seed": self.seed,
            "options": self.options,
        }


# ---------------------------------------------------------------------------
# configuration


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torsionlab", description="Refined torsion laboratory.")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--command", choices=COMMANDS, help="overrides the config's command")
    p.add_argument("--seed", type=int, help="run seed (also seeds random models without their own seed)")
    p.add_argument("--backend", choices=("exact", "float"))
    p.add_argument("--lambda", dest="cuts", help="comma-separated spectral cuts")
    p.add_argument("--theta", help="'auto' or an explicit Agmon angle in radians")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--jobs", type=int, help="worker processes for per-mode torus work")
    p.add_argument("--figures", help="directory for PNG figures (needs matplotlib)")
    return p


def _parse_theta(value) -> float | None:
    if value is None or value == "auto":
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"theta must be 'auto' or a number, got {value!r}") from None


def _parse_cuts(value) -> list[float] | None:
    if value is None:
        return None
    if isinstance(value, str):
        items = [v for v in value.split(",") if v.strip()]
    elif isinstance(value, (int, float)):
        items = [value]
    else:
        items = list(value)
    try:
        cuts = [float(v) for v in items]
    except ValueError:
        raise ConfigError(f"bad cut list {value!r}") from None
    if not cuts or any(c < 0 for c in cuts):
        raise ConfigError("cuts must be a non-empty list of non-negative numbers")
    return cuts


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    command = args.command or data.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}")
    model = data.get("model")
    if model is not None:
        if not isinstance(model, dict):
            raise ConfigError("model must be an object")
        kinds = [k for k in MODEL_KINDS if k in model]
        if len(kinds) != 1 or len(model) != 1:
            raise ConfigError("model needs exactly one of torus, random, file, fixture")
    seed = args.seed if args.seed is not None else data.get("seed")
    if model and "random" in model and seed is None and "seed" not in model["random"]:
        raise ConfigError("random models need a seed")
    backend = args.backend or data.get("backend", "float")
    if backend not in ("exact", "float"):
        raise ConfigError("backend must be exact or float")
    jobs = args.jobs if args.jobs is not None else int(data.get("jobs", 1))
    if jobs < 1:
        raise ConfigError("jobs must be positive")
    tolerances = data.get("tolerances", {})
    unknown = set(tolerances) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
    options = {k: data[k] for k in ("verify", "deform", "eta_trivial", "dump_modes") if k in data}
    return RunConfig(
        command=command,
        model=model,
        cuts=_parse_cuts(args.cuts if args.cuts is not None else data.get("lambda")),
        theta=_parse_theta(args.theta if args.theta is not None else data.get("theta")),
        backend=backend,
        tolerances=tolerances,
        out=args.out or data.get("out"),
        seed=int(seed) if seed is not None else 0,
        jobs=jobs,
        figures=args.figures or data.get("figures"),
        options=options,
    )


# ---------------------------------------------------------------------------
# models


FIXTURES = ("acyclic_1x1", "rotated_3x3")


def _fixture(name: str, exact: bool) -> tuple[Z2Complex, Chirality]:
    if name == "acyclic_1x1":
        one = np.array([[1.0 + 0j]])
        mats = [np.array([[2.0 + 0j]]), np.zeros((1, 1), complex), one, one]
        if exact:
            mats = [as_exact(np.array([[2]])), as_exact(np.array([[0]])), as_exact(np.array([[1]])), as_exact(np.array([[1]]))]
        cx = Z2Complex(*mats)
        return cx, Chirality(mats[2], mats[3])
    if name == "rotated_3x3":
        # a non-normal complex whose differential is rotated off the real axis
        rng = SplitMix64(20240607)
        cx = random_complex(rng, 3, 3, 1, 1, metric=True)
        cx = replace(cx, d0=cx.d0 * cmath.exp(0.7j), d1=cx.d1 * cmath.exp(-1.1j))
        return cx, isometric_chirality(rng, cx)
    raise ConfigError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")


def _read_gamma(spec, cx: Z2Complex, base: Path, exact: bool) -> Chirality:
    if spec in (None, "identity"):
        if cx.n0 != cx.n1:
            raise ConfigError("identity chirality needs equal dimensions")
        from .linalg_core import identity

        g = identity(cx.n0, cx.exact)
        return Chirality(g, g.copy())
    text = (base / spec).read_text()
    return Chirality.from_g0(parse_matrix(text, exact or None))


def build_abstract(cfg: RunConfig) -> tuple[Z2Complex, Chirality, dict]:
    """The complex and chirality of a random, file or fixture model."""
    if not cfg.model:
        raise ConfigError(f"command {cfg.command} needs a model")
    kind = next(iter(cfg.model))
    spec = cfg.model[kind]
    exact = cfg.backend == "exact"
    if kind == "torus":
        raise ConfigError(f"command {cfg.command} with a torus model is not supported")
    if kind == "fixture":
        cx, gamma = _fixture(spec, exact)
        return cx, gamma, {"fixture": spec}
    if kind == "file":
        spec = {"path": spec} if isinstance(spec, str) else dict(spec)
        path = Path(spec["path"])
        try:
            cx = parse_complex(path.read_text(), exact or None)
            gamma = _read_gamma(spec.get("gamma"), cx, path.parent, exact)
        except (OSError, ValueError, IndexError) as exc:
            raise ConfigError(f"cannot load complex file: {exc}") from None
        return cx, gamma, {"file": str(path)}
    spec = dict(spec)
    seed = int(spec.get("seed", cfg.seed))
    rng = SplitMix64(seed)
    n0 = int(spec.get("n0", spec.get("n", 3)))
    n1 = int(spec.get("n1", n0))
    if n0 != n1:
        raise ConfigError("a chirality needs n0 == n1")
    metric = bool(spec.get("metric", False))
    cx = random_complex(rng, n0, n1, spec.get("r0"), spec.get("r1"), exact=exact, metric=metric)
    style = spec.get("chirality", "isometric" if metric and not exact else "random")
    if style == "isometric":
        if not metric:
            raise ConfigError("an isometric chirality needs a metric")
        gamma = isometric_chirality(rng, cx.to_float() if exact else cx)
        if exact:
            raise ConfigError("isometric chiralities are float-only")
    elif style == "random":
        gamma = random_chirality(rng, n0, exact)
    else:
        raise ConfigError("chirality must be random or isometric")
    return cx, gamma, {"seed": seed, "n0": n0, "n1": n1, "metric": metric, "chirality": style}


def build_torus(cfg: RunConfig) -> TorusConfig:
    if cfg.model is None:
        return TorusConfig()
    if "torus" not in cfg.model:
        raise ConfigError(f"command {cfg.command} needs a torus model")
    if cfg.backend == "exact":
        raise ConfigError("the torus model is float-only")
    try:
        return TorusConfig.from_dict(cfg.model["torus"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad torus config: {exc}") from None


def _float_pair(cx: Z2Complex, gamma: Chirality) -> tuple[Z2Complex, Chirality]:
    return (cx.to_float(), gamma.to_float()) if cx.exact else (cx, gamma)


# ---------------------------------------------------------------------------
# report helpers


def _round(x: float):
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(f"{x:.{SIG_DIGITS}g}") + 0.0


def to_jsonable(obj):
    """Recursively convert results to JSON types with floats rounded to SIG_DIGITS."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _round(obj.real), "im": _round(obj.imag)}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if is_exact_scalar(obj):
        return exact_text(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def exact_text(x) -> str:
    re, im = exact_to_fraction_pair(x)
    return f"{re}" if im == 0 else f"{re}{'+' if im > 0 else '-'}{abs(im)}i"


def scalar(z) -> dict:
    return TorsionScalar.from_complex(complex(z)).to_dict()


def check(name: str, residual: float, tol: float, **extra) -> dict:
    return {"name": name, "passed": bool(residual <= tol), "worst_residual": residual, "tolerance": tol, **extra}


def _relative(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _sorted_eigs(vals) -> list[complex]:
    return sorted((complex(v) for v in vals), key=lambda z: (round(z.real, 9), round(z.imag, 9)))


def window_summary(split) -> list[dict]:
    out = []
    for w in split.windows:
        eigs = _sorted_eigs(w.eigenvalues()) if w.dim else []
        out.append({
            "label": w.label,
            "lower": max(w.lower, 0.0),
            "upper": w.upper,
            "dim": w.dim,
            "signature_eigenvalues": eigs,
        })
    return out


def _eta_tracker(points: list[float], etas: list, dms: list) -> dict:
    crossings = [
        {"between": [points[i], points[i + 1]], "eta": [etas[i], etas[i + 1]], "d_minus": [dms[i], dms[i + 1]]}
        for i in range(len(points) - 1)
        if etas[i] != etas[i + 1] or dms[i] != dms[i + 1]
    ]
    return {"points": points, "eta": etas, "d_minus": dms, "crossings": crossings}


# ---------------------------------------------------------------------------
# commands


def cmd_verify(cfg: RunConfig) -> dict:
    opts = cfg.options.get("verify", {})
    inject = opts.get("inject")
    if inject not in (None, "literal_sign"):
        raise ConfigError("verify.inject must be null or 'literal_sign'")
    plan = VerifyPlan(
        seed=cfg.seed,
        exact_cases=int(opts.get("exact_cases", 300)),
        float_cases=int(opts.get("float_cases", 50)),
        convention="literal" if inject else "consistent",
        tolerances={k: v for k, v in opts.get("tolerances", {}).items()},
        include_float=cfg.backend == "float",
    )
    suites = [s.to_dict() for s in run_verify(plan)]
    return {"results": {"convention": plan.convention, "float_suites": plan.include_float}, "suites": suites}


def _torsion_core(cx: Z2Complex, gamma: Chirality, cfg: RunConfig, eta_t: float) -> tuple[dict, list[dict]]:
    fcx, fgamma = _float_pair(cx, gamma)
    cohom = cohomology(cx)
    rho = refined_torsion(cx, gamma, cohom=cohom)
    coeff = rho.coeff
    results: dict = {
        "dims": [cx.n0, cx.n1],
        "cohomology_dims": list(cohom.dims),
        "rho_gamma": scalar(rho.as_complex()),
    }
    if is_exact_scalar(coeff):
        results["rho_gamma_exact"] = exact_text(coeff)
    sig = build_signature(fcx, fgamma)
    results["eta"] = eta_invariant(sig.B0)
    fcohom = cohomology(fcx)
    # express the float reference in the same classes as the exact one
    if cx.exact:
        fcohom = fcohom.with_reference(*(np.asarray(r, dtype=complex) for r in _ref_float(cohom)))
    suites = []
    per_cut = []
    for cut in cfg.cuts or [0.0]:
        r = rho_H(fcx, fgamma, cut, cfg.theta, cohom=fcohom, sig=sig)
        large = r.split.large
        entry = {
            "cut": cut,
            "theta": r.theta,
            "det_gr": r.det_gr,
            "rho_H": r.scalar,
            "rho_an": scalar(rho_an(r.element, eta_t).as_complex()),
            "small_window_torsion": scalar(r.small.as_complex()),
            "windows": window_summary(r.split),
        }
        if large.dim:
            ident = eta_identity_check(large)
            entry.update({
                "xi": xi_window(large, r.theta),
                "eta_large": ident.eta,
                "eta_identity_angle": ident.theta,
                "d_minus": list(ident.d_minus),
            })
            suites.append(check(f"eta identity (cut {cut:g})", ident.residual, cfg.tol("eta")))
        else:
            entry.update({"xi": 0j, "eta_large": None, "d_minus": [0, 0]})
        suites.append(check(f"rho_H = rho_Gamma (cut {cut:g})", _relative(r.element.as_complex(), rho.as_complex()),
                            cfg.tol("rho_h")))
        per_cut.append(entry)
    results["cuts"] = per_cut
    results["eta_trivial"] = eta_t
    return results, suites


def _ref_float(cohom) -> tuple[np.ndarray, np.ndarray]:
    from .linalg_core import as_float

    return as_float(cohom.ref[0]), as_float(cohom.ref[1])


def cmd_torsion(cfg: RunConfig) -> dict:
    cx, gamma, source = build_abstract(cfg)
    eta_t = float(cfg.options.get("eta_trivial", 0.0))
    results, suites = _torsion_core(cx, gamma, cfg, eta_t)
    results["source"] = source
    if cfg.figures:
        results["_spectrum"] = _sorted_eigs(np.linalg.eigvals(build_signature(*_float_pair(cx, gamma)).B0))
    return {"results": results, "suites": suites}


def _mode_worker(item: tuple[tuple[int, int, int], TorusConfig, float, float | None]):
    k, config, cut, theta = item
    return mode_torsion(build_mode_complex(k, config), cut, theta)


def _torus_modes(config: TorusConfig, cut: float, theta: float | None, jobs: int) -> list:
    items = [(k, config, cut, theta) for k in modes(config.K)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_mode_worker, items, chunksize=max(1, len(items) // (4 * jobs))))
    else:
        results = [_mode_worker(it) for it in items]
    # deterministic reduction: lexicographic mode order regardless of completion order
    return sorted(results, key=lambda r: r.k)


def cmd_torus(cfg: RunConfig) -> dict:
    config = build_torus(cfg)
    cut = cfg.cuts[0] if cfg.cuts else auto_cut(config)
    res = aggregate(_torus_modes(config, cut, cfg.theta, cfg.jobs), config, cut)
    from .torus_model import eta_trivial

    eta_t = float(cfg.options.get("eta_trivial", eta_trivial(config)))
    det_gr_log = sum((m.rho.det_gr.log for m in res.modes), 0j)
    small_dims = sum(m.rho.split.small.dim for m in res.modes)
    results = {
        "config": config.to_dict(),
        "cut": cut,
        "modes": len(res.modes),
        "acyclic_modes": sum(1 for m in res.modes if m.dims == (0, 0)),
        "cohomology_dims": list(res.dims),
        "rho_H": scalar(res.rho_H.as_complex()),
        "det_gr": TorsionScalar.from_log(det_gr_log),
        "rho_an": scalar(res.rho_an(eta_t).as_complex()),
        "eta_trivial": eta_t,
        "eta": res.eta_full,
        "eta_large": res.eta_large,
        "xi": res.xi,
        "d_minus": list(res.d_minus),
        "small_window_dim": small_dims,
        "nonacyclic_modes": [list(m.k) for m in res.modes if m.dims != (0, 0)],
    }
    suites = []
    if config.K <= ORACLE_MAX_K:
        oracle = full_cohomology_dims(config)
        results["oracle_cohomology_dims"] = list(oracle)
        suites.append(check("cohomology matches full-complex rank oracle", float(tuple(oracle) != res.dims), 0.0))
    dump = cfg.options.get("dump_modes")
    if dump:
        folder = Path(dump)
        folder.mkdir(parents=True, exist_ok=True)
        for m in res.modes:
            name = "mode_" + "_".join(str(x) for x in m.k) + ".txt"
            (folder / name).write_text(format_complex(build_mode_complex(m.k, config).complex))
        results["dumped_modes"] = len(res.modes)
    if cfg.figures:
        results["_mode_spectra"] = [
            sorted(abs(complex(z)) ** 2 for m in res.modes for w in m.rho.split.windows for z in w.eigenvalues())
        ]
    return {"results": results, "suites": suites}


def _grid(spec: dict, key: str, default: tuple[float, float], points: int = 9) -> list[float]:
    lo, hi = spec.get(key, default)
    n = int(spec.get("points", points))
    if n < 2:
        raise ConfigError("a deformation grid needs at least two points")
    return [float(x) for x in np.linspace(float(lo), float(hi), n)]


def subdivide(run, grid: list[float]) -> tuple[list, list[float]]:
    """Run ``run`` on the grid; on a refusal split the grid and keep the pieces that work."""
    try:
        return [(grid, run(grid))], []
    except NumericalAmbiguity as exc:
        log.info("refusal on [%g, %g]: %s", grid[0], grid[-1], exc)
        if len(grid) <= 2:
            return [], list(grid) if len(grid) == 1 else [grid[-1]]
        mid = len(grid) // 2
        left, bad_left = subdivide(run, grid[:mid + 1])
        right, bad_right = subdivide(run, grid[mid:])
        return left + right, sorted(set(bad_left + bad_right))


def _metric_family(base: tuple[float, float, float], exponents):
    exps = [float(e) for e in exponents]

    def family(t: float) -> tuple[float, float, float]:
        return tuple(b * t ** e for b, e in zip(base, exps))

    return family


def cmd_deform(cfg: RunConfig) -> dict:
    spec = dict(cfg.options.get("deform", {}))
    mode = spec.get("mode", "metric")
    if mode == "metric":
        return _deform_metric(cfg, spec)
    if mode == "flux":
        return _deform_flux(cfg, spec)
    raise ConfigError("deform.mode must be metric or flux")


def _deform_metric(cfg: RunConfig, spec: dict) -> dict:
    config = build_torus(cfg)
    ts = _grid(spec, "t", (1.0, 2.0))
    family = _metric_family(config.metric, spec.get("exponents", (1.0, 0.5, -1.0)))
    cut = cfg.cuts[0] if cfg.cuts else None
    pieces, collisions = subdivide(lambda g: metric_invariance(config, family, g, cut), ts)
    suites, segments, points, etas, dms = [], [], [], [], []
    for grid, inv in pieces:
        segments.append({
            "t": grid,
            "defect": inv.defect,
            "cut": inv.cut,
            "log_values": [cmath.log(v / inv.values[0]) for v in inv.values],
        })
        suites.append(check(f"metric invariance t in [{grid[0]:g}, {grid[-1]:g}]", inv.defect, cfg.tol("metric")))
        st = max(abs(s) for s in inv.supertraces)
        suites.append(check(f"chirality supertrace t in [{grid[0]:g}, {grid[-1]:g}]", st, cfg.tol("supertrace")))
        for t, e, d in zip(grid, inv.etas, inv.d_minus):
            if t not in points:
                points.append(t)
                etas.append(str(e.eta))
                dms.append(list(d))
    if not pieces:
        suites.append(check("metric invariance", math.inf, cfg.tol("metric")))
    return {
        "results": {
            "mode": "metric",
            "config": config.to_dict(),
            "exponents": list(spec.get("exponents", (1.0, 0.5, -1.0))),
            "segments": segments,
            "collisions": collisions,
            "eta_tracker": _eta_tracker(points, etas, dms),
        },
        "suites": suites,
    }


def _beta(cx: Z2Complex, seed: int, supertrace: complex, scale: float) -> tuple[np.ndarray, np.ndarray]:
    b0, b1 = random_parity_operator(SplitMix64(seed), cx.n0, cx.n1)
    b0, b1 = scale * b0, scale * b1
    if cx.n0:
        b0 = b0 + (supertrace - (np.trace(b0) - np.trace(b1))) / cx.n0 * np.eye(cx.n0)
    return b0, b1


def _deform_flux(cfg: RunConfig, spec: dict) -> dict:
    cx, gamma, source = build_abstract(cfg)
    cx, gamma = _float_pair(cx, gamma)
    st = complex(spec.get("supertrace", 0.0))
    beta = _beta(cx, int(spec.get("beta_seed", cfg.seed + 1)), st, float(spec.get("scale", 0.2)))
    vs = _grid(spec, "v", (-0.2, 0.2))
    cut = cfg.cuts[0] if cfg.cuts else 0.0
    pieces, collisions = subdivide(lambda g: flux_invariance(cx, gamma, beta, cut, g, cfg.theta), vs)
    suites, segments = [], []
    for grid, inv in pieces:
        segments.append({"v": grid, "defect": inv.defect, "slope": inv.slope,
                         "branch_crossings": inv.branch_crossings,
                         "log_values": [w - inv.log_values[0] for w in inv.log_values],
                         "corrected": [w - inv.log_values[0] + st * (v - grid[0]) for v, w in zip(grid, inv.log_values)]})
        label = "flux invariance" if st == 0 else "flux drift-corrected invariance"
        suites.append(check(f"{label} v in [{grid[0]:g}, {grid[-1]:g}]", inv.defect, cfg.tol("flux")))
    if not pieces:
        suites.append(check("flux invariance", math.inf, cfg.tol("flux")))
    h = float(spec.get("h", 1e-4))
    var = flux_variation_check(cx, gamma, beta, cut, h, cfg.theta)
    drift = var.combined_rate
    if st != 0:
        suites.append(check("drift rate equals -Tr_s(beta)", abs(drift + st) / abs(st), cfg.tol("drift")))
    points, etas, dms = [], [], []
    for v in vs:
        try:
            sig = build_signature(deform_complex(cx, beta, v), gamma)
            large = spectral_windows(sig, [cut]).large
            etas.append(str(eta_invariant(sig.B0).eta))
            dms.append(list(pm_split(large).d_minus) if large.dim else [0, 0])
            points.append(v)
        except NumericalAmbiguity as exc:
            log.info("eta tracker skips v=%g: %s", v, exc)
    return {
        "results": {
            "mode": "flux",
            "source": source,
            "supertrace": st,
            "cut": cut,
            "segments": segments,
            "collisions": collisions,
            "measured_drift": drift,
            "finite_difference_step": h,
            "eta_tracker": _eta_tracker(points, etas, dms),
        },
        "suites": suites,
    }


def cmd_dual(cfg: RunConfig) -> dict:
    if cfg.model is None or "torus" in cfg.model:
        config = build_torus(cfg)
        cut = cfg.cuts[0] if cfg.cuts else None
        chain = duality_chain(config, cut)
        chiral = max(chiral_dual_residual(k, config) for k in modes(config.K))
        results = {
            "config": config.to_dict(),
            "alpha_rho_an": scalar(chain.alpha_rho),
            "dual_rho_an": scalar(chain.rho_dual),
            "ratio": chain.ratio,
            "predicted_ratio": chain.predicted,
            "eta": str(chain.eta),
            "eta_trivial": chain.eta_trivial,
            "adjoint_residual": chain.adjoint_residual,
            "chiral_dual_residual": chiral,
        }
        suites = [check("duality phase chain", chain.residual, cfg.tol("chain"))]
        return {"results": results, "suites": suites}
    cx, gamma, source = build_abstract(cfg)
    cohom = cohomology(cx)
    rho = refined_torsion(cx, gamma, cohom=cohom)
    rho_dual = refined_torsion(dual_complex(cx), dual_chirality(gamma), cohom=dual_cohomology(cx, cohom))
    lhs = alpha_on_cohomology(rho)
    results = {
        "source": source,
        "alpha_rho_gamma": scalar(lhs.as_complex()),
        "rho_dual": scalar(rho_dual.as_complex()),
    }
    suites = []
    if cx.exact:
        equal = lhs.coeff == rho_dual.coeff
        results["alpha_rho_gamma_exact"] = exact_text(lhs.coeff)
        results["rho_dual_exact"] = exact_text(rho_dual.coeff)
        suites.append(check("torsion duality (exact)", 0.0 if equal else 1.0, 0.0))
    else:
        suites.append(check("torsion duality", _relative(lhs.as_complex(), rho_dual.as_complex()), cfg.tol("duality")))
    fcx, fgamma = _float_pair(cx, gamma)
    if fcx.has_metric:
        if fgamma.is_self_adjoint(fcx):
            suites.append(check("Ray-Singer torsion duality", rs_duality_check(fcx, fgamma), cfg.tol("rs_duality")))
        else:
            results["rs_duality"] = "skipped: the chirality is not an isometry"
    return {"results": results, "suites": suites}


def cmd_rsnorm(cfg: RunConfig) -> dict:
    if cfg.model is None or "torus" in cfg.model:
        config = build_torus(cfg)
        res = torus_rs_norm(config, cfg.cuts[0] if cfg.cuts else None)
        results = {
            "config": config.to_dict(),
            "hermitian": config.hermitian,
            "norm": res.norm,
            "predicted": res.predicted,
            "eta_imag": res.eta_imag,
            "mathai_wu_norm": res.mathai_wu_norm,
        }
        tol = cfg.tol("rs_norm_hermitian") if config.hermitian else cfg.tol("rs_norm")
        suites = [
            check("Mathai-Wu element has norm 1", abs(res.mathai_wu_norm - 1.0), cfg.tol("mathai_wu")),
            check("norm of rho_an equals exp(pi Im eta)", abs(res.norm - res.predicted), tol),
        ]
        return {"results": results, "suites": suites}
    cx, gamma, source = build_abstract(cfg)
    cx, gamma = _float_pair(cx, gamma)
    if not cx.has_metric:
        raise ConfigError("rsnorm needs a model with inner products")
    harmonic = harmonic_cohomology(cx)
    mw = rs_metric_norm(mathai_wu_element(cx), cx, harmonic)
    results = {"source": source, "mathai_wu_norm": mw}
    suites = [check("Mathai-Wu element has norm 1", abs(mw - 1.0), cfg.tol("mathai_wu"))]
    cut = cfg.cuts[0] if cfg.cuts else 0.0
    cmp_ = rs_norm_of_rho_an(cx, gamma, cut, eta_trivial=float(cfg.options.get("eta_trivial", 0.0)))
    results.update({"norm": cmp_.norm, "predicted": cmp_.predicted, "eta_imag": cmp_.eta_imag})
    if gamma.is_self_adjoint(cx):
        suites.append(check("norm of rho_an equals exp(pi Im eta)", abs(cmp_.norm - cmp_.predicted), cfg.tol("rs_norm")))
    else:
        results["prediction"] = "not asserted: the chirality is not an isometry"
    return {"results": results, "suites": suites}


HANDLERS = {
    "verify": cmd_verify,
    "torsion": cmd_torsion,
    "torus": cmd_torus,
    "deform": cmd_deform,
    "dual": cmd_dual,
    "rsnorm": cmd_rsnorm,
}


# ---------------------------------------------------------------------------
# driver


def run(cfg: RunConfig) -> tuple[dict, int]:
    """Execute one command and return (report, exit code)."""
    report = {"version": __version__, "seed": cfg.seed, "command": cfg.command, "inputs": cfg.echo()}
    try:
        body = HANDLERS[cfg.command](cfg)
    except NumericalAmbiguity as exc:
        report.update({
            "status": "refused",
            "refusal": {"kind": exc.kind, "message": str(exc), "details": _details(exc.details)},
            "suites": [],
        })
        return report, 2
    report.update(body)
    ok = all(s["passed"] for s in report.get("suites", []))
    report["status"] = "pass" if ok else "fail"
    return report, 0 if ok else 1


def _details(details: dict) -> dict:
    out = {}
    for k, v in details.items():
        if isinstance(v, np.ndarray):
            v = _sorted_eigs(v.reshape(-1))
        out[k] = v
    return out


def render_report(report: dict) -> str:
    public = {k: v for k, v in report.items() if k != "results"}
    if "results" in report:
        public["results"] = {k: v for k, v in report["results"].items() if not k.startswith("_")}
    return json.dumps(to_jsonable(public), sort_keys=True, indent=2) + "\n"


def write_figures(report: dict, folder: str) -> list[str]:
    """Render PNG summaries of a report; matplotlib is imported only here."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ConfigError("--figures needs matplotlib (pip install 'artifact[plot]')") from exc
    out = Path(folder)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    res = report.get("results", {})
    command = report["command"]

    def save(fig, name):
        path = out / f"{command}_{name}.png"
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        written.append(str(path))

    if report.get("suites"):
        fig, ax = plt.subplots(figsize=(7, 0.4 * len(report["suites"]) + 1.5))
        names = [s["name"] for s in report["suites"]]
        ratios = [max(s["worst_residual"], 1e-300) / max(s["tolerance"], 1e-300) if s["tolerance"] else
                  (1e-17 if s["passed"] else 10.0) for s in report["suites"]]
        ax.barh(names, [math.log10(max(r, 1e-17)) for r in ratios],
                color=["tab:green" if s["passed"] else "tab:red" for s in report["suites"]])
        ax.axvline(0.0, color="black", lw=0.8)
        ax.set_xlabel("log10(worst residual / tolerance)")
        fig.tight_layout()
        save(fig, "suites")
    if "_spectrum" in res:
        eigs = np.array(res["_spectrum"], dtype=complex)
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.scatter(eigs.real, eigs.imag, s=14)
        for entry in res.get("cuts", []):
            r = math.sqrt(entry["cut"])
            ax.add_patch(plt.Circle((0, 0), r, fill=False, ls="--", color="gray"))
        ax.set_aspect("equal")
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_title("signature operator spectrum and cuts")
        save(fig, "spectrum")
    if "_mode_spectra" in res:
        vals = np.array(res["_mode_spectra"][0], dtype=float)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(np.log10(vals[vals > 0]) if np.any(vals > 0) else [], bins=40)
        ax.axvline(math.log10(res["cut"]) if res["cut"] > 0 else 0.0, color="red", ls="--")
        ax.set_xlabel("log10 |eigenvalue of squared signature operator|")
        fig.tight_layout()
        save(fig, "mode_spectra")
    if "segments" in res:
        key = "t" if res.get("mode") == "metric" else "v"
        fig, ax = plt.subplots(figsize=(6, 4))
        for seg in res["segments"]:
            ys = [abs(complex(z["re"], z["im"])) for z in to_jsonable(seg.get("corrected", seg["log_values"]))]
            ax.semilogy(seg[key], [max(y, 1e-17) for y in ys], marker="o")
        ax.set_xlabel(key)
        ax.set_ylabel("invariance defect")
        fig.tight_layout()
        save(fig, "deformation")
    return written


def _configure_logging() -> None:
    level = os.environ.get("TORSIONLAB_LOG", "WARNING").upper()
    numeric = int(level) if level.isdigit() else getattr(logging, level, logging.WARNING)
    logging.basicConfig(level=numeric, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        report, code = run(cfg)
        if cfg.figures:
            for path in write_figures(report, cfg.figures):
                log.info("wrote %s", path)
    except (ConfigError, PreconditionError) as exc:
        print(f"torsionlab: configuration error: {exc}", file=sys.stderr)
        return 2
    text = render_report(report)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code == 2:
        print(f"torsionlab: refused: {report['refusal']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
