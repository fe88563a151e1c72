import math
import time

import numpy as np
import pytest

from torsionlab.signature import build_signature
from torsionlab.torus_model import (
    EVEN,
    ODD,
    TorusConfig,
    aggregate,
    auto_cut,
    boundary_leak,
    build_chirality,
    build_mode_complex,
    chiral_dual_residual,
    chirality_matrix,
    dual_config,
    duality_chain,
    eta_trivial,
    full_cohomology_dims,
    metric_family_supertrace,
    metric_invariance,
    mode_complexes,
    mode_torsion,
    modes,
    signature_adjoint_residual,
    torus_rs_norm,
    torus_torsion,
    trivial_eta,
)
from torsionlab.z2complex import cohomology

GENERIC = (0.31, 0.17, 0.23)


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        TorusConfig(metric=(1, 0, 1))
    with pytest.raises(ValueError):
        TorusConfig(rank=2)
    cfg = TorusConfig(K=2, a=(0.1 + 0.2j, 0, -0.3), h=0.5 - 0.1j, metric=(1, 2, 3))
    assert TorusConfig.from_dict(cfg.to_dict()) == cfg
    assert not cfg.hermitian


def test_modes_are_lexicographic():
    ks = modes(1)
    assert len(ks) == 27 and ks == sorted(ks)
    assert ks[0] == (-1, -1, -1)


@pytest.mark.parametrize(
    "k, a, h, dims",
    [
        ((0, 0, 0), (0, 0, 0), 1.0, (3, 3)),
        ((0, 0, 0), (0, 0, 0), 0.0, (4, 4)),
        ((1, -1, 0), GENERIC, 0.7, (0, 0)),
        ((0, 0, 0), GENERIC, 0.0, (0, 0)),
    ],
)
def test_mode_cohomology(k, a, h, dims):
    mode = build_mode_complex(k, TorusConfig(a=a, h=h))
    assert cohomology(mode.complex).dims == dims


def test_chirality_unit_metric():
    g = chirality_matrix((1, 1, 1))
    assert g[7, 0] == -1
    assert np.allclose(g @ g, np.eye(8))


def test_chirality_scaling_on_one_forms():
    g = chirality_matrix((2.0, 3.0, 5.0))
    assert abs(g[6, 1]) == pytest.approx(3 * 5 / 2)
    assert np.allclose(g @ g, np.eye(8))


def test_chirality_swaps_parity():
    g = chirality_matrix((1.3, 0.7, 2.0))
    assert np.allclose(g[np.ix_(EVEN, EVEN)], 0) and np.allclose(g[np.ix_(ODD, ODD)], 0)
    gamma = build_chirality((1.3, 0.7, 2.0))
    assert np.allclose(gamma.g0 @ gamma.g1, np.eye(4))


@pytest.mark.parametrize(
    "family",
    [
        lambda t: (math.exp(t), math.exp(t), math.exp(t)),
        lambda t: (t, 1.0, 1.0),
        lambda t: (1.0, 2.0, 3.0),
        lambda t: (t, t ** 0.5, 1 / t),
    ],
)
def test_metric_family_supertrace_vanishes(family):
    assert abs(metric_family_supertrace(family, 1.3)) < 1e-12


def test_dual_config():
    real = TorusConfig(a=GENERIC, h=0.4)
    assert dual_config(real) == real
    dual = dual_config(TorusConfig(a=(0.3 + 0.1j, 0, 0)))
    assert dual.a[0] == pytest.approx(0.3 - 0.1j)


def test_signature_adjoint_and_chiral_dual_residuals():
    cfg = TorusConfig(a=(0.3 + 0.1j, 0.2, -0.15j), h=0.7 + 0.2j, metric=(1, 1.3, 0.8))
    for k in [(0, 0, 0), (1, -1, 0), (-1, 1, 1)]:
        assert signature_adjoint_residual(k, cfg) <= 1e-12
        assert chiral_dual_residual(k, cfg) <= 1e-12


def test_eta_trivial_values():
    assert eta_trivial(TorusConfig(K=0, h=0.0)) == 0.0
    rec = trivial_eta(TorusConfig(K=0, h=1.0))
    # hand count for the single a = 0 mode: B0 has three zero and one negative eigenvalue
    mode = build_mode_complex((0, 0, 0), TorusConfig(K=0, h=1.0))
    eigs = np.linalg.eigvals(build_signature(mode.complex, mode.gamma).B0)
    pos = int(np.sum(eigs.real > 1e-12))
    neg = int(np.sum(eigs.real < -1e-12))
    assert rec.eta0 == pos - neg == -1
    assert eta_trivial(TorusConfig(K=0, h=1.0)) == -0.5


def test_eta_trivial_ignores_holonomy():
    assert eta_trivial(TorusConfig(K=1, a=GENERIC)) == eta_trivial(TorusConfig(K=1))


def test_cohomology_rank_oracle():
    assert full_cohomology_dims(TorusConfig(K=1, h=1.0)) == (3, 3)
    assert full_cohomology_dims(TorusConfig(K=1, a=GENERIC, h=1.0)) == (0, 0)


def test_aggregate_acyclic_is_product_of_graded_dets():
    cfg = TorusConfig(K=1, a=GENERIC, h=0.8)
    start = time.perf_counter()
    res = torus_torsion(cfg, cut=0.0)
    assert time.perf_counter() - start < 1.0
    assert res.acyclic
    log_prod = sum(m.rho.det_gr.log for m in res.modes)
    assert abs(res.rho_H.as_complex() - np.exp(log_prod)) < 1e-10 * abs(res.rho_H.as_complex())


def test_aggregate_single_nonacyclic_zero_mode():
    cfg = TorusConfig(K=1, h=1.0)
    res = torus_torsion(cfg)
    assert res.dims == (3, 3)
    assert [m.k for m in res.modes if m.dims != (0, 0)] == [(0, 0, 0)]


def test_aggregate_requires_lexicographic_order():
    cfg = TorusConfig(K=1, a=GENERIC)
    cut = auto_cut(cfg)
    results = [mode_torsion(m, cut) for m in mode_complexes(cfg)]
    with pytest.raises(ValueError):
        aggregate(results[::-1], cfg, cut)
    with pytest.raises(ValueError):
        aggregate(results[:-1], cfg, cut)


def test_metric_invariance_k1():
    cfg = TorusConfig(K=1, a=GENERIC, h=0.8)
    inv = metric_invariance(cfg, lambda t: (t, t ** 0.5, 1 / t), list(np.linspace(1, 2, 9)))
    assert inv.defect < 1e-8
    assert max(abs(s) for s in inv.supertraces) < 1e-12


def test_duality_chain_complex_holonomy():
    cfg = TorusConfig(K=1, a=(0.3 + 0.1j, 0.2, -0.15j), h=0.7 + 0.2j, metric=(1, 1.3, 0.8))
    chain = duality_chain(cfg)
    assert chain.residual < 1e-8


def test_torus_norm_hermitian():
    res = torus_rs_norm(TorusConfig(K=1, a=GENERIC, h=0.6))
    assert abs(res.norm - 1) < 1e-8
    assert abs(res.mathai_wu_norm - 1) < 1e-10


def test_boundary_leak_is_round_off():
    leaks = boundary_leak(TorusConfig(a=GENERIC, h=0.8), Ks=(1,))
    assert leaks[0].K == 1 and leaks[0].defect < 1e-10
