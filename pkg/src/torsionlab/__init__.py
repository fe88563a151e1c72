"""Refined torsion, graded determinants, eta invariants and Ray-Singer metrics of finite Z2-graded complexes."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.1.0"

from .linalg_core import NumericalAmbiguity
from .z2complex import Chirality, Z2Complex, cohomology, refined_torsion
from .signature import build_signature, graded_det, rho_H, rho_an
from .torus_model import TorusConfig, torus_torsion

__all__ = [
    "Chirality",
    "NumericalAmbiguity",
    "TorusConfig",
    "Z2Complex",
    "__version__",
    "build_signature",
    "cohomology",
    "graded_det",
    "refined_torsion",
    "rho_H",
    "rho_an",
    "torus_torsion",
]
