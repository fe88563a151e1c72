"""Scalar backends and the matrix kernels shared by every other module.

Matrices are numpy arrays in both backends.  The floating backend uses
``complex128``; the exact backend uses ``object`` arrays whose entries are
sympy Gaussian rationals (elements of ``QQ_I``).  Every routine dispatches on
the dtype, so callers never pass a backend flag explicitly.

Spectral routines (generalized eigenspaces, branch-cut logarithms, angle
selection) exist only for the floating backend.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

EXACT = "exact"
FLOAT = "float"

# Singular values below eps * max(m, n) * sigma_max * RANK_SAFETY count as zero.
RANK_SAFETY = 64.0
AMBIGUITY_FACTOR = 10.0
CLUSTER_RTOL = 1e-8
ANGLE_TOL = 1e-9
DEFAULT_MIN_GAP = 1e-2


class NumericalAmbiguity(ArithmeticError):
    """Raised when a numerical decision (rank, window cut, angle) is not robust.

    The command-line driver maps this exception to exit code 2.
    """

    def __init__(self, kind: str, message: str, **details):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.details = details


# ---------------------------------------------------------------------------
# scalars


def gaussian(re=0, im=0):
    """Exact Gaussian rational from ints, Fractions or 'p/q' strings."""
    return QQ_I(_rational(re), _rational(im))


def _rational(x):
    if isinstance(x, str):
        x = Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floats cannot enter the exact backend")
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def is_exact_scalar(x) -> bool:
    return type(x).__name__ == "GaussianRational"


def tau(x):
    """The involution of the scalar field: complex conjugation."""
    if is_exact_scalar(x):
        return QQ_I(x.x, -x.y)
    return complex(x).conjugate()


def to_complex(x) -> complex:
    if is_exact_scalar(x):
        return complex(float(x.x), float(x.y))
    return complex(x)


def exact_to_fraction_pair(x) -> tuple[Fraction, Fraction]:
    return (Fraction(int(x.x.numerator), int(x.x.denominator)),
            Fraction(int(x.y.numerator), int(x.y.denominator)))


def scalar_one(exact: bool):
    return QQ_I.one if exact else 1.0 + 0.0j


def scalar_inverse(x):
    if is_exact_scalar(x):
        if x == QQ_I.zero:
            raise ZeroDivisionError("inverse of zero scalar")
        return QQ_I.one / x
    if not x:
        raise ZeroDivisionError("inverse of zero scalar")
    return 1.0 / complex(x)


def sign_power(k: int):
    """(-1)**k as a plain int."""
    return -1 if k % 2 else 1


# ---------------------------------------------------------------------------
# matrices


def is_exact(a: np.ndarray) -> bool:
    return np.asarray(a).dtype == object


def as_float(a) -> np.ndarray:
    a = np.asarray(a)
    if a.dtype == object:
        out = np.empty(a.shape, dtype=complex)
        for idx, v in np.ndenumerate(a):
            out[idx] = to_complex(v)
        return out
    return a.astype(complex)


def as_exact(a) -> np.ndarray:
    """Convert an integer/Fraction/Gaussian array to an exact object array."""
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        if is_exact_scalar(v):
            out[idx] = v
        elif isinstance(v, complex):
            if v.real != int(v.real) or v.imag != int(v.imag):
                raise TypeError("non-integer complex cannot enter the exact backend")
            out[idx] = gaussian(int(v.real), int(v.imag))
        else:
            out[idx] = gaussian(v, 0)
    return out


def zeros(rows: int, cols: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((rows, cols), dtype=object)
        out.fill(QQ_I.zero)
        return out
    return np.zeros((rows, cols), dtype=complex)


def identity(n: int, exact: bool) -> np.ndarray:
    out = zeros(n, n, exact)
    for i in range(n):
        out[i, i] = QQ_I.one if exact else 1.0
    return out


def like(a: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return zeros(rows, cols, is_exact(a))


def conj_transpose(a: np.ndarray) -> np.ndarray:
    if is_exact(a):
        out = np.empty((a.shape[1], a.shape[0]), dtype=object)
        for (i, j), v in np.ndenumerate(a):
            out[j, i] = QQ_I(v.x, -v.y)
        return out
    return a.conj().T


def hstack(blocks: Sequence[np.ndarray], rows: int | None = None) -> np.ndarray:
    blocks = [b for b in blocks if b is not None]
    if rows is None:
        rows = blocks[0].shape[0]
    exact = any(is_exact(b) for b in blocks) if blocks else False
    nonempty = [b for b in blocks if b.shape[1] > 0]
    if not nonempty:
        return zeros(rows, 0, exact)
    return np.hstack(nonempty)


def matmul(*mats: np.ndarray) -> np.ndarray:
    """Chained product that keeps exact entries exact for empty inner dimensions."""
    out = mats[0]
    for m in mats[1:]:
        if out.shape[1] == 0 and (is_exact(out) or is_exact(m)):
            out = zeros(out.shape[0], m.shape[1], True)
        else:
            out = out @ m
    return out


def block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    exact = is_exact(a) or is_exact(b)
    out = zeros(a.shape[0] + b.shape[0], a.shape[1] + b.shape[1], exact)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def trace(a: np.ndarray):
    if a.shape[0] == 0:
        return QQ_I.zero if is_exact(a) else 0.0j
    total = a[0, 0]
    for i in range(1, a.shape[0]):
        total = total + a[i, i]
    return total


def is_zero_matrix(a: np.ndarray, rtol: float = 1e-12, scale: float = 1.0) -> bool:
    if a.size == 0:
        return True
    if is_exact(a):
        return all(v == QQ_I.zero for v in a.flat)
    return float(np.max(np.abs(a))) <= rtol * max(scale, 1.0)


def _to_domain(a: np.ndarray) -> DomainMatrix:
    return DomainMatrix([list(row) for row in a], a.shape, QQ_I)


def _from_domain(dm: DomainMatrix) -> np.ndarray:
    rows, cols = dm.shape
    out = zeros(rows, cols, True)
    dense = dm.to_list() if rows and cols else None
    for i in range(rows):
        for j in range(cols):
            out[i, j] = dense[i][j]
    return out


def det(a: np.ndarray):
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("determinant of a non-square matrix")
    if is_exact(a):
        if n == 0:
            return QQ_I.one
        return _to_domain(a).det()
    if n == 0:
        return 1.0 + 0.0j
    return complex(np.linalg.det(a))


def inverse(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if is_exact(a):
        if n == 0:
            return zeros(0, 0, True)
        if det(a) == QQ_I.zero:
            raise ZeroDivisionError("singular matrix")
        return _from_domain(_to_domain(a).inv())
    if n == 0:
        return zeros(0, 0, False)
    return np.linalg.inv(a)


def rank_threshold(singular_values: np.ndarray, shape: tuple[int, int], scale: float = 0.0) -> float:
    """eps * max-dim * reference * 64, where the reference is the largest singular
    value or a caller-supplied ambient scale, whichever is larger."""
    top = float(singular_values[0]) if singular_values.size else 0.0
    return float(np.finfo(float).eps * max(shape) * max(top, scale) * RANK_SAFETY)


def _float_rank(s: np.ndarray, shape: tuple[int, int], scale: float = 0.0) -> int:
    if s.size == 0 or (s[0] == 0.0 and scale == 0.0):
        return 0
    tol = rank_threshold(s, shape, scale)
    near = (s > tol / AMBIGUITY_FACTOR) & (s < tol * AMBIGUITY_FACTOR)
    if np.any(near):
        raise NumericalAmbiguity(
            "ill-conditioned rank",
            "a singular value lies within a factor 10 of the rank threshold",
            threshold=tol,
            singular_values=[float(x) for x in s],
        )
    return int(np.sum(s > tol))


def kernel_image(a: np.ndarray, scale: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Bases of the kernel and of the column space of ``a``.

    Exact backend: reduced row echelon form (kernel from free columns, image
    from pivot columns).  Floating backend: singular value decomposition, so
    both bases are orthonormal in the standard product; ``scale`` lets a
    caller measure ranks against the norm of an ambient operator.
    """
    rows, cols = a.shape
    exact = is_exact(a)
    if rows == 0 or cols == 0:
        return identity(cols, exact), zeros(rows, 0, exact)
    if exact:
        dm = _to_domain(a)
        rref, pivots = dm.rref()
        ddm = rref.to_list()
        free = [j for j in range(cols) if j not in pivots]
        kern = zeros(cols, len(free), True)
        for col, f in enumerate(free):
            kern[f, col] = QQ_I.one
            for r, p in enumerate(pivots):
                kern[p, col] = -ddm[r][f]
        img = a[:, list(pivots)] if pivots else zeros(rows, 0, True)
        return kern, np.array(img, dtype=object)
    u, s, vh = np.linalg.svd(a)
    r = _float_rank(s, a.shape, scale)
    return vh[r:].conj().T.copy(), u[:, :r].copy()


def kernel(a: np.ndarray, scale: float = 0.0) -> np.ndarray:
    return kernel_image(a, scale)[0]


def image(a: np.ndarray, scale: float = 0.0) -> np.ndarray:
    return kernel_image(a, scale)[1]


def rank(a: np.ndarray, scale: float = 0.0) -> int:
    return image(a, scale).shape[1]


def coordinates(basis: np.ndarray, vectors: np.ndarray, rtol: float = 1e-7, scale: float = 0.0) -> np.ndarray:
    """Solve ``basis @ X = vectors`` for a basis with independent columns.

    Raises ``ValueError`` when the vectors do not lie in the span; the float
    residual is judged against the data norms plus an optional ambient ``scale``.
    """
    m, r = basis.shape
    s = vectors.shape[1]
    exact = is_exact(basis) or is_exact(vectors)
    if r == 0 or s == 0:
        if s and not is_zero_matrix(vectors, rtol):
            raise ValueError("vectors are not in the span of an empty basis")
        return zeros(r, s, exact)
    if exact:
        aug = _to_domain(hstack([basis, vectors]))
        rref, pivots = aug.rref()
        if list(pivots[:r]) != list(range(r)) or any(p >= r for p in pivots):
            raise ValueError("vectors are not in the span of the basis")
        ddm = rref.to_list()
        out = zeros(r, s, True)
        for i in range(r):
            for j in range(s):
                out[i, j] = ddm[i][r + j]
        return out
    x, *_ = np.linalg.lstsq(basis, vectors, rcond=None)
    resid = np.linalg.norm(basis @ x - vectors)
    ref = np.linalg.norm(vectors) + np.linalg.norm(basis) * np.linalg.norm(x) + scale
    if resid > rtol * max(ref, 1e-300):
        raise ValueError(f"vectors are not in the span of the basis (residual {resid:.3e})")
    return x


def complement(basis: np.ndarray, gram: np.ndarray | None = None) -> np.ndarray:
    """Basis of the orthogonal complement of span(basis) w.r.t. ``gram``."""
    metric = basis.conj().T if not is_exact(basis) else conj_transpose(basis)
    if gram is not None:
        metric = metric @ gram
    return kernel(metric)


def orthonormalize(basis: np.ndarray, gram: np.ndarray | None = None) -> np.ndarray:
    """Gram-matrix orthonormal basis of the same span (floating backend)."""
    if basis.shape[1] == 0 or is_exact(basis):
        return basis
    g = np.eye(basis.shape[0]) if gram is None else gram
    small = basis.conj().T @ g @ basis
    small = 0.5 * (small + small.conj().T)
    chol = np.linalg.cholesky(small)
    return basis @ np.linalg.inv(chol).conj().T


# ---------------------------------------------------------------------------
# spectral windows


@dataclass(frozen=True, eq=False)
class SpectralWindow:
    label: str
    lower: float
    upper: float
    basis: np.ndarray
    operator: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def eigenvalues(self) -> np.ndarray:
        return np.diag(self.operator).copy()


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    dim: int
    cuts: tuple[float, ...]
    windows: tuple[SpectralWindow, ...]
    eigenvalues: np.ndarray = field(repr=False)

    def window(self, label: str) -> SpectralWindow:
        for w in self.windows:
            if w.label == label:
                return w
        raise KeyError(label)


def _fmt_cut(c: float) -> str:
    return format(c, "g")


def window_bounds(cuts: Sequence[float]) -> list[tuple[str, float, float]]:
    """Interval labels and bounds: [0,c1], (c1,c2], ..., (ck,inf)."""
    cuts = sorted(set(float(c) for c in cuts))
    if any(c < 0 for c in cuts):
        raise ValueError("cuts must be non-negative")
    if not cuts:
        return [("[0,inf)", -1.0, math.inf)]
    out = [(f"[0,{_fmt_cut(cuts[0])}]", -1.0, cuts[0])]
    for lo, hi in zip(cuts, cuts[1:]):
        out.append((f"({_fmt_cut(lo)},{_fmt_cut(hi)}]", lo, hi))
    out.append((f"({_fmt_cut(cuts[-1])},inf)", cuts[-1], math.inf))
    return out


def cluster_tolerance(eigs: np.ndarray, rtol: float = CLUSTER_RTOL) -> float:
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    return rtol * radius if radius > 0 else 1e-14


def generalized_eigenspaces(a: np.ndarray, cuts: Sequence[float], tol: float | None = None) -> SpectralSplit:
    """Split the space into sums of generalized eigenspaces by |eigenvalue|.

    Each window's basis is the leading block of a Schur form reordered so that
    the window's eigenvalues come first; the restricted operator is that
    (upper-triangular) leading block.
    """
    if is_exact(a):
        raise TypeError("spectral splitting is floating-only")
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    eigs = sla.eigvals(a) if n else np.zeros(0, dtype=complex)
    mags = np.abs(eigs)
    if tol is None:
        tol = cluster_tolerance(eigs)
    bounds = window_bounds(cuts)
    for _, lo, hi in bounds[:-1]:
        cut = hi
        if cut == 0.0:
            bad = (mags > tol) & (mags <= 100 * tol)
        else:
            bad = np.abs(mags - cut) <= tol
        if np.any(bad):
            raise NumericalAmbiguity(
                "cut through cluster",
                f"eigenvalue magnitude within tolerance of cut {cut}",
                cut=cut,
                eigenvalues=[complex(x) for x in eigs[bad]],
            )

    def member(mag: float, lo: float, hi: float) -> bool:
        upper = tol if hi == 0.0 else hi
        lower = tol if lo == 0.0 else lo
        return (mag > lower if lo >= 0 else True) and mag <= upper

    windows = []
    total = 0
    for label, lo, hi in bounds:
        count = int(sum(member(m, lo, hi) for m in mags))
        total += count
        if count == 0:
            windows.append(SpectralWindow(label, lo, hi, np.zeros((n, 0), complex), np.zeros((0, 0), complex)))
            continue
        try:
            t, z, sdim = sla.schur(a, output="complex", sort=lambda x, lo=lo, hi=hi: member(abs(x), lo, hi))
        except (sla.LinAlgError, ValueError) as exc:
            raise NumericalAmbiguity("defective ambiguity", str(exc)) from exc
        if sdim != count:
            raise NumericalAmbiguity(
                "defective ambiguity",
                f"reordered Schur form selected {sdim} eigenvalues, expected {count}",
            )
        windows.append(SpectralWindow(label, lo, hi, z[:, :count].copy(), t[:count, :count].copy()))
    if total != n:
        raise NumericalAmbiguity("defective ambiguity", "window dimensions do not sum to n")
    nonempty = [w.basis for w in windows if w.dim]
    if len(nonempty) > 1:
        joint = np.hstack(nonempty)
        if np.linalg.cond(joint) > 1e10:
            raise NumericalAmbiguity("defective ambiguity", "window subspaces are nearly dependent")
    cut_tuple = tuple(sorted(set(float(c) for c in cuts)))
    return SpectralSplit(n, cut_tuple, tuple(windows), eigs)


# ---------------------------------------------------------------------------
# branch-cut logarithms and Agmon angles


def branch_arg(z: complex, theta: float, tol: float = ANGLE_TOL) -> float:
    """Argument of ``z`` taken in the open interval (theta, theta + 2 pi)."""
    offset = (cmath.phase(z) - theta) % (2 * math.pi)
    if offset < tol or 2 * math.pi - offset < tol:
        raise NumericalAmbiguity(
            "spectrum on cut", f"eigenvalue {z} lies on the ray of angle {theta}", eigenvalue=complex(z), theta=theta
        )
    return theta + offset


def ldet_eigenvalues(eigs: Iterable[complex], theta: float, tol: float = ANGLE_TOL) -> complex:
    total = 0.0 + 0.0j
    for z in eigs:
        z = complex(z)
        if z == 0:
            raise NumericalAmbiguity("singular operator", "zero eigenvalue in a logarithmic determinant")
        total += complex(math.log(abs(z)), branch_arg(z, theta, tol))
    return total


def ldet_branch(a: np.ndarray, theta: float, tol: float = ANGLE_TOL) -> complex:
    """Sum of log(lambda_i) with arg(lambda_i) in (theta, theta + 2 pi)."""
    a = as_float(a)
    if a.shape[0] == 0:
        return 0.0j
    if np.allclose(np.tril(a, -1), 0.0, atol=0.0):
        eigs = np.diag(a)
    else:
        eigs = sla.eigvals(a)
    return ldet_eigenvalues(eigs, theta, tol)


@dataclass(frozen=True)
class AngleSector:
    theta: float
    min_gap: float
    sector: tuple[float, float]
    eta_admissible: bool = False


def _spectrum_of(item) -> np.ndarray:
    arr = np.asarray(item)
    if arr.ndim == 2:
        return sla.eigvals(as_float(arr)) if arr.shape[0] else np.zeros(0, complex)
    return as_float(arr.reshape(-1))


def choose_agmon_angle(
    spectra: Sequence,
    sector: tuple[float, float] = (-math.pi, 0.0),
    eta_admissible: bool = False,
    min_gap: float = DEFAULT_MIN_GAP,
) -> AngleSector:
    """Pick theta in the open sector keeping both rays theta, theta+pi far from the spectrum.

    ``spectra`` may mix square matrices and 1-D eigenvalue arrays.  With
    ``eta_admissible`` the sector must be (-pi/2, 0) and theta is additionally
    kept below every eigenvalue argument that would fall in the forbidden
    solid angles (-pi/2, theta] and (pi/2, theta + pi].
    """
    lo, hi = float(sector[0]), float(sector[1])
    if not hi > lo or hi - lo > math.pi + 1e-15:
        raise ValueError("sector must be an open interval of length at most pi")
    eigs = np.concatenate([_spectrum_of(s) for s in spectra]) if spectra else np.zeros(0, complex)
    eigs = eigs[np.abs(eigs) > 0]
    args = np.angle(eigs)
    folded = sorted({lo + ((a - lo) % math.pi) for a in args})
    obstacles = [p for p in folded if lo < p < hi]
    upper = hi
    if eta_admissible:
        if abs(lo + math.pi / 2) > 1e-15 or abs(hi) > 1e-15:
            raise ValueError("eta admissibility is defined on the sector (-pi/2, 0)")
        if obstacles:
            upper = obstacles[0]
        obstacles = []
    points = [lo] + [p for p in obstacles if p < upper] + [upper]
    best_lo, best_hi = points[0], points[1]
    for a, b in zip(points, points[1:]):
        if b - a > best_hi - best_lo + 1e-15:
            best_lo, best_hi = a, b
    theta = 0.5 * (best_lo + best_hi)
    gap = _ray_gap(theta, args)
    if gap < min_gap:
        raise NumericalAmbiguity(
            "no admissible angle", f"best angle {theta} keeps only {gap:.3e} rad from the spectrum", theta=theta
        )
    return AngleSector(theta, gap, (lo, hi), eta_admissible)


def _ray_gap(theta: float, args: np.ndarray) -> float:
    if args.size == 0:
        return math.pi / 2
    diff = np.abs(((args - theta) + math.pi / 2) % math.pi - math.pi / 2)
    return float(np.min(diff))


# ---------------------------------------------------------------------------
# matrix text format


def _format_scalar(v, exact: bool) -> str:
    if exact:
        re, im = exact_to_fraction_pair(v)
        return f"{re.numerator}/{re.denominator},{im.numerator}/{im.denominator}"
    v = complex(v)
    return f"{v.real!r},{v.imag!r}"


def format_matrix(a: np.ndarray) -> str:
    """Text form: header 'rows cols', then one line per row of 're,im' tokens."""
    exact = is_exact(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(_format_scalar(v, exact) for v in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, exact: bool | None = None) -> np.ndarray:
    tokens = text.split()
    return parse_matrix_tokens(tokens, exact)[0]


def parse_matrix_tokens(tokens: list[str], exact: bool | None = None, start: int = 0) -> tuple[np.ndarray, int]:
    rows, cols = int(tokens[start]), int(tokens[start + 1])
    entries = tokens[start + 2 : start + 2 + rows * cols]
    if len(entries) != rows * cols:
        raise ValueError("matrix text ended early")
    if exact is None:
        exact = any("/" in t for t in entries)
    out = zeros(rows, cols, exact)
    for idx, tok in enumerate(entries):
        re_s, im_s = tok.split(",")
        i, j = divmod(idx, cols)
        out[i, j] = gaussian(re_s, im_s) if exact else complex(float(re_s), float(im_s))
    return out, start + 2 + rows * cols
