"""Pointwise linear algebra of Hermitian (1,1)-forms relative to a metric.

A real (1,1)-form in fixed coordinates is stored as its n x n Hermitian
coefficient matrix; the metric plays the role of a positive definite reference
form.  Wedge products of such forms against powers of the metric reduce, point
by point, to mixed discriminants:

    (gamma_1 ^ ... ^ gamma_k ^ omega^(n-k)) / omega^n
        = D(A_1, ..., A_k, G, ..., G) / det G,

where D is the full polarization of the determinant.  For a single form
repeated m times this equals S_m(lambda) / C(n, m) with lambda the spectrum of
the pencil (gamma, g).  Everything here is referentially transparent and safe
under concurrency.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
import math
from math import comb
from typing import Sequence

import numpy as np

from .errors import StructuralError
from .symcone import ConeIndex, EigenTuple, in_gamma_m_batch

__all__ = [
    "HermitianForm",
    "MetricPoint",
    "relative_eigenvalues",
    "relative_eigenvalues_batch",
    "form_in_cone",
    "mixed_discriminant",
    "wedge_ratio",
    "wedge_ratio_batch",
    "garding_mixed_positivity",
]

HERMITIAN_TOL = 1e-12

#: Mixed products cost 2^n determinant evaluations; capped at desk scale.
MIXED_DIMENSION_CAP = 5


def _as_matrix(form) -> np.ndarray:
    if isinstance(form, HermitianForm):
        return form.matrix
    return np.asarray(form, dtype=complex)


@dataclass(frozen=True)
class HermitianForm:
    """Coefficient matrix of a real (1,1)-form; Hermitian within 1e-12."""

    matrix: np.ndarray

    def __init__(self, matrix) -> None:
        mat = np.array(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise StructuralError(f"expected a square matrix, got shape {mat.shape}")
        scale = max(float(np.abs(mat).max()), 1.0)
        if np.abs(mat - mat.conj().T).max() > HERMITIAN_TOL * scale:
            raise StructuralError("matrix is not Hermitian within 1e-12")
        mat = 0.5 * (mat + mat.conj().T)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MetricPoint:
    """A positive definite Hermitian metric with its measured torsion bound."""

    g: HermitianForm
    torsion_bound: float = 0.0

    def __post_init__(self) -> None:
        if self.torsion_bound < 0:
            raise StructuralError("torsion_bound must be nonnegative")
        eig = np.linalg.eigvalsh(self.g.matrix)
        if eig[0] <= 0:
            raise StructuralError(f"metric must be positive definite, min eig {eig[0]}")

    @property
    def n(self) -> int:
        return self.g.n

    def cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.g.matrix)


def identity_metric(n: int) -> MetricPoint:
    return MetricPoint(HermitianForm(np.eye(n)))


# ---------------------------------------------------------------------------
# pencil eigenvalues
# ---------------------------------------------------------------------------


def relative_eigenvalues_batch(gamma: np.ndarray, g: np.ndarray | None = None) -> np.ndarray:
    """Decreasing spectra of the pencils (gamma, g) over leading batch axes.

    Reduction is Cholesky-based: with g = L L^H the pencil spectrum equals the
    spectrum of L^{-1} gamma L^{-H}, which is symmetrized once more after the
    transformation so rounding cannot push eigenvalues off the real line.
    ``g=None`` means the identity metric.
    """
    gamma = np.asarray(gamma, dtype=complex)
    if g is not None:
        g = np.asarray(g, dtype=complex)
        gb = np.broadcast_to(g, gamma.shape)
        L = np.linalg.cholesky(gb)
        half = np.linalg.solve(L, gamma)  # L^{-1} gamma
        # L^{-1} (L^{-1} gamma)^H = L^{-1} gamma^H L^{-H}, Hermitian for Hermitian gamma
        transformed = np.linalg.solve(L, np.swapaxes(half, -1, -2).conj())
        gamma = 0.5 * (transformed + np.swapaxes(transformed, -1, -2).conj())
    eig = np.linalg.eigvalsh(gamma)
    return eig[..., ::-1]


def relative_eigenvalues(gamma, metric: MetricPoint) -> EigenTuple:
    """Real spectrum of det(gamma - lambda g) = 0, in decreasing order."""
    mat = _as_matrix(gamma)
    if mat.shape[0] != metric.n:
        raise StructuralError(f"form is {mat.shape[0]}x..., metric is {metric.n}x...")
    vals = relative_eigenvalues_batch(mat, metric.g.matrix)
    return EigenTuple(vals.real)


def form_in_cone(gamma, metric: MetricPoint, m: int, tol: float = 0.0) -> bool:
    """True iff the relative spectrum of (gamma, g) lies in Gamma_m."""
    lam = relative_eigenvalues(gamma, metric)
    idx = ConeIndex(metric.n, m)
    return bool(in_gamma_m_batch(lam.as_array()[None, :], idx, tol)[0])


# ---------------------------------------------------------------------------
# mixed discriminants and wedge ratios
# ---------------------------------------------------------------------------


def _sign_patterns(n: int) -> np.ndarray:
    """All sign vectors with first entry +1; the other half is symmetric."""
    pats = np.ones((2 ** (n - 1), n))
    for row in range(2 ** (n - 1)):
        for j in range(1, n):
            if (row >> (j - 1)) & 1:
                pats[row, j] = -1.0
    return pats


def mixed_discriminant(forms: Sequence) -> float:
    """D(A_1, ..., A_n): the coefficient of t_1...t_n in det(sum t_i A_i)/n!.

    Computed by finite-difference polarization over 2^n sign patterns, which
    is exact for the multilinear coefficient; symmetric in its arguments and
    D(A, ..., A) = det A.
    """
    mats = [_as_matrix(f) for f in forms]
    n = mats[0].shape[0]
    if len(mats) != n:
        raise StructuralError(f"need exactly n={n} forms, got {len(mats)}")
    for mat in mats:
        if mat.shape != (n, n):
            raise StructuralError("all forms must be n x n")
    if n > MIXED_DIMENSION_CAP:
        raise StructuralError(f"mixed products are capped at n <= {MIXED_DIMENSION_CAP}")
    stack = np.stack(mats)
    total = 0.0
    for eps in _sign_patterns(n):
        term = np.linalg.det(np.tensordot(eps, stack, axes=1)).real
        total += float(np.prod(eps)) * term
    # the eps -> -eps half contributes identically
    return 2.0 * total / (2.0**n * float(math.factorial(n)))


def wedge_ratio_batch(
    forms: Sequence[np.ndarray],
    g: np.ndarray | None,
    n: int,
) -> np.ndarray:
    """Vectorized (gamma_1^...^gamma_k^omega^(n-k)) / omega^n over batch axes.

    ``forms`` are k <= n stacked coefficient arrays (..., n, n); the metric
    fills the remaining n - k slots.  Uses the same polarization as
    mixed_discriminant, batched over numpy's stacked determinants.
    """
    if n > MIXED_DIMENSION_CAP:
        raise StructuralError(f"mixed products are capped at n <= {MIXED_DIMENSION_CAP}")
    k = len(forms)
    if not (1 <= k <= n):
        raise StructuralError(f"need 1 <= k <= n forms, got {k}")
    mats = [np.asarray(f, dtype=complex) for f in forms]
    if g is None:
        gmat = np.eye(n, dtype=complex)
        detg = 1.0
    else:
        gmat = np.asarray(g, dtype=complex)
        detg = np.linalg.det(gmat).real
    slots = mats + [gmat] * (n - k)
    shape = np.broadcast_shapes(*(s.shape for s in slots))
    total = 0.0
    for eps in _sign_patterns(n):
        acc = np.zeros(shape, dtype=complex)
        for e, s in zip(eps, slots):
            acc += e * s
        term = np.linalg.det(acc).real
        total = total + float(np.prod(eps)) * term
    d = 2.0 * total / (2.0**n * float(math.factorial(n)))
    return d / detg


def wedge_ratio(forms: Sequence, metric: MetricPoint) -> float:
    """(gamma_1 ^ ... ^ gamma_k ^ omega^(n-k)) / omega^n at a point.

    For one form repeated m times this equals S_m(lambda_rel) / C(n, m); for
    k = n it equals det(G^{-1} A_1 ... ) polarized, i.e. the full mixed
    discriminant ratio.
    """
    n = metric.n
    mats = [_as_matrix(f) for f in forms]
    for mat in mats:
        if mat.shape != (n, n):
            raise StructuralError("form/metric dimension mismatch")
    return float(wedge_ratio_batch(mats, metric.g.matrix, n))


def garding_mixed_positivity(forms: Sequence, metric: MetricPoint, m: int) -> dict:
    """Minimum wedge ratio over all metric-padded combinations of cone forms.

    For forms gamma_1, ..., gamma_m in the order-m cone of (1,1)-forms, every
    product of k <= m of them (with repetition) padded by omega to top degree
    has a nonnegative ratio against omega^n.  Returns the minimum margin and
    the combination attaining it.
    """
    mats = [_as_matrix(f) for f in forms]
    for i, mat in enumerate(mats):
        if not form_in_cone(mat, metric, m):
            raise StructuralError(f"form {i} fails the order-{m} cone test")
    best = np.inf
    best_combo: tuple[int, ...] = ()
    for k in range(1, m + 1):
        for combo in combinations_with_replacement(range(len(mats)), k):
            val = wedge_ratio([mats[i] for i in combo], metric)
            if val < best:
                best = val
                best_combo = combo
    return {"margin": float(best), "combo": best_combo}


# ---------------------------------------------------------------------------
# closed-form symmetric functions of Hermitian stacks (no eigendecomposition)
# ---------------------------------------------------------------------------


def char_poly_elem_sym(mats: np.ndarray, kmax: int) -> np.ndarray:
    """S_0..S_kmax of the spectra of Hermitian stacks (..., n, n).

    S_k equals the sum of k x k principal minors; for n <= 3 these are the
    trace/trace-square/determinant closed forms, evaluated without any
    eigendecomposition.  Falls back to eigenvalues for larger n.
    """
    mats = np.asarray(mats)
    n = mats.shape[-1]
    out = np.zeros(mats.shape[:-2] + (kmax + 1,), dtype=float)
    out[..., 0] = 1.0
    if n <= 3:
        tr = np.trace(mats, axis1=-2, axis2=-1).real
        if kmax >= 1:
            out[..., 1] = tr
        if kmax >= 2 and n >= 2:
            tr2 = np.einsum("...ij,...ji->...", mats, mats).real
            out[..., 2] = 0.5 * (tr * tr - tr2)
        if kmax >= 3 and n >= 3:
            out[..., 3] = np.linalg.det(mats).real
        return out
    from .symcone import elem_sym_all

    lam = np.linalg.eigvalsh(mats)
    full = elem_sym_all(lam, kmax)
    return full
