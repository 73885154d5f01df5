"""Grids over bounded domains in C^n, discrete complex Hessians, metrics.

A domain (ball, polydisc, box) is discretized as a real 2n-dimensional lattice
with axis order (x_1, y_1, ..., x_n, y_n).  Nodes are classified interior /
boundary / exterior: interior nodes have every axis neighbor inside the
domain; boundary nodes are the remaining nodes within one index step (in the
Chebyshev metric, so every stencil read is covered) of an interior node.
Dirichlet data is imposed strongly on boundary nodes.

Normalization: d^c is fixed so that dd^c |z|^2 = beta, hence the relative
eigenvalues of a function against the standard metric are exactly the
eigenvalues of the matrix [d^2 u / dz_i dzbar_j], and the m-Hessian of |z|^2
has density one against the Lebesgue volume.

All fields are immutable after construction; operations return new objects
and are safe to run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import ndimage

from .errors import ApproximationError, StructuralError
from . import complexforms as cf
from .hermforms import char_poly_elem_sym, relative_eigenvalues_batch
from .symcone import ConeIndex, elem_sym_all, in_gamma_m_batch

__all__ = [
    "GridDomain",
    "GridFunction",
    "HermitianField",
    "MetricField",
    "TorsionBounds",
    "ConeVerdict",
    "ball_domain",
    "polydisc_domain",
    "box_domain",
    "standard_metric",
    "conformal_metric",
    "constant_metric",
    "complex_hessian",
    "is_m_omega_sh",
    "smooth_decreasing_schedule",
    "measure_torsion",
    "default_resolution",
]

EXTERIOR, BOUNDARY, INTERIOR = 0, 1, 2


def default_resolution(n: int) -> int:
    """Desk-scale defaults: 33 nodes per axis for n <= 2, 17 for n = 3."""
    return 33 if n <= 2 else 17


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridDomain:
    """A discretized bounded domain in C^n (2n real axes)."""

    n: int
    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    origin: tuple[float, ...]
    kind: Literal["ball", "polydisc", "box"]
    params: dict
    mask: np.ndarray

    def __post_init__(self) -> None:
        if len(self.shape) != 2 * self.n:
            raise StructuralError("shape must have 2n extents")
        if self.mask.shape != self.shape:
            raise StructuralError("mask shape mismatch")
        self.mask.setflags(write=False)

    # -- geometry ---------------------------------------------------------

    def axes(self) -> list[np.ndarray]:
        return [
            self.origin[a] + self.spacing[a] * np.arange(self.shape[a])
            for a in range(2 * self.n)
        ]

    def real_coords(self) -> np.ndarray:
        """(shape..., 2n) array of real coordinates."""
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(grids, axis=-1)

    def complex_coords(self) -> np.ndarray:
        """(shape..., n) array of complex coordinates z_k = x_k + i y_k."""
        r = self.real_coords()
        return r[..., 0::2] + 1j * r[..., 1::2]

    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def interior(self) -> np.ndarray:
        return self.mask == INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.mask == BOUNDARY

    @property
    def not_exterior(self) -> np.ndarray:
        return self.mask != EXTERIOR

    def interior_count(self) -> int:
        return int(self.interior.sum())

    def meta(self) -> dict:
        return {
            "n": self.n,
            "shape": list(self.shape),
            "spacing": list(self.spacing),
            "origin": list(self.origin),
            "kind": self.kind,
            "params": {
                k: (list(v) if isinstance(v, (tuple, list)) else v)
                for k, v in self.params.items()
            },
        }

    def refined(self, factor: int = 2) -> "GridDomain":
        """Same analytic domain at (roughly) ``factor`` times the resolution."""
        nodes = (min(self.shape) - 1) * factor + 1
        return _build(self.kind, self.n, self.params, nodes)


def _inside_predicate(kind: str, n: int, params: dict) -> Callable[[np.ndarray], np.ndarray]:
    if kind == "ball":
        center = np.asarray(params.get("center", np.zeros(2 * n)), dtype=float)
        radius = float(params["radius"])

        def inside(coords: np.ndarray) -> np.ndarray:
            d2 = ((coords - center) ** 2).sum(axis=-1)
            return d2 <= radius**2 * (1 + 1e-12)

        return inside
    if kind == "polydisc":
        center = np.asarray(params.get("center", np.zeros(2 * n)), dtype=float)
        radii = np.asarray(params["radii"], dtype=float)

        def inside(coords: np.ndarray) -> np.ndarray:
            ok = np.ones(coords.shape[:-1], dtype=bool)
            for k in range(n):
                dx = coords[..., 2 * k] - center[2 * k]
                dy = coords[..., 2 * k + 1] - center[2 * k + 1]
                ok &= dx**2 + dy**2 <= radii[k] ** 2 * (1 + 1e-12)
            return ok

        return inside
    if kind == "box":

        def inside(coords: np.ndarray) -> np.ndarray:
            return np.ones(coords.shape[:-1], dtype=bool)

        return inside
    raise StructuralError(f"unknown domain kind {kind!r}")


def _classify(inside: np.ndarray) -> np.ndarray:
    dim = inside.ndim
    interior = inside.copy()
    # interior nodes: inside, all axis neighbors inside, not on the index box edge
    for a in range(dim):
        sl_lo = [slice(None)] * dim
        sl_lo[a] = slice(0, 1)
        sl_hi = [slice(None)] * dim
        sl_hi[a] = slice(-1, None)
        interior[tuple(sl_lo)] = False
        interior[tuple(sl_hi)] = False
        shift_plus = np.roll(inside, -1, axis=a)
        shift_minus = np.roll(inside, 1, axis=a)
        interior &= shift_plus & shift_minus
    # boundary: Chebyshev-1 neighborhood of the interior, minus the interior
    near = ndimage.binary_dilation(interior, structure=np.ones((3,) * dim, dtype=bool))
    mask = np.full(inside.shape, EXTERIOR, dtype=np.int8)
    mask[near & ~interior] = BOUNDARY
    mask[interior] = INTERIOR
    return mask


def _build(kind: str, n: int, params: dict, nodes: int) -> GridDomain:
    if kind == "ball":
        center = np.asarray(params.get("center", np.zeros(2 * n)), dtype=float)
        radius = float(params["radius"])
        lo = center - radius
        extent = 2 * radius * np.ones(2 * n)
    elif kind == "polydisc":
        center = np.asarray(params.get("center", np.zeros(2 * n)), dtype=float)
        radii = np.asarray(params["radii"], dtype=float)
        per_axis = np.repeat(radii, 2)
        lo = center - per_axis
        extent = 2 * per_axis
    elif kind == "box":
        lo = np.asarray(params["lo"], dtype=float)
        extent = np.asarray(params["hi"], dtype=float) - lo
    else:
        raise StructuralError(f"unknown domain kind {kind!r}")
    shape = (nodes,) * (2 * n)
    spacing = tuple(float(e) / (nodes - 1) for e in extent)
    origin = tuple(float(v) for v in lo)
    dom = GridDomain.__new__(GridDomain)
    coords_axes = [origin[a] + spacing[a] * np.arange(nodes) for a in range(2 * n)]
    coords = np.stack(np.meshgrid(*coords_axes, indexing="ij"), axis=-1)
    inside = _inside_predicate(kind, n, params)(coords)
    mask = _classify(inside)
    object.__setattr__(dom, "n", n)
    object.__setattr__(dom, "shape", shape)
    object.__setattr__(dom, "spacing", spacing)
    object.__setattr__(dom, "origin", origin)
    object.__setattr__(dom, "kind", kind)
    object.__setattr__(dom, "params", dict(params))
    object.__setattr__(dom, "mask", mask)
    dom.__post_init__()
    return dom


def ball_domain(n: int, radius: float = 1.0, center: Sequence[float] | None = None, nodes: int | None = None) -> GridDomain:
    params = {"radius": float(radius)}
    if center is not None:
        params["center"] = tuple(float(c) for c in center)
    return _build("ball", n, params, nodes or default_resolution(n))


def polydisc_domain(n: int, radii: Sequence[float], center: Sequence[float] | None = None, nodes: int | None = None) -> GridDomain:
    params = {"radii": tuple(float(r) for r in radii)}
    if center is not None:
        params["center"] = tuple(float(c) for c in center)
    return _build("polydisc", n, params, nodes or default_resolution(n))


def box_domain(n: int, halfwidth: float = 1.0, nodes: int | None = None) -> GridDomain:
    params = {"lo": tuple([-float(halfwidth)] * 2 * n), "hi": tuple([float(halfwidth)] * 2 * n)}
    return _build("box", n, params, nodes or default_resolution(n))


# ---------------------------------------------------------------------------
# grid functions and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridFunction:
    """A scalar field on a grid domain; finite wherever the mask is non-exterior."""

    domain: GridDomain
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.domain.shape:
            raise StructuralError("values shape does not match the domain")
        if not np.isfinite(vals[self.domain.not_exterior]).all():
            raise StructuralError("non-finite values on interior/boundary nodes")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, domain: GridDomain, fn: Callable[[np.ndarray], np.ndarray], **meta) -> "GridFunction":
        """Sample fn(z) with z the (shape..., n) complex coordinate array."""
        vals = np.asarray(fn(domain.complex_coords()), dtype=float)
        return cls(domain, vals, dict(meta))

    @property
    def boundary_values(self) -> np.ndarray:
        return self.values[self.domain.boundary]

    def with_values(self, values: np.ndarray, **meta) -> "GridFunction":
        return GridFunction(self.domain, values, {**self.meta, **meta})

    def restrict_max(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(np.maximum(self.values, other.values))

    def oscillation(self) -> float:
        sel = self.values[self.domain.not_exterior]
        return float(sel.max() - sel.min())


@dataclass(frozen=True)
class HermitianField:
    """Per-node Hermitian matrices (a (1,1)-form sampled over the grid)."""

    domain: GridDomain
    matrices: np.ndarray  # (shape..., n, n) complex
    valid: np.ndarray  # bool, subset of interior
    masked_out: int = 0

    def __post_init__(self) -> None:
        n = self.domain.n
        if self.matrices.shape != self.domain.shape + (n, n):
            raise StructuralError("matrix field shape mismatch")

    def at_valid(self) -> np.ndarray:
        return self.matrices[self.valid]


@dataclass(frozen=True)
class TorsionBounds:
    ddc_omega: float
    domega_dcomega: float

    def max(self) -> float:
        return max(self.ddc_omega, self.domega_dcomega)


@dataclass(frozen=True)
class MetricField:
    """A Hermitian metric sampled on the grid.

    kind "constant" stores one matrix; "scalar" stores a conformal factor
    times the identity; "full" stores per-node matrices.  The flag is_kahler
    marks metrics known to be closed (constant coefficients).
    """

    domain: GridDomain
    kind: Literal["constant", "scalar", "full"]
    matrix: np.ndarray | None = None
    scalar: np.ndarray | None = None
    matrices: np.ndarray | None = None
    is_kahler: bool = False
    torsion: TorsionBounds | None = None

    @property
    def n(self) -> int:
        return self.domain.n

    def is_identity(self) -> bool:
        return self.kind == "constant" and np.array_equal(self.matrix, np.eye(self.n))

    def stacked(self) -> np.ndarray:
        """(shape..., n, n) view (broadcast where possible)."""
        n = self.n
        if self.kind == "constant":
            return np.broadcast_to(self.matrix, self.domain.shape + (n, n))
        if self.kind == "scalar":
            return self.scalar[..., None, None] * np.eye(n)
        return self.matrices

    def scalar_factor(self) -> np.ndarray | None:
        """Per-node factor s with g = s * I, if the metric has that shape."""
        if self.kind == "scalar":
            return self.scalar
        if self.kind == "constant":
            d = np.diagonal(self.matrix)
            if np.allclose(self.matrix, d[0] * np.eye(self.n), atol=0) and np.all(d == d[0]):
                return np.full(self.domain.shape, float(d[0].real))
        return None

    def det(self) -> np.ndarray:
        if self.kind == "constant":
            return np.full(self.domain.shape, float(np.linalg.det(self.matrix).real))
        if self.kind == "scalar":
            return self.scalar**self.n
        return np.linalg.det(self.matrices).real

    def validate_positive(self) -> None:
        interior = self.domain.interior
        if self.kind == "constant":
            eig = np.linalg.eigvalsh(self.matrix)
            if eig[0] <= 0:
                raise StructuralError("metric must be positive definite")
        elif self.kind == "scalar":
            if not (self.scalar[interior] > 0).all():
                raise StructuralError("conformal factor must be positive")
        else:
            eig = np.linalg.eigvalsh(self.matrices[interior])
            if not (eig[..., 0] > 0).all():
                raise StructuralError("metric must be positive definite at interior nodes")

    def omega_form(self) -> cf.FormField:
        return cf.hermitian_form_field(self.n, self.stacked(), self.domain.spacing)


def standard_metric(domain: GridDomain) -> MetricField:
    m = MetricField(domain, "constant", matrix=np.eye(domain.n), is_kahler=True)
    m.validate_positive()
    return m


def constant_metric(domain: GridDomain, matrix) -> MetricField:
    mat = np.asarray(matrix, dtype=complex)
    scale = max(1.0, float(np.abs(mat).max()))
    if np.abs(mat - mat.conj().T).max() > 1e-12 * scale:
        raise StructuralError("metric matrix must be Hermitian")
    # constant-coefficient forms are closed, hence Kahler
    m = MetricField(domain, "constant", matrix=0.5 * (mat + mat.conj().T), is_kahler=True)
    m.validate_positive()
    return m


def conformal_metric(domain: GridDomain, coeff: float = 1.0) -> MetricField:
    """omega = exp(coeff * x_1) * beta; non-Kahler for coeff != 0."""
    x1 = domain.real_coords()[..., 0]
    m = MetricField(
        domain, "scalar", scalar=np.exp(coeff * x1), is_kahler=(coeff == 0.0)
    )
    m.validate_positive()
    return m


# ---------------------------------------------------------------------------
# discrete complex Hessian
# ---------------------------------------------------------------------------


def _shift(arr: np.ndarray, axis: int, steps: int) -> np.ndarray:
    """np.roll view; callers must mask nodes whose stencil wraps around."""
    return np.roll(arr, -steps, axis=axis)


def _second_derivative(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (_shift(values, axis, 1) - 2 * values + _shift(values, axis, -1)) / h**2


def _mixed_central(values: np.ndarray, a: int, b: int, ha: float, hb: float) -> np.ndarray:
    return (
        _shift(_shift(values, a, 1), b, 1)
        - _shift(_shift(values, a, 1), b, -1)
        - _shift(_shift(values, a, -1), b, 1)
        + _shift(_shift(values, a, -1), b, -1)
    ) / (4 * ha * hb)


_ONE_SIDED = np.array([-1.5, 2.0, -0.5])  # f'(0) ~ (-3 f0 + 4 f1 - f2) / (2h)


def _mixed_one_sided(values: np.ndarray, ok: np.ndarray, node: tuple, a: int, b: int, ha: float, hb: float) -> float | None:
    """Second-order mixed derivative at one node from shifted 3x3 stencils.

    Tries central/one-sided combinations per axis in a fixed order and uses
    the first whose nine stencil points are all readable.
    """
    idx = np.array(node)
    shape = values.shape

    def readable(off_a: int, off_b: int) -> bool:
        p = idx.copy()
        p[a] += off_a
        p[b] += off_b
        if (p < 0).any() or (p >= np.array(shape)).any():
            return False
        return bool(ok[tuple(p)])

    def value(off_a: int, off_b: int) -> float:
        p = idx.copy()
        p[a] += off_a
        p[b] += off_b
        return float(values[tuple(p)])

    central = np.array([-0.5, 0.0, 0.5])
    modes = {"c": (central, (-1, 0, 1)), "+": (_ONE_SIDED, (0, 1, 2)), "-": (-_ONE_SIDED, (0, -1, -2))}
    for mode_a in ("c", "+", "-"):
        wa, offs_a = modes[mode_a]
        for mode_b in ("c", "+", "-"):
            wb, offs_b = modes[mode_b]
            if all(readable(oa, ob) for oa in offs_a for ob in offs_b):
                acc = 0.0
                for ca, oa in zip(wa, offs_a):
                    for cb, ob in zip(wb, offs_b):
                        if ca != 0.0 and cb != 0.0:
                            acc += ca * cb * value(oa, ob)
                return acc / (ha * hb)
    return None


def complex_hessian(u: GridFunction) -> HermitianField:
    """Second-order discrete matrix [d^2 u / dz_i dzbar_j] at interior nodes.

    Pure second derivatives are always central (interior nodes have both axis
    neighbors readable).  Mixed derivatives are central where the four
    diagonal stencil points are readable and fall back to shifted one-sided
    second-order stencils otherwise; nodes with no usable stencil are masked
    out and counted.
    """
    dom = u.domain
    n = dom.n
    h = dom.spacing
    vals = u.values
    ok = dom.not_exterior
    interior = dom.interior
    mats = np.zeros(dom.shape + (n, n), dtype=complex)
    valid = interior.copy()
    masked = 0

    d2 = [_second_derivative(vals, a, h[a]) for a in range(2 * n)]
    for i in range(n):
        mats[..., i, i] = 0.25 * (d2[2 * i] + d2[2 * i + 1])

    # mixed stencils; four diagonal reads per axis pair
    for i in range(n):
        for j in range(i + 1, n):
            pairs = {
                "xx": (2 * i, 2 * j),
                "yy": (2 * i + 1, 2 * j + 1),
                "xy": (2 * i, 2 * j + 1),
                "yx": (2 * i + 1, 2 * j),
            }
            mixed = {}
            readable = interior.copy()
            for key, (a, b) in pairs.items():
                mixed[key] = _mixed_central(vals, a, b, h[a], h[b])
                for sa in (-1, 1):
                    for sb in (-1, 1):
                        readable &= _shift(_shift(ok, a, sa), b, sb)
            entry = 0.25 * ((mixed["xx"] + mixed["yy"]) + 1j * (mixed["xy"] - mixed["yx"]))
            mats[..., i, j] = np.where(readable, entry, 0.0)
            fallback_nodes = np.argwhere(interior & ~readable)
            for node in map(tuple, fallback_nodes):
                parts = {}
                for key, (a, b) in pairs.items():
                    parts[key] = _mixed_one_sided(vals, ok, node, a, b, h[a], h[b])
                if any(p is None for p in parts.values()):
                    if valid[node]:
                        valid[node] = False
                        masked += 1
                    continue
                mats[node + (i, j)] = 0.25 * (
                    (parts["xx"] + parts["yy"]) + 1j * (parts["xy"] - parts["yx"])
                )
            mats[..., j, i] = np.conj(mats[..., i, j])

    mats[~valid] = 0.0
    return HermitianField(dom, mats, valid, masked)


# ---------------------------------------------------------------------------
# cone tests and the m-subharmonicity verdict
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeVerdict:
    ok: bool
    worst_node: tuple[int, ...] | None
    worst_margin: float
    invalid_nodes: int


def relative_spectra(hess: HermitianField, metric: MetricField, shift: np.ndarray | None = None) -> np.ndarray:
    """Decreasing relative eigenvalue tuples at valid nodes, shape (N, n)."""
    mats = hess.at_valid()
    if shift is not None:
        shift = np.asarray(shift)
        mats = mats + (shift[hess.valid] if shift.ndim > 2 else shift)
    if metric.is_identity():
        return np.linalg.eigvalsh(mats)[..., ::-1]
    s = metric.scalar_factor()
    if s is not None:
        lam = np.linalg.eigvalsh(mats)[..., ::-1]
        return lam / s[hess.valid][:, None]
    g = metric.stacked()[hess.valid]
    return relative_eigenvalues_batch(mats, g).real


def is_m_omega_sh(
    u: GridFunction,
    metric: MetricField,
    m: int,
    tol: float = 1e-8,
    alpha: np.ndarray | None = None,
) -> ConeVerdict:
    """Closure cone test of the (optionally alpha-shifted) Hessian spectrum.

    True iff at every valid interior node all S_k of the relative spectrum,
    k <= m, exceed -tol * S_k(|lambda|).  Returns the worst node and its
    normalized margin.
    """
    hess = complex_hessian(u)
    lam = relative_spectra(hess, metric, alpha)
    idx = ConeIndex(u.domain.n, m)
    s = elem_sym_all(lam, m)
    scale = elem_sym_all(np.abs(lam), m)
    margins = (s[:, 1:] / np.maximum(scale[:, 1:], np.finfo(float).tiny)).min(axis=1)
    if margins.size == 0:
        return ConeVerdict(True, None, math.inf, hess.masked_out)
    worst_flat = int(np.argmin(margins))
    worst_margin = float(margins[worst_flat])
    nodes = np.argwhere(hess.valid)
    worst_node = tuple(int(v) for v in nodes[worst_flat])
    ok = bool((s[:, 1:] >= -tol * scale[:, 1:]).all())
    del idx
    return ConeVerdict(ok, worst_node, worst_margin, hess.masked_out)


# ---------------------------------------------------------------------------
# mollification and decreasing schedules
# ---------------------------------------------------------------------------


def _fill_exterior(u: GridFunction) -> np.ndarray:
    """Values extended to the full box by the nearest non-exterior node."""
    dom = u.domain
    if dom.not_exterior.all():
        return u.values.copy()
    exterior = ~dom.not_exterior
    indices = ndimage.distance_transform_edt(
        exterior, sampling=dom.spacing, return_distances=False, return_indices=True
    )
    return u.values[tuple(indices)]


def _bump_kernel(dim: int, delta: float) -> np.ndarray:
    """Discretely normalized polynomial bump (1 - (r/delta)^2)^3 on indices."""
    r = int(math.ceil(delta))
    offsets = np.arange(-r, r + 1)
    grids = np.meshgrid(*([offsets] * dim), indexing="ij")
    d2 = sum(g.astype(float) ** 2 for g in grids) / delta**2
    w = np.clip(1.0 - d2, 0.0, None) ** 3
    return w / w.sum()


def mollify(u: GridFunction, delta: float) -> GridFunction:
    """Convolve with the compact polynomial bump of radius delta grid units."""
    if delta < 1e-14:
        return u.with_values(u.values.copy(), delta=0.0)
    filled = _fill_exterior(u)
    kernel = _bump_kernel(2 * u.domain.n, delta)
    smooth = ndimage.convolve(filled, kernel, mode="nearest")
    return u.with_values(smooth, delta=delta)


def smooth_decreasing_schedule(
    u: GridFunction,
    metric: MetricField,
    m: int,
    deltas: Sequence[float],
    tol: float = 1e-8,
    k_cap: float = 2.0**16,
) -> list[GridFunction]:
    """Mollify-and-correct approximation u^delta decreasing to u.

    Each member is the bump mollification at scale delta plus a correction
    K * delta * (|z|^2 - R^2 - 1) with K doubled until the member passes the
    order-m cone test; monotonicity in delta is enforced by a pointwise max
    with the successor, and any node where that repair was needed is counted
    in the member's metadata.
    """
    dom = u.domain
    if dom.kind != "ball":
        raise StructuralError("schedules need a strictly pseudoconvex (ball) domain")
    radius = float(dom.params["radius"])
    center = np.asarray(dom.params.get("center", np.zeros(2 * dom.n)), dtype=float)
    d2 = ((dom.real_coords() - center) ** 2).sum(axis=-1)
    barrier = d2 - radius**2 - 1.0

    deltas = sorted((float(d) for d in deltas), reverse=True)
    raw: list[GridFunction] = []
    for delta in deltas:
        if delta < 1e-14:
            raw.append(u.with_values(u.values.copy(), delta=0.0, correction=0.0))
            continue
        base = mollify(u, delta)
        k = 0.0
        while True:
            candidate = base.with_values(
                base.values + k * delta * barrier, delta=delta, correction=k
            )
            if is_m_omega_sh(candidate, metric, m, tol).ok:
                raw.append(candidate)
                break
            k = 1.0 if k == 0.0 else 2.0 * k
            if k > k_cap:
                verdict = is_m_omega_sh(candidate, metric, m, tol)
                raise ApproximationError(
                    f"cone repair failed at delta={delta}: worst margin "
                    f"{verdict.worst_margin:.3e} at node {verdict.worst_node}"
                )

    # enforce u^delta >= u^delta' >= u for delta >= delta'
    out: list[GridFunction] = []
    floor = u.values
    for g in reversed(raw):
        repaired = np.maximum(g.values, floor)
        changed = int((repaired > g.values + tol * (1 + np.abs(g.values))).sum())
        out.append(g.with_values(repaired, monotonicity_repairs=changed))
        floor = repaired
    out.reverse()
    return out


# ---------------------------------------------------------------------------
# torsion of the metric
# ---------------------------------------------------------------------------


def _pencil_sup(numer: cf.FormField, denom: cf.FormField, n: int, interior: np.ndarray) -> float:
    """Smallest B with -B*denom <= numer <= B*denom on positive directions.

    Both arguments are (n-2, n-2)-complementary (2,2)-forms; testing against
    rank-one positive (1,1)-forms reduces the comparison to a Hermitian
    pencil per node, whose extreme generalized eigenvalue is the bound.
    """
    spacing = numer.spacing
    qn = np.zeros(interior.shape + (n, n), dtype=complex)
    qd = np.zeros(interior.shape + (n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            probe = cf.FormField(n, 2, spacing)
            probe.coeffs[((i,), (j,))] = 1j * np.ones(())
            top_n = numer.wedge(probe).top_density()
            top_d = denom.wedge(probe).top_density()
            qn[..., i, j] = np.broadcast_to(top_n, interior.shape)
            qd[..., i, j] = np.broadcast_to(top_d, interior.shape)
    qn = 0.5 * (qn + np.swapaxes(qn, -1, -2).conj())
    qd = 0.5 * (qd + np.swapaxes(qd, -1, -2).conj())
    lam = relative_eigenvalues_batch(qn[interior], qd[interior]).real
    return float(np.abs(lam).max()) if lam.size else 0.0


def measure_torsion(metric: MetricField) -> TorsionBounds:
    """Smallest B bounding dd^c omega by B omega^2 and d omega ^ d^c omega by
    B omega^3, over interior nodes.

    Top-degree comparisons are scalar ratios; the (2,2) against (2,2) case in
    n = 3 is reduced to generalized eigenvalue bounds along rank-one positive
    directions.  Degrees beyond the dimension vanish identically.
    """
    dom = metric.domain
    n = dom.n
    interior = dom.interior
    omega = metric.omega_form()
    if n == 1:
        return TorsionBounds(0.0, 0.0)

    ddc = omega.ddc()
    omega2 = omega.wedge(omega)
    if n == 2:
        num = np.broadcast_to(ddc.top_density(), interior.shape)
        den = np.broadcast_to(omega2.top_density(), interior.shape)
        b1 = float(np.abs(num[interior] / den[interior]).max())
        b2 = 0.0  # a 6-form vanishes in real dimension 4
    else:
        b1 = _pencil_sup(ddc, omega2, n, interior)
        num = omega.d().wedge(omega.dc()).top_density()
        den = omega.wedge(omega2).top_density()
        num = np.broadcast_to(num, interior.shape)
        den = np.broadcast_to(den, interior.shape)
        b2 = float(np.abs(num[interior] / den[interior]).max())
    return TorsionBounds(b1, b2)
