"""Hessian and mixed measures of grid functions, with the integral estimates.

The m-Hessian measure of a smooth enough function is realized cell by cell:
the wedge ratio of m copies of the discrete complex Hessian against the
metric, times the metric volume of the cell.  Bounded non-smooth functions go
through a decreasing smooth schedule, with convergence monitored against a
fixed battery of smooth test functions (weak limits are only testable against
fixed test functions at desk scale).

Also here: local mass bounds of Chern-Levine-Nirenberg type, the discrete
integration-by-parts residual including the metric torsion term, the
e_(q,k,s) energy-inequality suite, monotone-convergence defect tables, and
the maximum formula check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import ConeError, StructuralError
from . import complexforms as cf
from .fieldgrid import (
    ConeVerdict,
    GridDomain,
    GridFunction,
    HermitianField,
    MetricField,
    complex_hessian,
    is_m_omega_sh,
    relative_spectra,
)
from .hermforms import char_poly_elem_sym, wedge_ratio_batch
from .symcone import elem_sym_all

__all__ = [
    "DiscreteMeasure",
    "EnergyTriple",
    "test_battery",
    "hessian_measure",
    "mixed_measure",
    "cln_mass_bound",
    "ibp_residual",
    "energy_suite",
    "decreasing_convergence_check",
    "increasing_convergence_check",
    "max_formula_check",
]

#: A schedule is accepted as converged when consecutive battery integrals
#: differ by less than this, relative to the measure scale.
SCHEDULE_TOL = 1e-4

NEGATIVE_CLAMP_TOL = 1e-10


# ---------------------------------------------------------------------------
# the measure container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative cell masses on the interior cells of a grid domain.

    Construction clamps negative cells (rounding of wedge ratios) to zero and
    keeps an audit count plus the most negative raw cell.
    """

    domain: GridDomain
    cell_masses: np.ndarray
    clamped_cells: int = 0
    worst_negative: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_raw(cls, domain: GridDomain, raw: np.ndarray, meta: dict | None = None) -> "DiscreteMeasure":
        raw = np.asarray(raw, dtype=float)
        if raw.shape != domain.shape:
            raise StructuralError("cell mass shape mismatch")
        neg = raw < 0
        clamped = int(neg.sum())
        worst = float(raw.min()) if clamped else 0.0
        clean = np.where(neg, 0.0, raw)
        clean[~domain.interior] = 0.0
        return cls(domain, clean, clamped, worst, meta or {})

    def total(self) -> float:
        return float(self.cell_masses.sum())

    def restrict(self, node_mask: np.ndarray) -> float:
        return float(self.cell_masses[node_mask].sum())

    def integrate(self, chi: GridFunction | np.ndarray) -> float:
        vals = chi.values if isinstance(chi, GridFunction) else np.asarray(chi)
        return float((self.cell_masses * vals).sum())

    def nonnegativity_ok(self, tol: float = NEGATIVE_CLAMP_TOL) -> bool:
        return self.worst_negative >= -tol * max(self.total(), 1e-300)

    def save_csv(self, path) -> None:
        import json
        from pathlib import Path

        with Path(path).open("w") as f:
            f.write("# hessokit-measure-csv v1\n")
            f.write("# domain " + json.dumps(self.domain.meta(), sort_keys=True) + "\n")
            f.write(",".join(f"i{a}" for a in range(2 * self.domain.n)) + ",mass\n")
            for node in np.argwhere(self.cell_masses != 0):
                t = tuple(node)
                f.write(",".join(str(int(v)) for v in node) + "," + repr(float(self.cell_masses[t])) + "\n")


@dataclass(frozen=True)
class EnergyTriple:
    """One energy value e_(q,k,s) = integral h^(q+1) gamma^k (ddc v)^s w^(n-k-s)."""

    q: int
    k: int
    s: int
    value: float

    def __post_init__(self) -> None:
        if self.k < 0 or self.s < 0 or self.q < 0:
            raise StructuralError("energy indices must be nonnegative")


# ---------------------------------------------------------------------------
# fixed smooth test battery
# ---------------------------------------------------------------------------


def test_battery(domain: GridDomain, count: int = 10) -> list[GridFunction]:
    """Deterministic battery of smooth test functions on the domain.

    One constant, centered and shifted polynomial bumps, and two polynomially
    weighted bumps; exactly ``count`` members, frozen across runs.
    """
    z = domain.complex_coords()
    t = (np.abs(z) ** 2).sum(axis=-1)
    if domain.kind == "ball":
        scale = float(domain.params["radius"]) ** 2
    else:
        scale = float(max(np.abs(domain.real_coords()).max(), 1.0)) ** 2
    x1 = domain.real_coords()[..., 0]

    def bump(center_t: np.ndarray, width: float) -> np.ndarray:
        return np.clip(1.0 - center_t / (width * scale), 0.0, None) ** 3

    members = [np.ones(domain.shape), bump(t, 1.0), bump(t, 0.5), bump(t, 0.25)]
    shifts = [0.3, -0.3]
    for s in shifts:
        zs = z.copy()
        zs[..., 0] -= s * math.sqrt(scale)
        ts = (np.abs(zs) ** 2).sum(axis=-1)
        members.append(bump(ts, 0.6))
    members.append(x1 * bump(t, 0.8) / math.sqrt(scale))
    members.append((t / scale) * bump(t, 1.0))
    members.append(bump(t, 0.75) ** 2)
    members.append((1.0 - t / scale) * bump(t, 0.9))
    out = [GridFunction(domain, m, {"battery_index": i}) for i, m in enumerate(members[:count])]
    return out


# ---------------------------------------------------------------------------
# core densities
# ---------------------------------------------------------------------------


def _hessian_density(hess: HermitianField, metric: MetricField, m: int) -> np.ndarray:
    """S_m(relative spectrum)/C(n,m) per valid node, on the full grid shape."""
    n = hess.domain.n
    lam = relative_spectra(hess, metric)
    s = elem_sym_all(lam, m)[:, m]
    out = np.zeros(hess.domain.shape)
    out[hess.valid] = s / comb(n, m)
    return out


def _mixed_density(
    hessians: Sequence[HermitianField], metric: MetricField, pad_to: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Wedge ratio of the given Hessians (metric-padded) per node.

    Returns (density, valid_mask).  ``pad_to`` <= n is the number of form
    slots before metric padding (defaults to len(hessians)).
    """
    dom = hessians[0].domain
    n = dom.n
    valid = dom.interior.copy()
    for h in hessians:
        valid &= h.valid
    mats = [h.matrices[valid] for h in hessians]
    if metric.is_identity():
        g = None
    else:
        g = metric.stacked()[valid]
    ratio = wedge_ratio_batch(mats, g, n)
    out = np.zeros(dom.shape)
    out[valid] = ratio
    del pad_to
    return out, valid


def _metric_cell_volume(metric: MetricField) -> np.ndarray:
    return metric.det() * metric.domain.cell_volume()


# ---------------------------------------------------------------------------
# Hessian and mixed measures
# ---------------------------------------------------------------------------


def _require_cone(u: GridFunction, metric: MetricField, m: int, tol: float) -> ConeVerdict:
    verdict = is_m_omega_sh(u, metric, m, tol)
    if not verdict.ok:
        raise ConeError(
            f"input is not m-subharmonic at order {m}: worst margin "
            f"{verdict.worst_margin:.3e} at node {verdict.worst_node}"
        )
    return verdict


def hessian_measure(
    u: GridFunction,
    metric: MetricField,
    m: int,
    schedule: Sequence[GridFunction] | None = None,
    cone_tol: float = 1e-7,
    battery: Sequence[GridFunction] | None = None,
) -> DiscreteMeasure:
    """The measure (dd^c u)^m ^ omega^(n-m), cell by cell.

    For smooth inputs the density is S_m of the relative Hessian spectrum
    over C(n, m); for non-smooth bounded inputs pass a decreasing smooth
    schedule: members are evaluated in order and the result is the last
    member's measure, with the Cauchy defect of battery integrals between
    consecutive members reported in the metadata (a non-Cauchy schedule is a
    convergence warning, not an error).
    """
    _require_cone(u, metric, m, cone_tol)
    volume = _metric_cell_volume(metric)
    if schedule is None:
        hess = complex_hessian(u)
        dens = _hessian_density(hess, metric, m)
        return DiscreteMeasure.from_raw(
            u.domain, dens * volume, {"path": "direct", "masked_out": hess.masked_out}
        )

    battery = list(battery) if battery is not None else test_battery(u.domain)
    defects: list[float] = []
    prev_ints: np.ndarray | None = None
    last: DiscreteMeasure | None = None
    for member in schedule:
        hess = complex_hessian(member)
        dens = _hessian_density(hess, metric, m)
        last = DiscreteMeasure.from_raw(member.domain, dens * volume)
        ints = np.array([last.integrate(chi) for chi in battery])
        if prev_ints is not None:
            scale = max(float(np.abs(ints).max()), 1e-300)
            defects.append(float(np.abs(ints - prev_ints).max()) / scale)
        prev_ints = ints
    assert last is not None
    converged = bool(defects and defects[-1] < SCHEDULE_TOL) or len(defects) == 0
    meta = {"path": "schedule", "cauchy_defects": defects, "converged": converged}
    return DiscreteMeasure(
        last.domain, last.cell_masses, last.clamped_cells, last.worst_negative, meta
    )


def mixed_measure(
    us: Sequence[GridFunction],
    metric: MetricField,
    m: int,
    cone_tol: float = 1e-7,
) -> DiscreteMeasure:
    """Mixed measure dd^c u_1 ^ ... ^ dd^c u_k ^ omega^(n-k) for k <= m.

    Symmetric in its arguments by construction (determinant polarization)
    and collapses to hessian_measure when the arguments coincide.
    """
    if not (1 <= len(us) <= m):
        raise StructuralError(f"need 1...m={m} factors, got {len(us)}")
    for u in us:
        _require_cone(u, metric, m, cone_tol)
    hessians = [complex_hessian(u) for u in us]
    dens, valid = _mixed_density(hessians, metric)
    volume = _metric_cell_volume(metric)
    return DiscreteMeasure.from_raw(
        us[0].domain, dens * volume, {"path": "mixed", "factors": len(us), "valid": int(valid.sum())}
    )


# ---------------------------------------------------------------------------
# CLN-type local mass bound
# ---------------------------------------------------------------------------


def _region_contained(inner: np.ndarray, outer: np.ndarray) -> bool:
    grown = ndimage.binary_dilation(inner, np.ones((3,) * inner.ndim, dtype=bool))
    return bool((outer | ~grown).all())


#: Safety factor applied on top of the reference-family calibration.
CLN_SAFETY = 1.25


def cln_mass_bound(
    u: GridFunction,
    inner_mask: np.ndarray,
    outer_mask: np.ndarray,
    p: int,
    metric: MetricField,
    cone_tol: float = 1e-7,
) -> dict:
    """Local mass of (dd^c u)^p ^ omega^(n-p) on K against C (1 + sup |u|)^p.

    K and U are node masks with K compactly inside U compactly inside the
    domain.  The constant is calibrated once per (K, U, metric) on a frozen
    reference family (scaled quadratics against the same regions) with a
    fixed safety factor, and the report carries the frozen value.
    """
    dom = u.domain
    if not _region_contained(inner_mask, outer_mask):
        raise StructuralError("inner region is not compactly inside the outer region")
    if not _region_contained(outer_mask, dom.interior):
        raise StructuralError("outer region is not compactly inside the domain")
    _require_cone(u, metric, p, cone_tol)

    volume = _metric_cell_volume(metric)

    def mass_on_inner(fn: GridFunction) -> float:
        hess = complex_hessian(fn)
        dens = _hessian_density(hess, metric, p)
        return float((dens * volume)[inner_mask & hess.valid].sum())

    # reference family: scaled quadratics c|z|^2, c = 1/2, 1, 2
    z = dom.complex_coords()
    quad = (np.abs(z) ** 2).sum(axis=-1)
    c_ref = 0.0
    for c in (0.5, 1.0, 2.0):
        ref = GridFunction(dom, c * quad)
        sup = float(np.abs(ref.values[outer_mask]).max())
        c_ref = max(c_ref, mass_on_inner(ref) / (1.0 + sup) ** p)
    constant = CLN_SAFETY * c_ref

    mass = mass_on_inner(u)
    sup_u = float(np.abs(u.values[outer_mask]).max())
    bound = constant * (1.0 + sup_u) ** p
    return {
        "mass": mass,
        "bound": bound,
        "constant": constant,
        "sup_norm": sup_u,
        "ratio": mass / bound if bound > 0 else math.inf,
        "passed": mass <= bound,
    }


# ---------------------------------------------------------------------------
# integration-by-parts residual
# ---------------------------------------------------------------------------


def _support_margin_ok(phi: GridFunction, margin: int = 3) -> bool:
    dom = phi.domain
    carrier = np.abs(phi.values) > 0
    safe = ndimage.binary_erosion(
        dom.interior, np.ones((3,) * (2 * dom.n), dtype=bool), iterations=margin
    )
    return bool((safe | ~carrier).all())


def ibp_residual(
    phi: GridFunction,
    rho: GridFunction,
    eta_spec: Sequence[GridFunction],
    metric: MetricField,
) -> dict:
    """Residual of the order-zero integration-by-parts identity.

    With eta the wedge of the Hessians of ``eta_spec`` (m - 2 functions for
    operator order m), both sides of

        int phi dd^c rho ^ eta ^ omega^(n-m+1)
          = - int d phi ^ d^c rho ^ eta ^ omega^(n-m+1)
            + int phi d^c rho ^ d omega ^ eta ^ omega^(n-m)

    are evaluated discretely; the torsion term vanishes identically for
    constant-coefficient metrics.  The residual must vanish at rate O(h) or
    better under refinement.
    """
    dom = phi.domain
    n = dom.n
    m = len(eta_spec) + 2
    if m > n + 1:
        raise StructuralError("too many eta factors for the dimension")
    if not _support_margin_ok(phi):
        raise StructuralError("phi must vanish near the grid boundary")
    spacing = dom.spacing
    vol = dom.cell_volume()

    from .fieldgrid import _fill_exterior

    phi_f = cf.scalar_form(n, phi.values, spacing)
    rho_filled = _fill_exterior(rho)
    rho_f = cf.scalar_form(n, rho_filled, spacing)
    omega = metric.omega_form()

    eta = cf.scalar_form(n, 1.0, spacing)
    for g in eta_spec:
        hess = complex_hessian(g)
        eta = eta.wedge(cf.hermitian_form_field(n, hess.matrices, spacing))

    om_pow1 = omega.wedge_power(n - m + 1)
    lhs_form = phi_f.wedge(rho_f.ddc()).wedge(eta).wedge(om_pow1)
    lhs = float(np.sum(lhs_form.top_density() * vol))

    grad_term = phi_f.d().wedge(rho_f.dc()).wedge(eta).wedge(om_pow1)
    rhs1 = -float(np.sum(grad_term.top_density() * vol))
    torsion_term = phi_f.wedge(rho_f.dc()).wedge(omega.d()).wedge(eta).wedge(
        omega.wedge_power(n - m)
    )
    torsion_density = torsion_term.top_density()
    rhs2 = float(np.sum(np.broadcast_to(torsion_density, dom.shape) * vol))
    rhs = rhs1 + rhs2
    return {
        "lhs": lhs,
        "rhs": rhs,
        "gradient_term": rhs1,
        "torsion_term": rhs2,
        "residual": abs(lhs - rhs),
    }


# ---------------------------------------------------------------------------
# energy-inequality suite
# ---------------------------------------------------------------------------


def _boundary_ring(dom: GridDomain, width: int = 2) -> np.ndarray:
    ring = ndimage.binary_dilation(
        ~dom.interior, np.ones((3,) * (2 * dom.n), dtype=bool), iterations=width
    )
    return ring & dom.interior


def energy_suite(
    w: GridFunction,
    v: GridFunction,
    rho: GridFunction,
    metric: MetricField,
    m: int,
    q_max: int | None = None,
    cone_tol: float = 1e-7,
    range_tol: float = 1e-9,
) -> dict:
    """The e_(q,k,s) table and the inequality chain it satisfies.

    Preconditions: -1 <= v <= w <= 0 and -1 <= rho <= 0, all order-m
    subharmonic, with w = v near the boundary (enforced here by the max
    blending w <- max(w - eps, v), eps the near-boundary gap).  Reports every
    e_(q,k,s) for q <= q_max (default 3m), k + s <= m, the per-inequality
    empirical constants, and the master bound e_(3m,m,0) <= C sum_s e_(0,0,s).
    """
    dom = w.domain
    n = dom.n
    q_max = 3 * m if q_max is None else q_max
    interior = dom.interior

    def check_range(g: GridFunction, name: str) -> None:
        vals = g.values[interior]
        bad = int(((vals < -1 - range_tol) | (vals > range_tol)).sum())
        if bad:
            raise StructuralError(f"{name} must lie in [-1, 0]; {bad} nodes violate")

    check_range(w, "w")
    check_range(v, "v")
    check_range(rho, "rho")
    bad_order = int((v.values[interior] > w.values[interior] + range_tol).sum())
    if bad_order:
        raise StructuralError(f"need v <= w; {bad_order} nodes violate")
    for g, name in ((w, "w"), (v, "v"), (rho, "rho")):
        verdict = is_m_omega_sh(g, metric, m, cone_tol)
        if not verdict.ok:
            raise StructuralError(
                f"{name} fails the order-{m} cone test at {verdict.worst_node}"
            )

    # blend w so that w = v near the boundary
    ring = _boundary_ring(dom)
    gap = float((w.values - v.values)[ring].max()) if ring.any() else 0.0
    if gap > range_tol:
        blended = np.maximum(w.values - gap, v.values)
    else:
        blended = np.maximum(w.values, v.values)
    h = np.clip(blended - v.values, 0.0, 1.0)
    h[~interior] = 0.0

    hess_rho = complex_hessian(rho)
    hess_v = complex_hessian(v)
    volume = _metric_cell_volume(metric)

    # densities per (k, s); q only reweights by powers of h
    dens: dict[tuple[int, int], np.ndarray] = {}
    for k in range(0, m + 1):
        for s in range(0, m - k + 1):
            if k + s == 0:
                d = np.zeros(dom.shape)
                d[interior] = 1.0
                valid = interior
            else:
                d, valid = _mixed_density([hess_rho] * k + [hess_v] * s, metric)
            masses = np.where(valid, np.clip(d, 0.0, None) * volume, 0.0)
            dens[(k, s)] = masses

    table: dict[tuple[int, int, int], EnergyTriple] = {}
    for q in range(0, q_max + 1):
        hq = h ** (q + 1)
        for (k, s), masses in dens.items():
            val = float((hq * masses).sum())
            table[(q, k, s)] = EnergyTriple(q, k, s, val)

    def e(q: int, k: int, s: int) -> float:
        return table[(q, k, s)].value

    inequalities: list[dict] = []

    def record(name: str, lhs: float, rhs_sum: float, q: int, k: int, s: int) -> None:
        if lhs <= 0:
            c_emp = 0.0
        elif rhs_sum > 0:
            c_emp = lhs / rhs_sum
        else:
            c_emp = math.inf
        inequalities.append(
            {
                "name": name,
                "q": q,
                "k": k,
                "s": s,
                "lhs": lhs,
                "rhs_sum": rhs_sum,
                "empirical_constant": c_emp,
                "finite": math.isfinite(c_emp),
            }
        )

    # top-degree chain start: e_(q,m,0) against (q-1, m-1, *)
    for q in range(1, q_max + 1):
        record("case1", e(q, m, 0), e(q - 1, m - 1, 1) + e(q - 1, m - 1, 0), q, m, 0)
    # general top-degree case, k + s = m
    for q in range(2, q_max + 1):
        for k in range(1, m + 1):
            s = m - k
            rhs = sum(e(q - 1, i, m - i) for i in range(0, k)) + sum(
                e(q - 2, i, m - 1 - i) for i in range(0, m)
            )
            record("case1_general", e(q, k, s), rhs, q, k, s)
    # one metric power up, k + s = m - 1
    for q in range(1, q_max + 1):
        for k in range(1, m):
            s = m - 1 - k
            rhs = e(q - 1, k - 1, s + 1) + sum(e(q - 1, i, m - 2 - i) for i in range(0, m - 1))
            record("case2", e(q, k, s), rhs, q, k, s)
    # low total degree, k + s <= m - 2
    for q in range(1, q_max + 1):
        for k in range(1, m - 1):
            for s in range(0, m - 1 - k):
                rhs = e(q - 1, k - 1, s + 1) + e(q, k - 1, s)
                record("case3", e(q, k, s), rhs, q, k, s)

    # monotone decay in q (exact: 0 <= h <= 1)
    mono_ok = True
    for q in range(1, q_max + 1):
        for (k, s) in dens:
            if e(q, k, s) > e(q - 1, k, s) * (1 + 1e-12) + 1e-300:
                mono_ok = False

    master_lhs = e(q_max, m, 0) if q_max >= 3 * m else e(q_max, m, 0)
    master_rhs = sum(e(0, 0, s) for s in range(0, m + 1))
    master_c = master_lhs / master_rhs if master_rhs > 0 else (0.0 if master_lhs <= 0 else math.inf)

    passed = (
        mono_ok
        and all(rec["finite"] for rec in inequalities)
        and math.isfinite(master_c)
    )
    return {
        "table": table,
        "inequalities": inequalities,
        "monotone_in_q": mono_ok,
        "master": {"lhs": master_lhs, "rhs_sum": master_rhs, "empirical_constant": master_c},
        "blending_gap": gap,
        "passed": passed,
    }


# ---------------------------------------------------------------------------
# monotone convergence defect tables
# ---------------------------------------------------------------------------


def _convergence_check(
    sequences: Sequence[Sequence[GridFunction]],
    metric: MetricField,
    m: int,
    battery: Sequence[GridFunction] | None,
    limits: Sequence[GridFunction] | None,
    direction: int,
    tol: float,
) -> dict:
    lengths = {len(seq) for seq in sequences}
    if len(lengths) != 1:
        raise StructuralError("all argument sequences must have equal length")
    steps = lengths.pop()
    dom = sequences[0][0].domain
    interior = dom.interior
    for seq in sequences:
        for a, b in zip(seq, seq[1:]):
            gap = (b.values - a.values)[interior] * direction
            if (gap > 1e-9 * (1 + np.abs(a.values[interior]))).any():
                raise StructuralError("sequence is not monotone in the required direction")

    battery = list(battery) if battery is not None else test_battery(dom)
    if limits is None:
        limits = [seq[-1] for seq in sequences]
    limit_measure = mixed_measure(list(limits), metric, m)
    limit_ints = np.array([limit_measure.integrate(chi) for chi in battery])
    scale = max(float(np.abs(limit_ints).max()), limit_measure.total(), 1e-300)

    defects = np.zeros((len(battery), steps))
    for j in range(steps):
        mu = mixed_measure([seq[j] for seq in sequences], metric, m)
        ints = np.array([mu.integrate(chi) for chi in battery])
        defects[:, j] = np.abs(ints - limit_ints) / scale

    worst = defects.max(axis=0)
    nonincreasing = bool((np.diff(worst) <= 1e-12 + 0.05 * worst[:-1]).all())
    return {
        "defects": defects,
        "worst_by_step": worst,
        "final_defect": float(worst[-1]),
        "nonincreasing": nonincreasing,
        "passed": bool(worst[-1] <= tol),
        "tol": tol,
    }


def decreasing_convergence_check(
    sequences: Sequence[Sequence[GridFunction]],
    metric: MetricField,
    m: int,
    battery: Sequence[GridFunction] | None = None,
    limits: Sequence[GridFunction] | None = None,
    tol: float = 1e-3,
) -> dict:
    """Battery defects |int chi dL(j) - int chi dL(limit)| for decreasing
    sequences in every argument slot; must decay below tol."""
    return _convergence_check(sequences, metric, m, battery, limits, direction=+1, tol=tol)


def increasing_convergence_check(
    sequences: Sequence[Sequence[GridFunction]],
    metric: MetricField,
    m: int,
    battery: Sequence[GridFunction] | None = None,
    limits: Sequence[GridFunction] | None = None,
    tol: float = 1e-3,
) -> dict:
    """Mirror of the decreasing case for increasing (a.e.) sequences."""
    return _convergence_check(sequences, metric, m, battery, limits, direction=-1, tol=tol)


# ---------------------------------------------------------------------------
# maximum formula
# ---------------------------------------------------------------------------


def max_formula_check(
    u: GridFunction,
    v: GridFunction,
    others: Sequence[GridFunction],
    metric: MetricField,
    m: int,
    margin_cells: int = 1,
    tol: float = 5e-2,
) -> dict:
    """On {u < v}, the top measure of max(u, v) agrees with that of v.

    The strict sublevel set is realized with a one-cell safety margin (the
    interface may carry mass); also checks the consequent one-sided bound on
    the complement.  ``others`` fill the remaining wedge slots.
    """
    dom = u.domain
    p = m - len(others)
    if p < 1:
        raise StructuralError("too many extra factors")
    h = max(dom.spacing)
    w = u.restrict_max(v)

    mu_max = mixed_measure([w] * p + list(others), metric, m)
    mu_v = mixed_measure([v] * p + list(others), metric, m)
    mu_u = mixed_measure([u] * p + list(others), metric, m)

    below = (u.values < v.values - h) & dom.interior
    core = ndimage.binary_erosion(
        below, np.ones((3,) * (2 * dom.n), dtype=bool), iterations=margin_cells
    )
    mass_scale = max(mu_v.restrict(core), 1e-300)
    defect = float(np.abs(mu_max.cell_masses - mu_v.cell_masses)[core].sum()) / mass_scale

    above = (u.values >= v.values + h) & dom.interior
    above_core = ndimage.binary_erosion(
        above, np.ones((3,) * (2 * dom.n), dtype=bool), iterations=margin_cells
    )
    one_sided = mu_max.cell_masses - mu_u.cell_masses
    lower_defect = float(np.clip(-one_sided[above_core], 0.0, None).sum()) / max(
        mu_u.restrict(above_core), 1e-300
    )
    return {
        "defect": defect,
        "cells": int(core.sum()),
        "one_sided_defect": lower_defect,
        "vacuous": not bool(core.any()),
        "passed": (not core.any()) or (defect <= tol and lower_defect <= tol),
        "tol": tol,
    }
