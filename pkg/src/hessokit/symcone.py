"""Algebra of elementary symmetric polynomials and the positive cone Gamma_m.

The cone of order m in dimension n is

    Gamma_m = { lambda in R^n : S_1(lambda) > 0, ..., S_m(lambda) > 0 },

where S_k is the k-th elementary symmetric polynomial.  This module provides
stable evaluation of S_k and its restricted variants (entries zeroed out),
cone-membership tests guarded against cancellation, and numerical checks of
the pointwise inequalities that drive the rest of the toolkit:

* positivity of restricted polynomials S_{k;i1..it} for k + t <= m, and the
  companion facts lambda_m > 0, S_{k-1} >= lambda_1...lambda_{k-1}, and
  positivity of every sum of (n - m + 1) entries;
* the product bound lambda_1...lambda_m / lambda_i
  <= sqrt(2/(1-c_m)) * (S_{m-1;i} S_{m-1})^(1/2), with
  c_m = (m-1)(n-m+1) / (m(n-m+2));
* the quadratic bound S_{m-1;1m}^2 <= S_{m-1;m} S_{m-1;1} / (1 - c_m) and the
  Newton inequality S_m S_{m-2} <= c_m S_{m-1}^2 behind it;
* sampled estimates of the best constants theta in
  lambda_j S_{m-1;j} >= theta S_m and S_{m-1;l} >= theta S_{m-1}.

Index conventions: restricted polynomials take 1-based entry positions of the
*given* tuple; the inequality checks operate on the decreasing rearrangement
(sorting is a pure view and never mutates an EigenTuple).

All batch helpers accept arrays of shape (..., n) and are safe to call from
any number of workers; sampling parallelizes by partitioning seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import ConeError

__all__ = [
    "EigenTuple",
    "ConeIndex",
    "ConeSample",
    "elem_sym",
    "elem_sym_all",
    "elem_sym_restricted",
    "in_gamma_m",
    "in_gamma_m_batch",
    "ivochkina_checks",
    "c_m_constant",
    "lemma22a_check",
    "key_inequality_check",
    "newton_inequality_check",
    "estimate_theta_lemma21",
    "lin_trudinger_check",
    "lin_trudinger_theta",
    "sample_cone",
    "fuzz_cone_inequalities",
]

#: Default relative tolerance for inequality slack; double precision with
#: n <= 8 keeps rounding well below this.
DEFAULT_TOL = 1e-9

#: Absolute slack floor guarding against denormal underflow in products.
_ABS_FLOOR = 1e-300


def _slack_ok(slack, scale, tol):
    return slack >= -(tol * scale + _ABS_FLOOR)

Generator = Literal["shifted-gaussian", "boundary-biased", "dirichlet-simplex"]


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeIndex:
    """Ambient dimension n and cone order m, with 1 <= m <= n."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and isinstance(self.m, int)):
            raise TypeError("n and m must be integers")
        if not (1 <= self.m <= self.n):
            raise ValueError(f"need 1 <= m <= n, got n={self.n}, m={self.m}")


@dataclass(frozen=True)
class EigenTuple:
    """A point lambda in R^n; sorting is a pure view, never a mutation."""

    values: tuple[float, ...]

    def __init__(self, values: Iterable[float]):
        vals = tuple(float(v) for v in values)
        if len(vals) < 1:
            raise ValueError("EigenTuple needs at least one entry")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)

    def sorted_decreasing(self) -> "EigenTuple":
        return EigenTuple(sorted(self.values, reverse=True))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class ConeSample:
    """A sampled cone point together with its provenance (seed, generator)."""

    lam: EigenTuple
    seed: int
    generator: Generator

    def __post_init__(self) -> None:
        idx = ConeIndex(self.lam.n, 1)
        del idx  # shape check only; membership checked against caller's order

    def check(self, idx: ConeIndex, tol: float = 0.0) -> None:
        if not in_gamma_m(self.lam, idx, tol):
            raise ConeError(f"sample {self.lam.values} not in Gamma_{idx.m}")


# ---------------------------------------------------------------------------
# elementary symmetric polynomials
# ---------------------------------------------------------------------------


def elem_sym_all(values: np.ndarray, kmax: int) -> np.ndarray:
    """All S_0..S_kmax of the trailing axis, by the Newton-Horner recurrence.

    ``values`` has shape (..., n); the result has shape (..., kmax + 1) with
    result[..., k] = S_k.  Entries beyond n are zero.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    out = np.zeros(values.shape[:-1] + (kmax + 1,), dtype=float)
    out[..., 0] = 1.0
    top = 0
    for i in range(n):
        x = values[..., i]
        top = min(top + 1, kmax)
        for k in range(top, 0, -1):
            out[..., k] += x * out[..., k - 1]
    return out


def _as_array(lam: EigenTuple | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(lam, EigenTuple):
        return lam.as_array()
    return np.asarray(lam, dtype=float)


def elem_sym(lam: EigenTuple | Sequence[float], k: int) -> float:
    """S_k(lambda); S_0 = 1 and S_k = 0 for k < 0 or k > n."""
    arr = _as_array(lam)
    n = arr.shape[-1]
    if k < 0 or k > n:
        return 0.0
    if k == 0:
        return 1.0
    return float(elem_sym_all(arr, k)[..., k])


def elem_sym_enumerate(lam: EigenTuple | Sequence[float], k: int) -> float:
    """Subset-enumeration oracle for S_k; exponential, for n <= ~12 only."""
    arr = _as_array(lam)
    n = arr.shape[-1]
    if k < 0 or k > n:
        return 0.0
    if k == 0:
        return 1.0
    return float(sum(math.prod(c) for c in combinations(arr.tolist(), k)))


def _check_excluded(excluded: Iterable[int], n: int) -> tuple[int, ...]:
    idxs = tuple(int(i) for i in excluded)
    if len(set(idxs)) != len(idxs):
        raise ValueError(f"excluded indices must be distinct, got {idxs}")
    for i in idxs:
        if not (1 <= i <= n):
            raise ValueError(f"excluded index {i} out of range 1..{n}")
    return idxs


def elem_sym_restricted(
    lam: EigenTuple | Sequence[float], k: int, excluded: Iterable[int]
) -> float:
    """S_k of lambda with the listed entries (1-based positions) set to zero."""
    arr = _as_array(lam).copy()
    idxs = _check_excluded(excluded, arr.shape[-1])
    for i in idxs:
        arr[i - 1] = 0.0
    return elem_sym(arr, k)


def _restricted_all(values: np.ndarray, kmax: int, excluded0: Sequence[int]) -> np.ndarray:
    """Batched S_0..S_kmax with 0-based columns ``excluded0`` zeroed."""
    vals = np.array(values, dtype=float, copy=True)
    for j in excluded0:
        vals[..., j] = 0.0
    return elem_sym_all(vals, kmax)


# ---------------------------------------------------------------------------
# cone membership
# ---------------------------------------------------------------------------


def _in_cone_strict(values: np.ndarray, idx: ConeIndex) -> np.ndarray:
    """Literal open-cone test S_k > 0, k <= m, without the cancellation guard."""
    s = elem_sym_all(values, idx.m)
    ok = s[..., 1] > 0.0
    for k in range(2, idx.m + 1):
        ok &= s[..., k] > 0.0
    return ok


def in_gamma_m_batch(values: np.ndarray, idx: ConeIndex, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorized cone test; True where S_k > tol * S_k(|lambda|) for k <= m.

    The guard scale S_k(|lambda|) bounds the magnitude of every term entering
    S_k, so the threshold tracks the worst possible cancellation.  tol = 0
    recovers the literal open-cone test.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != idx.n:
        raise ValueError(f"expected trailing axis {idx.n}, got {values.shape[-1]}")
    s = elem_sym_all(values, idx.m)
    scale = elem_sym_all(np.abs(values), idx.m)
    ok = np.ones(values.shape[:-1], dtype=bool)
    for k in range(1, idx.m + 1):
        ok &= s[..., k] > tol * scale[..., k]
    return ok


def in_gamma_m(lam: EigenTuple | Sequence[float], idx: ConeIndex, tol: float = DEFAULT_TOL) -> bool:
    """True iff lambda lies in Gamma_m up to the cancellation-guarded tolerance."""
    return bool(in_gamma_m_batch(_as_array(lam)[None, :], idx, tol)[0])


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class CheckItem:
    name: str
    passed: bool
    worst_margin: float
    detail: str = ""


@dataclass
class CheckReport:
    """Per-check verdicts with the worst (most negative) normalized margin."""

    items: list[CheckItem] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    @property
    def worst_margin(self) -> float:
        return min((item.worst_margin for item in self.items), default=math.inf)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "items": [vars(i).copy() for i in self.items],
        }


@dataclass
class MarginReport:
    """Two sides of an inequality and the slack right - left."""

    left: float
    right: float
    slack: float
    passed: bool
    scale: float

    def as_dict(self) -> dict:
        return vars(self).copy()


# ---------------------------------------------------------------------------
# pointwise inequality checks
# ---------------------------------------------------------------------------


def c_m_constant(idx: ConeIndex) -> float:
    """c_m = (m-1)(n-m+1) / (m(n-m+2)), always in [0, 1)."""
    n, m = idx.n, idx.m
    return (m - 1) * (n - m + 1) / (m * (n - m + 2))


def _require_cone(lam: EigenTuple | Sequence[float], idx: ConeIndex) -> np.ndarray:
    arr = _as_array(lam)
    if not in_gamma_m(arr, idx, tol=0.0):
        raise ConeError(f"lambda={tuple(arr)} is not in Gamma_{idx.m} (n={idx.n})")
    return np.sort(arr)[::-1]


def ivochkina_checks(
    lam: EigenTuple | Sequence[float], idx: ConeIndex, tol: float = DEFAULT_TOL
) -> CheckReport:
    """Structural positivity facts for a cone point, on its decreasing view.

    (i)   lambda_m > 0;
    (ii)  S_{k;i1..it} > 0 for every index set with k + t <= m;
    (iii) S_{k-1} >= lambda_1 ... lambda_{k-1} for 1 <= k <= m;
    (iv)  every sum of (n - m + 1) entries is positive.
    """
    arr = _require_cone(lam, idx)
    n, m = idx.n, idx.m
    report = CheckReport()

    lam_m = arr[m - 1]
    report.items.append(
        CheckItem("lambda_m_positive", bool(lam_m > -tol * abs(arr).max()), float(lam_m))
    )

    worst = math.inf
    worst_detail = ""
    ok = True
    abs_s = elem_sym_all(np.abs(arr), m)
    del abs_s  # scales are recomputed per restriction below
    for t in range(0, m):
        for subset in combinations(range(n), t):
            restricted = arr.copy()
            for j in subset:
                restricted[j] = 0.0
            s = elem_sym_all(restricted, m - t)
            scale = elem_sym_all(np.abs(restricted), m - t)
            for k in range(1, m - t + 1):
                margin = s[k] / max(scale[k], np.finfo(float).tiny)
                if margin < worst:
                    worst = margin
                    worst_detail = f"k={k}, zeroed={tuple(j + 1 for j in subset)}"
                if not _slack_ok(s[k], scale[k], tol):
                    ok = False
    report.items.append(CheckItem("restricted_positive", ok, float(worst), worst_detail))

    s_full = elem_sym_all(arr, m)
    prefix = np.cumprod(arr[: max(m - 1, 0)]) if m > 1 else np.array([])
    worst = math.inf
    ok = True
    for k in range(1, m + 1):
        lhs = s_full[k - 1]
        rhs = 1.0 if k == 1 else float(prefix[k - 2])
        scale = abs(lhs) + abs(rhs)
        margin = (lhs - rhs) / max(scale, np.finfo(float).tiny)
        worst = min(worst, margin)
        if not _slack_ok(lhs - rhs, scale, tol):
            ok = False
    report.items.append(CheckItem("prefix_product_bound", ok, float(worst)))

    tail = float(np.sum(arr[m - 1 :]))  # smallest sum of (n - m + 1) entries
    scale = float(np.sum(np.abs(arr[m - 1 :])))
    report.items.append(
        CheckItem(
            "partial_sum_positive",
            bool(tail > -tol * scale),
            tail / max(scale, np.finfo(float).tiny),
        )
    )
    return report


def lemma22a_check(
    lam: EigenTuple | Sequence[float],
    idx: ConeIndex,
    i: int,
    tol: float = DEFAULT_TOL,
) -> MarginReport:
    """Product bound lam_1..lam_m/lam_i <= C (S_{m-1;i} S_{m-1})^{1/2}.

    The explicit constant is C = sqrt(2 / (1 - c_m)); i is a 1-based position
    in the decreasing rearrangement with 1 <= i <= m - 1.
    """
    arr = _require_cone(lam, idx)
    m = idx.m
    if not (1 <= i <= m - 1):
        raise ValueError(f"need 1 <= i <= m-1 = {m - 1}, got i={i}")
    left = float(np.prod(np.delete(arr[:m], i - 1)))
    cm = c_m_constant(idx)
    const = math.sqrt(2.0 / (1.0 - cm))
    s_rest = elem_sym_restricted(arr, m - 1, {i})
    s_full = elem_sym(arr, m - 1)
    right = const * math.sqrt(max(s_rest, 0.0) * max(s_full, 0.0))
    slack = right - left
    scale = abs(left) + abs(right)
    return MarginReport(left, right, slack, _slack_ok(slack, scale, tol), scale)


def newton_inequality_check(
    lam: EigenTuple | Sequence[float], k: int, tol: float = DEFAULT_TOL
) -> MarginReport:
    """Newton's inequality S_{k-1} S_{k+1} <= c(n,k) S_k^2, valid on all of R^n.

    c(n,k) = C(n,k-1) C(n,k+1) / C(n,k)^2 is the normalization constant that
    makes the means p_k = S_k / C(n,k) satisfy p_{k-1} p_{k+1} <= p_k^2.
    """
    arr = _as_array(lam)
    n = arr.shape[-1]
    if not (1 <= k <= n - 1):
        raise ValueError(f"need 1 <= k <= n-1, got k={k}")
    c = math.comb(n, k - 1) * math.comb(n, k + 1) / math.comb(n, k) ** 2
    s = elem_sym_all(arr, min(k + 1, n))
    left = float(s[k - 1] * s[k + 1]) if k + 1 <= n else 0.0
    right = float(c * s[k] ** 2)
    slack = right - left
    scale_s = elem_sym_all(np.abs(arr), min(k + 1, n))
    scale = float(scale_s[k - 1] * scale_s[k + 1] + c * scale_s[k] ** 2) if k + 1 <= n else float(
        c * scale_s[k] ** 2
    )
    return MarginReport(left, right, slack, _slack_ok(slack, scale, tol), scale)


def key_inequality_check(
    lam: EigenTuple | Sequence[float], idx: ConeIndex, tol: float = DEFAULT_TOL
) -> dict:
    """Quadratic bound S_{m-1;1m}^2 <= S_{m-1;m} S_{m-1;1} / (1 - c_m).

    Also checks the Newton inequality instance behind it (degree m - 1 of the
    tuple with entries 1 and m zeroed), which holds for every lambda in R^n.
    Index positions refer to the decreasing rearrangement.
    """
    arr = np.sort(_as_array(lam))[::-1]
    n, m = idx.n, idx.m
    cm = c_m_constant(idx)
    excl = sorted({1, m})
    s1m = elem_sym_restricted(arr, m - 1, excl)
    s_m = elem_sym_restricted(arr, m - 1, {m})
    s_1 = elem_sym_restricted(arr, m - 1, {1})
    left = s1m**2
    right = s_m * s_1 / (1.0 - cm)
    scale = abs(left) + abs(right)
    slack = right - left
    main = MarginReport(left, right, slack, _slack_ok(slack, scale, tol), scale)

    restricted = arr.copy()
    for j in excl:
        restricted[j - 1] = 0.0
    if m >= 2 and m <= n - 1:
        newton = newton_inequality_check(restricted, m - 1, tol)
    else:
        # degenerate orders: S_{m} or S_{m-2} leaves the valid index range
        newton = MarginReport(0.0, 0.0, 0.0, True, 0.0)
    return {"main": main, "newton": newton, "passed": main.passed and newton.passed}


def lin_trudinger_check(
    lam: EigenTuple | Sequence[float],
    idx: ConeIndex,
    theta: float,
    tol: float = DEFAULT_TOL,
) -> bool:
    """True iff S_{m-1;l} >= theta * S_{m-1} for every m <= l <= n (sorted view)."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    arr = _require_cone(lam, idx)
    n, m = idx.n, idx.m
    s_full = elem_sym(arr, m - 1)
    for ell in range(m, n + 1):
        s_l = elem_sym_restricted(arr, m - 1, {ell})
        scale = abs(s_l) + abs(theta * s_full)
        if not _slack_ok(s_l - theta * s_full, scale, tol):
            return False
    return True


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

_SHIFT = 1.0
_SIGMA = 1.0


def _gaussian_batch(rng: np.random.Generator, idx: ConeIndex, count: int) -> np.ndarray:
    out = np.empty((0, idx.n))
    attempts = 0
    while out.shape[0] < count:
        batch = rng.normal(_SHIFT, _SIGMA, size=(max(count, 1024), idx.n))
        keep = batch[_in_cone_strict(batch, idx)]
        out = np.vstack([out, keep])
        attempts += 1
        if attempts > 1000:
            raise RuntimeError("cone rejection sampling stalled")
    return out[:count]


def _boundary_walk(rng: np.random.Generator, idx: ConeIndex, base: np.ndarray) -> np.ndarray:
    """Push cone points toward the boundary along random rays, by bisection.

    Returns points of the form lam + f * t_exit * d with f in (0.9, 1); rays
    that never exit within the probe range are kept at the probe endpoint
    (deep-cone directions are valid samples too).
    """
    count, n = base.shape
    d = rng.normal(size=(count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    scale = np.linalg.norm(base, axis=1) + 1.0
    t_hi = 16.0 * scale
    inside_hi = _in_cone_strict(base + t_hi[:, None] * d, idx)
    t_lo = np.zeros(count)
    # expand for rays still inside at the probe range
    for _ in range(8):
        if not inside_hi.any():
            break
        t_hi = np.where(inside_hi, t_hi * 4.0, t_hi)
        inside_hi = _in_cone_strict(base + t_hi[:, None] * d, idx)
    never_exit = inside_hi
    for _ in range(42):
        t_mid = 0.5 * (t_lo + t_hi)
        inside = _in_cone_strict(base + t_mid[:, None] * d, idx)
        t_lo = np.where(inside, t_mid, t_lo)
        t_hi = np.where(inside, t_hi, t_mid)
    # log-uniform closeness: distances 1e-8 .. 1e-1 of the exit parameter
    frac = 1.0 - 10.0 ** rng.uniform(-8.0, -1.0, size=count)
    t = np.where(never_exit, t_lo, frac * t_lo)
    out = base + t[:, None] * d
    ok = _in_cone_strict(out, idx)
    out[~ok] = base[~ok]  # rounding pushed past the boundary; keep the source
    return out


def sample_cone(
    idx: ConeIndex,
    count: int,
    seed: int,
    generator: Generator = "shifted-gaussian",
) -> np.ndarray:
    """Batch of cone points, shape (count, n), all strictly inside Gamma_m."""
    rng = np.random.default_rng(seed)
    if generator == "shifted-gaussian":
        return _gaussian_batch(rng, idx, count)
    if generator == "boundary-biased":
        base = _gaussian_batch(rng, idx, count)
        return _boundary_walk(rng, idx, base)
    if generator == "dirichlet-simplex":
        scale = rng.gamma(2.0, 1.0, size=count)
        pts = rng.dirichlet(np.ones(idx.n), size=count) * scale[:, None] * idx.n
        return pts
    raise ValueError(f"unknown generator {generator!r}")


def cone_samples(
    idx: ConeIndex, count: int, seed: int, generator: Generator = "shifted-gaussian"
) -> list[ConeSample]:
    arr = sample_cone(idx, count, seed, generator)
    return [ConeSample(EigenTuple(row), seed, generator) for row in arr]


# ---------------------------------------------------------------------------
# theta estimation
# ---------------------------------------------------------------------------


@dataclass
class ThetaEstimate:
    """Sampled upper bound for the sharp theta(n, m); value = min of the parts."""

    part_a: float
    part_b: float | None
    samples_used: int
    discarded: int

    @property
    def value(self) -> float:
        if self.part_b is None:
            return self.part_a
        return min(self.part_a, self.part_b)


def _theta_battery(idx: ConeIndex, budget: int, seed: int) -> np.ndarray:
    """Sample battery: generator mix plus deterministic stress points.

    The symmetric point is the known minimizer of the part-a ratio at m = 1,
    so it is always included; boundary-biased points stress the small-S_m
    regime where the ratios degrade.
    """
    thirds = [budget // 3, budget // 3, budget - 2 * (budget // 3)]
    parts = []
    for gen, cnt, sub in zip(
        ("shifted-gaussian", "boundary-biased", "dirichlet-simplex"), thirds, (0, 1, 2)
    ):
        if cnt > 0:
            parts.append(sample_cone(idx, cnt, seed * 3 + sub, gen))
    parts.append(np.ones((1, idx.n)))
    return np.vstack(parts)


def estimate_theta_lemma21(
    idx: ConeIndex, budget: int, seed: int = 0, tol: float = DEFAULT_TOL
) -> ThetaEstimate:
    """Empirical infimum of lambda_j S_{m-1;j} / S_m over the cone (part a)
    and of lambda_i S_{m-2;im} / S_{m-1;m} (part b), over sampled points.

    Denominators are expanded as lambda_j S_{m-1;j} + S_{m;j} so that the
    identity case m = n gives exactly 1.0.  Samples whose denominator falls
    below the cancellation guard are discarded, never fatal.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    n, m = idx.n, idx.m
    pts = np.sort(_theta_battery(idx, budget, seed), axis=1)[:, ::-1]
    abs_pts = np.abs(pts)

    part_a = math.inf
    discarded = 0
    for j in range(1, m + 1):
        s_j = _restricted_all(pts, m, (j - 1,))
        scale_j = _restricted_all(abs_pts, m, (j - 1,))
        num = pts[:, j - 1] * s_j[:, m - 1]
        den = num + s_j[:, m]
        den_scale = abs_pts[:, j - 1] * scale_j[:, m - 1] + scale_j[:, m]
        good = den > tol * den_scale
        discarded += int((~good).sum())
        if good.any():
            part_a = min(part_a, float(np.min(num[good] / den[good])))

    part_b: float | None = None
    if m >= 2:
        part_b = math.inf
        for i in range(1, m):
            cols = tuple({i - 1, m - 1})
            s_im = _restricted_all(pts, m, cols)
            scale_im = _restricted_all(abs_pts, m, cols)
            num = pts[:, i - 1] * s_im[:, m - 2]
            den = num + s_im[:, m - 1]
            den_scale = abs_pts[:, i - 1] * scale_im[:, m - 2] + scale_im[:, m - 1]
            good = den > tol * den_scale
            discarded += int((~good).sum())
            if good.any():
                part_b = min(part_b, float(np.min(num[good] / den[good])))
        if math.isinf(part_b):
            part_b = None

    est = ThetaEstimate(part_a, part_b, pts.shape[0], discarded)
    if est.value <= 0:
        raise RuntimeError(f"theta estimate must be positive, got {est.value}")
    return est


def lin_trudinger_theta(idx: ConeIndex, budget: int, seed: int = 0) -> float:
    """Empirical best theta with S_{m-1;l} >= theta S_{m-1} for m <= l <= n."""
    n, m = idx.n, idx.m
    pts = np.sort(_theta_battery(idx, budget, seed), axis=1)[:, ::-1]
    s_full = elem_sym_all(pts, m - 1)[:, m - 1]
    best = math.inf
    for ell in range(m, n + 1):
        s_l = _restricted_all(pts, m - 1, (ell - 1,))[:, m - 1]
        good = s_full > 0
        if good.any():
            best = min(best, float(np.min(s_l[good] / s_full[good])))
    return best


# ---------------------------------------------------------------------------
# batched fuzzing of all inequalities
# ---------------------------------------------------------------------------


@dataclass
class FuzzReport:
    """Violation counts and worst normalized slacks for the inequality battery."""

    idx: ConeIndex
    samples: int
    violations: dict[str, int]
    worst_slack: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(v == 0 for v in self.violations.values())

    def as_dict(self) -> dict:
        return {
            "n": self.idx.n,
            "m": self.idx.m,
            "samples": self.samples,
            "passed": self.passed,
            "violations": dict(self.violations),
            "worst_slack": dict(self.worst_slack),
        }


def _fuzz_chunk(pts: np.ndarray, idx: ConeIndex, tol: float, rep: FuzzReport) -> None:
    """Vectorized inequality battery on a sorted-decreasing chunk of samples."""
    n, m = idx.n, idx.m
    tiny = np.finfo(float).tiny
    abs_pts = np.abs(pts)

    def tally(name: str, slack: np.ndarray, scale: np.ndarray) -> None:
        norm = slack / np.maximum(scale, tiny)
        rep.worst_slack[name] = min(rep.worst_slack.get(name, math.inf), float(norm.min()))
        rep.violations[name] = rep.violations.get(name, 0) + int(
            (slack < -(tol * scale + _ABS_FLOOR)).sum()
        )

    # (i) lambda_m > 0
    tally("lambda_m_positive", pts[:, m - 1], abs_pts.max(axis=1))

    # (ii) restricted positivity, all k + t <= m
    for t in range(0, m):
        for subset in combinations(range(n), t):
            s = _restricted_all(pts, m - t, subset)
            scale = _restricted_all(abs_pts, m - t, subset)
            for k in range(1, m - t + 1):
                tally("restricted_positive", s[:, k], scale[:, k])

    # (iii) S_{k-1} >= lambda_1 ... lambda_{k-1}
    s_full = elem_sym_all(pts, m)
    scale_full = elem_sym_all(abs_pts, m)
    prod = np.ones(pts.shape[0])
    for k in range(1, m + 1):
        tally("prefix_product_bound", s_full[:, k - 1] - prod, scale_full[:, k - 1] + np.abs(prod))
        prod = prod * pts[:, k - 1]

    # (iv) smallest sum of (n - m + 1) entries
    tally(
        "partial_sum_positive",
        pts[:, m - 1 :].sum(axis=1),
        abs_pts[:, m - 1 :].sum(axis=1),
    )

    # product bound with explicit constant sqrt(2 / (1 - c_m))
    cm = c_m_constant(idx)
    const = math.sqrt(2.0 / (1.0 - cm))
    prefix = np.cumprod(pts[:, :m], axis=1)
    s_m1 = s_full[:, m - 1]
    for i in range(1, m):
        left = prefix[:, m - 1] / pts[:, i - 1]
        s_i = _restricted_all(pts, m - 1, (i - 1,))[:, m - 1]
        right = const * np.sqrt(np.maximum(s_i, 0.0) * np.maximum(s_m1, 0.0))
        tally("product_bound", right - left, np.abs(left) + np.abs(right))

    # quadratic bound and its Newton instance
    cols = tuple({0, m - 1})
    s1m = _restricted_all(pts, m, cols)
    scale1m = _restricted_all(abs_pts, m, cols)
    sm = _restricted_all(pts, m - 1, (m - 1,))[:, m - 1]
    s1 = _restricted_all(pts, m - 1, (0,))[:, m - 1]
    sm_scale = _restricted_all(abs_pts, m - 1, (m - 1,))[:, m - 1]
    s1_scale = _restricted_all(abs_pts, m - 1, (0,))[:, m - 1]
    left = s1m[:, m - 1] ** 2
    right = sm * s1 / (1.0 - cm)
    tally("key_quadratic", right - left, scale1m[:, m - 1] ** 2 + sm_scale * s1_scale / (1.0 - cm))
    if m >= 2:
        newton_left = s1m[:, m] * s1m[:, m - 2]
        newton_right = cm * s1m[:, m - 1] ** 2
        tally(
            "newton",
            newton_right - newton_left,
            scale1m[:, m] * scale1m[:, m - 2] + cm * scale1m[:, m - 1] ** 2,
        )


def fuzz_cone_inequalities(
    idx: ConeIndex,
    samples: int,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    generator: Generator = "boundary-biased",
    chunk: int = 250_000,
) -> FuzzReport:
    """Run the whole inequality battery on ``samples`` cone points.

    Sampling and checking are chunked so that memory stays flat; seeds are
    partitioned per chunk, so any chunking gives the same sample set.
    """
    rep = FuzzReport(idx, samples, {}, {})
    done = 0
    part = 0
    while done < samples:
        take = min(chunk, samples - done)
        pts = sample_cone(idx, take, seed * 1009 + part, generator)
        pts = np.sort(pts, axis=1)[:, ::-1]
        _fuzz_chunk(pts, idx, tol, rep)
        done += take
        part += 1
    return rep
