"""Performance metrics: meta-level aggregates, transfer/generalization
indices, the Wilcoxon rank-sum marking used in result tables, and the four
multi-objective indicators (GD, IGD, Spacing, HV).

All functions are pure.  Raw stored values follow the minimization
convention; the higher-is-better ``perf = -v_avg`` flip happens only inside
the transfer and generalization indices, mirroring how the result tables
are read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    DimensionError,
    EmptyInputError,
    IncompleteTableError,
    InsufficientDataError,
    UnsupportedDimensionError,
)

DEFAULT_ALPHA = 0.05
EXACT_LIMIT = 8  # exact rank-sum null up to (8, 8)


# -- meta-level aggregates -------------------------------------------------


def aggregate_meta(perfs: Sequence[float]) -> tuple[float, float, float]:
    """(average, best, worst) under the higher-is-better convention."""
    if len(perfs) == 0:
        raise EmptyInputError("aggregate_meta needs at least one value")
    arr = np.asarray(perfs, dtype=float)
    return float(arr.mean()), float(arr.max()), float(arr.min())


def meta_objective(perf_per_problem: Sequence[float]) -> float:
    """Empirical mean estimator of expected performance over problems."""
    if len(perf_per_problem) == 0:
        raise EmptyInputError("meta_objective needs at least one value")
    return float(np.mean(np.asarray(perf_per_problem, dtype=float)))


# -- performance table and indices -------------------------------------------


@dataclass(frozen=True)
class PerfRow:
    function_id: int
    dim: int
    values: tuple[float, ...]
    membership: str  # "seen" | "unseen"

    @property
    def v_avg(self) -> float:
        return float(np.mean(self.values))

    @property
    def v_std(self) -> float:
        return float(np.std(self.values, ddof=1)) if len(self.values) > 1 else 0.0

    @property
    def perf(self) -> float:
        return -self.v_avg


@dataclass(frozen=True)
class PerformanceTable:
    rows: tuple[PerfRow, ...]

    def group(self, membership: str) -> list[PerfRow]:
        return [r for r in self.rows if r.membership == membership]


def transferability_index(table: PerformanceTable) -> float:
    """(mean perf on unseen - mean perf on seen) / mean perf on seen."""
    seen = [r.perf for r in table.group("seen")]
    unseen = [r.perf for r in table.group("unseen")]
    if not seen or not unseen:
        raise EmptyInputError("both seen and unseen groups must be non-empty")
    mean_s = float(np.mean(seen))
    mean_u = float(np.mean(unseen))
    if mean_s == 0.0:
        raise DegenerateInputError("seen-group mean performance is zero")
    return (mean_u - mean_s) / mean_s


def generalization_index(
    delta: Mapping[tuple[int, int], float],
    train_dim: int,
    diff_dims: Sequence[int],
    seen: Iterable[int],
) -> float:
    """Mean cross-dimension shift of the algorithm-minus-baseline difference.

    ``delta[(i, j)]`` is the performance difference on problem ``i`` at
    dimension ``j`` between the tested algorithm and the baseline.
    """
    seen = tuple(seen)
    diff_dims = tuple(diff_dims)
    if not diff_dims:
        raise EmptyInputError("diff_dims must be non-empty")
    if not seen:
        raise EmptyInputError("seen set must be non-empty")
    for i in seen:
        for j in (*diff_dims, train_dim):
            if (i, j) not in delta:
                raise IncompleteTableError(f"missing delta entry for ({i}, {j})")
    per_dim = [
        np.mean([delta[(i, j)] - delta[(i, train_dim)] for i in seen])
        for j in diff_dims
    ]
    return float(np.mean(per_dim))


# -- Wilcoxon rank-sum with +/-/= marking -------------------------------------


@dataclass(frozen=True)
class ComparisonMark:
    symbol: str  # "+", "-", "="
    p_value: float


def _midranks(pooled: np.ndarray) -> np.ndarray:
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(len(pooled))
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_two_sided_p(ranks2: np.ndarray, n: int, w2_obs: int) -> float:
    """P(|W - mu| >= |w_obs - mu|) over all n-subsets, via integer DP.

    ``ranks2`` are doubled midranks (integers), so every comparison is exact
    integer arithmetic.
    """
    total = int(np.sum(ranks2))
    big_n = len(ranks2)
    max_sum = total
    # counts[k][s] = number of k-subsets with doubled-rank sum s
    counts = np.zeros((n + 1, max_sum + 1), dtype=np.int64)
    counts[0][0] = 1
    for w in ranks2:
        w = int(w)
        for k in range(min(n, big_n), 0, -1):
            counts[k, w:] += counts[k - 1, : max_sum + 1 - w]
    # compare |N*W2 - n*T2| with the observed value, all integers
    obs = abs(big_n * w2_obs - n * total)
    favorable = 0
    total_subsets = 0
    for s in range(max_sum + 1):
        c = int(counts[n, s])
        if c == 0:
            continue
        total_subsets += c
        if abs(big_n * s - n * total) >= obs:
            favorable += c
    return favorable / total_subsets


def _normal_two_sided_p(ranks: np.ndarray, n: int, m: int, w_obs: float) -> float:
    big_n = n + m
    mu = n * (big_n + 1) / 2.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (big_n * (big_n - 1))
    var = n * m / 12.0 * ((big_n + 1) - tie_term)
    if var <= 0.0:
        return 1.0
    z = max(abs(w_obs - mu) - 0.5, 0.0) / math.sqrt(var)  # continuity corrected
    return math.erfc(z / math.sqrt(2.0))


def wilcoxon_ranksum(
    a: Sequence[float], b: Sequence[float], alpha: float = DEFAULT_ALPHA
) -> ComparisonMark:
    """Two-sided rank-sum test with midranks; marks a vs b for minimization.

    Exact null by enumeration when both samples have at most eight values,
    tie- and continuity-corrected normal approximation otherwise.  "+" means
    ``a`` is significantly better (lower), "-" significantly worse.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise InsufficientDataError("both samples need at least two values")
    n, m = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    w_obs = float(np.sum(ranks[:n]))
    if n <= EXACT_LIMIT and m <= EXACT_LIMIT:
        ranks2 = np.rint(2.0 * ranks).astype(np.int64)
        p = _exact_two_sided_p(ranks2, n, int(round(2.0 * w_obs)))
    else:
        p = _normal_two_sided_p(ranks, n, m, w_obs)
    p = float(min(max(p, 0.0), 1.0))
    if p >= alpha:
        return ComparisonMark("=", p)
    direction = float(np.mean(a) - np.mean(b))
    if direction == 0.0:
        direction = w_obs - n * (n + m + 1) / 2.0
    return ComparisonMark("+" if direction < 0.0 else "-", p)


# -- multi-objective indicators -----------------------------------------------


def _as_front(points, name: str) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        raise EmptyInputError(f"{name} must be non-empty")
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a set of objective vectors")
    return arr


def _min_dists(from_pts: np.ndarray, to_pts: np.ndarray) -> np.ndarray:
    diff = from_pts[:, None, :] - to_pts[None, :, :]
    return np.sqrt(np.sum(diff**2, axis=-1)).min(axis=1)


def gd(approx, ref_front) -> float:
    """Mean distance from each obtained point to its nearest reference point."""
    a = _as_front(approx, "approx")
    r = _as_front(ref_front, "ref_front")
    if a.shape[1] != r.shape[1]:
        raise DimensionError("objective dimensions differ")
    return float(np.mean(_min_dists(a, r)))


def igd(approx, ref_front) -> float:
    """Mean distance from each reference point to its nearest obtained point."""
    a = _as_front(approx, "approx")
    r = _as_front(ref_front, "ref_front")
    if a.shape[1] != r.shape[1]:
        raise DimensionError("objective dimensions differ")
    return float(np.mean(_min_dists(r, a)))


def spacing(approx) -> float:
    """Schott spacing; zero for a single point by convention."""
    a = _as_front(approx, "approx")
    n = a.shape[0]
    if n == 1:
        return 0.0
    diff = a[:, None, :] - a[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=-1))
    np.fill_diagonal(dist, np.inf)
    d = dist.min(axis=1)
    return float(np.sqrt(np.sum((d.mean() - d) ** 2) / (n - 1)))


def _hv2d(points: np.ndarray, ref: np.ndarray) -> float:
    order = np.lexsort((points[:, 1], points[:, 0]))
    best_y = ref[1]
    vol = 0.0
    for x, y in points[order]:
        if y < best_y:
            vol += (ref[0] - x) * (best_y - y)
            best_y = y
    return vol


def hypervolume(approx, ref_point) -> float:
    """Exact dominated hypervolume for 2 or 3 objectives.

    Points that do not strictly dominate the reference point contribute
    nothing.
    """
    a = _as_front(approx, "approx")
    ref = np.asarray(ref_point, dtype=float)
    if ref.shape != (a.shape[1],):
        raise DimensionError("reference point dimension mismatch")
    n_obj = a.shape[1]
    if n_obj not in (2, 3):
        raise UnsupportedDimensionError("hypervolume supports 2 or 3 objectives")
    dom = a[np.all(a < ref, axis=1)]
    if dom.shape[0] == 0:
        return 0.0
    if n_obj == 2:
        return float(_hv2d(dom, ref))
    # slice along the third objective
    zs = np.unique(dom[:, 2])
    vol = 0.0
    for k, z in enumerate(zs):
        top = zs[k + 1] if k + 1 < len(zs) else ref[2]
        layer = dom[dom[:, 2] <= z][:, :2]
        vol += _hv2d(layer, ref[:2]) * (top - z)
    return float(vol)
