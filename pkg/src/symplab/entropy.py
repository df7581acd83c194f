"""Topological entropy estimation by separated-orbit counts.

Two length-n orbits are eps-distinct when some iterate 0 <= j <= n takes
them further than eps apart (chart metric).  ``count_separated`` packs a
seeded low-discrepancy sample greedily: points are taken in stream order
and accepted when eps-distinct from every accepted orbit.  The greedy
result is computed as the lexicographically-first maximal independent set
of the exact conflict graph, which is identical to the sequential greedy
pass but runs in near-linear time: candidate pairs are prefiltered with a
periodic k-d tree on a few probe iterates (a pair conflicting over the full
orbit is necessarily close at every probe time), then checked exactly.

Counts are lower bounds for the true maximal packing r(n, eps): greedy
packings are maximal rather than maximum, and sampling can miss thin
invariant sets.  The growth-rate fit tolerates the bounded multiplicative
defect because it differentiates log counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .maps import PlanarMap, orbit_batch
from .periodic import PeriodicCatalog, sum_positive_exponents, s_n as catalog_s_n

SATURATION_FRACTION = 0.9
# counts above this fill fraction are excluded from growth fits: greedy
# counts lag the true packing increasingly as they approach the sample size
FILL_CAP = 0.3
FIT_RESIDUAL_MAX = 0.05
_MIN_WINDOW = 3
_BRUTE_FORCE_LIMIT = 2000


class SaturationError(RuntimeError):
    """Counts saturated at the sample size for every eps; enlarge samples."""


# -- core packing ---------------------------------------------------------------
#
# Conflict pairs (orbits within eps at every iterate 0..n) are found once at
# the smallest orbit length by a grid join: points are bucketed by their
# cells at times 0 and n, a conflict pair must occupy adjacent cells, and
# each adjacency offset is processed as a vectorized bucket join whose
# output is filtered exactly (time 0, time n, midpoint, then the remaining
# iterates; spurious bucket neighbors die in the first checks).  Conflict
# graphs are nested in n, so longer-orbit graphs are obtained by filtering
# the pair list with each added iterate, which keeps every count exact at a
# fraction of the join cost.


def _axis_displacement(vals_a, vals_b, period):
    d = vals_a - vals_b
    if period is not None:
        d = np.abs(d)
        d = np.minimum(np.mod(d, period), period - np.mod(d, period))
    return np.abs(d)


def _filter_at_time(orbits, topology, eps, ii, jj, t):
    """Keep only pairs within eps (chart metric) at iterate t."""
    if len(ii) == 0:
        return ii, jj
    keep = None
    for axis, period in enumerate(topology.periods):
        col = orbits[:, t, axis]
        d = _axis_displacement(col[ii], col[jj], period)
        k = d <= eps
        keep = k if keep is None else (keep & k)
        if not keep.any():
            break
        if axis == 0 and not keep.all():
            ii, jj, keep = ii[keep], jj[keep], None
    if keep is not None:
        ii, jj = ii[keep], jj[keep]
    return ii, jj


def _exact_conflicts(orbits, topology, n, eps, ii, jj):
    """Exact Bowen check for candidate index pairs; returns surviving (i, j)."""
    checked = []
    for t in [0, n, (n + 1) // 2] + list(range(1, n)):
        if t in checked or t > n:
            continue
        checked.append(t)
        ii, jj = _filter_at_time(orbits, topology, eps, ii, jj, t)
        if len(ii) == 0:
            break
    return np.column_stack([ii, jj])


def _probe_cells(orbits, topology, times, eps):
    """Integer cell coordinates per probe axis, plus cell counts and wrap flags."""
    S = orbits.shape[0]
    d = 2 * len(times)
    cells = np.empty((S, d), dtype=np.int64)
    ncells = np.empty(d, dtype=np.int64)
    wraps = np.empty(d, dtype=bool)
    col = 0
    for t in times:
        for axis, period in enumerate(topology.periods):
            vals = orbits[:, t, axis]
            if period is not None:
                nc = int(period / eps)
                if nc < 3:
                    nc = 1  # grid uninformative; single cell
                width = period / nc
                cells[:, col] = np.minimum((np.mod(vals, period) / width).astype(np.int64), nc - 1)
                ncells[col] = nc
                wraps[col] = True
            else:
                lo = vals.min()
                cells[:, col] = ((vals - lo) / eps).astype(np.int64)
                ncells[col] = cells[:, col].max() + 1
                wraps[col] = False
            col += 1
    return cells, ncells, wraps


def _gather_ranges(order, left, count):
    """Concatenate order[left[k] : left[k]+count[k]] for all k, vectorized."""
    total = int(count.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    src = np.repeat(np.arange(len(count)), count)
    starts = np.repeat(left, count)
    within = np.arange(total) - np.repeat(np.cumsum(count) - count, count)
    return src, order[starts + within]


def _join_blocks(order, left, count, src_ids, limit=4_000_000):
    """Yield (src, tgt) index blocks with bounded block size."""
    cum = np.cumsum(count)
    total = int(cum[-1]) if len(cum) else 0
    if total == 0:
        return
    cuts = np.searchsorted(cum, np.arange(limit, total, limit)) + 1
    bounds = np.concatenate([[0], cuts, [len(count)]])
    for a, b in zip(bounds[:-1], bounds[1:]):
        if a >= b:
            continue
        src, tgt = _gather_ranges(order, left[a:b], count[a:b])
        yield src_ids[a + src], tgt


def _mid_cell_filter(midcells, nmid, wraps, ii, jj):
    """Integer prefilter: keep pairs whose mid-iterate cells are adjacent."""
    if len(ii) == 0:
        return ii, jj
    keep = None
    for axis in range(2):
        if nmid[axis] < 3:
            continue
        d = np.abs(midcells[ii, axis] - midcells[jj, axis])
        adj = d <= 1
        if wraps[axis]:
            adj |= d == nmid[axis] - 1
        keep = adj if keep is None else (keep & adj)
    if keep is None:
        return ii, jj
    return ii[keep], jj[keep]


def _conflict_pairs(orbits: np.ndarray, topology, n: int, eps: float) -> np.ndarray:
    """Exact Bowen-conflict pairs (max distance over 0..n at most eps)."""
    S = orbits.shape[0]
    if S <= _BRUTE_FORCE_LIMIT:
        ii, jj = np.triu_indices(S, k=1)
        return _exact_conflicts(orbits, topology, n, eps, ii, jj)

    times = sorted({0, n})
    cells, ncells, wraps = _probe_cells(orbits, topology, times, eps)
    dims = cells.shape[1]
    mid = (n + 1) // 2
    midcells, nmid, midwraps = _probe_cells(orbits, topology, [mid], eps)
    key = np.ravel_multi_index(cells.T, ncells)
    order = np.argsort(key, kind="stable")
    ks = key[order]

    def refine(src, tgt):
        src, tgt = _mid_cell_filter(midcells, nmid, midwraps, src, tgt)
        return _exact_conflicts(orbits, topology, n, eps, src, tgt)

    found = []
    all_ids = np.arange(S)
    # within-cell pairs: for each point, later points of the same cell
    right = np.searchsorted(ks, key, side="right")
    pos = np.empty(S, dtype=np.int64)
    pos[order] = np.arange(S)
    for src, tgt in _join_blocks(order, pos + 1, right - (pos + 1), all_ids):
        found.append(refine(src, tgt))

    # adjacent-cell pairs, one canonical offset direction per cell pair
    offsets = [o for o in product((0, 1, -1), repeat=dims)
               if any(o) and o > tuple([0] * dims)]
    for off in offsets:
        target = cells + np.asarray(off, dtype=np.int64)
        valid = np.ones(S, dtype=bool)
        for c in range(dims):
            if off[c] == 0:
                continue
            if ncells[c] == 1:
                valid &= False  # single cell already covered by the zero offset
            elif wraps[c]:
                target[:, c] %= ncells[c]
            else:
                valid &= (target[:, c] >= 0) & (target[:, c] < ncells[c])
        if not valid.any():
            continue
        ids = np.flatnonzero(valid)
        tkey = np.ravel_multi_index(target[ids].T, ncells, mode="wrap")
        lo = np.searchsorted(ks, tkey)
        hi = np.searchsorted(ks, tkey, side="right")
        for src, tgt in _join_blocks(order, lo, hi - lo, ids):
            found.append(refine(src, tgt))
    pairs = np.vstack([f for f in found if len(f)]) if any(len(f) for f in found) \
        else np.empty((0, 2), dtype=np.int64)
    return pairs


def _greedy_from_pairs(n_candidates: int, pairs: np.ndarray) -> int:
    """Size of the first-come greedy packing given the conflict pairs."""
    if len(pairs) == 0:
        return n_candidates
    lo = pairs.min(axis=1)
    hi = pairs.max(axis=1)
    order = np.lexsort((lo, hi))
    lo, hi = lo[order], hi[order]
    accepted = np.ones(n_candidates, dtype=bool)
    starts = np.searchsorted(hi, np.arange(n_candidates))
    ends = np.searchsorted(hi, np.arange(n_candidates), side="right")
    for v in np.unique(hi):
        if accepted[lo[starts[v]:ends[v]]].any():
            accepted[v] = False
    return int(np.sum(accepted))


def count_separated(m: PlanarMap, n: int, eps: float, samples: int, seed: int,
                    _orbits: np.ndarray | None = None) -> int:
    """Greedy maximal (n, eps)-separated count over a seeded Halton sample."""
    if n < 1 or eps <= 0 or samples < 1:
        raise ValueError("require n >= 1, eps > 0, samples >= 1")
    if _orbits is None:
        starts = m.topology.halton(samples, seed)
        _orbits = orbit_batch(m, starts, n)
    pairs = _conflict_pairs(_orbits, m.topology, n, eps)
    return _greedy_from_pairs(_orbits.shape[0], pairs)


# -- tables and estimates ---------------------------------------------------------


@dataclass(frozen=True)
class SeparatedCountTable:
    """Counts over a (n, eps) grid; monotonicity is asserted on construction."""

    map_name: str
    seed: int
    samples: int
    n_values: tuple
    eps_values: tuple
    counts: np.ndarray  # shape (len(n_values), len(eps_values))

    def __post_init__(self):
        c = self.counts
        if np.any(c < 1):
            raise AssertionError("separated count fell below 1 on a nonempty sample")
        if np.any(np.diff(c, axis=0) < 0):
            raise AssertionError("count failed monotonicity in n (longer orbits separate at least as well)")
        # eps_values is decreasing, so counts must be nondecreasing along axis 1
        if np.any(np.diff(c, axis=1) < 0):
            raise AssertionError("count failed monotonicity in eps (Bowen-ball nesting)")

    def count(self, n: int, eps: float) -> int:
        i = self.n_values.index(n)
        j = self.eps_values.index(eps)
        return int(self.counts[i, j])

    def saturated(self, i: int, j: int) -> bool:
        return self.counts[i, j] > SATURATION_FRACTION * self.samples

    def to_csv(self) -> str:
        lines = ["n,eps,count,samples"]
        for i, n in enumerate(self.n_values):
            for j, e in enumerate(self.eps_values):
                lines.append(f"{n},{e:.12g},{int(self.counts[i, j])},{self.samples}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EntropyEstimate:
    """Fitted growth rate of log separated counts, with per-eps diagnostics."""

    value: float
    slopes: tuple          # dicts: eps, slope, residual, window (n_lo, n_hi)
    warnings: tuple
    table: SeparatedCountTable

    def to_jsonable(self) -> dict:
        return {
            "value": self.value,
            "slopes": [dict(s) for s in self.slopes],
            "warnings": list(self.warnings),
            "n_values": list(self.table.n_values),
            "eps_values": list(self.table.eps_values),
            "samples": self.table.samples,
            "seed": self.table.seed,
        }


@dataclass(frozen=True)
class EntropySchedule:
    n_values: tuple
    eps_values: tuple
    samples: int
    seed: int

    def __post_init__(self):
        if len(self.n_values) < 4:
            raise ValueError("schedule needs at least 4 orbit lengths")
        if list(self.eps_values) != sorted(self.eps_values, reverse=True):
            raise ValueError("eps list must be decreasing")


def count_table(m: PlanarMap, schedule: EntropySchedule) -> SeparatedCountTable:
    """Counts for the full schedule grid, sharing one orbit precomputation.

    Per eps the conflict graph is built once at the smallest n and then
    refined by the added iterates (graphs are nested in n), so every count
    equals the direct greedy result.
    """
    n_values = tuple(sorted(schedule.n_values))
    eps_values = tuple(schedule.eps_values)
    n_max = n_values[-1]
    starts = m.topology.halton(schedule.samples, schedule.seed)
    orbits = orbit_batch(m, starts, n_max)
    S = orbits.shape[0]
    counts = np.empty((len(n_values), len(eps_values)), dtype=int)
    for j, eps in enumerate(eps_values):
        pairs = _conflict_pairs(orbits, m.topology, n_values[0], eps)
        prev_n = n_values[0]
        for i, n in enumerate(n_values):
            for t in range(prev_n + 1, n + 1):
                ii, jj = _filter_at_time(orbits, m.topology, eps,
                                         pairs[:, 0], pairs[:, 1], t)
                pairs = np.column_stack([ii, jj])
            prev_n = n
            counts[i, j] = _greedy_from_pairs(S, pairs)
    return SeparatedCountTable(map_name=m.spec_string(), seed=schedule.seed,
                               samples=schedule.samples, n_values=n_values,
                               eps_values=eps_values, counts=counts)


def _fit_window(ns: np.ndarray, logs: np.ndarray):
    """Largest contiguous window passing the residual gate; ties take the
    latest start.

    Entries above the fill cap were already excluded by the caller, so the
    remaining counts are in the growth regime; within it, later windows sit
    closer to the n -> infinity limit (subexponential growth flattens,
    exponential growth is window-independent).
    """
    best = None
    for length in range(len(ns), _MIN_WINDOW - 1, -1):
        for start in range(0, len(ns) - length + 1):
            x = ns[start:start + length]
            y = logs[start:start + length]
            slope, intercept = np.polyfit(x, y, 1)
            rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
            if rms < FIT_RESIDUAL_MAX:
                cand = (length, start, -rms, float(slope), (int(x[0]), int(x[-1])))
                if best is None or cand > best:
                    best = cand
        if best is not None:
            break  # longer windows take precedence
    if best is None:
        return None
    return {"slope": best[3], "residual": -best[2], "window": best[4]}


def estimate_entropy(m: PlanarMap, schedule: EntropySchedule) -> EntropyEstimate:
    """Growth rate of log count vs n, maximized over the eps list.

    Saturated entries (count above 0.9 * samples) are excluded from the fit
    and reported as warnings; the estimate errors out only when no eps
    retains a fittable window.
    """
    table = count_table(m, schedule)
    slopes = []
    warnings = []
    for j, eps in enumerate(table.eps_values):
        ns = np.array(table.n_values, dtype=float)
        logs = np.log(table.counts[:, j].astype(float))
        saturated = np.array([table.saturated(i, j) for i in range(len(ns))])
        if saturated.any():
            warnings.append(f"eps={eps:g}: counts saturated at n >= {int(ns[saturated][0])} "
                            f"(> {SATURATION_FRACTION:g} * samples)")
        keep = table.counts[:, j] <= FILL_CAP * table.samples
        if keep.sum() < _MIN_WINDOW:
            warnings.append(f"eps={eps:g}: fewer than {_MIN_WINDOW} lengths below the "
                            f"fill cap ({FILL_CAP:g} * samples); skipped")
            continue
        fit = _fit_window(ns[keep], logs[keep])
        if fit is None:
            warnings.append(f"eps={eps:g}: no contiguous window with residual < {FIT_RESIDUAL_MAX}")
            continue
        fit["eps"] = eps
        slopes.append(fit)
    if not slopes:
        raise SaturationError("no eps retained a fittable growth window; enlarge samples")
    value = max(0.0, max(s["slope"] for s in slopes))
    ordered = tuple({"eps": s["eps"], "slope": s["slope"], "residual": s["residual"],
                     "window": s["window"]} for s in slopes)
    return EntropyEstimate(value=value, slopes=ordered, warnings=tuple(warnings), table=table)


# -- closed forms and bound checks -----------------------------------------------


def shift_entropy(n_symbols: int, return_time: int) -> float:
    """Entropy (log N) / t of a full N-shift traversed once per t steps."""
    if n_symbols < 2 or return_time < 1:
        raise ValueError("require N >= 2 symbols and return time t >= 1")
    return float(np.log(n_symbols) / return_time)


@dataclass(frozen=True)
class BoundReport:
    """Comparison of an entropy estimate with the periodic-exponent bound."""

    h_value: float
    bound: float | None      # max over cataloged hyperbolic orbits of sum of chi+
    s_value: float | None    # same max (dimension 2), the s_n functional
    tolerance: float
    violated: bool | None    # None when the check was skipped
    equality_gap: float | None
    skipped: bool
    note: str = ""

    def to_jsonable(self) -> dict:
        return {k: getattr(self, k) for k in
                ("h_value", "bound", "s_value", "tolerance", "violated",
                 "equality_gap", "skipped", "note")}


def check_entropy_bound(h_est: EntropyEstimate, catalog: PeriodicCatalog,
                        tolerance: float = 0.1) -> BoundReport:
    """Check h <= max (sum of positive exponents) + tolerance over the catalog.

    Also reports |h - s_n| for the entropy-equals-exponent comparison.  With
    no hyperbolic orbit in the catalog, the check is skipped with a marker.
    """
    hyp = catalog.hyperbolic()
    if not hyp:
        return BoundReport(h_value=h_est.value, bound=None, s_value=None,
                           tolerance=tolerance, violated=None, equality_gap=None,
                           skipped=True, note="no hyperbolic orbit found")
    bound = max(sum_positive_exponents(o) for o in hyp)
    s_val = catalog_s_n(catalog)
    return BoundReport(h_value=h_est.value, bound=bound, s_value=s_val,
                       tolerance=tolerance,
                       violated=bool(h_est.value > bound + tolerance),
                       equality_gap=abs(h_est.value - s_val), skipped=False)
