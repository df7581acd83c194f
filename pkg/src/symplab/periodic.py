"""Periodic orbit search, hyperbolicity classification and exponent functionals.

Orbits are found by Newton iteration on G(x) = f^m(x) - x from a seed grid.
The iteration runs in the universal cover: the defect f^m(x) - x is reduced
modulo the lattice to its nearest representative before each step, which
avoids spurious non-convergence across the fundamental-domain seam.

For a hyperbolic orbit of minimal period tau the exponent

    chi = (1/tau) * log |expanding multiplier|

is the orbit's (unique, in dimension 2) positive Lyapunov exponent, and
s_n is its maximum over all cataloged hyperbolic orbits of period <= n.
The catalog is a lower approximation of the true period-<=n set, so s_n
computed from it is a lower bound.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .maps import PlanarMap

HYPERBOLIC = "hyperbolic"
ELLIPTIC = "elliptic"
PARABOLIC = "parabolic"

# |trace| within this band of 2 is reported as parabolic rather than being
# silently classified either way.
PARABOLIC_BAND = 1e-9

_NEWTON_MAX_ITER = 80
# polish to the machine floor: orbit-level residuals are amplified by the
# orbit's expanding multiplier, which can reach ~1e4 for short chaotic orbits
_NEWTON_TARGET = 2e-15
_SINGULAR_TOL = 1e-12
_DIVERGE_SCALE = 1e6


class NonHyperbolicError(ValueError):
    """Exponent requested for an orbit without an expanding multiplier."""


class NotPeriodicError(ValueError):
    """classify() received points that are not a periodic orbit at tolerance."""


@dataclass(frozen=True)
class PeriodicOrbit:
    """A periodic orbit with multipliers of Df^tau and stability data."""

    points: np.ndarray          # (tau, 2), wrapped, canonical representative first
    tau: int
    multipliers: np.ndarray     # (2,) complex, product = det Df^tau (~1)
    trace: float
    stability: str
    chi: float | None           # defined only when hyperbolic
    residual: float
    map: PlanarMap

    @property
    def is_hyperbolic(self) -> bool:
        return self.stability == HYPERBOLIC

    def representative(self) -> np.ndarray:
        return self.points[0]


@dataclass
class PeriodicCatalog:
    """Deduplicated orbits of period <= max_period plus search diagnostics."""

    map: PlanarMap
    max_period: int
    orbits: list
    diagnostics: dict = field(default_factory=dict)

    def hyperbolic(self) -> list:
        return [o for o in self.orbits if o.is_hyperbolic]

    def up_to_period(self, n: int) -> "PeriodicCatalog":
        if n > self.max_period:
            raise ValueError("catalog only extends to period %d" % self.max_period)
        return PeriodicCatalog(self.map, n, [o for o in self.orbits if o.tau <= n],
                               self.diagnostics)

    def point_count(self, tau: int | None = None) -> int:
        return sum(o.tau for o in self.orbits if tau is None or o.tau == tau)


def _dense_cocycle(m: PlanarMap, pts: np.ndarray, n: int, with_det: bool = False):
    """Df^n as a dense (..., 2, 2) product (periods here are short).

    With ``with_det`` the determinant is accumulated factor by factor,
    which stays accurate where the entry-based determinant cancels.
    """
    prod = np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()
    dets = np.ones(pts.shape[:-1])
    cur = np.array(pts, copy=True)
    for _ in range(n):
        J = m.jacobian_fn(cur)
        prod = J @ prod
        if with_det:
            dets = dets * (J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0])
        cur = m.topology.wrap(m.forward_fn(cur))
    return (prod, dets) if with_det else prod


def _iterate(m: PlanarMap, pts: np.ndarray, n: int) -> np.ndarray:
    cur = np.array(pts, copy=True)
    for _ in range(n):
        cur = m.topology.wrap(m.forward_fn(cur))
    return cur


def _domain_mask(m: PlanarMap, pts: np.ndarray) -> np.ndarray:
    """Seeds must stay strictly inside the chart (sphere chart: |z| < 1)."""
    if m.topology.kind == "sphere_chart":
        return np.abs(pts[:, 1]) < 0.999
    return np.ones(len(pts), dtype=bool)


def _newton_block(m: PlanarMap, seeds: np.ndarray, period: int,
                  max_iter: int = _NEWTON_MAX_ITER):
    """Vectorized Newton on f^period(x) - x; returns (roots, stats)."""
    top = m.topology
    x = top.wrap(seeds)
    active = np.ones(len(x), dtype=bool)
    stats = {"seeds": len(x), "singular": 0, "diverged": 0, "nonconverged": 0}
    roots = np.full_like(x, np.nan)
    for _ in range(max_iter):
        if not np.any(active):
            break
        xa = x[active]
        end = _iterate(m, xa, period)
        G = top.displacement(xa, end)
        res = np.max(np.abs(G), axis=-1)
        done = res < _NEWTON_TARGET
        idx = np.flatnonzero(active)
        if np.any(done):
            roots[idx[done]] = xa[done]
            active[idx[done]] = False
            keep = ~done
            if not np.any(keep):
                continue
            xa, G, idx = xa[keep], G[keep], idx[keep]
        J = _dense_cocycle(m, xa, period)
        J[..., 0, 0] -= 1.0
        J[..., 1, 1] -= 1.0
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        bad = np.abs(det) < _SINGULAR_TOL
        stats["singular"] += int(np.sum(bad))
        active[idx[bad]] = False
        ok = ~bad
        if not np.any(ok):
            continue
        xa, G, J, det, idx = xa[ok], G[ok], J[ok], det[ok], idx[ok]
        step = np.empty_like(G)
        step[..., 0] = (J[..., 1, 1] * G[..., 0] - J[..., 0, 1] * G[..., 1]) / det
        step[..., 1] = (-J[..., 1, 0] * G[..., 0] + J[..., 0, 0] * G[..., 1]) / det
        proposed = xa - step
        far = (np.max(np.abs(step), axis=-1) > _DIVERGE_SCALE) | ~_domain_mask(m, proposed)
        stats["diverged"] += int(np.sum(far))
        active[idx[far]] = False
        good = ~far
        x[idx[good]] = top.wrap(proposed[good])
    # seeds plateaued above the polish target still count when residual is tiny
    if np.any(active):
        xa = x[active]
        end = _iterate(m, xa, period)
        res = np.max(np.abs(top.displacement(xa, end)), axis=-1)
        ok = res < 1e-13
        idx = np.flatnonzero(active)
        roots[idx[ok]] = xa[ok]
        active[idx[ok]] = False
    stats["nonconverged"] += int(np.sum(active))
    out = roots[~np.isnan(roots[:, 0])]
    return out, stats


def _seed_grid(m: PlanarMap, grid: int) -> np.ndarray:
    axes = []
    for i, p in enumerate(m.topology.periods):
        if p is not None:
            axes.append(np.arange(grid) * (p / grid))
        else:
            lo, hi = m.topology.z_window
            axes.append(lo + (np.arange(grid) + 0.5) * (hi - lo) / grid)
    tt, zz = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.column_stack([tt.ravel(), zz.ravel()])


def _minimal_period(m: PlanarMap, x: np.ndarray, period: int, radius: float) -> int:
    for d in range(1, period):
        if period % d == 0:
            if m.topology.distance(_iterate(m, x, d), x) < radius:
                return d
    return period


def _orbit_residual(m: PlanarMap, pts: np.ndarray, tau: int) -> float:
    back = _iterate(m, pts, tau)
    return float(np.max(m.topology.distance(back, pts)))


def classify(m: PlanarMap, points: np.ndarray, tol: float = 1e-11) -> PeriodicOrbit:
    """Build a PeriodicOrbit from verified periodic points (minimal period first).

    ``points`` is (tau, 2): the orbit in dynamical order.  Raises
    NotPeriodicError when f^tau does not return each point within tol.
    """
    pts = m.topology.wrap(np.atleast_2d(np.asarray(points, dtype=float)))
    tau = len(pts)
    residual = _orbit_residual(m, pts, tau)
    if residual > tol:
        raise NotPeriodicError(f"points not {tau}-periodic: residual {residual:.3e} > {tol:.1e}")
    prod, det_tracked = _dense_cocycle(m, pts[0], tau, with_det=True)
    tr = float(prod[0, 0] + prod[1, 1])
    det = float(det_tracked)
    disc = complex(tr * tr - 4.0 * det)
    root = np.sqrt(disc)
    mult = np.array([(tr + root) / 2.0, (tr - root) / 2.0])
    band = abs(abs(tr) - 2.0)
    if band < PARABOLIC_BAND:
        stability = PARABOLIC
    elif abs(tr) > 2.0:
        stability = HYPERBOLIC
    else:
        stability = ELLIPTIC
    chi_val = None
    if stability == HYPERBOLIC:
        chi_val = float(np.log(np.max(np.abs(mult))) / tau)
    # rotate the orbit so the lexicographically smallest point comes first
    k = int(np.lexsort((pts[:, 1], pts[:, 0]))[0])
    pts = np.roll(pts, -k, axis=0)
    return PeriodicOrbit(points=pts, tau=tau, multipliers=mult, trace=tr,
                         stability=stability, chi=chi_val, residual=residual, map=m)


def find_periodic(m: PlanarMap, n: int, grid: int = 64, tol: float = 1e-11,
                  dedupe_radius: float = 1e-6, workers: int = 1,
                  max_iter: int = _NEWTON_MAX_ITER) -> PeriodicCatalog:
    """Catalog periodic orbits of period <= n from a grid of Newton seeds.

    Deterministic: converged roots are sorted before deduplication, so the
    output is identical for any worker count.  Non-convergence is not an
    error; it is counted in the diagnostics.  ``max_iter`` bounds the Newton
    sweeps (lower it for maps whose evaluation is expensive).
    """
    if n < 1 or grid < 2:
        raise ValueError("need period bound n >= 1 and grid >= 2")
    seeds = _seed_grid(m, grid)
    diagnostics = {}
    orbits: list[PeriodicOrbit] = []
    for period in range(1, n + 1):
        if workers > 1:
            chunks = np.array_split(seeds, workers)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(
                    lambda c: _newton_block(m, c, period, max_iter=max_iter), chunks))
            roots = np.vstack([r for r, _ in results]) if results else np.empty((0, 2))
            stats = {k: sum(s[k] for _, s in results) for k in results[0][1]}
        else:
            roots, stats = _newton_block(m, seeds, period, max_iter=max_iter)
        diagnostics[period] = stats
        if len(roots) == 0:
            continue
        order = np.lexsort((roots[:, 1], roots[:, 0]))
        for root in roots[order]:
            tau = _minimal_period(m, root, period, dedupe_radius)
            if tau != period:
                continue  # already cataloged at its minimal period
            pts = np.empty((tau, 2))
            pts[0] = root
            for i in range(1, tau):
                pts[i] = _iterate(m, pts[i - 1], 1)
            if any(o.tau == tau and
                   float(np.min(m.topology.distance(o.points[:, None, :], pts[None, :, :]))) < dedupe_radius
                   for o in orbits):
                continue
            try:
                orbits.append(classify(m, pts, tol=tol))
            except NotPeriodicError:
                stats["residual_rejected"] = stats.get("residual_rejected", 0) + 1
    orbits.sort(key=lambda o: (o.tau, o.points[0, 0], o.points[0, 1]))
    return PeriodicCatalog(map=m, max_period=n, orbits=orbits, diagnostics=diagnostics)


def chi(orbit: PeriodicOrbit) -> float:
    """Per-step log of the expanding multiplier modulus, (1/tau) log lambda."""
    if not orbit.is_hyperbolic or orbit.chi is None:
        raise NonHyperbolicError("exponent undefined: orbit is not hyperbolic")
    return orbit.chi


def sum_positive_exponents(orbit: PeriodicOrbit) -> float:
    """Sum of positive exponents; equals chi in dimension 2 (one expanding direction)."""
    return chi(orbit)


def s_n(catalog: PeriodicCatalog, n: int | None = None):
    """Max chi over hyperbolic orbits of period <= n; None when there are none."""
    if n is None:
        n = catalog.max_period
    values = [o.chi for o in catalog.orbits if o.is_hyperbolic and o.tau <= n]
    if not values:
        return None
    return max(values)


# -- serialization --------------------------------------------------------------


def catalog_to_csv(catalog: PeriodicCatalog) -> str:
    """CSV rows (period, theta_0, z_0, trace, multiplier_max, chi, stability)."""
    lines = ["period,theta_0,z_0,trace,multiplier_max,chi,stability"]
    for o in catalog.orbits:
        rep = o.representative()
        mult_max = float(np.max(np.abs(o.multipliers)))
        chi_s = f"{o.chi:.12g}" if o.chi is not None else "nan"
        lines.append(f"{o.tau},{rep[0]:.12g},{rep[1]:.12g},{o.trace:.12g},"
                     f"{mult_max:.12g},{chi_s},{o.stability}")
    return "\n".join(lines) + "\n"
