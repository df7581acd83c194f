"""Snake-perturbed homoclinic-tangency model and its certified coding.

The model is the planar shadow of the tangency-unfolding construction: a
linear saddle diag(1/lam, lam) on the box V = [-1, 1]^2 (stable = x axis),
a flattened tangency segment on the x axis centered at x_c inside V, an
area-preserving affine excursion with fixed transit time T that returns the
upward unstable branch onto the tangency segment, and the snake map

    Theta(x, y) = (x, y + A cos(pi (x - x_c) N / (2 a)))    on its support,

with amplitude A = 2 K a delta / (pi N) (K = 1 in model coordinates), which
breaks the tangency into N transversal crossings.  Every piece has unit
Jacobian determinant.  N must be even so the crossing count on |x - x_c|
<= a is exactly N.

The first-return rectangle around the tangency couples the return time t
to the amplitude: contraction must bring the rectangle height below the
snake scale, giving t = ceil(log_lam(4 / A)) + T, which realizes the
amplitude/return-time balance A * lam^t = const across leg-count sweeps.
The N-leg full-shift coding of the return map is certified with outward
rounded interval arithmetic; on certification failure a numeric transition
matrix is returned, flagged, with entropy from its spectral radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .intervals import Interval, arccos_interval
from .maps import PlanarMap
from .topology import PhaseTopology

TRANSIT_TIME = 3          # excursion steps outside V, independent of A
TANGENCY_CENTER = 0.7     # x_c: tangency segment center on the stable axis
SUPPORT_FACTOR = 2.1      # snake support radius r = 2.1 a
COVER_FACTOR = 1.1        # reentry sweep covers 1.1 * (2a) each side
HEIGHT_FACTOR = 4.0       # rectangle height at most A / 4 (leg separation margin)


class ConstructionError(ValueError):
    """Model parameters violate the geometric constraints."""


class DegenerateTangencyError(RuntimeError):
    """A crossing failed its transversality certificate."""


@dataclass(frozen=True)
class SnakeModel:
    """Parameters and derived geometry of the snake construction."""

    lam: float            # saddle expansion rate (> 1)
    a: float              # tangency half-length scale
    delta: float          # C^1 perturbation budget
    n_legs: int           # N, even
    quality_n: int = 10   # quality index n of the inequality targets
    amplitude: float = 0.0          # A = 2 a delta / (pi N), constructor-enforced
    support_radius: float = 0.0     # r
    transit_time: int = TRANSIT_TIME
    center: float = TANGENCY_CENTER
    alpha: float = 0.0              # reentry scale: exit y-interval -> tangency sweep

    def exponent_at_saddle(self) -> float:
        """chi of the saddle fixed point: log lam per step."""
        return math.log(self.lam)

    def entropy_threshold(self) -> float:
        return math.log(self.lam) - 1.0 / self.quality_n

    def c1_bound(self) -> float:
        """sup |D Theta - Id| = pi N A / (2 a) (= delta by the choice of A)."""
        return math.pi * self.n_legs * self.amplitude / (2.0 * self.a)

    def snake_displacement(self, x):
        u = np.pi * (np.asarray(x) - self.center) * self.n_legs / (2.0 * self.a)
        return self.amplitude * np.cos(u)


def build_snake(lam: float, a: float, delta: float, n_legs: int,
                quality_n: int = 10) -> SnakeModel:
    """Validate parameters and assemble the model geometry."""
    if not (lam > 1.0):
        raise ConstructionError("saddle rate lam must exceed 1")
    if not (a > 0.0):
        raise ConstructionError("tangency scale a must be positive")
    if not (0.0 < delta <= 0.1):
        raise ConstructionError("perturbation budget delta must lie in (0, 0.1]")
    if n_legs < 2 or n_legs % 2 != 0:
        raise ConstructionError("leg count N must be an even integer >= 2")
    r = SUPPORT_FACTOR * a
    x_c = TANGENCY_CENTER
    if x_c + r >= 1.0:
        raise ConstructionError("snake support leaves the linearizing box; reduce a")
    # one contraction step must clear the snake support (no double kick)
    if x_c * (1.0 - 1.0 / lam) <= r * (1.0 + 1.0 / lam):
        raise ConstructionError("contraction too weak to clear the snake support; "
                                "increase lam or reduce a")
    amplitude = 2.0 * a * delta / (math.pi * n_legs)
    alpha = 4.0 * COVER_FACTOR * a / (1.0 - 1.0 / lam)
    return SnakeModel(lam=lam, a=a, delta=delta, n_legs=n_legs, quality_n=quality_n,
                      amplitude=amplitude, support_radius=r, alpha=alpha)


# -- chart flattening ------------------------------------------------------------


@dataclass(frozen=True)
class GraphFlattening:
    """Area-preserving chart change (x, y) -> (x, y - r(x)) removing a graph."""

    r_fn: callable
    r_prime: callable

    def __call__(self, x, y):
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float) - self.r_fn(np.asarray(x, dtype=float))

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        J = np.zeros(x.shape + (2, 2))
        J[..., 0, 0] = 1.0
        J[..., 1, 1] = 1.0
        J[..., 1, 0] = -self.r_prime(x)
        return J

    def det(self, x):
        J = self.jacobian(x)
        return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]


def flatten_graph(r_fn, r_prime=None, fd_step: float = 1e-7) -> GraphFlattening:
    """Chart change flattening the graph of r onto the horizontal axis.

    Requires r(0) = 0 and r'(0) = 0 (the graph is tangent to the axis);
    the derivative defaults to a central finite difference.
    """
    if r_prime is None:
        def r_prime(x):
            return (r_fn(x + fd_step) - r_fn(x - fd_step)) / (2.0 * fd_step)
    if abs(r_fn(0.0)) > 1e-12 or abs(r_prime(0.0)) > 1e-6:
        raise ValueError("graph function must satisfy r(0) = 0 and r'(0) = 0")
    return GraphFlattening(r_fn=r_fn, r_prime=r_prime)


# -- stepwise dynamics -------------------------------------------------------------


def _in_support(m: SnakeModel, x, y):
    return (np.abs(x - m.center) <= m.support_radius) & (np.abs(y) <= m.support_radius)


def _apply_snake(m: SnakeModel, pts):
    x, y = pts[..., 0], pts[..., 1]
    hit = _in_support(m, x, y)
    out = np.array(pts, copy=True)
    out[..., 1] = np.where(hit, y + m.snake_displacement(x), y)
    return out


def _snake_shear(m: SnakeModel, x):
    """d/dx of the snake displacement (the only nonzero off-diagonal of D Theta)."""
    u = np.pi * (np.asarray(x) - m.center) * m.n_legs / (2.0 * m.a)
    return -m.amplitude * np.pi * m.n_legs / (2.0 * m.a) * np.sin(u)


def _reentry_offset(m: SnakeModel) -> float:
    return 4.0 + 3.0 * (m.transit_time - 2)


def _reentry_affine(m: SnakeModel, x, y):
    y_mid = 0.5 * (1.0 + 1.0 / m.lam)
    return m.center + m.alpha * (y - y_mid), -x / m.alpha


def snake_system(m: SnakeModel) -> PlanarMap:
    """The composed stepwise dynamics as a planar map with exact Jacobians.

    Regions: linear saddle on V = [-1,1]^2 with exit slabs |y| in (1/lam, 1]
    feeding a translation corridor (top branch returns through the affine
    reentry onto the tangency segment; the bottom branch drains off), and
    the snake applied wherever a step lands in its support box.
    """
    lam = m.lam
    T = m.transit_time
    last_stage = T - 2
    off = _reentry_offset(m)

    def region_masks(x, y):
        in_corridor = x >= 2.5
        stage = np.floor((x - 2.5) / 3.0).astype(int)
        reenter = in_corridor & (stage >= last_stage)
        advance = in_corridor & (stage < last_stage)
        drain = x <= -1.5
        in_v = (~in_corridor) & (~drain) & (np.abs(x) <= 1.0) & (np.abs(y) <= 1.0)
        exit_top = in_v & (y > 1.0 / lam)
        exit_bot = in_v & (y < -1.0 / lam)
        linear = in_v & ~exit_top & ~exit_bot
        other = ~(advance | reenter | drain | in_v)
        return linear, exit_top, exit_bot, advance, reenter, drain | other

    def fwd(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[..., 0], pts[..., 1]
        linear, etop, ebot, adv, reen, drain = region_masks(x, y)
        out = np.empty_like(pts)
        out[..., 0] = np.where(linear, x / lam,
                      np.where(etop, x + 4.0,
                      np.where(ebot, x - 4.0,
                      np.where(adv, x + 3.0,
                      np.where(reen, _reentry_affine(m, x - off, y)[0], x - 3.0)))))
        out[..., 1] = np.where(reen, _reentry_affine(m, x - off, y)[1],
                      np.where(linear, lam * y, y))
        out = _apply_snake(m, out)
        return out.reshape(np.asarray(pts).shape)

    def jac(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[..., 0], pts[..., 1]
        linear, etop, ebot, adv, reen, drain = region_masks(x, y)
        J = np.zeros(pts.shape[:-1] + (2, 2))
        J[..., 0, 0] = np.where(linear, 1.0 / lam, np.where(reen, 0.0, 1.0))
        J[..., 1, 1] = np.where(linear, lam, np.where(reen, 0.0, 1.0))
        J[..., 0, 1] = np.where(reen, m.alpha, 0.0)
        J[..., 1, 0] = np.where(reen, -1.0 / m.alpha, 0.0)
        # chain the snake shear where the base step lands in the support
        base = np.empty_like(pts)
        base[..., 0] = np.where(linear, x / lam,
                       np.where(etop, x + 4.0,
                       np.where(ebot, x - 4.0,
                       np.where(adv, x + 3.0,
                       np.where(reen, _reentry_affine(m, x - off, y)[0], x - 3.0)))))
        base[..., 1] = np.where(reen, _reentry_affine(m, x - off, y)[1],
                       np.where(linear, lam * y, y))
        hit = _in_support(m, base[..., 0], base[..., 1])
        shear = np.where(hit, _snake_shear(m, base[..., 0]), 0.0)
        row0 = J[..., 0, :].copy()
        J[..., 1, :] += shear[..., None] * row0
        return J

    return PlanarMap(f"snake_n{m.n_legs}", PhaseTopology.plane(), fwd, jac,
                     {"lam": m.lam, "a": m.a, "delta": m.delta,
                      "n": float(m.n_legs)})


# -- legs -------------------------------------------------------------------------


def count_legs(m: SnakeModel, transversality_tol: float = 1e-12) -> int:
    """Transversal crossings of the snaked curve with the stable axis.

    Scans y = A cos(pi (x - x_c) N / (2a)) for sign changes over
    |x - x_c| <= a, refines each by bisection, and certifies a nonvanishing
    derivative at every root.  A tangential crossing raises
    DegenerateTangencyError.
    """
    grid = np.linspace(m.center - m.a, m.center + m.a, 16 * m.n_legs + 1)
    vals = m.snake_displacement(grid)
    if np.max(np.abs(vals)) <= transversality_tol:
        raise DegenerateTangencyError("snaked curve is flat; no transversal crossing")
    sign_change = np.where(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    slope_scale = m.amplitude * np.pi * m.n_legs / (2.0 * m.a)
    count = 0
    for i in sign_change:
        lo, hi = grid[i], grid[i + 1]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if m.snake_displacement(lo) * m.snake_displacement(mid) <= 0:
                hi = mid
            else:
                lo = mid
        root = 0.5 * (lo + hi)
        u = np.pi * (root - m.center) * m.n_legs / (2.0 * m.a)
        if abs(slope_scale * np.sin(u)) < transversality_tol:
            raise DegenerateTangencyError(f"crossing at x = {root:.6g} is tangential")
        count += 1
    zero_hits = np.where(vals == 0.0)[0]
    for i in zero_hits:
        u = np.pi * (grid[i] - m.center) * m.n_legs / (2.0 * m.a)
        if abs(slope_scale * np.sin(u)) < transversality_tol:
            raise DegenerateTangencyError("tangential crossing at a grid point")
        count += 1
    return count


# -- return time --------------------------------------------------------------------


def return_time(m: SnakeModel, cap: int = 10_000) -> int:
    """Iterates needed for the tangency rectangle to close the horseshoe.

    The rectangle half-height must fall to A / HEIGHT_FACTOR so the snaked
    image sticks out of the rectangle between legs; contraction per step is
    1/lam, giving k = ceil(log_lam(HEIGHT_FACTOR / A)) linear steps plus the
    transit.  The count is verified by iterating the rectangle corners
    through the piecewise dynamics.
    """
    k = math.ceil(math.log(HEIGHT_FACTOR / m.amplitude) / math.log(m.lam))
    t = k + m.transit_time
    if t > cap:
        raise ConstructionError(f"return time {t} exceeds the iterate cap {cap}")
    h = m.lam ** (-k)
    sys = snake_system(m)
    corners = np.array([[m.center - m.a, h], [m.center + m.a, h],
                        [m.center - m.a, h / m.lam * (1 + 1e-9)],
                        [m.center + m.a, h / m.lam * (1 + 1e-9)]])
    pts = corners
    sweep = m.alpha * (1.0 - 1.0 / m.lam) / 2.0
    for step in range(1, t + 1):
        pts = sys.forward_fn(pts)
        if step == t - 1:
            in_last_stage = (pts[:, 0] >= 5.5) & (pts[:, 0] < 2.5 + 3.0 * m.transit_time)
            if not np.all(in_last_stage):
                raise ConstructionError("rectangle corners missed the transit schedule")
        elif step == t:
            back = np.abs(pts[:, 0] - m.center) <= sweep * (1 + 1e-9)
            if not np.all(back):
                raise ConstructionError("rectangle corners missed the reinjection")
    return t


def amplitude_balance(m: SnakeModel, t: int | None = None) -> float:
    """Fitted K1 = A * lam^t (bounded across N-sweeps when the balance holds)."""
    if t is None:
        t = return_time(m)
    return m.amplitude * m.lam ** t


# -- coding -----------------------------------------------------------------------


@dataclass(frozen=True)
class HorseshoeCoding:
    """Certified (or flagged partial) symbolic coding of the return map."""

    model: SnakeModel
    return_time: int
    k_linear: int
    rect_half_height: float          # h = lam^-k
    leg_windows: tuple               # per leg: (u_lo, u_hi) certified enclosure
    certified: bool
    transition: np.ndarray           # N x N 0/1 matrix (all ones when certified)
    entropy: float                   # log N / t, or log(spectral radius)/t if partial
    notes: tuple = ()

    @property
    def n_legs(self) -> int:
        return self.model.n_legs

    def meets_entropy_threshold(self) -> bool:
        return self.entropy > self.model.entropy_threshold()


def _certified_windows(m: SnakeModel, k: int):
    """Interval enclosures of the leg parameter windows, or (None, reason)."""
    lam = m.lam
    h = lam ** float(-k)
    shift = (Interval(m.center - m.a, m.center + m.a)
             * Interval.point(h) / Interval.point(m.alpha))
    s = (Interval(h / lam, h) + shift) / Interval.point(m.amplitude)
    if not (0.0 < s.lo and s.hi < 1.0):
        return None, f"dwell class leaves the fold range: s = [{s.lo:.3g}, {s.hi:.3g}]"
    base = arccos_interval(s)           # strictly inside (0, pi)
    if not (0.0 < base.lo and base.hi < math.pi):
        return None, "arccos window touches the fold"
    n = m.n_legs
    u_max = math.pi * n / 2.0
    windows = []
    m_lo = -(n // 4) - 2
    m_hi = (n // 4) + 2
    for mm in range(m_lo, m_hi + 1):
        two_pi_m = Interval.point(2.0 * math.pi) * Interval.point(float(mm))
        for w in (two_pi_m + base, two_pi_m - base):
            wi = Interval(min(w.lo, w.hi), max(w.lo, w.hi))
            if wi.strictly_inside(-u_max, u_max):
                windows.append(wi)
            elif wi.hi < -u_max or wi.lo > u_max:
                continue
            else:
                return None, "a leg window straddles the rectangle boundary"
    windows.sort(key=lambda w: w.lo)
    for w1, w2 in zip(windows[:-1], windows[1:]):
        if not w1.strictly_below(w2):
            return None, "adjacent leg windows overlap"
    if len(windows) != n:
        return None, f"found {len(windows)} leg windows, expected {n}"
    # image sweep must cover the rectangle width (full crossing)
    sweep = Interval.point(m.alpha) * Interval.point((1.0 - 1.0 / lam) / 2.0)
    if not sweep.lo > m.a:
        return None, "reentry sweep does not cover the rectangle"
    # snaked reentry must stay inside the snake support box
    y_reach = Interval(0.0, (m.center + m.a) * h / m.alpha + m.amplitude)
    if not y_reach.hi < m.support_radius:
        return None, "reentry leaves the snake support box"
    return tuple((w.lo, w.hi) for w in windows), ""


def _numeric_transition(m: SnakeModel, k: int, windows) -> np.ndarray:
    """Point-sample fallback: leg i covers leg j when its image sweep does."""
    lam = m.lam
    n = m.n_legs
    trans = np.zeros((n, n), dtype=int)
    y_mid = 0.5 * (1.0 + 1.0 / lam)
    for i, (lo, hi) in enumerate(windows):
        y_class = np.linspace(lam ** float(-k - 1), lam ** float(-k), 64)
        u_img = (m.alpha * (y_class * lam ** k - y_mid)) * np.pi * n / (2.0 * m.a)
        for j, (lo2, hi2) in enumerate(windows):
            if u_img.min() <= lo2 and u_img.max() >= hi2:
                trans[i, j] = 1
    return trans


def code_horseshoe(m: SnakeModel) -> HorseshoeCoding:
    """Certify the N disjoint legs and the full-crossing Markov property."""
    t = return_time(m)
    k = t - m.transit_time
    h = m.lam ** float(-k)
    windows, reason = _certified_windows(m, k)
    n = m.n_legs
    if windows is not None:
        trans = np.ones((n, n), dtype=int)
        entropy = math.log(n) / t
        return HorseshoeCoding(model=m, return_time=t, k_linear=k,
                               rect_half_height=h, leg_windows=windows,
                               certified=True, transition=trans, entropy=entropy)
    # fallback: numeric windows at the class midpoint, flagged as uncertified
    y_mid = 0.5 * (1.0 + 1.0 / m.lam)
    shift_mid = m.center * h / m.alpha
    s_lo = (h / m.lam + shift_mid) / m.amplitude
    s_hi = (h + shift_mid) / m.amplitude
    s_lo, s_hi = max(-1.0, min(s_lo, 1.0)), max(-1.0, min(s_hi, 1.0))
    base = (math.acos(s_hi), math.acos(s_lo))
    u_max = math.pi * n / 2.0
    windows = []
    for mm in range(-(n // 4) - 2, n // 4 + 3):
        for sgn in (1.0, -1.0):
            w = tuple(sorted((2 * math.pi * mm + sgn * base[0],
                              2 * math.pi * mm + sgn * base[1])))
            if -u_max < w[0] and w[1] < u_max:
                windows.append(w)
    windows = sorted(set(windows))
    trans = _numeric_transition(m, k, windows)
    radius = max(np.abs(np.linalg.eigvals(trans.astype(float)))) if len(windows) else 0.0
    entropy = math.log(radius) / t if radius > 1 else 0.0
    return HorseshoeCoding(model=m, return_time=t, k_linear=k, rect_half_height=h,
                           leg_windows=tuple(windows), certified=False,
                           transition=trans, entropy=entropy,
                           notes=(f"certification failed: {reason}",))


# -- angles and cone expansion -------------------------------------------------------


def angle(v, w_or_basis) -> float:
    """|tan(angle)| between a vector and a vector or subspace (+inf when orthogonal)."""
    v = np.asarray(v, dtype=float)
    if np.allclose(v, 0.0):
        raise ValueError("angle undefined for the zero vector")
    w = np.asarray(w_or_basis, dtype=float)
    if w.ndim == 1:
        if np.allclose(w, 0.0):
            raise ValueError("angle undefined against the zero vector")
        basis = (w / np.linalg.norm(w))[None, :]
    else:
        basis = w / np.linalg.norm(w, axis=1, keepdims=True)
    par = basis.T @ (basis @ v)
    perp = v - par
    npar = np.linalg.norm(par)
    nperp = np.linalg.norm(perp)
    if npar == 0.0:
        return math.inf
    return nperp / npar


@dataclass(frozen=True)
class ExpansionReport:
    """Cone-expansion lower bound check in the linear saddle region."""

    hypothesis_met: bool
    lhs: float                  # |Dg^k v| (Euclidean)
    rhs: float                  # K6 * lam^k * |v| * min(ang(v, E^s), 1)
    margin: float
    maxnorm_residual: float     # |Dg^k v|_inf - lam^k |v|_inf min(ang, 1), >= 0
    k6: float


def verify_expansion(m: SnakeModel, k: int, v, z=None) -> ExpansionReport:
    """Check |Dg^k(z) v| >= K6 ||Dg^-k|E^u||^-1 |v| min(ang(v, E^s), 1).

    In the linear region Dg^k = diag(lam^-k, lam^k) exactly; K6 = 1/sqrt(2)
    comes from the equivalence between the Euclidean and maximum norms.  The
    hypothesis ang(Dg^k v, E^s) >= 1 failing produces a report, not an error.
    """
    v = np.asarray(v, dtype=float)
    lam_k = m.lam ** float(k)
    image = np.array([v[0] / lam_k, v[1] * lam_k])
    e_s = np.array([1.0, 0.0])
    ang_image = angle(image, e_s) if not np.allclose(image, 0) else 0.0
    hypothesis = ang_image >= 1.0
    k6 = 1.0 / math.sqrt(2.0)
    ang_v = angle(v, e_s)
    rhs = k6 * lam_k * float(np.linalg.norm(v)) * min(ang_v, 1.0)
    lhs = float(np.linalg.norm(image))
    lhs_inf = float(np.max(np.abs(image)))
    rhs_inf = lam_k * float(np.max(np.abs(v))) * min(ang_v, 1.0)
    return ExpansionReport(hypothesis_met=bool(hypothesis), lhs=lhs, rhs=rhs,
                           margin=lhs - rhs, maxnorm_residual=lhs_inf - rhs_inf,
                           k6=k6)


# -- coded periodic orbits -------------------------------------------------------------


def _return_map(m: SnakeModel, k: int):
    """Closed-form return map F and derivative DF on the dwell class."""
    lam_k = m.lam ** float(k)
    y_mid = 0.5 * (1.0 + 1.0 / m.lam)
    freq = np.pi * m.n_legs / (2.0 * m.a)

    def F(z):
        x, y = z[..., 0], z[..., 1]
        xi = m.center + m.alpha * (y * lam_k - y_mid)
        eta = -(x / lam_k) / m.alpha + m.amplitude * np.cos(freq * (xi - m.center))
        return np.stack([xi, eta], axis=-1)

    def DF(z):
        x, y = z[..., 0], z[..., 1]
        xi = m.center + m.alpha * (y * lam_k - y_mid)
        shear = -m.amplitude * freq * np.sin(freq * (xi - m.center))
        J = np.zeros(z.shape[:-1] + (2, 2))
        J[..., 0, 1] = m.alpha * lam_k
        J[..., 1, 0] = -1.0 / (lam_k * m.alpha)
        J[..., 1, 1] = shear * m.alpha * lam_k
        return J

    return F, DF


@dataclass(frozen=True)
class CodedOrbit:
    """Periodic orbit of the return map with a prescribed leg itinerary."""

    symbols: tuple
    point: np.ndarray          # fixed point of F^l on the dwell class
    chi: float                 # exponent per ambient step
    multiplier: float
    ambient_period: int
    itinerary_ok: bool


def _window_seed(m: SnakeModel, coding: HorseshoeCoding, leg: int) -> np.ndarray:
    lo, hi = coding.leg_windows[leg]
    u_mid = 0.5 * (lo + hi)
    lam_k = m.lam ** float(coding.k_linear)
    y_mid = 0.5 * (1.0 + 1.0 / m.lam)
    x_img = m.center + u_mid * 2.0 * m.a / (np.pi * m.n_legs)
    y0 = ((x_img - m.center) / m.alpha + y_mid) / lam_k
    return np.array([m.center, y0])


def coded_periodic_orbit(m: SnakeModel, coding: HorseshoeCoding,
                         symbols) -> CodedOrbit:
    """Solve the return-map cycle visiting the given legs in order.

    Writing xi_j for the horizontal offset of visit j, the return map
    reduces to the second-order cycle equations

        xi_{j+1} + xi_{j-1} + x_c + alpha*y_mid
            = alpha * lam^k * A * cos(freq * xi_j),

    whose cosine term dominates the Jacobian diagonal, so Newton iteration
    seeded at the leg-window midpoints stays within the prescribed legs.
    """
    symbols = tuple(int(s) for s in symbols)
    ell = len(symbols)
    freq = np.pi * m.n_legs / (2.0 * m.a)
    lam_k = m.lam ** float(coding.k_linear)
    y_mid = 0.5 * (1.0 + 1.0 / m.lam)
    gain = m.alpha * lam_k * m.amplitude
    const = m.center + m.alpha * y_mid
    xi = np.array([0.5 * (coding.leg_windows[s][0] + coding.leg_windows[s][1]) / freq
                   for s in symbols])
    for _ in range(80):
        xi_next = np.roll(xi, -1)
        xi_prev = np.roll(xi, 1)
        G = xi_next + xi_prev + const - gain * np.cos(freq * xi)
        if np.max(np.abs(G)) < 1e-13:
            break
        J = np.zeros((ell, ell))
        for j in range(ell):
            J[j, j] += gain * freq * np.sin(freq * xi[j])
            J[j, (j + 1) % ell] += 1.0
            J[j, (j - 1) % ell] += 1.0
        xi = xi - np.linalg.solve(J, G)
    ok = all(coding.leg_windows[s][0] - 1e-9 <= freq * xi[j] <= coding.leg_windows[s][1] + 1e-9
             for j, s in enumerate(symbols))
    # reconstruct phase points: y_j determined by the next visit's offset
    ys = (np.roll(xi, -1) / m.alpha + y_mid) / lam_k
    pts = np.column_stack([xi + m.center, ys])
    _, DF = _return_map(m, coding.k_linear)
    Jprod = np.eye(2)
    for p in pts:
        Jprod = DF(p) @ Jprod
    tr = Jprod[0, 0] + Jprod[1, 1]
    det = float(np.linalg.det(Jprod))
    disc = tr * tr - 4.0 * det
    mult = (abs(tr) + math.sqrt(max(disc, 0.0))) / 2.0
    ambient = ell * coding.return_time
    chi = math.log(mult) / ambient if mult > 1 else 0.0
    return CodedOrbit(symbols=symbols, point=pts[0], chi=chi, multiplier=mult,
                      ambient_period=ambient, itinerary_ok=ok)


def _necklaces(n_symbols: int, length: int):
    """Primitive cyclic-minimal symbol words of the exact length."""
    out = []
    for word in np.ndindex(*([n_symbols] * length)):
        rots = [word[i:] + word[:i] for i in range(length)]
        if word == min(rots) and rots.count(word) == 1:
            out.append(word)
    return out


def enumerate_coded_orbits(m: SnakeModel, coding: HorseshoeCoding,
                           max_len: int = 4, budget: int = 20_000) -> list:
    """Coded periodic orbits up to the symbol length, within an enumeration budget."""
    orbits = []
    for ell in range(1, max_len + 1):
        words = _necklaces(m.n_legs, ell)
        if len(orbits) + len(words) > budget:
            break
        for word in words:
            orbits.append(coded_periodic_orbit(m, coding, word))
    return orbits


@dataclass(frozen=True)
class ExponentFloorReport:
    """Exponent floor chi(q) > chi(p) - 1/n over enumerated coded orbits."""

    floor: float
    min_chi: float
    max_chi: float
    n_orbits: int
    max_symbol_length: int
    all_above_floor: bool
    apriori_per_return: float     # (C * K6 * leg slope) * lam^k bound per return
    itinerary_failures: int


def periodic_exponent_floor(m: SnakeModel, coding: HorseshoeCoding,
                            max_len: int = 4, budget: int = 20_000) -> ExponentFloorReport:
    """Evaluate the exponent floor on coded orbits and the cone-route bound."""
    orbits = enumerate_coded_orbits(m, coding, max_len=max_len, budget=budget)
    floor = m.exponent_at_saddle() - 1.0 / m.quality_n
    chis = [o.chi for o in orbits]
    max_used = max((len(o.symbols) for o in orbits), default=0)
    # transit contraction inf |Dg^T v| = min singular value of the reentry part
    c_transit = min(m.alpha, 1.0 / m.alpha)
    k6 = 1.0 / math.sqrt(2.0)
    slope = m.delta  # sup leg slope = C1 size of the snake
    apriori = c_transit * k6 * slope * m.lam ** float(coding.k_linear)
    return ExponentFloorReport(floor=floor, min_chi=min(chis, default=math.nan),
                               max_chi=max(chis, default=math.nan),
                               n_orbits=len(orbits), max_symbol_length=max_used,
                               all_above_floor=bool(chis) and min(chis) > floor,
                               apriori_per_return=apriori,
                               itinerary_failures=sum(1 for o in orbits if not o.itinerary_ok))


def ambient_orbit(m: SnakeModel, coding: HorseshoeCoding, orbit: CodedOrbit) -> np.ndarray:
    """The full stepwise orbit (ambient_period points) of a coded cycle."""
    sys = snake_system(m)
    pts = np.empty((orbit.ambient_period, 2))
    cur = np.array(orbit.point, dtype=float)
    for i in range(orbit.ambient_period):
        pts[i] = cur
        cur = sys.forward_fn(cur)
    return pts


def visit_frequency(points: np.ndarray, center, zeta: float) -> float:
    """Fraction of orbit points within distance zeta of the center (max metric)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        raise ValueError("orbit must be nonempty")
    if zeta <= 0:
        raise ValueError("radius zeta must be positive")
    d = np.max(np.abs(points - np.asarray(center, dtype=float)), axis=-1)
    return float(np.mean(d <= zeta))


# -- leg-count sweep ----------------------------------------------------------------


def predicted_return_time(lam: float, a: float, delta: float, n_legs: int) -> int:
    """Closed-form t(N) from the amplitude balance (matches return_time)."""
    amplitude = 2.0 * a * delta / (math.pi * n_legs)
    return math.ceil(math.log(HEIGHT_FACTOR / amplitude) / math.log(lam)) + TRANSIT_TIME


def predict_entropy_leg_count(lam: float, a: float, delta: float, quality_n: int,
                              cap: float = 2.0 ** 200) -> int | None:
    """Smallest even N with log(N)/t(N) above log(lam) - 1/n (closed form).

    The balance t ~ log_lam(1/A) makes the crossing exist but at leg counts
    growing like lam^(n * const); this solves the model's own formula so the
    sweep can report how far the crossing sits beyond any finite cap.
    """
    threshold = math.log(lam) - 1.0 / quality_n
    n = 4
    while n <= cap:
        if math.log(n) / predicted_return_time(lam, a, delta, n) > threshold:
            return n
        n *= 2
    return None


@dataclass(frozen=True)
class SweepRow:
    """Per-leg-count results of a snake sweep."""

    n_legs: int
    amplitude: float
    return_time: int
    coded_entropy: float
    certified: bool
    chi_saddle: float
    entropy_threshold: float
    entropy_ok: bool
    k1_fit: float
    min_chi_coded: float
    max_rho_to_saddle: float
    visit_freq: float
    n_coded_orbits: int


def sweep_leg_counts(lam: float, a: float, delta: float, n_values,
                     quality_n: int = 10, zeta: float = 0.1,
                     max_symbol_len: int = 4, orbit_budget: int = 6000) -> list:
    """Build, certify and measure the model across a leg-count sweep."""
    from .measures import AtomicMeasure, TestFunctionFamily, weak_star_distance

    plane = PhaseTopology.plane()
    family = TestFunctionFamily.for_topology(plane)
    rows = []
    for n_legs in n_values:
        model = build_snake(lam, a, delta, n_legs, quality_n=quality_n)
        coding = code_horseshoe(model)
        legs = count_legs(model)
        if legs != n_legs:
            raise ConstructionError(f"leg count {legs} != N = {n_legs}")
        max_len = max_symbol_len
        while max_len > 1 and n_legs ** max_len > orbit_budget * max_len:
            max_len -= 1
        orbits = enumerate_coded_orbits(model, coding, max_len=max_len,
                                        budget=orbit_budget)
        saddle = AtomicMeasure.from_points([[0.0, 0.0]], plane)
        rho_max = 0.0
        for orbit in orbits[: min(len(orbits), 256)]:
            amb = ambient_orbit(model, coding, orbit)
            mu = AtomicMeasure.from_points(amb, plane)
            rho_max = max(rho_max, weak_star_distance(mu, saddle, family))
        fixed = orbits[0]
        freq = visit_frequency(ambient_orbit(model, coding, fixed), (0.0, 0.0), zeta)
        rows.append(SweepRow(
            n_legs=n_legs, amplitude=model.amplitude,
            return_time=coding.return_time, coded_entropy=coding.entropy,
            certified=coding.certified, chi_saddle=model.exponent_at_saddle(),
            entropy_threshold=model.entropy_threshold(),
            entropy_ok=coding.meets_entropy_threshold(),
            k1_fit=amplitude_balance(model, coding.return_time),
            min_chi_coded=min(o.chi for o in orbits),
            max_rho_to_saddle=rho_max, visit_freq=freq,
            n_coded_orbits=len(orbits)))
    return rows


def sweep_summary(rows, lam: float, a: float, delta: float,
                  quality_n: int = 10) -> dict:
    """Accepted and extrapolated leg counts for the three sweep targets."""
    floor = math.log(lam) - 1.0 / quality_n
    accepted_entropy = next((r.n_legs for r in rows if r.entropy_ok), None)
    accepted_exponent = next((r.n_legs for r in rows if r.min_chi_coded > floor), None)
    accepted_measure = next((r.n_legs for r in rows
                             if r.max_rho_to_saddle < 1.0 / quality_n), None)
    # extrapolations from the fitted 1/t laws (diagnostic, not certified)
    def _fit_deficit(values):
        ts = np.array([r.return_time for r in rows], dtype=float)
        return float(np.median(np.array(values) * ts))

    c_exp = _fit_deficit([math.log(lam) - r.min_chi_coded for r in rows])
    c_rho = _fit_deficit([r.max_rho_to_saddle for r in rows])
    t_exp = c_exp * quality_n
    t_rho = c_rho * quality_n

    def _n_for_time(t_target):
        n = 4
        while predicted_return_time(lam, a, delta, n) < t_target:
            n *= 2
            if n > 2.0 ** 400:
                return None
        return n

    return {
        "accepted_entropy_n": accepted_entropy,
        "accepted_exponent_n": accepted_exponent,
        "accepted_measure_n": accepted_measure,
        "predicted_entropy_n": predict_entropy_leg_count(lam, a, delta, quality_n),
        "predicted_exponent_n": _n_for_time(t_exp),
        "predicted_measure_n": _n_for_time(t_rho),
        "exponent_deficit_times_t": c_exp,
        "rho_times_t": c_rho,
    }
