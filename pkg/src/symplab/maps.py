"""Area-preserving planar maps with exact Jacobians.

A :class:`PlanarMap` bundles a forward rule, its analytic Jacobian and the
chart it acts on.  Forward/Jacobian callables are vectorized over leading
axes: ``forward`` maps ``(..., 2) -> (..., 2)`` (unwrapped), ``jacobian``
maps ``(..., 2) -> (..., 2, 2)``.  Jacobians are analytic per map; finite
differences appear only as test oracles, because exponent computations
amplify Jacobian noise exponentially.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .topology import PhaseTopology, TWO_PI

# Entry magnitude above which a cocycle product is renormalized into its
# log-scale factor (multipliers grow like lambda^n).
_RESCALE_THRESHOLD = 1e100


@dataclass(frozen=True)
class PlanarMap:
    """A differentiable map of a 2-D chart with analytic Jacobian."""

    name: str
    topology: PhaseTopology
    forward_fn: callable
    jacobian_fn: callable
    parameters: dict = field(default_factory=dict)

    def __call__(self, x):
        return evaluate(self, x)

    def jacobian(self, x):
        return jacobian(self, x)

    def spec_string(self) -> str:
        """Canonical ``name:key=value,...`` form (keys lowercase, sorted)."""
        if not self.parameters:
            return self.name
        kv = ",".join(f"{k}={self.parameters[k]:g}" for k in sorted(self.parameters))
        return f"{self.name}:{kv}"


@dataclass(frozen=True)
class OrbitSegment:
    """Finite forward orbit: points[i+1] = wrap(forward(points[i]))."""

    points: np.ndarray
    map: PlanarMap

    def __len__(self) -> int:
        return len(self.points)

    def residual(self) -> float:
        """Max wrapped distance between points[i+1] and forward(points[i])."""
        f = self.map.topology.wrap(self.map.forward_fn(self.points[:-1]))
        return float(np.max(self.map.topology.distance(f, self.points[1:]), initial=0.0))


@dataclass(frozen=True)
class Cocycle:
    """Product of Jacobians Df^n(x), stored as matrix * exp(log_scale).

    ``matrix`` has shape (..., 2, 2); ``log_scale`` broadcasts over the
    leading axes.  The split avoids overflow for large n.  ``determinant``
    is accumulated factor by factor: taking it from the final entries would
    lose everything to cancellation once they dwarf 1.
    """

    matrix: np.ndarray
    log_scale: np.ndarray
    determinant: np.ndarray

    def dense(self) -> np.ndarray:
        return self.matrix * np.exp(self.log_scale)[..., None, None]

    def det(self) -> np.ndarray:
        return self.determinant

    def trace(self) -> np.ndarray:
        return (self.matrix[..., 0, 0] + self.matrix[..., 1, 1]) * np.exp(self.log_scale)

    def multipliers(self) -> np.ndarray:
        """Eigenvalues of the full product, shape (..., 2), complex.

        Computed on the normalized matrix and rescaled, so nothing
        overflows while the entries stay below the rescale threshold.
        """
        tr_n = self.matrix[..., 0, 0] + self.matrix[..., 1, 1]
        det_n = self.determinant * np.exp(-2.0 * self.log_scale)
        disc = np.asarray(tr_n * tr_n - 4.0 * det_n, dtype=complex)
        root = np.sqrt(disc)
        lam = np.stack([(tr_n + root) / 2.0, (tr_n - root) / 2.0], axis=-1)
        return lam * np.exp(self.log_scale)[..., None]


def evaluate(m: PlanarMap, x) -> np.ndarray:
    """One forward step, coordinates wrapped into the fundamental domain."""
    x = m.topology.validate(x)
    return m.topology.wrap(m.forward_fn(x))


def jacobian(m: PlanarMap, x) -> np.ndarray:
    """Analytic Jacobian of the wrapped map at x."""
    x = m.topology.validate(x)
    return m.jacobian_fn(np.asarray(x, dtype=float))


def orbit(m: PlanarMap, x, n: int) -> OrbitSegment:
    """Forward orbit of length n (n+1 points, starting at x)."""
    if n < 1:
        raise ValueError("orbit length n must be >= 1")
    x = m.topology.wrap(x)
    pts = np.empty((n + 1,) + x.shape)
    pts[0] = x
    for i in range(n):
        pts[i + 1] = evaluate(m, pts[i])
    return OrbitSegment(points=pts, map=m)


def orbit_batch(m: PlanarMap, xs, n: int) -> np.ndarray:
    """Orbits of many initial points at once; shape (len(xs), n+1, 2)."""
    xs = m.topology.wrap(xs)
    out = np.empty((xs.shape[0], n + 1, 2))
    out[:, 0] = xs
    cur = xs
    for i in range(n):
        cur = evaluate(m, cur)
        out[:, i + 1] = cur
    return out


def cocycle(m: PlanarMap, x, n: int) -> Cocycle:
    """Chain-rule product Df(f^{n-1}x) ... Df(x), with overflow guard."""
    if n < 1:
        raise ValueError("cocycle length n must be >= 1")
    x = m.topology.wrap(np.asarray(x, dtype=float))
    batched = x.ndim > 1
    lead = x.shape[:-1]
    prod = np.broadcast_to(np.eye(2), lead + (2, 2)).copy()
    logs = np.zeros(lead)
    dets = np.ones(lead)
    cur = x
    for _ in range(n):
        J = m.jacobian_fn(cur)
        prod = J @ prod
        dets = dets * (J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0])
        big = np.max(np.abs(prod), axis=(-2, -1))
        mask = big > _RESCALE_THRESHOLD
        if np.any(mask):
            scale = np.where(mask, big, 1.0)
            prod = prod / scale[..., None, None]
            logs = logs + np.log(scale)
        cur = evaluate(m, cur)
    if not batched:
        logs = np.asarray(logs).reshape(())
        dets = np.asarray(dets).reshape(())
    return Cocycle(matrix=prod, log_scale=logs, determinant=dets)


def check_symplectic(m: PlanarMap, samples: int, seed: int) -> float:
    """Max |det Df - 1| over seeded sample points (0 means exactly unimodular)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts = m.topology.sample(samples, rng)
    J = m.jacobian_fn(pts)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    return float(np.max(np.abs(det - 1.0)))


# -- map zoo ------------------------------------------------------------------


def cat_map() -> PlanarMap:
    """Hyperbolic toral automorphism [[2,1],[1,1]] on the unit torus."""
    A = np.array([[2.0, 1.0], [1.0, 1.0]])

    def fwd(x):
        return x @ A.T

    def jac(x):
        return np.broadcast_to(A, x.shape[:-1] + (2, 2)).copy()

    return PlanarMap("cat", PhaseTopology.torus(1.0, 1.0), fwd, jac)


def standard_map(k: float = 1.0) -> PlanarMap:
    """Kicked rotor (theta, p) -> (theta + p + k sin theta, p + k sin theta) on [0, 2pi)^2."""

    def fwd(x):
        theta, p = x[..., 0], x[..., 1]
        kick = p + k * np.sin(theta)
        return np.stack([theta + kick, kick], axis=-1)

    def jac(x):
        c = k * np.cos(x[..., 0])
        J = np.empty(x.shape[:-1] + (2, 2))
        J[..., 0, 0] = 1.0 + c
        J[..., 0, 1] = 1.0
        J[..., 1, 0] = c
        J[..., 1, 1] = 1.0
        return J

    return PlanarMap("standard", PhaseTopology.torus(TWO_PI, TWO_PI), fwd, jac,
                     {"k": float(k)})


def identity_map() -> PlanarMap:
    """Identity on the unit torus."""

    def fwd(x):
        return np.array(x, copy=True)

    def jac(x):
        return np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy()

    return PlanarMap("identity", PhaseTopology.torus(1.0, 1.0), fwd, jac)


def rotation_map(alpha: float) -> PlanarMap:
    """Rigid rotation (theta, z) -> (theta + alpha, z) on the cylinder."""

    def fwd(x):
        out = np.array(x, copy=True)
        out[..., 0] += alpha
        return out

    def jac(x):
        return np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy()

    return PlanarMap("rotation", PhaseTopology.cylinder(), fwd, jac,
                     {"alpha": float(alpha)})


def zscale_map(c: float = 0.5) -> PlanarMap:
    """(theta, z) -> (theta, c z): deliberately non-symplectic test map."""

    def fwd(x):
        out = np.array(x, copy=True)
        out[..., 1] *= c
        return out

    def jac(x):
        J = np.broadcast_to(np.diag([1.0, c]), x.shape[:-1] + (2, 2)).copy()
        return J

    return PlanarMap("zscale", PhaseTopology.cylinder(), fwd, jac, {"c": float(c)})
