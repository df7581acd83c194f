"""Pendulum-on-sphere Hamiltonian and its time-t map.

The Hamiltonian blends the pendulum energy H2(theta, z) = z^2/2 - cos(theta)
near the equator into the height function H1(theta, z) = z near the poles:

    H(theta, z) = beta(|z|) * H2 + (1 - beta(|z|)) * H1

with a C-infinity bump beta that is 1 on [0, 1/2] and 0 on [2/3, inf).  In
the chart form omega = d(theta) ^ dz the Hamiltonian field is
X_H = (dH/dz, -dH/dtheta); its flow preserves H and the area form, is a pure
rotation (theta + t, z) for |z| > 2/3, and has a hyperbolic equilibrium at
(pi, 0) with Floquet multipliers e and 1/e for the time-1 map.

Time-t maps are produced by an implicit-midpoint integrator (Newton inner
iterations to 1e-12).  The default scheme composes three midpoint substeps
into a fourth-order symplectic step (triple jump); plain second-order
midpoint is available as ``scheme="midpoint2"``.  The Jacobian integrates
the variational equation with the same scheme, which in 2-D preserves
det = 1 to round-off because the per-step propagator is a Cayley transform
of the trace-free linearized field.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .maps import PlanarMap
from .topology import DomainError, PhaseTopology

# Triple-jump composition coefficients (order 4 from symmetric order 2).
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1

_NEWTON_TOL = 1e-12
_NEWTON_MAX_ITER = 50

_LO, _HI = 0.5, 2.0 / 3.0  # bump plateau / support edges


# -- bump function and derivatives --------------------------------------------


def _smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, logistic-of-1/s blend between."""
    s = np.asarray(s, dtype=float)
    out = np.where(s >= 1.0, 1.0, 0.0)
    interior = (s > 0.0) & (s < 1.0)
    si = np.where(interior, s, 0.5)
    w = 1.0 / si - 1.0 / (1.0 - si)
    return np.where(interior, expit(-w), out)


def bump(x):
    """beta(x): 1 on [0, 1/2], 0 on [2/3, inf), smooth monotone between."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bump argument must be nonnegative")
    return _smooth_step((_HI - x) / (_HI - _LO))


def bump_d1(x):
    """First derivative of the bump (zero outside the transition band)."""
    return _bump_all(x)[1]


def bump_d2(x):
    """Second derivative of the bump."""
    return _bump_all(x)[2]


def _bump_all(az):
    """(beta, beta', beta'') in one pass; transcendentals only on the band.

    Outside the transition band (1/2, 2/3) the bump is flat, so the
    logistic machinery runs on the (typically small) in-band subset only.
    """
    az = np.asarray(az, dtype=float)
    width = _HI - _LO
    s_all = (_HI - az) / width
    b = np.where(s_all >= 1.0, 1.0, 0.0)
    bp = np.zeros_like(az)
    bpp = np.zeros_like(az)
    band = (s_all > 0.0) & (s_all < 1.0)
    if np.any(band):
        s = s_all[band]
        w = 1.0 / s - 1.0 / (1.0 - s)
        sig = expit(-w)
        sp = sig * (1.0 - sig)
        spp = sp * (1.0 - 2.0 * sig)
        wp = -1.0 / s**2 - 1.0 / (1.0 - s) ** 2
        wpp = 2.0 / s**3 - 2.0 / (1.0 - s) ** 3
        b[band] = sig
        bp[band] = -(-sp * wp) / width
        bpp[band] = (spp * wp * wp - sp * wpp) / width**2
    return b, bp, bpp


# -- Hamiltonian, gradient, field ---------------------------------------------


def hamiltonian(theta, z):
    """Blended energy; requires |z| < 1 on the sphere chart."""
    theta = np.asarray(theta, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) >= 1.0):
        raise DomainError("hamiltonian requires |z| < 1")
    b = bump(np.abs(z))
    h2 = 0.5 * z * z - np.cos(theta)
    return b * h2 + (1.0 - b) * z


def grad_hamiltonian(theta, z):
    """(dH/dtheta, dH/dz), analytic."""
    theta = np.asarray(theta, dtype=float)
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    b = bump(az)
    bp = bump_d1(az) * np.sign(z)
    diff = 0.5 * z * z - np.cos(theta) - z  # H2 - H1
    h_theta = b * np.sin(theta)
    h_z = 1.0 + bp * diff + b * (z - 1.0)
    return h_theta, h_z


def field(theta, z):
    """Hamiltonian vector field X_H = (dH/dz, -dH/dtheta)."""
    h_theta, h_z = grad_hamiltonian(theta, z)
    return h_z, -h_theta


def _field_vec(pts):
    xt, xz = field(pts[..., 0], pts[..., 1])
    return np.stack([np.broadcast_to(xt, pts[..., 0].shape),
                     np.broadcast_to(xz, pts[..., 1].shape)], axis=-1)


def _field_jacobian(pts):
    """D(X_H): second partials of H arranged as [[H_zt, H_zz], [-H_tt, -H_tz]]."""
    return _field_and_jacobian(pts)[1]


def _field_and_jacobian(pts):
    """(X_H, D X_H) sharing one pass over the bump and trig evaluations."""
    theta = pts[..., 0]
    z = pts[..., 1]
    az = np.abs(z)
    sg = np.sign(z)
    b, bp, bpp = _bump_all(az)
    sin_t = np.sin(theta)
    cos_t = np.cos(theta)
    diff = 0.5 * z * z - cos_t - z
    h_t = b * sin_t
    h_z = 1.0 + bp * sg * diff + b * (z - 1.0)
    h_tt = b * cos_t
    h_tz = bp * sg * sin_t
    h_zz = bpp * diff + bp * sg * (2.0 * z - 2.0) + b
    X = np.empty(pts.shape)
    X[..., 0] = h_z
    X[..., 1] = -h_t
    J = np.empty(pts.shape[:-1] + (2, 2))
    J[..., 0, 0] = h_tz
    J[..., 0, 1] = h_zz
    J[..., 1, 0] = -h_tt
    J[..., 1, 1] = -h_tz
    return X, J


# -- symplectic integration ----------------------------------------------------


def _solve2(A, rhs):
    """Batched 2x2 solve via the explicit inverse."""
    det = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    out = np.empty_like(rhs)
    out[..., 0] = (A[..., 1, 1] * rhs[..., 0] - A[..., 0, 1] * rhs[..., 1]) / det
    out[..., 1] = (-A[..., 1, 0] * rhs[..., 0] + A[..., 0, 0] * rhs[..., 1]) / det
    return out


# Newton update below this size forces the next residual under _NEWTON_TOL
# (quadratic tail: next residual ~ (h/8) |X''| |step|^2 with h |X''| < 1e3).
_NEWTON_STEP_TOL = 5e-8


def _midpoint_step(y, h):
    """One implicit midpoint step; returns (y_next, midpoint)."""
    y_new = y + h * _field_vec(y)  # explicit Euler predictor
    for _ in range(_NEWTON_MAX_ITER):
        mid = 0.5 * (y + y_new)
        X, DX = _field_and_jacobian(mid)
        res = y_new - y - h * X
        if np.max(np.abs(res)) < _NEWTON_TOL:
            break
        J = np.broadcast_to(np.eye(2), res.shape + (2,)).copy()
        J -= (0.5 * h) * DX
        step = _solve2(J, res)
        y_new = y_new - step
        if np.max(np.abs(step)) < _NEWTON_STEP_TOL:
            break
    else:
        raise RuntimeError("implicit midpoint Newton iteration failed to converge")
    return y_new, 0.5 * (y + y_new)


def _midpoint_tangent(mid, h, M):
    """Variational propagator (I - h/2 DX)^-1 (I + h/2 DX) applied to M."""
    DX = _field_jacobian(mid)
    eye = np.broadcast_to(np.eye(2), DX.shape).copy()
    plus = eye + (0.5 * h) * DX
    minus = eye - (0.5 * h) * DX
    PM = plus @ M
    det = minus[..., 0, 0] * minus[..., 1, 1] - minus[..., 0, 1] * minus[..., 1, 0]
    inv = np.empty_like(minus)
    inv[..., 0, 0] = minus[..., 1, 1]
    inv[..., 0, 1] = -minus[..., 0, 1]
    inv[..., 1, 0] = -minus[..., 1, 0]
    inv[..., 1, 1] = minus[..., 0, 0]
    return (inv @ PM) / det[..., None, None]


def _substep_weights(scheme: str):
    if scheme == "midpoint2":
        return (1.0,)
    if scheme == "midpoint4":
        return (_W1, _W0, _W1)
    raise ValueError(f"unknown integrator scheme: {scheme}")


def integrate(x, t: float, step: float = 1e-3, scheme: str = "midpoint4",
              with_jacobian: bool = False):
    """Flow points of X_H for time t (sign of t sets the direction).

    x has shape (..., 2); returns the advected points, or (points, jacobians)
    when ``with_jacobian`` is set.  The step count is round(|t| / step) so the
    final time is hit exactly with near-uniform steps.
    """
    if t == 0.0:
        raise ValueError("integration time t must be nonzero")
    if step <= 0 or step > abs(t):
        raise ValueError("require 0 < step <= |t|")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x[..., 1]) >= 1.0):
        raise DomainError("initial point outside sphere chart (|z| >= 1)")
    n_steps = max(1, int(round(abs(t) / step)))
    h = t / n_steps
    weights = _substep_weights(scheme)
    y = np.array(x, copy=True)
    M = np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy() if with_jacobian else None
    for _ in range(n_steps):
        for w in weights:
            y, mid = _midpoint_step(y, w * h)
            if with_jacobian:
                M = _midpoint_tangent(mid, w * h, M)
    if np.any(np.abs(y[..., 1]) >= 1.0):
        raise DomainError("trajectory left the sphere chart (|z| >= 1)")
    return (y, M) if with_jacobian else y


def sphere_pendulum(t: float = 1.0, step: float = 1e-3,
                    scheme: str = "midpoint4") -> PlanarMap:
    """Time-t map of the blended flow as a PlanarMap on the sphere chart."""
    if t <= 0:
        raise ValueError("time_t map requires t > 0")

    def fwd(pts):
        return integrate(pts, t, step=step, scheme=scheme)

    def jac(pts):
        _, M = integrate(pts, t, step=step, scheme=scheme, with_jacobian=True)
        return M

    return PlanarMap("sphere_pendulum", PhaseTopology.sphere_chart(), fwd, jac,
                     {"t": float(t), "step": float(step)})
