"""Phase-space charts for 2-D area-preserving dynamics.

Three chart kinds are supported, plus a plain planar chart used by the
horseshoe model:

* ``torus2``       -- both coordinates periodic (periods declared per map)
* ``cylinder``     -- angle mod 2*pi times a real line coordinate
* ``sphere_chart`` -- angle mod 2*pi times z in (-1, 1) (cylindrical polar
  coordinates on the sphere, poles excluded)
* ``plane``        -- no periodic coordinate (internal use)

The metric is the maximum over the two axes of the per-axis distance, where
periodic axes use the minimum over deck translations.  All distances,
dedup radii and separation scales in the package refer to this metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

TWO_PI = 2.0 * np.pi


class DomainError(ValueError):
    """Point outside the chart domain (e.g. |z| >= 1 on the sphere chart)."""


@dataclass(frozen=True)
class PhaseTopology:
    """Geometry of a 2-D phase space chart.

    ``periods[i]`` is the period of axis i, or None for a line axis.
    ``z_window`` bounds the line axis when sampling (and is the hard domain
    boundary for ``sphere_chart``, where it is always (-1, 1)).
    """

    kind: str
    periods: tuple
    z_window: tuple = (-1.0, 1.0)

    @staticmethod
    def torus(p0: float = 1.0, p1: float = 1.0) -> "PhaseTopology":
        return PhaseTopology("torus2", (p0, p1))

    @staticmethod
    def cylinder(z_window=(-1.0, 1.0)) -> "PhaseTopology":
        return PhaseTopology("cylinder", (TWO_PI, None), z_window)

    @staticmethod
    def sphere_chart(z_window=(-0.9, 0.9)) -> "PhaseTopology":
        return PhaseTopology("sphere_chart", (TWO_PI, None), z_window)

    @staticmethod
    def plane() -> "PhaseTopology":
        return PhaseTopology("plane", (None, None))

    # -- coordinate handling -------------------------------------------------

    def validate(self, pts) -> np.ndarray:
        """Check domain membership; raises DomainError on violation."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "sphere_chart":
            z = pts[..., 1]
            if np.any(np.abs(z) >= 1.0):
                raise DomainError("sphere chart requires |z| < 1")
        return pts

    def wrap(self, pts) -> np.ndarray:
        """Map points into the fundamental domain (periodic axes mod period)."""
        pts = self.validate(pts)
        out = np.array(pts, dtype=float, copy=True)
        for i, p in enumerate(self.periods):
            if p is not None:
                out[..., i] = np.mod(out[..., i], p)
        return out

    def displacement(self, a, b) -> np.ndarray:
        """Nearest representative of b - a (per axis, reduced mod period)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        d = b - a
        out = np.array(d, copy=True)
        for i, p in enumerate(self.periods):
            if p is not None:
                out[..., i] = (d[..., i] + 0.5 * p) % p - 0.5 * p
        return out

    def distance(self, a, b) -> np.ndarray:
        """Chebyshev combination of per-axis wrapped distances.

        Built from |b - a| so symmetry holds exactly in floating point.
        """
        d = np.abs(np.asarray(b, dtype=float) - np.asarray(a, dtype=float))
        out = np.array(d, copy=True)
        for i, p in enumerate(self.periods):
            if p is not None:
                m = np.mod(d[..., i], p)
                out[..., i] = np.minimum(m, p - m)
        return np.max(out, axis=-1)

    # -- sampling ------------------------------------------------------------

    def _unit_to_chart(self, u: np.ndarray) -> np.ndarray:
        pts = np.empty_like(u)
        for i, p in enumerate(self.periods):
            if p is not None:
                pts[:, i] = u[:, i] * p
            else:
                lo, hi = self.z_window
                pts[:, i] = lo + u[:, i] * (hi - lo)
        return pts

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n pseudo-random points, uniform over the sampling window."""
        return self._unit_to_chart(rng.random((n, 2)))

    def halton(self, n: int, seed: int) -> np.ndarray:
        """n scrambled-Halton (low-discrepancy) points; deterministic per seed."""
        sampler = qmc.Halton(d=2, scramble=True, seed=seed)
        return self._unit_to_chart(sampler.random(n))
