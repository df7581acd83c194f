"""Finitely supported measures, a weak-* metric, and shift entropies.

The weak-* metric is a weighted sum of moment differences against a fixed,
documented test family: rho(mu, nu) = sum_k 2^(-k) |int phi_k dmu - int
phi_k dnu|, truncated at the family order.  Test functions are bounded by 1
and adapted to the chart:

* periodic axes contribute complex exponentials exp(i k theta'),
* the sphere-chart line axis contributes plain powers z^j (|z| < 1),
* unbounded line axes (cylinder, plane) contribute powers of tanh,

with frequency tuples enumerated by max-degree then lexicographically.  Any
two metrizations of the weak topology disagree quantitatively; thresholds
compared against rho are statements about this fixed family.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .maps import OrbitSegment, PlanarMap
from .periodic import PeriodicOrbit
from .topology import PhaseTopology

DEFAULT_ORDER = 8
_MERGE_RADIUS = 1e-12


class TopologyMismatch(ValueError):
    """Measures live on different charts."""


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported probability measure on a chart."""

    atoms: np.ndarray      # (k, 2), wrapped
    weights: np.ndarray    # (k,), positive, sums to 1
    topology: PhaseTopology

    @staticmethod
    def from_points(points, topology: PhaseTopology, weights=None) -> "AtomicMeasure":
        """Build a measure, merging atoms closer than the dedup radius."""
        pts = topology.wrap(np.atleast_2d(np.asarray(points, dtype=float)))
        k = len(pts)
        w = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        w = w / w.sum()
        out_pts, out_w = [], []
        for p, wi in zip(pts, w):
            for i, q in enumerate(out_pts):
                if topology.distance(p, q) < _MERGE_RADIUS:
                    out_w[i] += wi
                    break
            else:
                out_pts.append(p)
                out_w.append(wi)
        order = np.lexsort((np.array(out_pts)[:, 1], np.array(out_pts)[:, 0]))
        return AtomicMeasure(atoms=np.array(out_pts)[order],
                             weights=np.array(out_w)[order], topology=topology)

    def __len__(self) -> int:
        return len(self.atoms)

    def integrate(self, fn) -> complex:
        """Integral of a pointwise function of (theta, z) against the measure."""
        return np.sum(self.weights * fn(self.atoms[:, 0], self.atoms[:, 1]))

    def pushforward(self, m: PlanarMap) -> "AtomicMeasure":
        return AtomicMeasure.from_points(m.topology.wrap(m.forward_fn(self.atoms)),
                                         self.topology, self.weights)

    def to_jsonable(self) -> dict:
        return {"atoms": [[float(a), float(b)] for a, b in self.atoms],
                "weights": [float(w) for w in self.weights],
                "topology": self.topology.kind}


def periodic_measure(orbit: PeriodicOrbit) -> AtomicMeasure:
    """Uniform weights 1/tau on the orbit points."""
    return AtomicMeasure.from_points(orbit.points, orbit.map.topology)


def empirical_measure(segment: OrbitSegment) -> AtomicMeasure:
    """Uniform weights on the segment points (duplicates merged)."""
    return AtomicMeasure.from_points(segment.points, segment.map.topology)


# -- test function family --------------------------------------------------------


def _degree_tuples(order: int, signed: tuple):
    """Frequency tuples enumerated by max-degree shell, then lexicographic.

    ``signed[axis]`` is True for periodic axes (frequencies take both signs;
    on line axes only nonnegative powers are distinct).
    """
    m = order // 2
    out = []
    for deg in range(0, m + 1):
        spans = [range(-deg, deg + 1) if s else range(0, deg + 1) for s in signed]
        block = [t for t in product(*spans) if max(abs(v) for v in t) == deg]
        block.sort()
        out.extend(block)
    return out


@dataclass(frozen=True)
class TestFunctionFamily:
    """Ordered moment functions phi_k with weights 2^(-k), sup|phi_k| <= 1."""

    topology: PhaseTopology
    order: int
    frequencies: tuple   # per function, one integer per axis
    lipschitz: tuple     # recorded Lipschitz constant per function

    @staticmethod
    def for_topology(topology: PhaseTopology, order: int = DEFAULT_ORDER) -> "TestFunctionFamily":
        signed = tuple(p is not None for p in topology.periods)
        freqs = tuple(_degree_tuples(order, signed))
        lips = []
        for f in freqs:
            lip = 0.0
            for axis, k in enumerate(f):
                period = topology.periods[axis]
                if period is not None:
                    lip += abs(k) * 2.0 * np.pi / period
                else:
                    lip += abs(k)  # |d/dz z^j| <= j on |z|<=1; tanh^j likewise
            lips.append(lip)
        return TestFunctionFamily(topology=topology, order=order,
                                  frequencies=freqs, lipschitz=tuple(lips))

    def __len__(self) -> int:
        return len(self.frequencies)

    def moments(self, mu: AtomicMeasure) -> np.ndarray:
        """Complex moment vector (int phi_k dmu)_k."""
        theta = mu.atoms[:, 0]
        z = mu.atoms[:, 1]
        w = mu.weights
        cols = []
        for axis, period in enumerate(self.topology.periods):
            vals = theta if axis == 0 else z
            if period is not None:
                cols.append(np.exp(2j * np.pi * vals / period))
            elif self.topology.kind == "sphere_chart":
                cols.append(vals.astype(complex))
            else:
                cols.append(np.tanh(vals).astype(complex))
        out = np.empty(len(self.frequencies), dtype=complex)
        for i, f in enumerate(self.frequencies):
            phi = np.ones(len(w), dtype=complex)
            for axis, k in enumerate(f):
                if k == 0:
                    continue
                period = self.topology.periods[axis]
                if period is not None:
                    phi = phi * cols[axis] ** k
                else:
                    phi = phi * cols[axis] ** abs(k)
            out[i] = np.sum(w * phi)
        return out


def weak_star_distance(mu: AtomicMeasure, nu: AtomicMeasure,
                       family: TestFunctionFamily | None = None) -> float:
    """rho(mu, nu) = sum_k 2^(-k) |moment_k(mu) - moment_k(nu)| (k is 1-based)."""
    if mu.topology != nu.topology:
        raise TopologyMismatch("measures live on different charts")
    if family is None:
        family = TestFunctionFamily.for_topology(mu.topology)
    elif family.topology != mu.topology:
        raise TopologyMismatch("test family built for a different chart")
    diff = np.abs(family.moments(mu) - family.moments(nu))
    w = 0.5 ** np.arange(1, len(diff) + 1)
    return float(np.sum(w * diff))


# -- shift-coded measures ---------------------------------------------------------


@dataclass(frozen=True)
class ShiftMeasure:
    """Stationary measure of a full shift: Bernoulli or 1-step Markov."""

    probabilities: np.ndarray          # stationary vector pi
    transition: np.ndarray | None = None  # row-stochastic P for Markov

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if abs(p.sum() - 1.0) > 1e-12 or np.any(p < 0):
            raise ValueError("probabilities must lie on the simplex")
        if self.transition is not None:
            P = np.asarray(self.transition, dtype=float)
            if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
                raise ValueError("transition matrix must be row-stochastic")
            if np.max(np.abs(p @ P - p)) > 1e-12:
                raise ValueError("probabilities are not stationary for the transition matrix")

    @staticmethod
    def uniform(n_symbols: int) -> "ShiftMeasure":
        return ShiftMeasure(np.full(n_symbols, 1.0 / n_symbols))


def shift_metric_entropy(m: ShiftMeasure, return_time: int = 1) -> float:
    """Entropy per ambient step: Bernoulli/Markov closed form divided by t."""
    if return_time < 1:
        raise ValueError("return time must be >= 1")
    p = m.probabilities
    if m.transition is None:
        terms = -p * np.log(p, where=p > 0, out=np.zeros_like(p))
        return float(terms.sum() / return_time)
    P = m.transition
    logs = np.log(P, where=P > 0, out=np.zeros_like(P))
    return float(-(p[:, None] * P * logs).sum() / return_time)
