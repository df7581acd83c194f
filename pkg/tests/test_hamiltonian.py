import numpy as np
import pytest
from scipy.linalg import expm

from symplab import hamiltonian as ham
from symplab import maps
from symplab.topology import DomainError, PhaseTopology


def test_bump_plateau_and_support():
    assert ham.bump(0.0) == 1.0
    assert ham.bump(0.5) == 1.0
    assert ham.bump(0.9) == 0.0
    assert ham.bump(2.0 / 3.0) == 0.0


def test_bump_transition_value():
    # the symmetric smooth step makes the band midpoint split evenly
    v = float(ham.bump(7.0 / 12.0))
    assert 0.0 < v < 1.0
    mirrored = 0.5 + 2.0 / 3.0 - 7.0 / 12.0  # = 7/12: self-mirrored midpoint
    assert abs(v + float(ham.bump(mirrored)) - 1.0) < 1e-12
    assert abs(v - 0.5) < 1e-12


def test_bump_monotone_decreasing():
    x = np.linspace(0.5, 2.0 / 3.0, 400)
    b = ham.bump(x)
    assert np.all(np.diff(b) <= 0)
    assert np.all(ham.bump_d1(x[1:-1]) <= 0)


def test_bump_derivatives_match_finite_differences():
    x = np.linspace(0.51, 0.65, 31)
    h = 1e-6
    fd1 = (ham.bump(x + h) - ham.bump(x - h)) / (2 * h)
    fd2 = (ham.bump(x + h) - 2 * ham.bump(x) + ham.bump(x - h)) / h**2
    assert np.max(np.abs(ham.bump_d1(x) - fd1)) < 1e-4
    assert np.max(np.abs(ham.bump_d2(x) - fd2)) < 1e-2


def test_hamiltonian_pure_regions():
    th = np.linspace(0, 2 * np.pi, 9)
    assert np.allclose(ham.hamiltonian(th, 0.0), -np.cos(th))
    assert np.allclose(ham.hamiltonian(th, 0.9), 0.9)
    gt, gz = ham.grad_hamiltonian(np.pi, 0.0)
    assert abs(gt) < 1e-12 and abs(gz) < 1e-12


def test_hamiltonian_domain_error():
    with pytest.raises(DomainError):
        ham.hamiltonian(0.0, 1.0)


def test_field_values():
    xt, xz = ham.field(0.3, 0.9)
    assert np.isclose(xt, 1.0) and np.isclose(xz, 0.0)
    xt, xz = ham.field(np.pi, 0.0)
    assert abs(xt) < 1e-12 and abs(xz) < 1e-12
    xt, xz = ham.field(0.0, 0.25)
    assert np.isclose(xt, 0.25) and abs(xz) < 1e-12


def test_gradient_matches_finite_differences():
    # C1 smoothness of the blend: analytic gradient vs central differences
    rng = np.random.default_rng(2)
    th = rng.uniform(0, 2 * np.pi, 200)
    z = rng.uniform(-0.95, 0.95, 200)
    h = 1e-6
    gt, gz = ham.grad_hamiltonian(th, z)
    fd_t = (ham.hamiltonian(th + h, z) - ham.hamiltonian(th - h, z)) / (2 * h)
    fd_z = (ham.hamiltonian(th, z + h) - ham.hamiltonian(th, z - h)) / (2 * h)
    assert np.max(np.abs(gt - fd_t)) < 1e-6
    assert np.max(np.abs(gz - fd_z)) < 1e-6


def test_field_is_symplectic_gradient():
    # omega(X_H, .) = dH with omega = dtheta ^ dz: X = (H_z, -H_theta)
    rng = np.random.default_rng(3)
    th = rng.uniform(0, 2 * np.pi, 100)
    z = rng.uniform(-0.9, 0.9, 100)
    gt, gz = ham.grad_hamiltonian(th, z)
    xt, xz = ham.field(th, z)
    assert np.max(np.abs(xt - gz)) < 1e-8
    assert np.max(np.abs(xz + gt)) < 1e-8


def test_rotation_region_translation():
    out = ham.integrate(np.array([[1.0, 0.8], [4.0, -0.75]]), 2.5, 1e-3)
    assert np.allclose(out, [[3.5, 0.8], [6.5, -0.75]], atol=1e-12)


def test_equilibrium_is_fixed():
    out = ham.integrate(np.array([np.pi, 0.0]), 5.0, 1e-3)
    assert np.allclose(out, [np.pi, 0.0], atol=1e-12)


def test_saddle_multipliers_match_matrix_exponential():
    # oracle: linearized pendulum field [[0,1],[1,0]] at (pi, 0)
    oracle = np.sort(np.abs(np.linalg.eigvals(expm(np.array([[0.0, 1.0], [1.0, 0.0]])))))
    _, M = ham.integrate(np.array([np.pi, 0.0]), 1.0, 1e-3, with_jacobian=True)
    mults = np.sort(np.abs(np.linalg.eigvals(M)))
    assert np.max(np.abs(mults - oracle)) < 1e-4


def test_energy_conservation_and_symplecticity():
    rng = np.random.default_rng(42)
    top = PhaseTopology.sphere_chart()
    pts = top.sample(40, rng)
    out, M = ham.integrate(pts, 10.0, 1e-3, with_jacobian=True)
    drift = np.abs(ham.hamiltonian(out[:, 0], out[:, 1])
                   - ham.hamiltonian(pts[:, 0], pts[:, 1]))
    assert np.max(drift) < 1e-8
    dets = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    assert np.max(np.abs(dets - 1.0)) < 1e-7


def test_flow_property_and_reversibility():
    rng = np.random.default_rng(7)
    pts = PhaseTopology.sphere_chart().sample(30, rng)
    for s, t in ((0.5, 1.0), (1.0, 2.0), (2.0, 0.5)):
        a = ham.integrate(pts, s + t, 1e-3)
        b = ham.integrate(ham.integrate(pts, t, 1e-3), s, 1e-3)
        assert np.max(np.abs(a - b)) < 1e-7
    back = ham.integrate(ham.integrate(pts, 3.0, 1e-3), -3.0, 1e-3)
    assert np.max(np.abs(back - pts)) < 1e-8


def test_order2_scheme_available_but_less_accurate():
    rng = np.random.default_rng(11)
    pts = PhaseTopology.sphere_chart().sample(30, rng)
    out2 = ham.integrate(pts, 10.0, 1e-3, scheme="midpoint2")
    d2 = np.max(np.abs(ham.hamiltonian(out2[:, 0], out2[:, 1])
                       - ham.hamiltonian(pts[:, 0], pts[:, 1])))
    assert d2 < 1e-3  # coarse sanity; the order-4 default is the precise one
    with pytest.raises(ValueError):
        ham.integrate(pts, 1.0, 1e-3, scheme="rk4")


def test_time_t_map_is_planar_map():
    m = ham.sphere_pendulum(t=1.0, step=1e-2)
    assert m.topology.kind == "sphere_chart"
    out = maps.evaluate(m, (1.0, 0.8))
    assert np.allclose(out, (2.0, 0.8), atol=1e-10)
    with pytest.raises(ValueError):
        ham.sphere_pendulum(t=0.0)
    with pytest.raises(ValueError):
        ham.integrate(np.array([0.0, 0.0]), 1.0, step=2.0)


def test_extra_blend_band_equilibria_exist():
    # the blend between the pendulum and the height function necessarily
    # stalls the rotation inside the transition band at theta = pi
    z = np.linspace(0.5, 2.0 / 3.0, 4001)
    _, hz = ham.grad_hamiltonian(np.pi, z)
    assert hz.min() < 0.0 < hz.max()
