import numpy as np
import pytest

from symplab import maps
from symplab.topology import DomainError
from symplab.zoo import MapSpecError, resolve


def finite_difference_jacobian(m, x, h=1e-6):
    """Central-difference oracle for the analytic Jacobians."""
    x = np.asarray(x, dtype=float)
    J = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        J[:, j] = (m.forward_fn(x + e) - m.forward_fn(x - e)) / (2 * h)
    return J


def test_cat_map_point():
    cat = maps.cat_map()
    assert np.allclose(maps.evaluate(cat, (0.1, 0.2)), (0.4, 0.3))


def test_identity_map_fixes_everything():
    ident = maps.identity_map()
    rng = np.random.default_rng(0)
    pts = ident.topology.sample(50, rng)
    assert np.allclose(maps.evaluate(ident, pts), pts)


def test_standard_map_k0_is_shear():
    shear = maps.standard_map(0.0)
    assert np.allclose(maps.evaluate(shear, (1.0, 0.5)), (1.5, 0.5))


def test_cat_jacobian_constant():
    cat = maps.cat_map()
    assert np.array_equal(maps.jacobian(cat, (0.7, 0.3)), [[2.0, 1.0], [1.0, 1.0]])


def test_standard_jacobian_at_origin():
    std = maps.standard_map(1.0)
    assert np.allclose(maps.jacobian(std, (0.0, 0.0)), [[2.0, 1.0], [1.0, 1.0]])


@pytest.mark.parametrize("spec, x", [
    ("standard:k=1.0", (0.3, 0.8)),
    ("standard:k=6.0", (2.1, 4.0)),
    ("rotation:alpha=0.7", (1.0, 0.2)),
    ("cat", (0.15, 0.6)),
])
def test_jacobians_match_finite_differences(spec, x):
    m = resolve(spec)
    J = maps.jacobian(m, x)
    J_fd = finite_difference_jacobian(m, x)
    assert np.max(np.abs(J - J_fd)) < 1e-8


def test_orbit_identity_and_cat_fixed_point():
    ident = maps.identity_map()
    seg = maps.orbit(ident, (0.2, 0.9), 5)
    assert len(seg) == 6
    assert np.allclose(seg.points, seg.points[0])
    cat = maps.cat_map()
    seg = maps.orbit(cat, (0.0, 0.0), 3)
    assert np.allclose(seg.points, 0.0)
    assert seg.residual() < 1e-12


def test_rotation_four_periodic():
    rot = maps.rotation_map(np.pi / 2)
    seg = maps.orbit(rot, (0.0, 0.3), 4)
    assert np.allclose(seg.points[-1], (0.0, 0.3), atol=1e-12)


def test_cocycle_cat_square():
    cat = maps.cat_map()
    co = maps.cocycle(cat, (0.3, 0.7), 2)
    assert np.allclose(co.dense(), [[5.0, 3.0], [3.0, 2.0]])
    assert co.log_scale == 0.0


def test_cocycle_identity():
    ident = maps.identity_map()
    co = maps.cocycle(ident, (0.5, 0.5), 7)
    assert np.allclose(co.dense(), np.eye(2))


def test_cocycle_chain_rule_identity():
    # cocycle(m+n, x) = cocycle(n, f^m x) . cocycle(m, x) within 1e-8 relative
    for spec in ("cat", "standard:k=1.0", "standard:k=6.0", "rotation:alpha=0.7"):
        m = resolve(spec)
        rng = np.random.default_rng(5)
        for x in m.topology.sample(20, rng):
            mm, nn = 3, 4
            left = maps.cocycle(m, x, mm + nn).dense()
            mid = maps.orbit(m, x, mm).points[-1]
            right = maps.cocycle(m, mid, nn).dense() @ maps.cocycle(m, x, mm).dense()
            assert np.max(np.abs(left - right)) <= 1e-8 * max(1.0, np.max(np.abs(left)))


def test_cocycle_determinant_stays_unimodular():
    std = maps.standard_map(6.0)
    co = maps.cocycle(std, (2.0, 1.0), 40)
    assert abs(co.det() - 1.0) < 1e-8 * 40


def test_cocycle_log_scale_guards_overflow():
    # multipliers grow like lambda^n; the dense product would overflow
    cat = maps.cat_map()
    co = maps.cocycle(cat, (0.0, 0.0), 600)
    assert np.isfinite(co.matrix).all()
    assert co.log_scale > 0.0
    lam = (3.0 + np.sqrt(5.0)) / 2.0
    growth = np.log(np.max(np.abs(co.multipliers())))
    assert abs(growth - 600 * np.log(lam)) < 1e-6 * 600


def test_check_symplectic_zoo_and_planted_failure():
    assert maps.check_symplectic(maps.cat_map(), 1000, seed=1) == 0.0
    assert maps.check_symplectic(maps.standard_map(3.0), 1000, seed=1) < 1e-12
    assert np.isclose(maps.check_symplectic(maps.zscale_map(0.5), 100, seed=1), 0.5)


def test_symplectic_residual_across_zoo():
    # |det Df - 1| < 1e-9 on 1000 seeded points per map
    for spec in ("cat", "standard:k=1.0", "standard:k=6.0", "identity",
                 "rotation:alpha=0.7"):
        assert maps.check_symplectic(resolve(spec), 1000, seed=3) < 1e-9


def test_sphere_chart_domain_error_propagates():
    rot = maps.rotation_map(0.5)
    pend_like = maps.PlanarMap("probe", maps.PhaseTopology.sphere_chart(),
                               rot.forward_fn, rot.jacobian_fn)
    with pytest.raises(DomainError):
        maps.evaluate(pend_like, (0.0, 1.0))


def test_spec_string_round_trip():
    m = resolve("standard:K=1.5")  # keys are case-insensitive, stored lowercase
    assert m.parameters == {"k": 1.5}
    assert m.spec_string() == "standard:k=1.5"
    assert resolve("cat").spec_string() == "cat"


def test_spec_string_errors():
    with pytest.raises(MapSpecError):
        resolve("nosuchmap")
    with pytest.raises(MapSpecError):
        resolve("standard:q=2")
    with pytest.raises(MapSpecError):
        resolve("rotation")  # alpha is required
    with pytest.raises(MapSpecError):
        resolve("standard:k=abc")
