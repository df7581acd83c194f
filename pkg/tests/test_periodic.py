import numpy as np
import pytest

from symplab import maps, periodic
from symplab.zoo import resolve

CAT_CHI = np.log((3.0 + np.sqrt(5.0)) / 2.0)


def brute_force_cat_roots(power):
    """Lattice oracle: fixed points of A^power on the unit torus.

    A linear toral map has |det(A^n - I)| fixed points, located at
    (A^n - I)^{-1} k for integer vectors k inside the image of the square.
    """
    A = np.array([[2, 1], [1, 1]])
    M = np.linalg.matrix_power(A, power) - np.eye(2)
    count = abs(round(np.linalg.det(M)))
    pts = set()
    bound = int(np.ceil(np.abs(M).sum()))
    Minv = np.linalg.inv(M)
    for k1 in range(-bound, bound + 1):
        for k2 in range(-bound, bound + 1):
            x = Minv @ np.array([k1, k2])
            x = np.mod(np.round(x, 12), 1.0)
            pts.add((round(x[0], 9), round(x[1], 9)))
    assert len(pts) == count
    return pts


@pytest.fixture(scope="module")
def cat_catalog():
    return periodic.find_periodic(maps.cat_map(), 4, grid=64)


def test_cat_fixed_point_unique(cat_catalog):
    fixed = [o for o in cat_catalog.orbits if o.tau == 1]
    assert len(fixed) == 1
    assert np.allclose(fixed[0].representative(), (0.0, 0.0), atol=1e-12)


def test_cat_counts_match_lattice_oracle(cat_catalog):
    # |det(A^n - I)| = 1, 5, 16, 45 -> minimal-period points 1, 4, 15, 40
    assert cat_catalog.point_count(1) == 1
    assert cat_catalog.point_count(2) == 4
    assert cat_catalog.point_count(3) == 15
    assert cat_catalog.point_count(4) == 40
    for power in (1, 2):
        oracle = brute_force_cat_roots(power)
        found = {tuple(np.round(p, 9)) for o in cat_catalog.orbits
                 if power % o.tau == 0 for p in o.points}
        assert found == oracle


def test_cat_multipliers_and_chi(cat_catalog):
    fp = cat_catalog.orbits[0]
    lam = (3.0 + np.sqrt(5.0)) / 2.0
    assert np.allclose(sorted(np.abs(fp.multipliers)), [1.0 / lam, lam], atol=1e-12)
    assert all(abs(o.chi - CAT_CHI) < 1e-9 for o in cat_catalog.hyperbolic())
    assert abs(periodic.chi(fp) - 0.9624236501) < 1e-9


def test_cat_residuals_and_multiplier_products(cat_catalog):
    for o in cat_catalog.orbits:
        assert o.residual < 1e-11
        assert abs(np.prod(o.multipliers) - 1.0) < 1e-8
        assert o.chi > 0


def test_s_n_monotone(cat_catalog):
    values = [periodic.s_n(cat_catalog, n) for n in (1, 2, 3, 4)]
    assert all(values[i] <= values[i + 1] + 1e-15 for i in range(3))
    assert abs(values[-1] - CAT_CHI) < 1e-9


def test_standard_map_fixed_point_classification():
    catalog = periodic.find_periodic(maps.standard_map(1.0), 1, grid=64)
    by_point = {tuple(np.round(o.representative(), 6)): o for o in catalog.orbits}
    hyper = by_point[(0.0, 0.0)]
    ellip = by_point[(round(np.pi, 6), 0.0)]
    assert hyper.stability == periodic.HYPERBOLIC and np.isclose(hyper.trace, 3.0)
    assert ellip.stability == periodic.ELLIPTIC and np.isclose(ellip.trace, 1.0)
    assert abs(hyper.chi - CAT_CHI) < 1e-9  # same trace-3 characteristic polynomial
    assert abs(periodic.s_n(catalog) - CAT_CHI) < 1e-9


def test_parabolic_band_reported():
    shear = maps.standard_map(0.0)
    orbit = periodic.classify(shear, [(0.0, 0.0)])
    assert orbit.stability == periodic.PARABOLIC
    assert np.isclose(orbit.trace, 2.0)
    with pytest.raises(periodic.NonHyperbolicError):
        periodic.chi(orbit)


def test_classify_rejects_nonperiodic_points():
    cat = maps.cat_map()
    with pytest.raises(periodic.NotPeriodicError):
        periodic.classify(cat, [(0.3, 0.4)])


def test_chi_of_linear_saddle_model():
    # diag(2, 1/2) on the plane: exponent log 2, sum of positive exponents log 2
    from symplab.topology import PhaseTopology

    def fwd(x):
        return np.stack([2.0 * x[..., 0], 0.5 * x[..., 1]], axis=-1)

    def jac(x):
        return np.broadcast_to(np.diag([2.0, 0.5]), x.shape[:-1] + (2, 2)).copy()

    m = maps.PlanarMap("saddle", PhaseTopology.plane(), fwd, jac)
    orbit = periodic.classify(m, [(0.0, 0.0)])
    assert np.isclose(periodic.chi(orbit), np.log(2.0))
    assert np.isclose(periodic.sum_positive_exponents(orbit), np.log(2.0))


def test_sum_positive_exponents_requires_hyperbolic():
    std = maps.standard_map(1.0)
    elliptic = periodic.classify(std, [(np.pi, 0.0)])
    with pytest.raises(periodic.NonHyperbolicError):
        periodic.sum_positive_exponents(elliptic)


def test_empty_marker_for_maps_without_isolated_orbits():
    catalog = periodic.find_periodic(maps.rotation_map(0.7), 2, grid=16)
    assert catalog.orbits == []
    assert periodic.s_n(catalog) is None


def test_worker_count_does_not_change_output():
    cat = maps.cat_map()
    c1 = periodic.find_periodic(cat, 3, grid=32, workers=1)
    c4 = periodic.find_periodic(cat, 3, grid=32, workers=4)
    assert periodic.catalog_to_csv(c1) == periodic.catalog_to_csv(c4)


def test_catalog_csv_shape():
    catalog = periodic.find_periodic(maps.standard_map(1.0), 1, grid=32)
    text = periodic.catalog_to_csv(catalog)
    lines = text.strip().split("\n")
    assert lines[0] == "period,theta_0,z_0,trace,multiplier_max,chi,stability"
    assert len(lines) == 1 + len(catalog.orbits)
    assert any(line.endswith("elliptic") and line.split(",")[5] == "nan"
               for line in lines[1:])


def test_dedupe_no_shared_points():
    catalog = periodic.find_periodic(maps.cat_map(), 4, grid=64)
    pts = np.vstack([o.points for o in catalog.orbits])
    d = catalog.map.topology.distance(pts[:, None, :], pts[None, :, :])
    d = d + np.eye(len(pts))
    assert d.min() > 1e-6
