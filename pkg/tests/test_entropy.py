import numpy as np
import pytest

from symplab import entropy, maps
from symplab.maps import orbit_batch


def naive_greedy(m, n, eps, samples, seed):
    """Reference implementation: sequential first-come packing."""
    starts = m.topology.halton(samples, seed)
    orbits = orbit_batch(m, starts, n)
    accepted = []
    for i in range(samples):
        distinct = True
        for j in accepted:
            d = np.abs(m.topology.displacement(orbits[i, : n + 1],
                                               orbits[j, : n + 1])).max()
            if d <= eps:
                distinct = False
                break
        if distinct:
            accepted.append(i)
    return len(accepted)


@pytest.mark.parametrize("spec, n, eps, samples", [
    ("cat", 5, 0.15, 350),
    ("standard:k=6.0", 4, 0.6, 300),
    ("identity", 3, 0.3, 300),
    ("rotation:alpha=0.7", 6, 0.2, 250),
])
def test_count_matches_naive_greedy(spec, n, eps, samples):
    m = maps.cat_map() if spec == "cat" else __import__("symplab.zoo", fromlist=["resolve"]).resolve(spec)
    assert entropy.count_separated(m, n, eps, samples, seed=11) == \
        naive_greedy(m, n, eps, samples, seed=11)


def test_grid_join_path_matches_brute_force_path():
    # the fast grid join must produce the exact conflict graph
    from symplab.entropy import _conflict_pairs, _exact_conflicts, _greedy_from_pairs
    m = maps.cat_map()
    starts = m.topology.halton(5000, 3)
    orbits = orbit_batch(m, starts, 7)
    pairs_grid = _conflict_pairs(orbits, m.topology, 7, 0.1)
    ii, jj = np.triu_indices(5000, k=1)
    pairs_bf = _exact_conflicts(orbits, m.topology, 7, 0.1, ii, jj)

    def canon(p):
        return set(map(tuple, np.sort(p, axis=1).tolist()))

    assert canon(pairs_grid) == canon(pairs_bf)
    assert _greedy_from_pairs(5000, pairs_grid) == _greedy_from_pairs(5000, pairs_bf)


def test_identity_count_independent_of_n():
    ident = maps.identity_map()
    counts = [entropy.count_separated(ident, n, 0.3, 500, seed=2) for n in (1, 3, 7)]
    assert counts[0] == counts[1] == counts[2]
    assert counts[0] >= 1


def test_count_argument_validation():
    with pytest.raises(ValueError):
        entropy.count_separated(maps.identity_map(), 0, 0.1, 10, 1)
    with pytest.raises(ValueError):
        entropy.count_separated(maps.identity_map(), 1, -0.1, 10, 1)


def test_table_monotonicity_asserted():
    ident = maps.identity_map()
    sched = entropy.EntropySchedule(n_values=(1, 2, 3, 4), eps_values=(0.4, 0.2),
                                    samples=400, seed=5)
    table = entropy.count_table(ident, sched)
    assert np.all(np.diff(table.counts, axis=0) >= 0)
    assert np.all(np.diff(table.counts, axis=1) >= 0)
    bad = entropy.SeparatedCountTable(
        map_name="x", seed=0, samples=10, n_values=(1, 2), eps_values=(0.2, 0.1),
        counts=np.array([[5, 4], [6, 7]]))
    with pytest.raises(AssertionError):
        entropy.SeparatedCountTable(
            map_name="x", seed=0, samples=10, n_values=(1, 2),
            eps_values=(0.2, 0.1), counts=np.array([[5, 4], [3, 7]]))
    del bad


def test_schedule_validation():
    with pytest.raises(ValueError):
        entropy.EntropySchedule(n_values=(1, 2, 3), eps_values=(0.1,), samples=10, seed=0)
    with pytest.raises(ValueError):
        entropy.EntropySchedule(n_values=(1, 2, 3, 4), eps_values=(0.1, 0.2),
                                samples=10, seed=0)


def test_rotation_estimate_is_zero():
    rot = maps.rotation_map(0.7)
    sched = entropy.EntropySchedule(n_values=(2, 4, 6, 8, 10), eps_values=(0.3, 0.2),
                                    samples=2000, seed=9)
    est = entropy.estimate_entropy(rot, sched)
    assert est.value == 0.0


def test_identity_estimate_is_zero():
    ident = maps.identity_map()
    sched = entropy.EntropySchedule(n_values=(1, 2, 3, 4, 5), eps_values=(0.3,),
                                    samples=1500, seed=4)
    est = entropy.estimate_entropy(ident, sched)
    assert est.value == 0.0


def test_cat_growth_rate_visible_at_small_scale():
    # modest budget: the slope tracks log((3+sqrt5)/2) from below
    cat = maps.cat_map()
    sched = entropy.EntropySchedule(n_values=(3, 4, 5, 6, 7), eps_values=(0.1,),
                                    samples=60_000, seed=7)
    est = entropy.estimate_entropy(cat, sched)
    assert 0.75 < est.value <= 1.0


def test_determinism_three_runs():
    cat = maps.cat_map()
    sched = entropy.EntropySchedule(n_values=(3, 4, 5, 6), eps_values=(0.2, 0.1),
                                    samples=3000, seed=21)
    tables = [entropy.count_table(cat, sched).to_csv() for _ in range(3)]
    assert tables[0] == tables[1] == tables[2]


def test_saturation_error_when_no_window_survives():
    ident = maps.identity_map()
    sched = entropy.EntropySchedule(n_values=(1, 2, 3, 4), eps_values=(0.4,),
                                    samples=12, seed=1)
    with pytest.raises(entropy.SaturationError):
        entropy.estimate_entropy(ident, sched)


def test_shift_entropy_closed_forms():
    assert entropy.shift_entropy(2, 1) == np.log(2.0)
    assert abs(entropy.shift_entropy(4, 12) - 0.11552453009332421) < 1e-15
    assert entropy.shift_entropy(2, 2) == np.log(2.0) / 2.0
    assert entropy.shift_entropy(5, 3) * 3 == np.log(5.0)
    with pytest.raises(ValueError):
        entropy.shift_entropy(1, 1)
    with pytest.raises(ValueError):
        entropy.shift_entropy(2, 0)


def test_bound_report_skip_marker():
    from symplab import periodic
    ident = maps.identity_map()
    sched = entropy.EntropySchedule(n_values=(1, 2, 3, 4), eps_values=(0.3,),
                                    samples=800, seed=3)
    est = entropy.estimate_entropy(ident, sched)
    catalog = periodic.find_periodic(ident, 1, grid=8)
    rep = entropy.check_entropy_bound(est, catalog)
    assert rep.skipped and rep.violated is None and rep.bound is None
    assert rep.note == "no hyperbolic orbit found"


def test_bound_report_cat_map():
    from symplab import periodic
    cat = maps.cat_map()
    sched = entropy.EntropySchedule(n_values=(3, 4, 5, 6), eps_values=(0.1,),
                                    samples=30_000, seed=13)
    est = entropy.estimate_entropy(cat, sched)
    catalog = periodic.find_periodic(cat, 2, grid=32)
    rep = entropy.check_entropy_bound(est, catalog, tolerance=0.1)
    assert rep.violated is False
    assert abs(rep.bound - 0.9624236501192069) < 1e-9
    assert rep.equality_gap == abs(est.value - rep.s_value)
