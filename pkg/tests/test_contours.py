import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from torus_coulomb import contours
from torus_coulomb.contours import ContourKind, HeightConfig
from torus_coulomb.errors import (
    BudgetExceededError,
    DomainError,
    InputDomainError,
    PreconditionError,
    TorusCoulombError,
    UnsupportedSizeError,
)
from torus_coulomb.lattice import TorusLattice, hamiltonian


def _config(n, raised, height=1, default=0):
    lat = TorusLattice(n)
    x = np.full(lat.num_vertices, default, dtype=np.int64)
    for xy in raised:
        x[lat.index(*xy)] = height
    return HeightConfig(n, x)


def test_height_config_must_be_pinned():
    with pytest.raises(PreconditionError):
        HeightConfig(4, np.ones(16, dtype=int))
    assert HeightConfig.pinned(4, np.ones(16, dtype=int)).heights.sum() == 0


def test_contours_need_side_four():
    x = HeightConfig(3, np.zeros(9, dtype=int))
    with pytest.raises(UnsupportedSizeError):
        contours.boundary_contours(x.lattice, {4})
    with pytest.raises(UnsupportedSizeError):
        contours.enumerate_separating_contours(3, 0, 4, 4)


def test_level_component_of_single_peak():
    x = _config(6, [(2, 2)])
    lat = x.lattice
    assert contours.level_component(x, (2, 2)) == {lat.index(2, 2)}
    assert len(contours.level_component(x, (4, 4))) == 36


def test_level_component_matches_graph_components(rng):
    lat = TorusLattice(6)
    edges = lat.edge_array
    for _ in range(25):
        x = HeightConfig.random(6, rng)
        i = int(rng.integers(36))
        keep = x.heights >= x[i]
        mask = keep[edges[:, 0]] & keep[edges[:, 1]]
        rows, cols = edges[mask, 0], edges[mask, 1]
        graph = csr_matrix((np.ones(rows.size), (rows, cols)), shape=(36, 36))
        _, labels = connected_components(graph, directed=False)
        expected = {v for v in range(36) if keep[v] and labels[v] == labels[i]}
        assert contours.level_component(x, i) == expected


def test_single_vertex_boundary_is_one_plaquette(lat6):
    (c,) = contours.boundary_contours(lat6, {lat6.index(2, 2)})
    assert c.length == 4
    assert c.period == (0, 0)
    assert contours.is_closed(lat6, c)
    assert contours.is_self_avoiding(c)


def test_trivial_sets_have_no_boundary(lat6):
    assert contours.boundary_contours(lat6, set()) == []
    assert contours.boundary_contours(lat6, range(36)) == []


def test_horizontal_ring_has_two_opposite_winding_contours(lat6):
    ring = {lat6.index(x, 2) for x in range(6)}
    found = contours.boundary_contours(lat6, ring)
    assert sorted(c.period for c in found) == [(-6, 0), (6, 0)]
    assert all(c.length == 6 for c in found)


def test_diagonal_touch_joins_through_corner_rule(lat6):
    C = {lat6.index(1, 1), lat6.index(2, 2)}
    (c,) = contours.boundary_contours(lat6, C)
    assert c.length == 8
    assert c.period == (0, 0)
    assert contours.is_self_avoiding(c)
    heads = [e.head for e in c.edges]
    assert heads.count((1, 1)) == 2


def test_random_sets_balance_and_close(lat6, rng):
    for _ in range(50):
        C = set(np.flatnonzero(rng.random(36) < 0.4).tolist())
        edges = contours.boundary_edges(lat6, C)
        if edges:
            assert np.all(np.sum([e.direction for e in edges], axis=0) == 0)
        if not C or len(C) == 36:
            continue
        found = contours.boundary_contours(lat6, C)
        assert sum(c.length for c in found) == len(edges)
        assert all(contours.is_closed(lat6, c) and contours.is_self_avoiding(c) for c in found)


def test_single_peak_is_case_one():
    x = _config(6, [(2, 2)])
    gamma = contours.separating_contour(x, (2, 2), (4, 4))
    assert gamma.kind is ContourKind.CASE1
    assert gamma.length == 4
    assert gamma.inside == {x.lattice.index(2, 2)}
    lowered = contours.lower_map(x, (2, 2), (4, 4))
    assert not lowered.heights.any()
    assert contours.peierls_gap(x, (2, 2), (4, 4)) == 0


def test_band_is_case_two():
    n = 6
    x = _config(n, [(c, r) for c in range(n) for r in (2, 3)])
    gamma = contours.separating_contour(x, (0, 2), (0, 0))
    assert gamma.kind is ContourKind.CASE2
    assert gamma.length == 2 * n
    assert sorted(c.period for c in gamma.contours) == [(-n, 0), (n, 0)]
    assert not contours.lower_map(x, (0, 2), (0, 0)).heights.any()


def test_lowering_repins_when_origin_is_inside():
    x = _config(6, [(2, 2)], height=-1)
    gamma = contours.separating_contour(x, 0, (2, 2))
    assert gamma.kind is ContourKind.CASE1
    assert 0 in gamma.inside
    y = contours.lower_map(x, 0, (2, 2))
    assert y[0] == 0
    assert not y.heights.any()
    assert contours.raise_map(y, gamma.inside).heights.tolist() == x.heights.tolist()


def test_separating_contour_needs_ordered_pair():
    x = _config(6, [(2, 2)])
    with pytest.raises(PreconditionError):
        contours.separating_contour(x, (4, 4), (2, 2))
    with pytest.raises(PreconditionError):
        contours.separating_contour(x, (3, 3), (4, 4))


def test_lowering_removes_exactly_the_contour(rng):
    for _ in range(100):
        x, i, j = contours.random_ordered_sample(6, rng)
        gamma = contours.separating_contour(x, i, j)
        y = contours.lower_map(x, i, j)
        assert contours.edge_identity_violations(x, y, gamma.crossed_edges) == 0
        lat = x.lattice
        assert hamiltonian(lat, x.heights) - hamiltonian(lat, y.heights) >= gamma.length
        assert contours.separates(lat, gamma.contours, i, j)


@pytest.mark.parametrize("n", [4, 6])
def test_verify_sample_passes(n):
    report = contours.verify_sample(n, 300, seed=1)
    assert report.passed, report.to_dict()
    assert report.min_peierls_gap >= 0
    assert sum(report.case_counts.values()) == 300


@pytest.mark.slow
def test_verify_sample_at_full_size():
    for n in (4, 6):
        assert contours.verify_sample(n, 10_000, seed=0).passed


def test_exhaustive_check_on_two_rows():
    # rows 0 and 1 vary over {0, 1}; x_(1,1) = 1 and x_(2,1) = 0 leave 2^5 configurations
    varying = [(x, y) for y in range(2) for x in range(4)]
    report = contours.verify_exhaustive(4, (1, 1), (2, 1), varying=varying)
    assert report.samples == 32
    assert report.injectivity_collisions == 0
    assert report.passed, report.to_dict()


def test_exhaustive_check_rejects_bad_input():
    with pytest.raises(InputDomainError):
        contours.verify_exhaustive(4, (1, 1), (1, 1))
    with pytest.raises(InputDomainError):
        contours.verify_exhaustive(4, (1, 1), (2, 1), low=1, high=0)
    with pytest.raises(BudgetExceededError):
        contours.verify_exhaustive(4, (1, 1), (2, 1), low=-1, high=1)
    with pytest.raises(UnsupportedSizeError):
        contours.verify_exhaustive(3, (1, 1), (2, 1))


@pytest.mark.slow
@pytest.mark.parametrize("i,j,free", [((1, 1), (2, 2), 13), ((1, 0), (0, 0), 14)])
def test_exhaustive_check_on_four_torus(i, j, free):
    report = contours.verify_exhaustive(4, i, j)
    assert report.samples == 2**free
    assert report.injectivity_collisions == 0
    assert report.passed, report.to_dict()


def test_scalar_constants():
    assert contours.phi(3.0) == pytest.approx(0.2388869, abs=1e-6)
    assert contours.m_beta(3.0) == pytest.approx(1.34248, abs=1e-4)
    assert contours.phi(math.log(6.0)) == pytest.approx(30.0)
    assert contours.tail_bound(3.0, 2) == pytest.approx(2 * contours.phi(3.0) ** 2)


def test_m_beta_outside_domain():
    with pytest.raises(DomainError):
        contours.m_beta(1.0)


def test_m_beta_approaches_twice_phi_at_low_temperature():
    ratio = contours.m_beta(10.0) / (2.0 * contours.phi(10.0))
    assert 1.0 <= ratio <= 1.001


def test_contour_series_closed_form():
    z = 0.3
    direct = sum(3 * k * k * z**k for k in range(4, 400))
    assert contours.contour_series(z) == pytest.approx(direct, rel=1e-12)
    assert contours.contour_series(0.5) <= 480 * 0.5**4
    with pytest.raises(DomainError):
        contours.contour_series(1.0)


def test_case_bounds():
    assert contours.case1_bound(4) == pytest.approx(2 / 3 * 4 * 81)
    assert contours.case2_bound(6, 11) == 0.0
    assert contours.case2_bound(6, 12) == pytest.approx(64 * 36 * 3**10)


def test_enumeration_counts_plaquettes():
    case1, case2 = contours.enumerate_separating_contours_by_case(6, (0, 0), (3, 3), 4)
    assert case1[4] == 2
    assert all(v == 0 for k, v in case1.items() if k < 4)
    assert not any(case2.values())


def test_enumeration_short_lengths_are_empty():
    counts = contours.enumerate_separating_contours(4, 0, 5, 3)
    assert counts == {1: 0, 2: 0, 3: 0}


def test_enumeration_finds_straight_winding_pairs():
    case1, case2 = contours.enumerate_separating_contours_by_case(4, (0, 0), (1, 0), 8)
    assert case2[8] == 3
    assert all(case2[k] == 0 for k in range(1, 8))


def test_enumeration_within_counting_bound():
    counts = contours.enumerate_separating_contours(6, (0, 0), (3, 3), 8)
    for length, count in counts.items():
        if length < 4:
            assert count == 0
        else:
            assert count <= contours.contour_count_bound(length)
    beta = math.log(6.0) + 1.0
    assert contours.peierls_sum(beta, counts) <= contours.phi(beta)



def test_adjacent_pair_counts_within_bound():
    case1, case2 = contours.enumerate_separating_contours_by_case(4, (0, 0), (1, 0), 10)
    counts = contours.enumerate_separating_contours(4, (0, 0), (1, 0), 10)
    assert sorted(counts) == list(range(1, 11))
    assert all(counts[length] == 0 for length in range(1, 4))
    for length in range(4, 11):
        assert counts[length] == case1[length] + case2[length]
        assert counts[length] <= contours.contour_count_bound(length)
    assert case2[8] == 3
    assert sum(counts.values()) > 0


def test_enumeration_errors():
    with pytest.raises(InputDomainError):
        contours.enumerate_separating_contours(4, 3, 3, 6)
    with pytest.raises(BudgetExceededError):
        contours.enumerate_separating_contours(8, 0, 9, 14)


def test_contour_errors_share_base_class():
    assert issubclass(UnsupportedSizeError, TorusCoulombError)
    assert issubclass(DomainError, ValueError)
