import numpy as np
import pytest

from torus_coulomb.errors import InputDomainError
from torus_coulomb.lattice import (
    DirectedDualEdge,
    TorusLattice,
    crossed_edge,
    dual_edge_of,
    dual_edges_crossing,
    hamiltonian,
    laplacian_matrix,
    laplacian_row,
    neighbors,
    oriented_dual_edge,
    reduced_laplacian,
)


def test_index_wraps_periodically(lat4):
    assert lat4.index(0, 0) == 0
    assert lat4.index(4, 0) == 0
    assert lat4.index(-1, 0) == 3
    assert lat4.index(1, -1) == 13
    assert lat4.coords(13) == (1, 3)


@pytest.mark.parametrize("bad", [1, 0, -3, 2.5])
def test_lattice_rejects_small_or_non_integer_side(bad):
    with pytest.raises(InputDomainError):
        TorusLattice(bad)


@pytest.mark.parametrize("bad", [16, -1, (4, 0), (0, -1), "ab"])
def test_vertex_out_of_range(lat4, bad):
    with pytest.raises(InputDomainError):
        lat4.vertex(bad)


def test_neighbors_order_east_north_west_south(lat4):
    assert neighbors(lat4, 0) == [1, 4, 3, 12]
    assert neighbors(lat4, (3, 3)) == [12, 3, 14, 11]


def test_laplacian_row_accumulates_on_small_torus():
    lat = TorusLattice(2)
    assert laplacian_row(lat, 0) == {0: -4, 1: 2, 2: 2}


@pytest.mark.parametrize("n", [2, 3, 5])
def test_laplacian_rows_sum_to_zero(n):
    delta = laplacian_matrix(TorusLattice(n))
    assert np.all(delta.sum(axis=1) == 0)
    assert np.array_equal(delta, delta.T)


def test_reduced_laplacian_is_negative_definite(lat4):
    eig = np.linalg.eigvalsh(reduced_laplacian(lat4).astype(float))
    assert eig.max() < 0


@pytest.mark.parametrize("n", [2, 3, 6])
def test_hamiltonian_matches_laplacian_form(n, rng):
    lat = TorusLattice(n)
    x = rng.integers(-3, 4, size=lat.num_vertices)
    x[0] = 0
    assert hamiltonian(lat, x) == -int(x @ laplacian_matrix(lat) @ x)


def test_flat_configuration_has_no_arrows(lat4):
    assert dual_edge_of(lat4, 0, 1, 2, 2) is None
    assert dual_edges_crossing(lat4, np.zeros(16, dtype=int)) == []


def test_single_peak_arrows_keep_peak_on_the_left(lat4):
    peak = lat4.index(1, 1)
    east = dual_edge_of(lat4, peak, lat4.index(2, 1), 1, 0)
    assert east == DirectedDualEdge((1, 0), (1, 1), (0, 1))
    north = dual_edge_of(lat4, peak, lat4.index(1, 2), 1, 0)
    assert north == DirectedDualEdge((1, 1), (0, 1), (-1, 0))
    west = dual_edge_of(lat4, peak, lat4.index(0, 1), 1, 0)
    assert west == DirectedDualEdge((0, 1), (0, 0), (0, -1))
    south = dual_edge_of(lat4, peak, lat4.index(1, 0), 1, 0)
    assert south == DirectedDualEdge((0, 0), (1, 0), (1, 0))


def test_reversing_heights_reverses_arrow(lat4):
    a = dual_edge_of(lat4, 5, 6, 3, 1)
    b = dual_edge_of(lat4, 5, 6, 1, 3)
    assert (a.tail, a.head) == (b.head, b.tail)
    assert a.direction == tuple(-c for c in b.direction)


def test_non_adjacent_vertices_rejected(lat4):
    with pytest.raises(InputDomainError):
        dual_edge_of(lat4, 0, 5, 1, 0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_crossed_edge_inverts_orientation(n):
    lat = TorusLattice(n)
    for edge_id in range(lat.num_edges):
        for first_higher in (True, False):
            assert crossed_edge(lat, oriented_dual_edge(lat, edge_id, first_higher)) == edge_id


def test_arrow_multiplicity_is_height_gap(lat4):
    x = np.zeros(16, dtype=int)
    x[5] = 3
    arrows = dual_edges_crossing(lat4, x)
    assert len(arrows) == 4
    assert all(count == 3 for _, count in arrows)
