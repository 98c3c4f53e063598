"""
N×N 주기 격자(토러스)의 기하.

정점 인덱스는 행 우선 v = y*N + x, 좌표 (x, y) ∈ [0, N)². 원점은 v = 0.
쌍대 정점은 쌍대 칸의 남서쪽 꼭짓점 정수 좌표로 저장하고 (1/2, 1/2) 오프셋은 암묵적입니다.
원시 간선 id: 2v 는 v 의 동쪽 간선, 2v+1 은 v 의 북쪽 간선 (총 2N² 개).
"""

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import InputDomainError

Vertex = Union[int, Sequence[int]]

# 이웃 순서: 동, 북, 서, 남
NEIGHBOR_OFFSETS = ((1, 0), (0, 1), (-1, 0), (0, -1))


class DirectedDualEdge(NamedTuple):
    """방향이 있는 쌍대 간선. 진행 방향의 왼쪽에 높은 값이 옵니다."""

    tail: tuple[int, int]
    head: tuple[int, int]
    direction: tuple[int, int]


@dataclass(frozen=True)
class TorusLattice:
    side_length: int

    def __post_init__(self):
        if not isinstance(self.side_length, (int, np.integer)) or self.side_length < 2:
            raise InputDomainError(
                f"격자 크기 N은 2 이상의 정수여야 합니다 (입력: {self.side_length!r})."
            )

    @property
    def num_vertices(self) -> int:
        return self.side_length * self.side_length

    @property
    def num_edges(self) -> int:
        return 2 * self.num_vertices

    def index(self, x: int, y: int) -> int:
        """좌표 (x, y)를 주기적으로 감아 정점 인덱스로 변환합니다."""
        n = self.side_length
        return (y % n) * n + (x % n)

    def coords(self, v: int) -> tuple[int, int]:
        n = self.side_length
        return (v % n, v // n)

    def vertex(self, v: Vertex) -> int:
        """정수 인덱스 또는 (x, y) 좌표를 검증된 정점 인덱스로 변환합니다."""
        n = self.side_length
        if isinstance(v, (int, np.integer)):
            if not 0 <= v < self.num_vertices:
                raise InputDomainError(
                    f"정점 인덱스 {v}가 범위 [0, {self.num_vertices})를 벗어났습니다."
                )
            return int(v)
        try:
            x, y = (int(c) for c in v)
        except (TypeError, ValueError):
            raise InputDomainError(f"정점으로 해석할 수 없는 값입니다: {v!r}")
        if not (0 <= x < n and 0 <= y < n):
            raise InputDomainError(f"좌표 {(x, y)}가 [0, {n})² 범위를 벗어났습니다.")
        return y * n + x

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """(N², 4) 배열. 각 행은 동, 북, 서, 남 이웃."""
        n = self.side_length
        ys, xs = np.divmod(np.arange(self.num_vertices), n)
        cols = [((ys + dy) % n) * n + (xs + dx) % n for dx, dy in NEIGHBOR_OFFSETS]
        table = np.stack(cols, axis=1).astype(np.int64)
        table.flags.writeable = False
        return table

    @cached_property
    def edge_array(self) -> np.ndarray:
        """(2N², 2) 배열. 행 2v 는 (v, 동쪽 이웃), 행 2v+1 은 (v, 북쪽 이웃)."""
        table = self.neighbor_table
        v = np.arange(self.num_vertices)
        edges = np.empty((self.num_edges, 2), dtype=np.int64)
        edges[0::2, 0] = v
        edges[0::2, 1] = table[:, 0]
        edges[1::2, 0] = v
        edges[1::2, 1] = table[:, 1]
        edges.flags.writeable = False
        return edges


def neighbors(lat: TorusLattice, v: Vertex) -> list[int]:
    """동, 북, 서, 남 순서의 네 주기적 이웃을 반환합니다."""
    return [int(u) for u in lat.neighbor_table[lat.vertex(v)]]


def laplacian_row(lat: TorusLattice, k: Vertex) -> dict[int, int]:
    """Δ_{k,·} 를 희소 사전으로 반환합니다. N=2 에서는 중복 이웃 항이 누적됩니다."""
    k = lat.vertex(k)
    row = {k: -4}
    for u in lat.neighbor_table[k]:
        row[int(u)] = row.get(int(u), 0) + 1
    return row


def laplacian_matrix(lat: TorusLattice) -> np.ndarray:
    n = lat.num_vertices
    delta = np.zeros((n, n), dtype=np.int64)
    delta[np.arange(n), np.arange(n)] = -4
    for d in range(4):
        np.add.at(delta, (np.arange(n), lat.neighbor_table[:, d]), 1)
    return delta


def reduced_laplacian(lat: TorusLattice) -> np.ndarray:
    """원점 행/열을 제거한 Δ_{0^c0^c} (음의 정부호)."""
    return laplacian_matrix(lat)[1:, 1:]


def hamiltonian(lat: TorusLattice, x) -> int:
    """H(x) = Σ_{간선} (x_i - x_j)². 간선은 중복도까지 포함합니다."""
    x = np.asarray(x, dtype=np.int64)
    edges = lat.edge_array
    grad = x[edges[:, 0]] - x[edges[:, 1]]
    return int(np.dot(grad, grad))


def _edge_between(lat: TorusLattice, l: int, m: int) -> int:
    table = lat.neighbor_table
    candidates = []
    if table[l, 0] == m:
        candidates.append(2 * l)
    if table[m, 0] == l:
        candidates.append(2 * m)
    if table[l, 1] == m:
        candidates.append(2 * l + 1)
    if table[m, 1] == l:
        candidates.append(2 * m + 1)
    if not candidates:
        raise InputDomainError(
            f"정점 {lat.coords(l)} 와 {lat.coords(m)} 는 인접하지 않습니다."
        )
    # N=2 에서는 두 정점 사이에 간선이 둘이므로 id 가 작은 쪽을 고정
    return min(candidates)


def oriented_dual_edge(lat: TorusLattice, edge_id: int, first_higher: bool) -> DirectedDualEdge:
    """
    원시 간선 edge_id 를 가로지르는 쌍대 간선을 방향과 함께 반환합니다.

    Args:
        lat: 격자.
        edge_id: 원시 간선 id (2v: 동쪽, 2v+1: 북쪽).
        first_higher: 간선의 첫 정점 v 쪽 값이 더 크면 True.
    """
    n = lat.side_length
    v, kind = divmod(int(edge_id), 2)
    x, y = lat.coords(v)
    if kind == 0:
        # 세로 쌍대 간선 (x+1/2, y-1/2) - (x+1/2, y+1/2)
        low, high = (x, (y - 1) % n), (x, y)
        if first_higher:
            return DirectedDualEdge(low, high, (0, 1))
        return DirectedDualEdge(high, low, (0, -1))
    # 가로 쌍대 간선 (x-1/2, y+1/2) - (x+1/2, y+1/2)
    left, right = ((x - 1) % n, y), (x, y)
    if first_higher:
        return DirectedDualEdge(right, left, (-1, 0))
    return DirectedDualEdge(left, right, (1, 0))


def crossed_edge(lat: TorusLattice, e: DirectedDualEdge) -> int:
    """쌍대 간선이 가로지르는 원시 간선 id."""
    n = lat.side_length
    dx, dy = e.direction
    if dx == 0:
        x, y_low = e.tail if dy > 0 else e.head
        return 2 * lat.index(x, y_low + 1)
    x_left, y = e.tail if dx > 0 else e.head
    return 2 * lat.index(x_left + 1, y) + 1


def dual_edge_of(
    lat: TorusLattice, l: Vertex, m: Vertex, x_l: int, x_m: int
) -> Optional[DirectedDualEdge]:
    """
    {l, m} 을 가로지르는 쌍대 간선을, 높은 값이 왼쪽에 오도록 방향을 정해 반환합니다.

    Returns:
        DirectedDualEdge, 또는 x_l == x_m 이면 화살표가 없으므로 None.
    """
    l, m = lat.vertex(l), lat.vertex(m)
    edge_id = _edge_between(lat, l, m)
    if x_l == x_m:
        return None
    first = edge_id // 2
    higher = l if x_l > x_m else m
    return oriented_dual_edge(lat, edge_id, first_higher=(higher == first))


def dual_edges_crossing(lat: TorusLattice, x) -> list[tuple[DirectedDualEdge, int]]:
    """배치 x 의 모든 화살표. 각 간선마다 (쌍대 간선, |x_l - x_m| 개수)."""
    x = np.asarray(x, dtype=np.int64)
    edges = lat.edge_array
    grad = x[edges[:, 0]] - x[edges[:, 1]]
    arrows = []
    for edge_id in np.flatnonzero(grad):
        arrows.append(
            (oriented_dual_edge(lat, edge_id, bool(grad[edge_id] > 0)), int(abs(grad[edge_id])))
        )
    return arrows
