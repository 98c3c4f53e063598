"""
Peierls contour 기계 장치.

- level_component: C_i = {k : x_k >= x_i} 의 i 를 포함하는 최근접 연결 성분
- boundary_contours: ∂C 를 닫힌 contour 들로 분해 (C 가 진행 방향 왼쪽, NW/SE 규칙)
- separating_contour: γ_{i,j}(x) 와 L_i(γ_{i,j})
- lower_map / raise_map: F_{i,j} 와 고정된 γ 위에서의 역사상
- enumerate_separating_contours: 길이 ℓ 이하의 분리 contour 전수 열거
- phi, m_beta 등 스칼라 상한
"""

import enum
import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import (
    BudgetExceededError,
    DomainError,
    InputDomainError,
    PreconditionError,
    TorusCoulombError,
    UnsupportedSizeError,
)
from .lattice import (
    NEIGHBOR_OFFSETS,
    DirectedDualEdge,
    TorusLattice,
    Vertex,
    crossed_edge,
    hamiltonian,
    oriented_dual_edge,
)

logger = logging.getLogger(__name__)

MIN_CONTOUR_SIDE = 4
DEFAULT_ENUMERATION_BUDGET = 10**8
EXHAUSTIVE_BUDGET = 1 << 16

# NW/SE 분리 규칙: 4 간선이 만나는 쌍대 정점에서 들어온 방향 → 나가는 방향.
# 북에서 들어오면 서로, 남에서 들어오면 동으로, 서에서 들어오면 북으로, 동에서 들어오면 남으로.
CORNER_RULE = {(0, -1): (-1, 0), (0, 1): (1, 0), (1, 0): (0, 1), (-1, 0): (0, -1)}
_DIR_INDEX = {d: k for k, d in enumerate(NEIGHBOR_OFFSETS)}
_CORNER_RULE_IDX = {_DIR_INDEX[a]: _DIR_INDEX[b] for a, b in CORNER_RULE.items()}


class ContourKind(enum.Enum):
    CASE1 = "case1"  # 감기지 않는 contour 하나
    CASE2 = "case2"  # 토러스를 감는 contour 쌍


@dataclass(frozen=True, eq=False)
class HeightConfig:
    """원점에 고정된 정수 높이 배치 x (x_0 = 0)."""

    side_length: int
    heights: np.ndarray

    def __post_init__(self):
        n = self.side_length
        x = np.asarray(self.heights, dtype=np.int64).reshape(-1)
        if x.size != n * n:
            raise InputDomainError(f"높이 배열 길이 {x.size}가 N²={n * n}과 다릅니다.")
        if x[0] != 0:
            raise PreconditionError(f"높이 배치는 원점에서 0이어야 합니다 (x_0 = {x[0]}).")
        x = x.copy()
        x.flags.writeable = False
        object.__setattr__(self, "heights", x)

    @classmethod
    def pinned(cls, side_length: int, heights) -> "HeightConfig":
        """임의의 높이 배열을 x - x_0 으로 다시 고정해 만듭니다."""
        x = np.asarray(heights, dtype=np.int64).reshape(-1)
        return cls(side_length, x - x[0])

    @classmethod
    def random(cls, side_length: int, rng: np.random.Generator, low: int = -3, high: int = 3) -> "HeightConfig":
        x = rng.integers(low, high + 1, size=side_length * side_length)
        return cls.pinned(side_length, x)

    @property
    def lattice(self) -> TorusLattice:
        return TorusLattice(self.side_length)

    def __getitem__(self, v: int) -> int:
        return int(self.heights[v])


@dataclass(frozen=True)
class Contour:
    """닫힌 방향 쌍대 간선 열과 주기 p(γ) = Σ ē."""

    edges: tuple[DirectedDualEdge, ...]
    period: tuple[int, int]

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def is_winding(self) -> bool:
        return self.period != (0, 0)


@dataclass(frozen=True)
class SeparatingContour:
    kind: ContourKind
    contours: tuple[Contour, ...]
    inside: frozenset[int]
    crossed_edges: frozenset[int] = field(repr=False)

    @property
    def length(self) -> int:
        return sum(c.length for c in self.contours)


def _require_contour_size(lat: TorusLattice) -> None:
    if lat.side_length < MIN_CONTOUR_SIDE:
        raise UnsupportedSizeError(
            f"contour 구성은 N >= {MIN_CONTOUR_SIDE} 에서만 지원됩니다 (N={lat.side_length})."
        )


def _as_config(x, side_length: Optional[int] = None) -> HeightConfig:
    if isinstance(x, HeightConfig):
        return x
    arr = np.asarray(x, dtype=np.int64).reshape(-1)
    n = side_length or int(round(math.sqrt(arr.size)))
    return HeightConfig(n, arr)


def _edge_id(lat: TorusLattice, v: int, d: int) -> int:
    """정점 v 에서 방향 d (동, 북, 서, 남) 로 가는 원시 간선 id."""
    table = lat.neighbor_table
    if d == 0:
        return 2 * v
    if d == 1:
        return 2 * v + 1
    if d == 2:
        return 2 * int(table[v, 2])
    return 2 * int(table[v, 3]) + 1


def reachable(lat: TorusLattice, start: int, blocked: Iterable[int] = ()) -> frozenset[int]:
    """blocked 간선을 지우고 start 에서 도달 가능한 정점 집합."""
    blocked = set(blocked)
    table = lat.neighbor_table
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for d in range(4):
            u = int(table[v, d])
            if u in seen or _edge_id(lat, v, d) in blocked:
                continue
            seen.add(u)
            queue.append(u)
    return frozenset(seen)


def level_component(x: HeightConfig, i: Vertex) -> frozenset[int]:
    """C_i: {k : x_k >= x_i} 에서 i 를 포함하는 연결 성분 (flood fill)."""
    x = _as_config(x)
    lat = x.lattice
    i = lat.vertex(i)
    level = x[i]
    table = lat.neighbor_table
    heights = x.heights
    seen = {i}
    queue = deque([i])
    while queue:
        v = queue.popleft()
        for u in table[v]:
            u = int(u)
            if u not in seen and heights[u] >= level:
                seen.add(u)
                queue.append(u)
    return frozenset(seen)


def boundary_edges(lat: TorusLattice, C: Iterable[int]) -> list[DirectedDualEdge]:
    """C 의 경계 쌍대 간선들. C 가 진행 방향 왼쪽에 오도록 방향을 정합니다."""
    mask = np.zeros(lat.num_vertices, dtype=bool)
    mask[list(C)] = True
    edges = lat.edge_array
    cut = np.flatnonzero(mask[edges[:, 0]] != mask[edges[:, 1]])
    return [oriented_dual_edge(lat, e, bool(mask[edges[e, 0]])) for e in cut]


def boundary_contours(lat: TorusLattice, C: Iterable[int]) -> list[Contour]:
    """
    ∂C 를 닫힌 contour 들로 분해합니다.

    네 경계 간선이 만나는 쌍대 정점에서는 NW/SE 규칙(CORNER_RULE)으로 이어 붙여
    두 가닥이 교차하지 않게 합니다.

    Args:
        lat: N >= 4 인 격자.
        C: 정점 집합.

    Returns:
        Contour 리스트. C 가 비었거나 Λ 전체이면 빈 리스트.
    """
    _require_contour_size(lat)
    C = frozenset(C)
    if not C or len(C) == lat.num_vertices:
        return []
    outgoing: dict[tuple[int, int], list[DirectedDualEdge]] = {}
    all_edges = boundary_edges(lat, C)
    for e in all_edges:
        outgoing.setdefault(e.tail, []).append(e)

    used: set[DirectedDualEdge] = set()
    contours = []
    for first in all_edges:
        if first in used:
            continue
        chain = [first]
        used.add(first)
        current = first
        while True:
            options = outgoing[current.head]
            if len(options) == 1:
                nxt = options[0]
            else:
                wanted = CORNER_RULE[current.direction]
                nxt = next(e for e in options if e.direction == wanted)
            if nxt == first:
                break
            if nxt in used:
                raise TorusCoulombError(f"경계 추적 중 간선 {nxt}를 두 번 지났습니다.")
            used.add(nxt)
            chain.append(nxt)
            current = nxt
        px = sum(e.direction[0] for e in chain)
        py = sum(e.direction[1] for e in chain)
        contours.append(Contour(tuple(chain), (px, py)))
    return contours


def is_closed(lat: TorusLattice, contour: Contour) -> bool:
    edges = contour.edges
    return all(edges[k].head == edges[(k + 1) % len(edges)].tail for k in range(len(edges)))


def is_self_avoiding(contour: Contour) -> bool:
    """
    변형 후 자기 회피: 두 번 지나는 쌍대 정점은 두 통과가 모두 NW/SE 규칙을 따라야 합니다.
    """
    edges = contour.edges
    passes: dict[tuple[int, int], list[tuple]] = {}
    for k, e in enumerate(edges):
        nxt = edges[(k + 1) % len(edges)]
        passes.setdefault(e.head, []).append((e.direction, nxt.direction))
    for visits in passes.values():
        if len(visits) > 2:
            return False
        if len(visits) == 2 and any(CORNER_RULE[a] != b for a, b in visits):
            return False
    return True


def _crossed(lat: TorusLattice, contours: Iterable[Contour]) -> frozenset[int]:
    return frozenset(crossed_edge(lat, e) for c in contours for e in c.edges)


def separates(lat: TorusLattice, contours: Iterable[Contour], a: Vertex, b: Vertex) -> bool:
    """contour 들이 가로지르는 간선을 지웠을 때 a 와 b 가 끊어지면 True."""
    a, b = lat.vertex(a), lat.vertex(b)
    return b not in reachable(lat, a, _crossed(lat, contours))


def separating_contour(x: HeightConfig, i: Vertex, j: Vertex) -> SeparatingContour:
    """
    x ∈ Ω_{i,j} (x_i > x_j) 에서 i 와 j 를 가르는 γ_{i,j}(x) 를 찾습니다.

    Case 1: 감기지 않는 경계 contour 중 정확히 하나가 i 와 j 를 가릅니다.
    Case 2: 감기는 두 contour 의 합집합이 i 와 j 를 가릅니다.
    """
    x = _as_config(x)
    lat = x.lattice
    _require_contour_size(lat)
    i, j = lat.vertex(i), lat.vertex(j)
    if x[i] <= x[j]:
        raise PreconditionError(
            f"x_i > x_j 이어야 합니다 (x_{lat.coords(i)} = {x[i]}, x_{lat.coords(j)} = {x[j]})."
        )
    contours = boundary_contours(lat, level_component(x, i))
    separating = []
    for c in contours:
        if c.is_winding:
            continue
        blocked = _crossed(lat, (c,))
        side = reachable(lat, i, blocked)
        if j not in side:
            separating.append((c, side, blocked))
    if len(separating) == 1:
        c, side, blocked = separating[0]
        return SeparatingContour(ContourKind.CASE1, (c,), side, blocked)

    winding = tuple(c for c in contours if c.is_winding)
    if not separating and winding:
        blocked = _crossed(lat, winding)
        side = reachable(lat, i, blocked)
        if j not in side:
            return SeparatingContour(ContourKind.CASE2, winding, side, blocked)
    raise TorusCoulombError(
        f"γ_(i,j) 를 결정할 수 없습니다: 분리 contour {len(separating)}개, 감긴 contour {len(winding)}개."
    )


def lower_map(x: HeightConfig, i: Vertex, j: Vertex) -> HeightConfig:
    """F_{i,j}(x)_l = x_l - 1_{L_i}(l) - x_0 + 1_{L_i}(0)."""
    x = _as_config(x)
    gamma = separating_contour(x, i, j)
    return _shift_inside(x, gamma.inside, -1)


def raise_map(y: HeightConfig, inside: Iterable[int]) -> HeightConfig:
    """고정된 γ 에 대한 F_{i,j} 의 역사상 y_l + 1_{L}(l) - 1_{L}(0)."""
    return _shift_inside(_as_config(y), inside, +1)


def _shift_inside(x: HeightConfig, inside: Iterable[int], step: int) -> HeightConfig:
    y = x.heights.copy()
    y[list(inside)] += step
    return HeightConfig.pinned(x.side_length, y)


def peierls_gap(x: HeightConfig, i: Vertex, j: Vertex) -> int:
    """H(x) - H(F_{i,j}(x)) - |γ_{i,j}(x)|. Peierls 부등식은 이 값이 0 이상임을 말합니다."""
    x = _as_config(x)
    gamma = separating_contour(x, i, j)
    lowered = _shift_inside(x, gamma.inside, -1)
    lat = x.lattice
    return hamiltonian(lat, x.heights) - hamiltonian(lat, lowered.heights) - gamma.length


def edge_identity_violations(x: HeightConfig, y: HeightConfig, crossed: Iterable[int]) -> int:
    """|y_l - y_m| = |x_l - x_m| - 1{{l,m}* ∈ γ} 가 깨진 간선 수."""
    lat = x.lattice
    edges = lat.edge_array
    on_gamma = np.zeros(lat.num_edges, dtype=np.int64)
    on_gamma[list(crossed)] = 1
    gx = np.abs(x.heights[edges[:, 0]] - x.heights[edges[:, 1]])
    gy = np.abs(y.heights[edges[:, 0]] - y.heights[edges[:, 1]])
    return int(np.count_nonzero(gy != gx - on_gamma))


# ---------------------------------------------------------------------------
# 스칼라 상한


def phi(beta: float) -> float:
    """φ(β) = 480 (3e^{-β})⁴."""
    return 480.0 * (3.0 * math.exp(-beta)) ** 4


def m_beta(beta: float) -> float:
    """M_β = 2φ(1+φ)/(1-φ)³. φ(β) >= 1 이면 DomainError."""
    p = phi(beta)
    if p >= 1.0:
        raise DomainError(f"M_β 는 φ(β) < 1 에서만 정의됩니다 (β={beta}, φ={p:.6g}).")
    return 2.0 * p * (1.0 + p) / (1.0 - p) ** 3


def tail_bound(beta: float, k: int) -> float:
    """sup P(|x_i - x_j| >= k) <= 2φ(β)^k."""
    return 2.0 * phi(beta) ** k


def case1_bound(length: int) -> float:
    return 2.0 / 3.0 * length * 3.0**length


def case2_bound(N: int, length: int) -> float:
    return 64.0 * N * N * 3.0 ** (length - 2) if length >= 2 * N else 0.0


def contour_count_bound(length: int) -> float:
    """|{γ ∈ Γ_{i,j} : |γ| = ℓ}| <= 3ℓ²3^ℓ."""
    return 3.0 * length * length * 3.0**length


def contour_series(z: float) -> float:
    """Σ_{ℓ>=4} 3ℓ² z^ℓ = 3z⁴(9z² - 23z + 16)/(1 - z)³."""
    if not 0.0 <= z < 1.0:
        raise DomainError(f"급수는 0 <= z < 1 에서만 수렴합니다 (z={z}).")
    return 3.0 * z**4 * (9.0 * z * z - 23.0 * z + 16.0) / (1.0 - z) ** 3


def peierls_sum(beta: float, counts: dict[int, int]) -> float:
    """Σ_ℓ counts[ℓ] e^{-βℓ}."""
    return float(sum(c * math.exp(-beta * length) for length, c in counts.items()))


# ---------------------------------------------------------------------------
# 분리 contour 전수 열거


@dataclass
class _Loop:
    length: int
    period: tuple[int, int]
    crossed: frozenset[int]
    passes: dict[int, list[tuple[int, int]]]


class _DualWalker:
    """쌍대 격자 위 닫힌 trail (NW/SE 규칙을 따르는 한 번의 자기 접촉 허용) 열거기."""

    def __init__(self, lat: TorusLattice, max_len: int):
        self.lat = lat
        self.max_len = max_len
        n = lat.side_length
        nv = lat.num_vertices
        self.step = lat.neighbor_table
        # 쌍대 정점 v 에서 방향 d 로 갈 때 가로지르는 원시 간선
        self.step_edge = np.empty((nv, 4), dtype=np.int64)
        for v in range(nv):
            x, y = lat.coords(v)
            self.step_edge[v, 0] = 2 * lat.index(x + 1, y) + 1
            self.step_edge[v, 1] = 2 * lat.index(x, y + 1)
            self.step_edge[v, 2] = 2 * lat.index(x, y) + 1
            self.step_edge[v, 3] = 2 * lat.index(x, y)
        coords = np.array([lat.coords(v) for v in range(nv)])
        diff = np.abs(coords[:, None, :] - coords[None, :, :])
        self.dist = np.minimum(diff, n - diff).sum(axis=2)

    def loops(self) -> dict[frozenset[int], _Loop]:
        found: dict[frozenset[int], _Loop] = {}
        for start in range(self.lat.num_vertices):
            for d0 in range(4):
                self._walk_from(start, d0, found)
        return found

    def _walk_from(self, start: int, d0: int, found: dict) -> None:
        step, step_edge, dist, max_len = self.step, self.step_edge, self.dist, self.max_len
        used: list[int] = []
        used_set: set[int] = set()
        passes: dict[int, list[tuple[int, int]]] = {}
        mid_start: list[tuple[int, int]] = []
        dirs: list[int] = []

        def record(d_close: int) -> None:
            key = frozenset(used_set)
            if key in found:
                return
            px = sum(NEIGHBOR_OFFSETS[d][0] for d in dirs)
            py = sum(NEIGHBOR_OFFSETS[d][1] for d in dirs)
            loop_passes = {v: list(p) for v, p in passes.items()}
            loop_passes.setdefault(start, []).append((d_close, d0))
            loop_passes[start].extend(mid_start)
            found[key] = _Loop(len(used), (px, py), key, loop_passes)

        def go(v: int, d: int) -> None:
            e = int(step_edge[v, d])
            w = int(step[v, d])
            used.append(e)
            used_set.add(e)
            dirs.append(d)
            length = len(used)
            if w == start:
                if not mid_start or _CORNER_RULE_IDX[d] == d0:
                    record(d)
                if not mid_start and length < max_len:
                    d_out = _CORNER_RULE_IDX[d]
                    e_out = int(step_edge[w, d_out])
                    if e_out not in used_set and length + 1 + dist[int(step[w, d_out]), start] <= max_len:
                        mid_start.append((d, d_out))
                        go(w, d_out)
                        mid_start.pop()
            elif w > start and length + dist[w, start] <= max_len:
                visits = passes.get(w)
                if visits is None:
                    for d_out in range(4):
                        e_out = int(step_edge[w, d_out])
                        if e_out in used_set:
                            continue
                        if length + 1 + dist[int(step[w, d_out]), start] > max_len:
                            continue
                        passes[w] = [(d, d_out)]
                        go(w, d_out)
                    passes.pop(w, None)
                elif len(visits) == 1 and _CORNER_RULE_IDX[visits[0][0]] == visits[0][1]:
                    d_out = _CORNER_RULE_IDX[d]
                    e_out = int(step_edge[w, d_out])
                    if e_out not in used_set and length + 1 + dist[int(step[w, d_out]), start] <= max_len:
                        visits.append((d, d_out))
                        go(w, d_out)
                        visits.pop()
            used.pop()
            used_set.discard(e)
            dirs.pop()

        go(start, d0)


def _passes_compatible(a: _Loop, b: _Loop) -> bool:
    for v, pa in a.passes.items():
        pb = b.passes.get(v)
        if pb is None:
            continue
        both = pa + pb
        if len(both) > 2 or any(_CORNER_RULE_IDX[p] != q for p, q in both):
            return False
    return True


def enumerate_separating_contours_by_case(
    N: int, i: Vertex, j: Vertex, max_len: int, budget: Optional[int] = DEFAULT_ENUMERATION_BUDGET
) -> tuple[dict[int, int], dict[int, int]]:
    """
    길이 ℓ <= max_len 인 분리 contour 를 Case 1 과 Case 2 (감기는 쌍) 로 나누어 셉니다.

    Returns:
        (case1 개수, case2 개수). 각각 길이 → 개수.
    """
    lat = TorusLattice(N)
    _require_contour_size(lat)
    i, j = lat.vertex(i), lat.vertex(j)
    if i == j:
        raise InputDomainError("서로 다른 두 정점 i, j 가 필요합니다.")
    estimate = lat.num_vertices * 4 * 3 ** max(max_len - 1, 0)
    if budget is not None and estimate > budget:
        raise BudgetExceededError(estimate, budget, f"contour 열거 (N={N}, ℓ<={max_len})")

    case1 = {length: 0 for length in range(1, max_len + 1)}
    case2 = {length: 0 for length in range(1, max_len + 1)}
    if max_len < 4:
        return case1, case2

    loops = _DualWalker(lat, max_len).loops()
    winding = []
    for loop in loops.values():
        if loop.period != (0, 0):
            if loop.length + N <= max_len:
                winding.append(loop)
            continue
        if j not in reachable(lat, i, loop.crossed):
            case1[loop.length] += 1

    for a in range(len(winding)):
        for b in range(a + 1, len(winding)):
            la, lb = winding[a], winding[b]
            total = la.length + lb.length
            if total > max_len:
                continue
            if la.period not in (lb.period, (-lb.period[0], -lb.period[1])):
                continue
            if la.crossed & lb.crossed or not _passes_compatible(la, lb):
                continue
            if j not in reachable(lat, i, la.crossed | lb.crossed):
                case2[total] += 1
    logger.debug("contour 열거 N=%d ℓ<=%d: 닫힌 고리 %d개, 감긴 고리 %d개", N, max_len, len(loops), len(winding))
    return case1, case2


def enumerate_separating_contours(
    N: int, i: Vertex, j: Vertex, max_len: int, budget: Optional[int] = DEFAULT_ENUMERATION_BUDGET
) -> dict[int, int]:
    """길이 → 분리 contour (또는 감긴 쌍) 개수."""
    case1, case2 = enumerate_separating_contours_by_case(N, i, j, max_len, budget)
    return {length: case1[length] + case2[length] for length in case1}


# ---------------------------------------------------------------------------
# 무작위 배치 위 성질 검사


@dataclass
class ContourCheckReport:
    side_length: int
    samples: int
    seed: int
    edge_identity_failures: int = 0
    energy_failures: int = 0
    winding_failures: int = 0
    balance_failures: int = 0
    closure_failures: int = 0
    inverse_failures: int = 0
    injectivity_collisions: int = 0
    case_counts: dict = field(default_factory=lambda: {"case1": 0, "case2": 0})
    min_peierls_gap: Optional[int] = None

    @property
    def passed(self) -> bool:
        return not (
            self.edge_identity_failures
            or self.energy_failures
            or self.winding_failures
            or self.balance_failures
            or self.closure_failures
            or self.inverse_failures
            or self.injectivity_collisions
        )

    def to_dict(self) -> dict:
        return {
            "side_length": self.side_length,
            "samples": self.samples,
            "seed": self.seed,
            "edge_identity_failures": self.edge_identity_failures,
            "energy_failures": self.energy_failures,
            "winding_failures": self.winding_failures,
            "balance_failures": self.balance_failures,
            "closure_failures": self.closure_failures,
            "inverse_failures": self.inverse_failures,
            "injectivity_collisions": self.injectivity_collisions,
            "case_counts": dict(self.case_counts),
            "min_peierls_gap": self.min_peierls_gap,
            "passed": self.passed,
        }


def random_ordered_sample(
    N: int, rng: np.random.Generator, low: int = -3, high: int = 3
) -> tuple[HeightConfig, int, int]:
    """x_i > x_j 를 만족하는 (x, i, j) 를 하나 뽑습니다."""
    n = N * N
    while True:
        x = HeightConfig.random(N, rng, low, high)
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        if x[i] == x[j]:
            continue
        if x[i] < x[j]:
            i, j = j, i
        return x, i, j


def _check_config(
    report: ContourCheckReport, lat: TorusLattice, x: HeightConfig, i: int, j: int, images: dict
) -> None:
    component = level_component(x, i)
    contours = boundary_contours(lat, component)

    balance = np.sum([e.direction for e in boundary_edges(lat, component)], axis=0)
    if np.any(balance != 0):
        report.balance_failures += 1
    if not all(is_closed(lat, c) and is_self_avoiding(c) for c in contours):
        report.closure_failures += 1
    periods = [c.period for c in contours if c.is_winding]
    if len(periods) not in (0, 2) or (
        len(periods) == 2 and (periods[0][0] + periods[1][0], periods[0][1] + periods[1][1]) != (0, 0)
    ):
        report.winding_failures += 1

    gamma = separating_contour(x, i, j)
    report.case_counts[gamma.kind.value] += 1
    y = _shift_inside(x, gamma.inside, -1)
    report.edge_identity_failures += edge_identity_violations(x, y, gamma.crossed_edges) > 0
    gap = hamiltonian(lat, x.heights) - hamiltonian(lat, y.heights) - gamma.length
    if gap < 0:
        report.energy_failures += 1
    report.min_peierls_gap = gap if report.min_peierls_gap is None else min(report.min_peierls_gap, gap)
    if not np.array_equal(raise_map(y, gamma.inside).heights, x.heights):
        report.inverse_failures += 1
    # 같은 γ 위에서 F 의 상이 겹치면 단사성 위반
    key = (gamma.crossed_edges, (i, j), y.heights.tobytes())
    previous = images.setdefault(key, x.heights.tobytes())
    if previous != x.heights.tobytes():
        report.injectivity_collisions += 1


def _log_report(report: ContourCheckReport, what: str) -> None:
    logger.info(
        "contour %s N=%d, 배치 %d개: %s (case1=%d, case2=%d)",
        what, report.side_length, report.samples, "통과" if report.passed else "실패",
        report.case_counts["case1"], report.case_counts["case2"],
    )


def verify_sample(N: int, samples: int, seed: int = 0, low: int = -3, high: int = 3) -> ContourCheckReport:
    """
    무작위 배치에서 간선 항등식, Peierls 부등식, 감긴 contour 의 쌍 구조, balance 식,
    역사상과 단사성을 검사합니다.
    """
    lat = TorusLattice(N)
    _require_contour_size(lat)
    rng = np.random.default_rng(seed)
    report = ContourCheckReport(side_length=N, samples=samples, seed=seed)
    images: dict = {}
    for _ in range(samples):
        x, i, j = random_ordered_sample(N, rng, low, high)
        _check_config(report, lat, x, i, j, images)
    _log_report(report, "표본 검사")
    return report


def verify_exhaustive(
    N: int,
    i: Vertex,
    j: Vertex,
    low: int = 0,
    high: int = 1,
    varying: Optional[Iterable[Vertex]] = None,
    budget: int = EXHAUSTIVE_BUDGET,
) -> ContourCheckReport:
    """
    varying 정점(기본: 원점 밖 전부)의 높이를 [low, high] 에서 모두 돌려 x_i > x_j 인 배치를
    빠짐없이 검사합니다. 나머지 정점은 low (원점은 0) 로 둡니다.
    고정된 (i, j, γ) 마다 F_{i,j} 의 상이 겹치지 않는지가 핵심입니다.
    """
    lat = TorusLattice(N)
    _require_contour_size(lat)
    i, j = lat.vertex(i), lat.vertex(j)
    if i == j:
        raise InputDomainError("i 와 j 는 서로 다른 정점이어야 합니다.")
    if low > high:
        raise InputDomainError(f"높이 범위가 비어 있습니다 ([{low}, {high}]).")
    free = sorted({lat.vertex(v) for v in varying} - {0}) if varying is not None else list(range(1, lat.num_vertices))
    total = (high - low + 1) ** len(free)
    if total > budget:
        raise BudgetExceededError(total, budget, "배치 전수 검사")

    base = np.full(lat.num_vertices, low, dtype=np.int64)
    base[0] = 0
    report = ContourCheckReport(side_length=N, samples=0, seed=0)
    images: dict = {}
    for values in itertools.product(range(low, high + 1), repeat=len(free)):
        heights = base.copy()
        heights[free] = values
        if heights[i] <= heights[j]:
            continue
        report.samples += 1
        _check_config(report, lat, HeightConfig(N, heights), i, j, images)
    _log_report(report, "전수 검사")
    return report
