"""
토러스 random walk 의 Green 함수 G.

G_ij = g(j - i mod N) 이고 g 는 스펙트럼 공식
    g(d) = (1/N²) Σ_{p≠0} cos(2π p·d / N) / (1 - λ_p),  λ_p = (cos(2πp₁/N) + cos(2πp₂/N)) / 2
로 계산합니다. 이 값은 Abel 정규화된 random walk 합의 극한과 같고,
-¼ Σ_i Δ_ki G_ij = δ_kj - 1/|Λ| 를 만족합니다.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from .errors import InputDomainError
from .lattice import TorusLattice, Vertex, laplacian_matrix, reduced_laplacian

logger = logging.getLogger(__name__)

# 이 크기 이하에서는 이중합을 직접 계산하고, 그보다 크면 FFT 합성곱을 씁니다.
DENSE_QUADRATIC_MAX_VERTICES = 256


@dataclass(frozen=True, eq=False)
class GreenTable:
    """
    변위 d ∈ Z_N² 에 대한 g(d) 표. values[dy, dx] = g((dx, dy)).
    compute_green 이후로는 변경되지 않습니다.
    """

    side_length: int
    values: np.ndarray

    @cached_property
    def lattice(self) -> TorusLattice:
        return TorusLattice(self.side_length)

    @property
    def flat(self) -> np.ndarray:
        """정점 인덱스 v 의 좌표를 변위로 본 g 값 (g(coords(v)))."""
        return self.values.reshape(-1)

    @cached_property
    def matrix(self) -> np.ndarray:
        """밀집 행렬 G_ij (|Λ|×|Λ|)."""
        lat = self.lattice
        n = lat.num_vertices
        v = np.arange(n)
        xs, ys = v % self.side_length, v // self.side_length
        dx = (xs[None, :] - xs[:, None]) % self.side_length
        dy = (ys[None, :] - ys[:, None]) % self.side_length
        mat = self.values[dy, dx]
        mat.flags.writeable = False
        return mat

    def entry(self, i: Vertex, j: Vertex) -> float:
        lat = self.lattice
        i, j = lat.vertex(i), lat.vertex(j)
        (xi, yi), (xj, yj) = lat.coords(i), lat.coords(j)
        n = self.side_length
        return float(self.values[(yj - yi) % n, (xj - xi) % n])


def dual_beta(beta: float) -> float:
    """β* = (4β)^{-1}. 역변환도 같은 식입니다."""
    if beta <= 0:
        raise InputDomainError(f"역온도는 양수여야 합니다 (입력: {beta}).")
    return 1.0 / (4.0 * beta)


def _spectral_weights(n: int) -> np.ndarray:
    p = np.arange(n)
    c = np.cos(2.0 * np.pi * p / n)
    lam = (c[:, None] + c[None, :]) / 2.0
    weights = np.zeros((n, n))
    nonzero = np.ones((n, n), dtype=bool)
    nonzero[0, 0] = False
    # λ_p = -1 (짝수 N 의 (N/2, N/2) 모드) 은 1/(1-λ) = 1/2 로 그대로 들어갑니다.
    weights[nonzero] = 1.0 / (1.0 - lam[nonzero])
    return weights


def compute_green(N: int) -> GreenTable:
    """
    스펙트럼 공식으로 Green 함수 표를 계산합니다.

    Args:
        N: 격자 한 변의 길이 (N >= 2).

    Returns:
        GreenTable: 불변 g(d) 표.
    """
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InputDomainError(f"Green 함수는 N >= 2 에서만 정의됩니다 (입력: {N!r}).")
    weights = _spectral_weights(N)
    # weights 는 p ↦ -p 대칭이므로 역변환 결과는 실수입니다.
    values = np.fft.ifft2(weights).real
    values.flags.writeable = False
    logger.debug("Green 함수 계산 완료 (N=%d, g(0)=%.12f)", N, values[0, 0])
    return GreenTable(side_length=int(N), values=values)


def green_abel(N: int, lam: float = 0.0, t_max: int | None = None) -> GreenTable:
    """
    정의식 Σ_t (P_0(X_t = d) - 1/|Λ|) e^{-λt} 를 직접 더해 만든 대안 oracle.

    짝수/홀수 시간을 두 개씩 묶는 것과 같도록 마지막 항은 절반 가중치로 더합니다.
    λ = 0 이면 짝수 N 의 진동 모드도 Abel 극한(1/2)으로 수렴합니다.

    Args:
        N: 격자 크기.
        lam: Abel 정규화 파라미터 λ >= 0.
        t_max: 더할 시간 단계 수. 기본값은 40·N².
    """
    if N < 2:
        raise InputDomainError(f"Green 함수는 N >= 2 에서만 정의됩니다 (입력: {N!r}).")
    if lam < 0:
        raise InputDomainError(f"λ 는 음수일 수 없습니다 (입력: {lam}).")
    if t_max is None:
        t_max = 40 * N * N
    n_sites = N * N
    prob = np.zeros((N, N))
    prob[0, 0] = 1.0
    acc = np.zeros((N, N))
    damping = 1.0
    for _ in range(t_max):
        acc += (prob - 1.0 / n_sites) * damping
        prob = (
            np.roll(prob, 1, axis=0)
            + np.roll(prob, -1, axis=0)
            + np.roll(prob, 1, axis=1)
            + np.roll(prob, -1, axis=1)
        ) / 4.0
        damping *= np.exp(-lam)
    acc += 0.5 * (prob - 1.0 / n_sites) * damping
    acc.flags.writeable = False
    return GreenTable(side_length=int(N), values=acc)


def potential_diff(G: GreenTable, i: Vertex, j: Vertex) -> float:
    """G_ii - G_ij = g(0) - g(j - i)."""
    return float(G.values[0, 0]) - G.entry(i, j)


def reduced_inverse_entry(G: GreenTable, i: Vertex, j: Vertex) -> float:
    """((Δ_{0^c0^c})^{-1})_ij = -¼ (G_ij - G_i0 - G_0j + G_00)."""
    lat = G.lattice
    i, j = lat.vertex(i), lat.vertex(j)
    if i == 0 or j == 0:
        raise InputDomainError("Δ_{0^c0^c} 의 역행렬 원소는 원점이 아닌 정점에서만 정의됩니다.")
    return -0.25 * (G.entry(i, j) - G.entry(i, 0) - G.entry(0, j) + G.entry(0, 0))


def reduced_inverse_matrix(G: GreenTable) -> np.ndarray:
    """reduced_inverse_entry 를 모든 (i, j ≠ 0) 에 대해 한꺼번에 조립합니다."""
    mat = G.matrix
    inner = mat[1:, 1:] - mat[1:, :1] - mat[:1, 1:] + mat[0, 0]
    return -0.25 * inner


def potentials(G: GreenTable, k) -> np.ndarray:
    """φ_v = Σ_ℓ G_vℓ k_ℓ 를 원형 합성곱으로 계산합니다."""
    n = G.side_length
    grid = np.asarray(k, dtype=float).reshape(n, n)
    phi = np.fft.ifft2(np.fft.fft2(G.values) * np.fft.fft2(grid)).real
    return phi.reshape(-1)


def quadratic_form(G: GreenTable, k) -> float:
    """kᵗ G k. 작은 격자에서는 밀집 이중합, 큰 격자에서는 FFT 합성곱."""
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.size != G.lattice.num_vertices:
        raise InputDomainError(
            f"벡터 길이 {k.size}가 정점 수 {G.lattice.num_vertices}와 다릅니다."
        )
    if k.size <= DENSE_QUADRATIC_MAX_VERTICES:
        return float(k @ G.matrix @ k)
    return float(k @ potentials(G, k))


def potential_profile(G: GreenTable, axis_max: int | None = None) -> list[tuple[int, float]]:
    """첫 번째 축을 따라 잰 G_00 - G_{0,(r,0)} (r = 0..axis_max)."""
    if axis_max is None:
        axis_max = G.side_length // 2
    return [(r, potential_diff(G, 0, (r % G.side_length, 0))) for r in range(axis_max + 1)]


def laplacian_identity_residual(G: GreenTable) -> float:
    """max_{k,j} |-¼ Σ_i Δ_ki G_ij - (δ_kj - 1/|Λ|)|."""
    lat = G.lattice
    n = lat.num_vertices
    lhs = -0.25 * (laplacian_matrix(lat) @ G.matrix)
    return float(np.max(np.abs(lhs - (np.eye(n) - 1.0 / n))))


def reduced_inverse_residual(G: GreenTable) -> float:
    """reduced_inverse_matrix(G) · Δ_{0^c0^c} 의 단위 행렬과의 최대 차이."""
    product = reduced_inverse_matrix(G) @ reduced_laplacian(G.lattice)
    return float(np.max(np.abs(product - np.eye(product.shape[0]))))


def neutral_form_gap(G: GreenTable, k) -> float:
    """
    중성 벡터 k 에 대해 kᵗGk 와 -4 k_{0^c}ᵗ(Δ_{0^c0^c})^{-1}k_{0^c} 의 상대 차이.
    우변은 Cholesky 분해로 푼 선형계에서 얻습니다. 두 값이 모두 0 이면 0.
    """
    k = np.asarray(k, dtype=float).reshape(-1)
    if abs(k.sum()) > 1e-12:
        raise InputDomainError(f"중성 벡터가 아닙니다 (Σk = {k.sum()}).")
    lhs = quadratic_form(G, k)
    free = k[1:]
    neg = -reduced_laplacian(G.lattice).astype(float)
    y = linalg.cho_solve(linalg.cho_factor(neg), free)
    rhs = 4.0 * float(free @ y)
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0.0 else abs(lhs - rhs) / scale
