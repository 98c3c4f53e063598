"""
두 분배함수의 절단(truncated) 합 oracle.

높이 모델은 x_0 = 0 으로 고정된 자유 좌표 x_{0^c} ∈ [-K_x, K_x]^{|Λ|-1} 위에서,
Coulomb gas 는 m_{0^c} ∈ [-K_m, K_m]^{|Λ|-1}, m_0 = -Σ m_ℓ 위에서 더합니다.
어느 쪽이든 에너지는 자유 좌표의 양의 정부호 이차형식 zᵗ A z 이므로, 하나의 열거 엔진
(_box_sums) 이 바깥 좌표는 odometer 로 돌고 안쪽 좌표 격자의 이차형식은 한 번만 계산합니다.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy import linalg
from tqdm import tqdm

from .errors import BudgetExceededError, InputDomainError
from .greens import GreenTable, compute_green, dual_beta, potential_diff
from .lattice import TorusLattice, Vertex, reduced_laplacian
from .utils import run_in_pool

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**9
INNER_BLOCK_ROWS = 1 << 21
PROGRESS_INTERVALS_PER_WORKER = 8
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TruncationSpec:
    """
    무한합의 절단 설정.

    Attributes:
        height_cutoff: 높이 |x_ℓ| <= K_x.
        charge_cutoff: 전하 |m_ℓ| <= K_m (ℓ ≠ 0).
        budget: 허용되는 Boltzmann 인자 평가 횟수.
        budget_override: True 이면 예산 검사를 건너뜁니다.
    """

    height_cutoff: int = 0
    charge_cutoff: int = 0
    budget: int = DEFAULT_BUDGET
    budget_override: bool = False

    def __post_init__(self):
        if self.height_cutoff < 0 or self.charge_cutoff < 0:
            raise InputDomainError(
                f"cutoff 는 음수일 수 없습니다 (K_x={self.height_cutoff}, K_m={self.charge_cutoff})."
            )

    def check(self, evaluations: int, what: str) -> None:
        if not self.budget_override and evaluations > self.budget:
            raise BudgetExceededError(evaluations, self.budget, what)


@dataclass
class BoxSums:
    """
    절단된 상자 위의 가중합. w = exp(-zᵗAz), p = Pᵗz (사영).

    tail_mass 는 상자 밖 질량 Σ_{z∉box} w 의 Gaussian 비교 상한,
    tail_second 는 Σ_{z∉box} |z|² w 의 상한입니다.
    """

    evaluations: int
    z: float
    linear: np.ndarray
    quadratic: np.ndarray
    exceed: np.ndarray
    tail_mass: float = 0.0
    tail_second: float = 0.0

    def mean(self, q: int = 0) -> float:
        return float(self.linear[q] / self.z)

    def second_moment(self, q: int = 0) -> float:
        return float(self.quadratic[q] / self.z)

    def second_moment_error(self, norm_sq: float, q: int = 0) -> float:
        """E[(lᵗz)²] 의 절단 오차 상한. (lᵗz)² <= |l|²|z|² 를 씁니다."""
        return (norm_sq * self.tail_second + self.second_moment(q) * self.tail_mass) / self.z


@dataclass
class DualityReport:
    side_length: int
    beta: float
    beta_star: float
    height_cutoff: int
    charge_cutoff: int
    lhs: float
    prefactor: float
    rhs: float
    relative_gap: float
    lhs_tail: float
    rhs_tail: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CrossIdentityReport:
    """E*[U²] = (4/β*)(G_ii - G_ij) - (4/β*²) E_β[O] 의 각 항."""

    side_length: int
    beta_star: float
    beta: float
    i: int
    j: int
    e_u2: float
    e_o: float
    delta_g: float
    predicted_u2: float
    residual: float
    tail_u2: float
    tail_o: float
    tail_bound: float = field(default=0.0)

    def to_dict(self) -> dict:
        return asdict(self)


def _odometer(radix: int, length: int, start: int, stop: int) -> Iterator[np.ndarray]:
    """혼합 진법 카운터. start..stop-1 번째 숫자열을 재귀 없이 차례로 돌려줍니다."""
    digits = np.zeros(length, dtype=np.int64)
    rest = start
    for pos in range(length - 1, -1, -1):
        rest, digits[pos] = divmod(rest, radix)
    for _ in range(start, stop):
        yield digits
        pos = length - 1
        while pos >= 0:
            digits[pos] += 1
            if digits[pos] < radix:
                break
            digits[pos] = 0
            pos -= 1


def _inner_split(n_free: int, radix: int) -> int:
    if radix == 1:
        return n_free
    return min(n_free, max(1, int(math.log(INNER_BLOCK_ROWS) / math.log(radix))))


def _interval_sums(
    A: np.ndarray,
    cutoff: int,
    projections: np.ndarray,
    thresholds: Sequence[float],
    start: int,
    stop: int,
    progress: bool,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    n_free = A.shape[0]
    radix = 2 * cutoff + 1
    n_inner = _inner_split(n_free, radix)
    n_outer = n_free - n_inner

    grid = np.indices((radix,) * n_inner).reshape(n_inner, -1).T.astype(float) - cutoff
    a_ii = A[n_outer:, n_outer:]
    a_oi = A[:n_outer, n_outer:]
    a_oo = A[:n_outer, :n_outer]
    q_inner = np.einsum("ri,ij,rj->r", grid, a_ii, grid)
    p_inner = grid @ projections[n_outer:]
    p_outer = projections[:n_outer]

    n_proj = projections.shape[1]
    z = 0.0
    linear = np.zeros(n_proj)
    quadratic = np.zeros(n_proj)
    exceed = np.zeros((len(thresholds), n_proj))

    outer = _odometer(radix, n_outer, start, stop)
    if progress:
        outer = tqdm(outer, total=stop - start, desc="열거", leave=False)
    for digits in outer:
        a = digits.astype(float) - cutoff
        energy = q_inner + 2.0 * (grid @ (a @ a_oi)) + float(a @ a_oo @ a)
        w = np.exp(-energy)
        proj = p_inner + a @ p_outer
        z += float(w.sum())
        linear += w @ proj
        quadratic += w @ (proj * proj)
        for t, k in enumerate(thresholds):
            exceed[t] += w @ (np.abs(proj) >= k - 1e-9)
    return z, linear, quadratic, exceed


def _series_tails(lam: float, cutoff: int) -> tuple[float, float, float, float]:
    """θ = Σ_t e^{-λt²}, θ2 = Σ_t t² e^{-λt²} 와 |t| > cutoff 부분."""
    t_max = cutoff + 2 + int(math.ceil(math.sqrt(800.0 / lam)))
    t = np.arange(cutoff + 1, t_max + 1, dtype=float)
    w = np.exp(-lam * t * t)
    out_mass = 2.0 * float(w.sum())
    out_second = 2.0 * float((t * t * w).sum())
    t_in = np.arange(-cutoff, cutoff + 1, dtype=float)
    w_in = np.exp(-lam * t_in * t_in)
    return float(w_in.sum()), out_mass, float((t_in * t_in * w_in).sum()), out_second


def gaussian_tail_estimate(lam_min: float, cutoff: int, dim: int) -> tuple[float, float]:
    """
    A >= λ_min I 일 때 상자 밖 질량의 Gaussian 비교 상한.

    Returns:
        (Σ_{z∉box} e^{-λ|z|²}, Σ_{z∉box} |z|² e^{-λ|z|²})
    """
    theta_in, theta_out, second_in, second_out = _series_tails(lam_min, cutoff)
    theta = theta_in + theta_out
    # θ^n - θ_K^n = (θ - θ_K) Σ_a θ^a θ_K^{n-1-a}
    geo = sum(theta**a * theta_in ** (dim - 1 - a) for a in range(dim))
    mass = theta_out * geo
    geo_m1 = sum(theta**a * theta_in ** (dim - 2 - a) for a in range(dim - 1)) if dim > 1 else 0.0
    second = dim * (second_out * theta ** (dim - 1) + (second_in) * theta_out * geo_m1)
    return mass, second


def _box_sums(
    A: np.ndarray,
    cutoff: int,
    projections: np.ndarray,
    trunc: TruncationSpec,
    what: str,
    thresholds: Sequence[float] = (),
    workers: int = 1,
    progress: bool = False,
) -> BoxSums:
    n_free = A.shape[0]
    radix = 2 * cutoff + 1
    evaluations = radix**n_free
    trunc.check(evaluations, what)
    n_outer = n_free - _inner_split(n_free, radix)
    outer_total = radix**n_outer

    pooled = workers > 1
    # 여러 작업자일 때는 구간을 잘게 나눠 완료 수로 진행률을 보인다
    n_intervals = workers * PROGRESS_INTERVALS_PER_WORKER if pooled and progress else workers
    bounds = np.linspace(0, outer_total, max(1, min(n_intervals, outer_total)) + 1).astype(int)
    jobs = [
        (A, cutoff, projections, tuple(thresholds), int(lo), int(hi), progress and not pooled)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    logger.debug("%s: 평가 %d회, 구간 %d개", what, evaluations, len(jobs))
    parts = run_in_pool(
        _interval_sums, jobs, workers=workers, kind="thread", progress=what if progress and pooled else None
    )

    z = 0.0
    linear = np.zeros(projections.shape[1])
    quadratic = np.zeros(projections.shape[1])
    exceed = np.zeros((len(thresholds), projections.shape[1]))
    for pz, pl, pq, pe in parts:
        z += pz
        linear += pl
        quadratic += pq
        exceed += pe

    lam_min = float(linalg.eigvalsh(A)[0])
    tail_mass, tail_second = gaussian_tail_estimate(lam_min, cutoff, n_free)
    return BoxSums(evaluations, z, linear, quadratic, exceed, tail_mass, tail_second)


def height_form(lat: TorusLattice, beta: float) -> np.ndarray:
    """βH(x) = xᵗ A x 인 자유 좌표 행렬 A = β(-Δ_{0^c0^c})."""
    if beta <= 0:
        raise InputDomainError(f"β 는 양수여야 합니다 (입력: {beta}).")
    return beta * (-reduced_laplacian(lat)).astype(float)


def coulomb_form(G: GreenTable, beta_star: float) -> np.ndarray:
    """π²β* mᵗGm (m_0 = -Σ m_ℓ) 을 자유 좌표 m_{0^c} 의 행렬로 쓴 것."""
    if beta_star <= 0:
        raise InputDomainError(f"β* 는 양수여야 합니다 (입력: {beta_star}).")
    mat = G.matrix
    inner = mat[1:, 1:] - mat[1:, :1] - mat[:1, 1:] + mat[0, 0]
    return math.pi**2 * beta_star * inner


def coulomb_form_reduced(lat: TorusLattice, beta_star: float) -> np.ndarray:
    """-β* kᵗ(Δ_{0^c0^c})^{-1}k, k = 2πm 를 밀집 역행렬로 쓴 행렬 -4π²β*(Δ_{0^c0^c})^{-1}."""
    if beta_star <= 0:
        raise InputDomainError(f"β* 는 양수여야 합니다 (입력: {beta_star}).")
    inverse = linalg.inv(reduced_laplacian(lat).astype(float))
    return -4.0 * math.pi**2 * beta_star * inverse


def coulomb_energies(A: np.ndarray, m_free) -> np.ndarray:
    """각 행 m_{0^c} 에 대한 에너지 m_{0^c}ᵗ A m_{0^c}."""
    m = np.atleast_2d(np.asarray(m_free, dtype=float))
    return np.einsum("ri,ij,rj->r", m, A, m)


def _pair_projection(lat: TorusLattice, i: int, j: int) -> np.ndarray:
    """자유 좌표에서 x_i - x_j 를 주는 벡터 (x_0 = 0)."""
    proj = np.zeros((lat.num_vertices, 1))
    proj[i, 0] += 1.0
    proj[j, 0] -= 1.0
    return proj[1:]


def voltage_projection(G: GreenTable, i: int, j: int) -> np.ndarray:
    """자유 좌표 m_{0^c} 에서 U_ij = Σ_ℓ (G_iℓ - G_jℓ)(2πm_ℓ) 를 주는 벡터."""
    mat = G.matrix
    row = TWO_PI * (mat[i] - mat[j])
    # m_0 = -Σ_{ℓ≠0} m_ℓ
    return (row[1:] - row[0]).reshape(-1, 1)


def _height_sums(N, beta, trunc, projections=None, thresholds=(), workers=1, progress=False):
    lat = TorusLattice(N)
    A = height_form(lat, beta)
    if projections is None:
        projections = np.zeros((A.shape[0], 1))
    return _box_sums(
        A, trunc.height_cutoff, projections, trunc, "높이 합", thresholds, workers, progress
    )


def _charge_sums(N, beta_star, trunc, projections=None, reduced=False, workers=1, progress=False):
    lat = TorusLattice(N)
    A = coulomb_form_reduced(lat, beta_star) if reduced else coulomb_form(compute_green(N), beta_star)
    if projections is None:
        projections = np.zeros((A.shape[0], 1))
    return _box_sums(A, trunc.charge_cutoff, projections, trunc, "전하 합", (), workers, progress)


def dg_partition(N: int, beta: float, trunc: TruncationSpec, workers: int = 1, progress: bool = False) -> float:
    """절단된 Z_{Λ,β} = Σ_{x ∈ [-K_x,K_x]^{Λ\\{0}}} e^{-βH(x)}."""
    return _height_sums(N, beta, trunc, workers=workers, progress=progress).z


def dg_moment_Oij(
    N: int, beta: float, i: Vertex, j: Vertex, trunc: TruncationSpec, workers: int = 1, progress: bool = False
) -> float:
    """절단된 E_{Λ,β}[(x_i - x_j)²]."""
    lat = TorusLattice(N)
    i, j = lat.vertex(i), lat.vertex(j)
    if i == j:
        return 0.0
    sums = _height_sums(N, beta, trunc, _pair_projection(lat, i, j), workers=workers, progress=progress)
    return sums.second_moment()


def dg_tail_probability(
    N: int, beta: float, i: Vertex, j: Vertex, k: int, trunc: TruncationSpec, workers: int = 1
) -> float:
    """절단된 P_{Λ,β}(|x_i - x_j| >= k)."""
    lat = TorusLattice(N)
    i, j = lat.vertex(i), lat.vertex(j)
    if k <= 0:
        return 1.0
    sums = _height_sums(N, beta, trunc, _pair_projection(lat, i, j), thresholds=(k,), workers=workers)
    return float(sums.exceed[0, 0] / sums.z)


def cg_partition(N: int, beta_star: float, trunc: TruncationSpec, workers: int = 1, progress: bool = False) -> float:
    """절단된 Z*_{Λ,β*} = Σ e^{-π²β* mᵗGm} (Green 함수 형태)."""
    return _charge_sums(N, beta_star, trunc, workers=workers, progress=progress).z


def cg_partition_reduced(N: int, beta_star: float, trunc: TruncationSpec, workers: int = 1) -> float:
    """같은 합을 Σ e^{β* kᵗ(Δ_{0^c0^c})^{-1}k} 형태로 계산합니다."""
    return _charge_sums(N, beta_star, trunc, reduced=True, workers=workers).z


def cg_moment_U2(
    N: int, beta_star: float, i: Vertex, j: Vertex, trunc: TruncationSpec, workers: int = 1, progress: bool = False
) -> float:
    """절단된 E*_{Λ,β*}[U_ij²]."""
    G = compute_green(N)
    lat = G.lattice
    i, j = lat.vertex(i), lat.vertex(j)
    if i == j:
        return 0.0
    sums = _charge_sums(N, beta_star, trunc, voltage_projection(G, i, j), workers=workers, progress=progress)
    return sums.second_moment()


def duality_prefactor(lat: TorusLattice, beta: float) -> float:
    """(π/β)^{(|Λ|-1)/2} det(-Δ_{0^c0^c})^{-1/2}. 행렬식은 Cholesky 로 로그 공간에서 계산합니다."""
    neg = (-reduced_laplacian(lat)).astype(float)
    chol, _ = linalg.cho_factor(neg)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    n_free = neg.shape[0]
    return math.exp(0.5 * n_free * math.log(math.pi / beta) - 0.5 * logdet)


def duality_report(
    N: int, beta: float, trunc: TruncationSpec, workers: int = 1, progress: bool = False
) -> DualityReport:
    """
    Z_{Λ,β} = (π/β)^{(|Λ|-1)/2} det(-Δ_{0^c0^c})^{-1/2} Z*_{Λ,β*} 의 양변을 절단 합으로 비교합니다.
    """
    lat = TorusLattice(N)
    beta_star = dual_beta(beta)
    lhs = _height_sums(N, beta, trunc, workers=workers, progress=progress)
    rhs = _charge_sums(N, beta_star, trunc, workers=workers, progress=progress)
    prefactor = duality_prefactor(lat, beta)
    gap = abs(lhs.z - prefactor * rhs.z) / lhs.z
    logger.info(
        "쌍대성 검사 N=%d β=%.6g (K_x=%d, K_m=%d): 상대 차이 %.3e",
        N, beta, trunc.height_cutoff, trunc.charge_cutoff, gap,
    )
    return DualityReport(
        side_length=N,
        beta=beta,
        beta_star=beta_star,
        height_cutoff=trunc.height_cutoff,
        charge_cutoff=trunc.charge_cutoff,
        lhs=lhs.z,
        prefactor=prefactor,
        rhs=rhs.z,
        relative_gap=gap,
        lhs_tail=lhs.tail_mass / lhs.z,
        rhs_tail=rhs.tail_mass / rhs.z,
    )


def cutoff_ladder(
    N: int, beta: float, ladder: Sequence[tuple[int, int]], budget: int = DEFAULT_BUDGET, workers: int = 1
) -> list[DualityReport]:
    """(K_x, K_m) 사다리 위에서 쌍대성 차이를 차례로 계산합니다."""
    return [
        duality_report(N, beta, TruncationSpec(kx, km, budget=budget), workers=workers)
        for kx, km in ladder
    ]


def cross_identity_report(
    N: int,
    beta_star: float,
    i: Vertex,
    j: Vertex,
    trunc: TruncationSpec,
    workers: int = 1,
    progress: bool = False,
) -> CrossIdentityReport:
    """
    E*_{β*}[U_ij²] 와 E_β[O_ij] (β = (4β*)^{-1}) 를 각각 절단 합으로 구해 항등식을 비교합니다.
    """
    G = compute_green(N)
    lat = G.lattice
    i, j = lat.vertex(i), lat.vertex(j)
    beta = dual_beta(beta_star)
    delta_g = potential_diff(G, i, j)
    if i == j:
        return CrossIdentityReport(N, beta_star, beta, i, j, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    u_proj = voltage_projection(G, i, j)
    o_proj = _pair_projection(lat, i, j)
    charges = _charge_sums(N, beta_star, trunc, u_proj, workers=workers, progress=progress)
    heights = _height_sums(N, beta, trunc, o_proj, workers=workers, progress=progress)

    e_u2 = charges.second_moment()
    e_o = heights.second_moment()
    predicted = 4.0 / beta_star * delta_g - 4.0 / beta_star**2 * e_o
    tail_u2 = charges.second_moment_error(float(u_proj[:, 0] @ u_proj[:, 0]))
    tail_o = heights.second_moment_error(float(o_proj[:, 0] @ o_proj[:, 0]))
    report = CrossIdentityReport(
        side_length=N,
        beta_star=beta_star,
        beta=beta,
        i=i,
        j=j,
        e_u2=e_u2,
        e_o=e_o,
        delta_g=delta_g,
        predicted_u2=predicted,
        residual=abs(e_u2 - predicted),
        tail_u2=tail_u2,
        tail_o=tail_o,
        tail_bound=tail_u2 + 4.0 / beta_star**2 * tail_o,
    )
    logger.info(
        "교차 항등식 N=%d β*=%.6g i=%d j=%d: 잔차 %.3e (절단 상한 %.3e)",
        N, beta_star, i, j, report.residual, report.tail_bound,
    )
    return report


def cross_identity_residual(
    N: int, beta_star: float, i: Vertex, j: Vertex, trunc: TruncationSpec, workers: int = 1
) -> float:
    """|E*[U_ij²] - (4/β*)(G_ii - G_ij) + (4/β*²) E_β[O_ij]|."""
    return cross_identity_report(N, beta_star, i, j, trunc, workers=workers).residual
