"""
중성 격자 Coulomb gas 의 dipole Monte Carlo.

전하는 정수 m (물리 전하 k = 2πm), 에너지는 E = π²β*·mᵗGm.
제안은 m_a += 1, m_b -= 1 이며 정점별 전위 φ = Gm 를 캐시해 제안 하나를 O(1) 로 평가합니다.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Optional

import numpy as np
from numba import njit

from .contours import m_beta
from .errors import InputDomainError, TorusCoulombError
from .greens import GreenTable, compute_green, dual_beta, potential_diff
from .lattice import TorusLattice, Vertex
from .mc_dg import EstimateReport, default_burn_in
from .stats import DEFAULT_BATCHES, batch_count, batch_means, pooled_estimate
from .utils import run_in_pool

logger = logging.getLogger(__name__)

Proposal = Literal["nn", "uniform"]

BOUND_BETA_STAR_MAX = 1.0 / 12.0
BOUND_TOLERANCE = 1e-15
MIN_BOUND_SIDE = 4
REFRESH_EVERY = 1000
CACHE_TOLERANCE = 1e-8
SWEEPS_PER_CHUNK = 2000
DEFAULT_LADDER = (1.0 / 12.0, 1.0 / 24.0, 1.0 / 48.0)


class DipoleRecord(NamedTuple):
    plus: int
    minus: int
    delta_e: float
    accepted: bool


@dataclass
class ChargeConfig:
    """정수 전하 배치와 전위/에너지 캐시."""

    green: GreenTable
    beta_star: float
    charges: np.ndarray
    potentials: np.ndarray
    energy: float
    accepted_since_refresh: int = 0
    max_drift: float = 0.0

    @classmethod
    def zero(cls, green: GreenTable, beta_star: float) -> "ChargeConfig":
        if beta_star <= 0:
            raise InputDomainError(f"β* 는 양수여야 합니다 (입력: {beta_star}).")
        n = green.lattice.num_vertices
        return cls(green, float(beta_star), np.zeros(n, dtype=np.int64), np.zeros(n), 0.0)

    @classmethod
    def from_charges(cls, green: GreenTable, beta_star: float, charges) -> "ChargeConfig":
        cfg = cls.zero(green, beta_star)
        m = np.asarray(charges, dtype=np.int64).reshape(-1)
        if m.size != cfg.charges.size:
            raise InputDomainError(f"전하 배열 길이 {m.size}가 정점 수 {cfg.charges.size}와 다릅니다.")
        if m.sum() != 0:
            raise InputDomainError(f"전하 배치는 중성이어야 합니다 (Σm = {m.sum()}).")
        cfg.charges = m.copy()
        cfg.refresh()
        return cfg

    @property
    def coefficient(self) -> float:
        return math.pi**2 * self.beta_star

    def recompute(self) -> tuple[np.ndarray, float]:
        phi = self.green.matrix @ self.charges
        return phi, float(self.coefficient * self.charges @ phi)

    def refresh(self) -> float:
        """캐시를 처음부터 다시 계산하고 직전 캐시와의 에너지 차이를 돌려줍니다."""
        phi, energy = self.recompute()
        drift = abs(energy - self.energy)
        self.max_drift = max(self.max_drift, drift)
        self.potentials = phi
        self.energy = energy
        self.accepted_since_refresh = 0
        return drift

    def check_cache(self, tolerance: float = CACHE_TOLERANCE) -> None:
        phi, energy = self.recompute()
        if np.max(np.abs(phi - self.potentials)) > tolerance or abs(energy - self.energy) > tolerance * max(1.0, abs(energy)):
            raise TorusCoulombError(f"전위 캐시가 재계산 값과 어긋났습니다 (E 캐시 {self.energy}, 재계산 {energy}).")
        if self.charges.sum() != 0:
            raise TorusCoulombError("전하 중성이 깨졌습니다.")


def dipole_delta_e(cfg: ChargeConfig, a: int, b: int) -> float:
    """m_a += 1, m_b -= 1 의 에너지 변화 π²β*[2(φ_a - φ_b) + 2(g(0) - g(b - a))]."""
    g0 = float(cfg.green.values[0, 0])
    gab = float(cfg.green.matrix[a, b])
    return cfg.coefficient * (2.0 * (cfg.potentials[a] - cfg.potentials[b]) + 2.0 * (g0 - gab))


def propose_pairs(lat: TorusLattice, rng: np.random.Generator, size: int, proposal: Proposal = "nn"):
    """(a, b) 제안 배열. nn: b 는 a 의 이웃 중 하나, uniform: b 는 a 가 아닌 임의의 정점."""
    n = lat.num_vertices
    a = rng.integers(0, n, size=size)
    if proposal == "nn":
        b = lat.neighbor_table[a, rng.integers(0, 4, size=size)]
    elif proposal == "uniform":
        b = (a + rng.integers(1, n, size=size)) % n
    else:
        raise InputDomainError(f"알 수 없는 제안 방식입니다: {proposal!r} (nn 또는 uniform)")
    return a, b


def dipole_step(cfg: ChargeConfig, rng: np.random.Generator, proposal: Proposal = "nn") -> DipoleRecord:
    lat = cfg.green.lattice
    a, b = (int(v[0]) for v in propose_pairs(lat, rng, 1, proposal))
    u = rng.random()
    if a == b:
        return DipoleRecord(a, b, 0.0, False)
    de = dipole_delta_e(cfg, a, b)
    accepted = de <= 0 or u < math.exp(-de)
    if accepted:
        gmat = cfg.green.matrix
        cfg.charges[a] += 1
        cfg.charges[b] -= 1
        cfg.potentials = cfg.potentials + gmat[a] - gmat[b]
        cfg.energy += de
        cfg.accepted_since_refresh += 1
        if cfg.accepted_since_refresh >= REFRESH_EVERY:
            cfg.refresh()
    return DipoleRecord(a, b, de, bool(accepted))


def voltage(cfg: ChargeConfig, i: Vertex, j: Vertex) -> float:
    """U_ij = Σ_ℓ (G_iℓ - G_jℓ)·2πm_ℓ = 2π(φ_i - φ_j)."""
    lat = cfg.green.lattice
    i, j = lat.vertex(i), lat.vertex(j)
    return 2.0 * math.pi * float(cfg.potentials[i] - cfg.potentials[j])


@njit(cache=True)
def _dipole_sweeps(m, phi, gmat, coef, energy, pluses, minuses, uniforms, per_sweep, i, j, out, since_refresh, refresh_every):
    n = m.shape[0]
    g0 = gmat[0, 0]
    accepted = 0
    max_drift = 0.0
    n_sweeps = pluses.shape[0] // per_sweep
    t = 0
    for s in range(n_sweeps):
        for _ in range(per_sweep):
            a = pluses[t]
            b = minuses[t]
            de = coef * (2.0 * (phi[a] - phi[b]) + 2.0 * (g0 - gmat[a, b]))
            if de <= 0.0 or uniforms[t] < np.exp(-de):
                m[a] += 1
                m[b] -= 1
                for v in range(n):
                    phi[v] += gmat[a, v] - gmat[b, v]
                energy += de
                accepted += 1
                since_refresh += 1
                if since_refresh >= refresh_every:
                    fresh = 0.0
                    for v in range(n):
                        acc = 0.0
                        for w in range(n):
                            acc += gmat[v, w] * m[w]
                        phi[v] = acc
                        fresh += m[v] * acc
                    fresh *= coef
                    drift = abs(fresh - energy)
                    if drift > max_drift:
                        max_drift = drift
                    energy = fresh
                    since_refresh = 0
            t += 1
        out[s] = 2.0 * np.pi * (phi[i] - phi[j])
    return energy, accepted, since_refresh, max_drift


def advance(
    cfg: ChargeConfig,
    rng: np.random.Generator,
    sweeps: int,
    i: int = 0,
    j: int = 0,
    proposal: Proposal = "nn",
) -> tuple[np.ndarray, int]:
    """
    sweeps 회 진행하고 sweep 마다의 U_ij 와 수락 횟수를 반환합니다.
    sweep 한 번은 |Λ| 회의 dipole 제안입니다.
    """
    lat = cfg.green.lattice
    per_sweep = lat.num_vertices
    gmat = np.ascontiguousarray(cfg.green.matrix)
    out = np.zeros(sweeps)
    accepted = 0
    done = 0
    while done < sweeps:
        chunk = min(SWEEPS_PER_CHUNK, sweeps - done)
        size = chunk * per_sweep
        pluses, minuses = propose_pairs(lat, rng, size, proposal)
        uniforms = rng.random(size)
        energy, acc, since, drift = _dipole_sweeps(
            cfg.charges, cfg.potentials, gmat, cfg.coefficient, cfg.energy,
            pluses, minuses, uniforms, per_sweep, i, j, out[done : done + chunk],
            cfg.accepted_since_refresh, REFRESH_EVERY,
        )
        cfg.energy = float(energy)
        cfg.accepted_since_refresh = int(since)
        cfg.max_drift = max(cfg.max_drift, float(drift))
        accepted += int(acc)
        done += chunk
        cfg.check_cache()
    return out, accepted


@dataclass
class VarianceReport:
    side_length: int
    beta_star: float
    i: int
    j: int
    seed: int
    sweeps: int
    burn_in: int
    estimate: float
    stderr: float
    mean_voltage: float
    mean_voltage_stderr: float
    lower: Optional[float]
    upper: Optional[float]
    bounds_applicable: bool
    warning: Optional[str] = None
    acceptance_rate: float = 0.0
    max_drift: float = 0.0
    proposal: str = "nn"
    chains: int = 1

    @property
    def beta(self) -> float:
        return dual_beta(self.beta_star)

    def in_sandwich(self, sigmas: float = 3.0) -> bool:
        if not self.bounds_applicable:
            raise TorusCoulombError("이 (N, β*) 에서는 분산 상·하한이 적용되지 않습니다.")
        slack = sigmas * self.stderr
        return self.lower - slack <= self.estimate <= self.upper + slack

    def estimates(self) -> list[EstimateReport]:
        return [
            EstimateReport("E*[U_ij^2]", self.estimate, self.stderr, self.sweeps, self.burn_in, self.seed),
            EstimateReport("E*[U_ij]", self.mean_voltage, self.mean_voltage_stderr, self.sweeps, self.burn_in, self.seed),
        ]

    def to_dict(self) -> dict:
        return {
            "side_length": self.side_length,
            "beta_star": self.beta_star,
            "i": self.i,
            "j": self.j,
            "seed": self.seed,
            "sweeps": self.sweeps,
            "burn_in": self.burn_in,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "mean_voltage": self.mean_voltage,
            "mean_voltage_stderr": self.mean_voltage_stderr,
            "lower": self.lower,
            "upper": self.upper,
            "bounds_applicable": self.bounds_applicable,
            "warning": self.warning,
            "acceptance_rate": self.acceptance_rate,
            "max_drift": self.max_drift,
            "proposal": self.proposal,
            "chains": self.chains,
        }


def variance_bounds(green: GreenTable, beta_star: float, i: Vertex, j: Vertex) -> tuple[Optional[float], Optional[float], Optional[str]]:
    """
    (하한, 상한, 경고). 상한 (4/β*)ΔG, 하한 (4/β*)ΔG - (4/β*²)M_{(4β*)^{-1}}.
    β* > 1/12 이거나 N < 4 이면 하한/상한 대신 경고 문자열을 돌려줍니다.
    """
    n = green.side_length
    if n < MIN_BOUND_SIDE:
        return None, None, f"N={n} < {MIN_BOUND_SIDE} 에서는 분산 상·하한을 보고하지 않습니다."
    if beta_star > BOUND_BETA_STAR_MAX + BOUND_TOLERANCE:
        return None, None, f"β*={beta_star:g} > 1/12 이므로 분산 상·하한의 가정이 성립하지 않습니다."
    delta_g = potential_diff(green, i, j)
    upper = 4.0 / beta_star * delta_g
    lower = upper - 4.0 / beta_star**2 * m_beta(dual_beta(beta_star))
    return lower, upper, None


def _chain_voltages(N: int, beta_star: float, i: int, j: int, sweeps: int, burn_in: int, seed: int, proposal: str):
    green = compute_green(N)
    cfg = ChargeConfig.zero(green, beta_star)
    rng = np.random.default_rng(seed)
    advance(cfg, rng, burn_in, i, j, proposal)
    voltages, accepted = advance(cfg, rng, sweeps, i, j, proposal)
    rate = accepted / (sweeps * green.lattice.num_vertices)
    logger.debug("CG 체인 seed=%d 완료: 수락률 %.4f, 최대 drift %.3g", seed, rate, cfg.max_drift)
    return voltages, rate, cfg.max_drift


def cg_variance(
    N: int,
    beta_star: float,
    i: Vertex,
    j: Vertex,
    sweeps: int,
    burn_in: Optional[int] = None,
    seed: int = 0,
    proposal: Proposal = "nn",
    chains: int = 1,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> VarianceReport:
    """
    E*[U_ij²] 를 batch means 로 추정하고 분산 상·하한을 함께 보고합니다.

    Args:
        N: 격자 크기.
        beta_star: Coulomb gas 의 역온도 β*.
        i, j: 정점.
        sweeps: 체인당 측정 sweep 수.
        burn_in: None 이면 max(sweeps // 10, 1000).
        seed: 첫 체인 seed (체인 c 는 seed + c).
        proposal: "nn" 또는 "uniform".
        chains: 독립 체인 수.
        workers: 프로세스 풀 크기.
    """
    lat = TorusLattice(N)
    i, j = lat.vertex(i), lat.vertex(j)
    if beta_star <= 0:
        raise InputDomainError(f"β* 는 양수여야 합니다 (입력: {beta_star}).")
    if proposal not in ("nn", "uniform"):
        raise InputDomainError(f"알 수 없는 제안 방식입니다: {proposal!r} (nn 또는 uniform)")
    batch_count(sweeps, batches)
    if burn_in is None:
        burn_in = default_burn_in(sweeps)
    seeds = [seed + c for c in range(chains)]
    logger.info("CG Monte Carlo: N=%d, β*=%g, 제안 %s, 체인 %d개, sweep %d", N, beta_star, proposal, chains, sweeps)
    outputs = run_in_pool(
        _chain_voltages,
        [(N, beta_star, i, j, sweeps, burn_in, s, proposal) for s in seeds],
        workers=workers,
        kind="process",
    )
    est, se = pooled_estimate([batch_means(u * u, batches) for u, _, _ in outputs])
    mean_u, mean_se = pooled_estimate([batch_means(u, batches) for u, _, _ in outputs])

    lower, upper, warning = variance_bounds(compute_green(N), beta_star, i, j)
    if warning:
        logger.warning(warning)
    return VarianceReport(
        side_length=N,
        beta_star=float(beta_star),
        i=i,
        j=j,
        seed=seed,
        sweeps=sweeps,
        burn_in=burn_in,
        estimate=est,
        stderr=se,
        mean_voltage=mean_u,
        mean_voltage_stderr=mean_se,
        lower=lower,
        upper=upper,
        bounds_applicable=warning is None,
        warning=warning,
        acceptance_rate=float(np.mean([r for _, r, _ in outputs])),
        max_drift=float(max(d for _, _, d in outputs)),
        proposal=proposal,
        chains=chains,
    )


@dataclass
class LadderPoint:
    beta_star: float
    ratio: float
    ratio_stderr: float
    lower_ratio: float
    report: VarianceReport = field(repr=False)

    def consistent(self, sigmas: float = 3.0) -> bool:
        """lower_ratio - 3SE <= ratio <= 1 + 3SE."""
        slack = sigmas * self.ratio_stderr
        return self.lower_ratio - slack <= self.ratio <= 1.0 + slack

    def to_dict(self) -> dict:
        return {
            "beta_star": self.beta_star,
            "ratio": self.ratio,
            "ratio_stderr": self.ratio_stderr,
            "lower_ratio": self.lower_ratio,
        }


def ratio_ladder(
    N: int,
    i: Vertex,
    j: Vertex,
    beta_stars=DEFAULT_LADDER,
    sweeps: int = 20000,
    burn_in: Optional[int] = None,
    seed: int = 0,
    proposal: Proposal = "nn",
) -> list[LadderPoint]:
    """β* 를 줄여 가며 E*[U_ij²] / ((4/β*)ΔG) 가 1 로 다가가는지 봅니다."""
    green = compute_green(N)
    delta_g = potential_diff(green, i, j)
    if delta_g <= 0:
        raise InputDomainError("i 와 j 가 같으면 비율을 정의할 수 없습니다.")
    points = []
    for bs in beta_stars:
        report = cg_variance(N, bs, i, j, sweeps, burn_in, seed, proposal)
        scale = 4.0 / bs * delta_g
        lower_ratio = 1.0 - m_beta(dual_beta(bs)) / (bs * delta_g)
        points.append(LadderPoint(bs, report.estimate / scale, report.stderr / scale, lower_ratio, report))
        logger.info("β*=%g: 비율 %.4f ± %.4f (하한 %.4f)", bs, points[-1].ratio, points[-1].ratio_stderr, lower_ratio)
    return points
