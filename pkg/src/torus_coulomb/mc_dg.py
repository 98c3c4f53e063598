"""
고정된 discrete Gaussian 모델의 Metropolis Monte Carlo.

원점이 아닌 정점 하나를 고르고 높이를 ±1 바꾸는 제안을 min(1, e^{-βΔH}) 로 받아들입니다.
sweep 한 번은 |Λ| - 1 회의 제안입니다. 난수는 커널 밖에서 미리 뽑아 넘기므로
같은 seed 면 체인이 비트 단위로 재현됩니다.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from numba import njit

from .contours import HeightConfig
from .errors import InputDomainError, TorusCoulombError
from .lattice import TorusLattice, Vertex, hamiltonian
from .stats import DEFAULT_BATCHES, batch_count, batch_means, pooled_estimate
from .utils import run_in_pool

logger = logging.getLogger(__name__)

DEFAULT_K_MAX = 5
MIN_BURN_IN = 1000
SWEEPS_PER_CHUNK = 2000


def default_burn_in(sweeps: int) -> int:
    return max(sweeps // 10, MIN_BURN_IN)


class StepRecord(NamedTuple):
    site: int
    delta: int
    delta_h: int
    accepted: bool


@dataclass
class DGChain:
    """discrete Gaussian Metropolis 체인 하나의 상태."""

    lattice: TorusLattice
    beta: float
    state: np.ndarray
    energy: int
    rng: np.random.Generator
    sweeps: int = 0
    proposed: int = 0
    accepted: int = 0

    @classmethod
    def start(cls, N: int, beta: float, seed: int, heights=None) -> "DGChain":
        if beta <= 0:
            raise InputDomainError(f"역온도 β 는 양수여야 합니다 (입력: {beta}).")
        lat = TorusLattice(N)
        if heights is None:
            state = np.zeros(lat.num_vertices, dtype=np.int64)
        else:
            state = HeightConfig(N, heights).heights.copy()
        return cls(lat, float(beta), state, hamiltonian(lat, state), np.random.default_rng(seed))

    @property
    def config(self) -> HeightConfig:
        return HeightConfig(self.lattice.side_length, self.state)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0

    def check_energy(self) -> None:
        fresh = hamiltonian(self.lattice, self.state)
        if fresh != self.energy:
            raise TorusCoulombError(f"캐시된 에너지 {self.energy}가 재계산 값 {fresh}와 다릅니다.")
        if self.state[0] != 0:
            raise TorusCoulombError("원점 고정이 깨졌습니다.")


def local_delta_h(lat: TorusLattice, state: np.ndarray, v: int, delta: int) -> int:
    """ΔH = Σ_{u~v} [(x_v + δ - x_u)² - (x_v - x_u)²] = 2δ Σ_{u~v}(x_v - x_u) + 4δ²."""
    grad = int(np.sum(state[v] - state[lat.neighbor_table[v]]))
    return 2 * delta * grad + 4 * delta * delta


def acceptance_probability(beta: float, delta_h: float) -> float:
    return 1.0 if delta_h <= 0 else math.exp(-beta * delta_h)


def dg_step(chain: DGChain) -> StepRecord:
    """Metropolis 한 단계. 원점은 제안하지 않습니다."""
    n = chain.lattice.num_vertices
    v = int(chain.rng.integers(1, n))
    delta = int(chain.rng.integers(0, 2)) * 2 - 1
    u = chain.rng.random()
    dh = local_delta_h(chain.lattice, chain.state, v, delta)
    accepted = dh <= 0 or u < math.exp(-chain.beta * dh)
    chain.proposed += 1
    if accepted:
        chain.state[v] += delta
        chain.energy += dh
        chain.accepted += 1
    return StepRecord(v, delta, dh, bool(accepted))


@njit(cache=True)
def _metropolis_sweeps(state, table, beta, sites, deltas, uniforms, per_sweep, i, j, out):
    """미리 뽑은 난수로 sweep 을 돌립니다. out 이 비어 있지 않으면 sweep 마다 x_i - x_j 를 기록."""
    n_sweeps = sites.shape[0] // per_sweep
    energy_change = 0
    accepted = 0
    t = 0
    for s in range(n_sweeps):
        for _ in range(per_sweep):
            v = sites[t]
            d = deltas[t]
            grad = 0
            for k in range(4):
                grad += state[v] - state[table[v, k]]
            dh = 2 * d * grad + 4
            if dh <= 0 or uniforms[t] < np.exp(-beta * dh):
                state[v] += d
                energy_change += dh
                accepted += 1
            t += 1
        if out.shape[0] > 0:
            out[s] = state[i] - state[j]
    return energy_change, accepted


def advance(chain: DGChain, sweeps: int, i: int = 0, j: int = 0, record: bool = False) -> Optional[np.ndarray]:
    """
    체인을 sweeps 회 진행합니다. 덩어리마다 난수를 뽑고 에너지 캐시를 검사합니다.

    Returns:
        record=True 이면 sweep 마다의 x_i - x_j (int64 배열), 아니면 None.
    """
    lat = chain.lattice
    per_sweep = lat.num_vertices - 1
    table = lat.neighbor_table
    out = np.zeros(sweeps if record else 0, dtype=np.int64)
    done = 0
    while done < sweeps:
        chunk = min(SWEEPS_PER_CHUNK, sweeps - done)
        size = chunk * per_sweep
        sites = chain.rng.integers(1, lat.num_vertices, size=size)
        deltas = chain.rng.integers(0, 2, size=size) * 2 - 1
        uniforms = chain.rng.random(size)
        target = out[done : done + chunk] if record else out
        dh, acc = _metropolis_sweeps(chain.state, table, chain.beta, sites, deltas, uniforms, per_sweep, i, j, target)
        chain.energy += int(dh)
        chain.accepted += int(acc)
        chain.proposed += size
        chain.sweeps += chunk
        done += chunk
        chain.check_energy()
    return out if record else None


@dataclass
class EstimateReport:
    observable: str
    estimate: float
    stderr: float
    sweeps: int
    burn_in: int
    seed: int
    batches: int = DEFAULT_BATCHES

    def to_dict(self) -> dict:
        return {
            "observable": self.observable,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "sweeps": self.sweeps,
            "burn_in": self.burn_in,
            "seed": self.seed,
            "batches": self.batches,
        }

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(self.estimate - value) <= sigmas * self.stderr


@dataclass
class DGResult:
    side_length: int
    beta: float
    i: int
    j: int
    reports: list[EstimateReport]
    acceptance_rate: float
    chains: int = 1
    seeds: list[int] = field(default_factory=list)

    def __getitem__(self, observable: str) -> EstimateReport:
        for r in self.reports:
            if r.observable == observable:
                return r
        raise KeyError(observable)

    def tail(self, k: int) -> EstimateReport:
        return self[tail_name(k)]

    def to_dict(self) -> dict:
        return {
            "side_length": self.side_length,
            "beta": self.beta,
            "i": self.i,
            "j": self.j,
            "acceptance_rate": self.acceptance_rate,
            "chains": self.chains,
            "seeds": list(self.seeds),
            "estimates": [r.to_dict() for r in self.reports],
        }


def tail_name(k: int) -> str:
    return f"P(|x_i-x_j|>={k})"


def _chain_differences(N: int, beta: float, i: int, j: int, sweeps: int, burn_in: int, seed: int):
    """프로세스 풀용 최상위 함수: (sweep 별 x_i - x_j, 수락률)."""
    chain = DGChain.start(N, beta, seed)
    advance(chain, burn_in)
    diffs = advance(chain, sweeps, i, j, record=True)
    logger.debug("DG 체인 seed=%d 완료: 수락률 %.4f", seed, chain.acceptance_rate)
    return diffs, chain.acceptance_rate


def run_chains(
    N: int,
    beta: float,
    i: Vertex,
    j: Vertex,
    sweeps: int,
    burn_in: Optional[int] = None,
    seed: int = 0,
    chains: int = 1,
    workers: int = 1,
    k_max: int = DEFAULT_K_MAX,
    batches: int = DEFAULT_BATCHES,
) -> DGResult:
    """
    seed, seed+1, … 로 독립 체인을 돌리고 batch 평균을 모아 관측량을 추정합니다.

    관측량: O_ij = (x_i - x_j)², k = 1..k_max 에 대한 P(|x_i - x_j| >= k), 그리고 대칭성 점검용 E[x_i - x_j].

    Args:
        N: 격자 크기.
        beta: 역온도 β.
        i, j: 정점.
        sweeps: 체인당 측정 sweep 수.
        burn_in: 버리는 sweep 수. None 이면 max(sweeps // 10, 1000).
        seed: 첫 체인의 seed.
        chains: 체인 수.
        workers: 프로세스 풀 크기.
        k_max: 꼬리 확률의 최대 k.
        batches: 체인당 batch 수.
    """
    lat = TorusLattice(N)
    i, j = lat.vertex(i), lat.vertex(j)
    if beta <= 0:
        raise InputDomainError(f"역온도 β 는 양수여야 합니다 (입력: {beta}).")
    batch_count(sweeps, batches)
    if burn_in is None:
        burn_in = default_burn_in(sweeps)
    seeds = [seed + c for c in range(chains)]
    logger.info("DG Monte Carlo: N=%d, β=%g, 체인 %d개, sweep %d (burn-in %d)", N, beta, chains, sweeps, burn_in)
    outputs = run_in_pool(
        _chain_differences,
        [(N, beta, i, j, sweeps, burn_in, s) for s in seeds],
        workers=workers,
        kind="process",
    )

    series = {"O_ij": [], "mean(x_i-x_j)": []}
    for k in range(1, k_max + 1):
        series[tail_name(k)] = []
    for diffs, _ in outputs:
        d = diffs.astype(float)
        series["O_ij"].append(batch_means(d * d, batches))
        series["mean(x_i-x_j)"].append(batch_means(d, batches))
        for k in range(1, k_max + 1):
            series[tail_name(k)].append(batch_means(np.abs(diffs) >= k, batches))

    reports = []
    for name, means in series.items():
        est, se = pooled_estimate(means)
        reports.append(EstimateReport(name, est, se, sweeps, burn_in, seed, sum(len(m) for m in means)))
    acceptance = float(np.mean([acc for _, acc in outputs]))
    return DGResult(N, float(beta), i, j, reports, acceptance, chains, seeds)


def dg_estimate(
    N: int,
    beta: float,
    i: Vertex,
    j: Vertex,
    sweeps: int,
    burn_in: Optional[int] = None,
    seed: int = 0,
    k_max: int = DEFAULT_K_MAX,
) -> DGResult:
    """단일 체인 추정. run_chains(chains=1) 과 같습니다."""
    return run_chains(N, beta, i, j, sweeps, burn_in, seed, chains=1, workers=1, k_max=k_max)
