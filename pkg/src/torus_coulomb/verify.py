"""
`verify` 명령이 돌리는 이름 붙은 검사 모음.

quick 모드는 Green 함수 항등식(N <= 8), N=2 쌍대성, N=4 contour 표본 1000개만 돌립니다.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import contours, exact, greens, mc_cg, mc_dg
from .errors import TorusCoulombError

logger = logging.getLogger(__name__)

MC_PAIRS = (((1, 1), (2, 1)), ((1, 1), (3, 1)), ((1, 1), (5, 1)))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict
    seconds: float

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "seconds": round(self.seconds, 3)}


def _random_neutral(rng: np.random.Generator, n: int) -> np.ndarray:
    k = rng.integers(-2, 3, size=n)
    k[0] -= k.sum()
    return k


def check_green_identities(sizes, vectors: int = 100, seed: int = 0) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    worst = {"laplacian": 0.0, "reduced_inverse": 0.0, "neutral_form": 0.0}
    for n in sizes:
        G = greens.compute_green(n)
        worst["laplacian"] = max(worst["laplacian"], greens.laplacian_identity_residual(G))
        if n <= 12:
            worst["reduced_inverse"] = max(worst["reduced_inverse"], greens.reduced_inverse_residual(G))
        if n >= 3:
            for _ in range(vectors):
                k = _random_neutral(rng, n * n)
                worst["neutral_form"] = max(worst["neutral_form"], greens.neutral_form_gap(G, k))
    passed = worst["laplacian"] <= 1e-10 and worst["reduced_inverse"] <= 1e-8 and worst["neutral_form"] <= 1e-10
    return passed, {"sizes": list(sizes), **worst}


def check_duality(N: int, betas, kx: int, km: int, tolerance: float, workers: int, budget: int) -> tuple[bool, dict]:
    gaps = {}
    for beta in betas:
        report = exact.duality_report(N, beta, exact.TruncationSpec(kx, km, budget=budget), workers=workers)
        gaps[str(beta)] = report.relative_gap
    return all(g <= tolerance for g in gaps.values()), {"N": N, "kx": kx, "km": km, "gaps": gaps}


def check_cross_identity(workers: int, budget: int) -> tuple[bool, dict]:
    residuals = {}
    trunc = exact.TruncationSpec(4, 5, budget=budget)
    for bs in (1.0 / 12.0, 1.0 / 8.0):
        report = exact.cross_identity_report(3, bs, (1, 0), (2, 0), trunc, workers=workers)
        residuals[f"{bs:.6f}"] = report.residual
    return all(r <= 1e-5 for r in residuals.values()), {"residuals": residuals}


def check_contour_sample(sizes, samples: int, seed: int = 0) -> tuple[bool, dict]:
    reports = {str(n): contours.verify_sample(n, samples, seed).to_dict() for n in sizes}
    return all(r["passed"] for r in reports.values()), reports


def check_contour_exhaustive(N: int = 4, pairs=(((1, 1), (2, 2)), ((1, 0), (0, 0)))) -> tuple[bool, dict]:
    reports = {f"{i}-{j}": contours.verify_exhaustive(N, i, j).to_dict() for i, j in pairs}
    return all(r["passed"] for r in reports.values()), reports


def check_counting(sizes, max_len: int = 10) -> tuple[bool, dict]:
    detail = {}
    passed = True
    for n in sizes:
        counts = contours.enumerate_separating_contours(n, (0, 0), (n // 2, n // 2), max_len)
        ok = all(
            (c == 0 if length < 4 else c <= contours.contour_count_bound(length))
            for length, c in counts.items()
        )
        passed &= ok
        detail[str(n)] = {str(k): v for k, v in counts.items()}
    return passed, detail


def check_peierls_mc(sweeps: int, seed: int, workers: int) -> tuple[bool, dict]:
    beta = 3.0
    m3 = contours.m_beta(beta)
    detail = {}
    passed = True
    for i, j in MC_PAIRS:
        result = mc_dg.run_chains(8, beta, i, j, sweeps, seed=seed, workers=workers, k_max=3)
        o = result["O_ij"]
        ok = o.estimate <= m3 + 3 * o.stderr
        for k in range(1, 4):
            t = result.tail(k)
            ok &= t.estimate <= contours.tail_bound(beta, k) + 3 * t.stderr
        passed &= ok
        detail[f"{i}-{j}"] = {"O_ij": o.estimate, "O_ij_stderr": o.stderr, "tail_1": result.tail(1).estimate}
    return passed, detail


def check_sandwich_mc(sweeps: int, seed: int, workers: int) -> tuple[bool, dict]:
    detail = {}
    passed = True
    for i, j in MC_PAIRS:
        report = mc_cg.cg_variance(8, 1.0 / 12.0, i, j, sweeps, seed=seed, workers=workers)
        ok = report.in_sandwich() and abs(report.mean_voltage) <= 3 * report.mean_voltage_stderr
        passed &= ok
        detail[f"{i}-{j}"] = {"estimate": report.estimate, "stderr": report.stderr, "lower": report.lower, "upper": report.upper}
    return passed, detail


def check_mc_against_exact(sweeps: int, seed: int, budget: int) -> tuple[bool, dict]:
    i, j = (1, 0), (2, 0)
    exact_o = exact.dg_moment_Oij(3, 1.0, i, j, exact.TruncationSpec(height_cutoff=4, budget=budget))
    dg = mc_dg.dg_estimate(3, 1.0, i, j, sweeps, seed=seed)["O_ij"]
    exact_u2 = exact.cg_moment_U2(3, 1.0 / 12.0, i, j, exact.TruncationSpec(charge_cutoff=4, budget=budget))
    cg = mc_cg.cg_variance(3, 1.0 / 12.0, i, j, sweeps, seed=seed)
    passed = dg.within(exact_o) and abs(cg.estimate - exact_u2) <= 3 * cg.stderr
    return passed, {
        "dg": {"exact": exact_o, "estimate": dg.estimate, "stderr": dg.stderr},
        "cg": {"exact": exact_u2, "estimate": cg.estimate, "stderr": cg.stderr},
    }


def build_checks(quick: bool, seed: int = 0, workers: int = 1, budget: int = exact.DEFAULT_BUDGET, sweeps: int = 100_000):
    """(이름, 검사 함수) 목록. 각 함수는 (통과 여부, 세부 정보) 를 돌려줍니다."""
    if quick:
        return [
            ("green_identities", lambda: check_green_identities(range(2, 9))),
            ("duality_n2", lambda: check_duality(2, (0.5, 1.0), 6, 4, 1e-6, workers, budget)),
            ("contours_n4", lambda: check_contour_sample((4,), 1000, seed)),
        ]
    return [
        ("green_identities", lambda: check_green_identities(range(2, 17))),
        ("duality_n2", lambda: check_duality(2, (0.5, 1.0), 6, 4, 1e-6, workers, budget)),
        ("duality_n3", lambda: check_duality(3, (0.75, 1.0), 3, 3, 1e-4, workers, budget)),
        ("cross_identity_n3", lambda: check_cross_identity(workers, budget)),
        ("contours_exactness", lambda: check_contour_sample((4, 6), 10_000, seed)),
        ("contours_exhaustive_n4", lambda: check_contour_exhaustive()),
        ("contour_counting", lambda: check_counting((4, 6))),
        ("peierls_mc", lambda: check_peierls_mc(sweeps, seed, workers)),
        ("variance_sandwich_mc", lambda: check_sandwich_mc(sweeps, seed, workers)),
        ("mc_vs_exact", lambda: check_mc_against_exact(sweeps, seed, budget)),
    ]


def run_checks(checks: list[tuple[str, Callable]]) -> list[CheckResult]:
    results = []
    for name, fn in checks:
        logger.info("검사 시작: %s", name)
        started = time.perf_counter()
        try:
            passed, detail = fn()
        except TorusCoulombError as e:
            passed, detail = False, {"error": str(e)}
        elapsed = time.perf_counter() - started
        results.append(CheckResult(name, bool(passed), detail, elapsed))
        level = logging.INFO if passed else logging.ERROR
        logger.log(level, "검사 %s: %s (%.1f초)", name, "통과" if passed else "실패", elapsed)
    return results
