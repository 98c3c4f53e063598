import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import contours, exact, greens, mc_cg, mc_dg, verify
from .app_config import RunConfig
from .errors import DomainError, UsageError
from .lattice import TorusLattice
from .reports import ESTIMATE_COLUMNS, estimate_rows
from .utils import resolve_workers

logger = logging.getLogger(__name__)


@dataclass
class CommandOutcome:
    """명령 하나의 결과. passed=False 이면 종료 코드 1."""

    results: Any
    columns: tuple = ESTIMATE_COLUMNS
    rows: list = field(default_factory=list)
    passed: bool = True


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"'{cfg.subcommand}' 명령에는 {flags} 이(가) 필요합니다.")


class AppController:
    """RunConfig 를 받아 해당 모듈 연산으로 보내고 결과를 모읍니다."""

    def __init__(self, config: dict, progress: Optional[bool] = None):
        self.config = config
        self.threads = config.get("threads", 1)
        self.progress = sys.stderr.isatty() if progress is None else progress

    def run(self, cfg: RunConfig) -> CommandOutcome:
        handler = {
            "greens": self.run_greens,
            "exact": self.run_exact,
            "contours": self.run_contours,
            "dg": self.run_dg,
            "cg": self.run_cg,
            "verify": self.run_verify,
        }.get(cfg.subcommand)
        if handler is None:
            raise UsageError(f"알 수 없는 명령입니다: {cfg.subcommand}")
        if cfg.beta_star is not None:
            logger.info("β=%.10g, β*=(4β)^{-1}=%.10g", cfg.beta, cfg.beta_star)
        return handler(cfg)

    def _workers(self, cfg: RunConfig) -> int:
        return resolve_workers(cfg.chains, self.threads)

    def _trunc(self, cfg: RunConfig) -> exact.TruncationSpec:
        return exact.TruncationSpec(
            height_cutoff=cfg.kx or 0,
            charge_cutoff=cfg.km or 0,
            budget=cfg.budget,
            budget_override=cfg.budget_override,
        )

    def run_greens(self, cfg: RunConfig) -> CommandOutcome:
        _require(cfg, "n")
        G = greens.compute_green(cfg.n)
        n = cfg.n
        rows = [(dx, dy, float(G.values[dy, dx])) for dy in range(n) for dx in range(n)]
        results = {
            "side_length": n,
            "g": G.values.tolist(),
            "laplacian_identity_residual": greens.laplacian_identity_residual(G),
            "potential_profile": greens.potential_profile(G),
        }
        if cfg.i is not None and cfg.j is not None:
            results["potential_diff"] = greens.potential_diff(G, cfg.i, cfg.j)
        return CommandOutcome(results, ("dx", "dy", "g"), rows)

    def run_exact(self, cfg: RunConfig) -> CommandOutcome:
        _require(cfg, "n")
        trunc = self._trunc(cfg)
        workers = resolve_workers(self.threads, self.threads)
        if cfg.action == "duality":
            _require(cfg, "beta")
            report = exact.duality_report(cfg.n, cfg.beta, trunc, workers=workers, progress=self.progress)
            rows = [("relative_gap", report.relative_gap, 0.0, 0, cfg.seed)]
            return CommandOutcome(report.to_dict(), rows=rows)
        if cfg.action == "cross-identity":
            _require(cfg, "beta_star", "i", "j")
            report = exact.cross_identity_report(
                cfg.n, cfg.beta_star, cfg.i, cfg.j, trunc, workers=workers, progress=self.progress
            )
            rows = [
                ("E*[U_ij^2]", report.e_u2, report.tail_u2, 0, cfg.seed),
                ("E[O_ij]", report.e_o, report.tail_o, 0, cfg.seed),
                ("residual", report.residual, report.tail_bound, 0, cfg.seed),
            ]
            return CommandOutcome(report.to_dict(), rows=rows)
        raise UsageError("exact 명령에는 duality 또는 cross-identity 가 필요합니다.")

    def run_contours(self, cfg: RunConfig) -> CommandOutcome:
        _require(cfg, "n")
        if cfg.action == "extract":
            _require(cfg, "i", "j")
            lat = TorusLattice(cfg.n)
            rng = np.random.default_rng(cfg.seed)
            i, j = lat.vertex(cfg.i), lat.vertex(cfg.j)
            while True:
                x = contours.HeightConfig.random(cfg.n, rng)
                if x[i] != x[j]:
                    break
            if x[i] < x[j]:
                x = contours.HeightConfig.pinned(cfg.n, -x.heights)
            gamma = contours.separating_contour(x, i, j)
            results = {
                "heights": x.heights.reshape(cfg.n, cfg.n).tolist(),
                "kind": gamma.kind.value,
                "length": gamma.length,
                "periods": [list(c.period) for c in gamma.contours],
                "edges": [[[list(e.tail), list(e.head)] for e in c.edges] for c in gamma.contours],
                "inside": sorted(gamma.inside),
                "peierls_gap": contours.peierls_gap(x, i, j),
            }
            return CommandOutcome(results, rows=[("length", gamma.length, 0.0, 0, cfg.seed)])
        if cfg.action == "enumerate":
            _require(cfg, "i", "j", "max_len")
            case1, case2 = contours.enumerate_separating_contours_by_case(
                cfg.n, cfg.i, cfg.j, cfg.max_len, budget=None if cfg.budget_override else contours.DEFAULT_ENUMERATION_BUDGET
            )
            table = [
                {
                    "length": length,
                    "case1": case1[length],
                    "case2": case2[length],
                    "count": case1[length] + case2[length],
                    "bound": contours.contour_count_bound(length),
                }
                for length in sorted(case1)
            ]
            passed = all(row["count"] <= row["bound"] for row in table)
            rows = [(r["length"], r["count"], r["bound"]) for r in table]
            return CommandOutcome({"counts": table}, ("length", "count", "bound"), rows, passed)
        if cfg.action == "verify":
            samples = cfg.samples or 1000
            report = contours.verify_sample(cfg.n, samples, cfg.seed)
            results = report.to_dict()
            if cfg.beta is not None:
                results["phi"] = contours.phi(cfg.beta)
                results["tail_bounds"] = {k: contours.tail_bound(cfg.beta, k) for k in range(1, 6)}
                try:
                    results["m_beta"] = contours.m_beta(cfg.beta)
                except DomainError as e:
                    results["m_beta"] = None
                    logger.warning("%s", e)
                if cfg.max_len:
                    counts = contours.enumerate_separating_contours(cfg.n, 0, (cfg.n // 2, cfg.n // 2), cfg.max_len)
                    results["peierls_sum"] = contours.peierls_sum(cfg.beta, counts)
            rows = [(name, value, 0.0, samples, cfg.seed) for name, value in results.items() if name.endswith("failures")]
            return CommandOutcome(results, rows=rows, passed=report.passed)
        raise UsageError("contours 명령에는 extract, enumerate, verify 중 하나가 필요합니다.")

    def run_dg(self, cfg: RunConfig) -> CommandOutcome:
        _require(cfg, "n", "beta", "i", "j", "sweeps")
        result = mc_dg.run_chains(
            cfg.n, cfg.beta, cfg.i, cfg.j, cfg.sweeps, cfg.burn_in, cfg.seed,
            chains=cfg.chains, workers=self._workers(cfg), k_max=cfg.k_max,
        )
        return CommandOutcome(result.to_dict(), rows=estimate_rows(result.reports))

    def run_cg(self, cfg: RunConfig) -> CommandOutcome:
        _require(cfg, "n", "beta_star", "i", "j", "sweeps")
        report = mc_cg.cg_variance(
            cfg.n, cfg.beta_star, cfg.i, cfg.j, cfg.sweeps, cfg.burn_in, cfg.seed,
            proposal=cfg.proposal, chains=cfg.chains, workers=self._workers(cfg),
        )
        return CommandOutcome(report.to_dict(), rows=estimate_rows(report.estimates()))

    def run_verify(self, cfg: RunConfig) -> CommandOutcome:
        checks = verify.build_checks(
            cfg.quick,
            seed=cfg.seed,
            workers=resolve_workers(self.threads, self.threads),
            budget=cfg.budget,
            sweeps=cfg.sweeps or 100_000,
        )
        results = verify.run_checks(checks)
        rows = [(r.name, int(r.passed), 0.0, 0, cfg.seed) for r in results]
        return CommandOutcome([r.to_dict() for r in results], rows=rows, passed=all(r.passed for r in results))
