import math

import numpy as np
import pytest

from torus_coulomb import contours, exact, mc_cg
from torus_coulomb.errors import InputDomainError, TorusCoulombError
from torus_coulomb.greens import compute_green, potential_diff
from torus_coulomb.mc_cg import ChargeConfig


def test_dipole_energy_from_empty_gas(green4):
    cfg = ChargeConfig.zero(green4, 0.1)
    a, b = 5, 6
    de = mc_cg.dipole_delta_e(cfg, a, b)
    g = green4.values
    assert de == pytest.approx(math.pi**2 * 0.1 * 2.0 * (g[0, 0] - g[0, 1]))
    m = np.zeros(16, dtype=int)
    m[a], m[b] = 1, -1
    assert ChargeConfig.from_charges(green4, 0.1, m).energy == pytest.approx(de)


def test_incremental_energy_matches_recomputation(green4):
    cfg = ChargeConfig.zero(green4, 0.05)
    rng = np.random.default_rng(9)
    accepted = 0
    for _ in range(3000):
        record = mc_cg.dipole_step(cfg, rng, "uniform")
        accepted += record.accepted
        _, fresh = cfg.recompute()
        assert cfg.energy == pytest.approx(fresh, rel=1e-9, abs=1e-9)
    assert accepted > 0
    assert cfg.charges.sum() == 0


def test_kernel_keeps_neutrality_and_cache(green4):
    cfg = ChargeConfig.zero(green4, 0.05)
    rng = np.random.default_rng(4)
    voltages, accepted = mc_cg.advance(cfg, rng, 3000, 1, 2)
    assert voltages.shape == (3000,)
    assert accepted > mc_cg.REFRESH_EVERY
    assert cfg.charges.sum() == 0
    cfg.check_cache()
    assert cfg.max_drift <= 1e-6
    assert voltages[-1] == pytest.approx(mc_cg.voltage(cfg, 1, 2))


def test_charged_configuration_rejected(green4):
    m = np.zeros(16, dtype=int)
    m[3] = 1
    with pytest.raises(InputDomainError):
        ChargeConfig.from_charges(green4, 0.1, m)
    with pytest.raises(InputDomainError):
        ChargeConfig.zero(green4, 0.0)


def test_voltage_is_antisymmetric_and_odd(green4, rng):
    m = rng.integers(-2, 3, size=16)
    m[0] -= m.sum()
    cfg = ChargeConfig.from_charges(green4, 0.1, m)
    flipped = ChargeConfig.from_charges(green4, 0.1, -m)
    assert mc_cg.voltage(cfg, 3, 9) == pytest.approx(-mc_cg.voltage(cfg, 9, 3))
    assert mc_cg.voltage(flipped, 3, 9) == pytest.approx(-mc_cg.voltage(cfg, 3, 9))
    assert mc_cg.voltage(ChargeConfig.zero(green4, 0.1), 3, 9) == 0.0


def test_single_dipole_voltage(green4):
    m = np.zeros(16, dtype=int)
    m[5], m[6] = 1, -1
    cfg = ChargeConfig.from_charges(green4, 0.1, m)
    G = green4.matrix
    expected = 2 * math.pi * ((G[5, 5] - G[5, 6]) - (G[6, 5] - G[6, 6]))
    assert mc_cg.voltage(cfg, 5, 6) == pytest.approx(expected)


def test_unknown_proposal_rejected(green4, rng):
    with pytest.raises(InputDomainError):
        mc_cg.propose_pairs(green4.lattice, rng, 4, "far")


def test_proposals_pair_distinct_vertices(green4, rng):
    for proposal in ("nn", "uniform"):
        a, b = mc_cg.propose_pairs(green4.lattice, rng, 1000, proposal)
        assert np.all(a != b)


def test_variance_bounds_at_threshold(green8):
    lower, upper, warning = mc_cg.variance_bounds(green8, 1.0 / 12.0, (1, 1), (2, 1))
    delta_g = potential_diff(green8, (1, 1), (2, 1))
    assert warning is None
    assert upper == pytest.approx(48.0 * delta_g)
    assert lower == pytest.approx(upper - 576.0 * contours.m_beta(3.0))


def test_variance_bounds_omitted_outside_regime(green8, green3):
    assert mc_cg.variance_bounds(green8, 0.1, 0, 1)[:2] == (None, None)
    assert mc_cg.variance_bounds(green3, 1.0 / 12.0, 0, 1)[:2] == (None, None)


def test_report_without_bounds_refuses_sandwich():
    report = mc_cg.cg_variance(4, 0.2, 0, 1, 2000, burn_in=100, seed=1)
    assert not report.bounds_applicable
    assert report.warning
    with pytest.raises(TorusCoulombError):
        report.in_sandwich()


def test_same_seed_same_variance():
    a = mc_cg.cg_variance(4, 1.0 / 12.0, 0, 5, 2000, burn_in=100, seed=7)
    b = mc_cg.cg_variance(4, 1.0 / 12.0, 0, 5, 2000, burn_in=100, seed=7)
    assert a.to_dict() == b.to_dict()
    assert [e.observable for e in a.estimates()] == ["E*[U_ij^2]", "E*[U_ij]"]


@pytest.mark.parametrize("proposal", ["nn", "uniform"])
def test_agrees_with_exact_sum_on_three_torus(proposal):
    i, j = (1, 0), (2, 0)
    expected = exact.cg_moment_U2(3, 1.0 / 12.0, i, j, exact.TruncationSpec(charge_cutoff=4))
    report = mc_cg.cg_variance(3, 1.0 / 12.0, i, j, 40_000, seed=0, proposal=proposal)
    assert abs(report.estimate - expected) <= 3.0 * report.stderr
    assert abs(report.mean_voltage) <= 3.0 * report.mean_voltage_stderr


@pytest.mark.slow
@pytest.mark.parametrize("j", [(2, 1), (3, 1), (5, 1)])
def test_variance_lies_in_sandwich(j):
    report = mc_cg.cg_variance(8, 1.0 / 12.0, (1, 1), j, 100_000, seed=0)
    assert report.bounds_applicable
    assert report.in_sandwich()


@pytest.mark.slow
def test_ratio_ladder_consistent():
    points = mc_cg.ratio_ladder(8, (1, 1), (2, 1), sweeps=20_000)
    assert [p.beta_star for p in points] == list(mc_cg.DEFAULT_LADDER)
    assert all(p.consistent() for p in points)


@pytest.mark.slow
@pytest.mark.parametrize("refresh_every", [mc_cg.REFRESH_EVERY, 10**12])
def test_cache_drift_after_a_million_proposals(green8, monkeypatch, refresh_every):
    monkeypatch.setattr(mc_cg, "REFRESH_EVERY", refresh_every)
    cfg = ChargeConfig.zero(green8, 1.0 / 12.0)
    rng = np.random.default_rng(11)
    sweeps = 16_000
    _, accepted = mc_cg.advance(cfg, rng, sweeps, 0, 9, "uniform")
    assert sweeps * green8.lattice.num_vertices >= 10**6
    assert accepted > 0
    fresh = compute_green(8)
    assert np.max(np.abs(cfg.potentials - fresh.matrix @ cfg.charges)) <= 1e-6
    _, energy = cfg.recompute()
    assert abs(cfg.energy - energy) <= 1e-6 * max(1.0, abs(energy))
