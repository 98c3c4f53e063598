import math

import numpy as np
import pytest

from torus_coulomb import contours, exact, mc_dg
from torus_coulomb.contours import HeightConfig
from torus_coulomb.errors import ConfigurationError, InputDomainError, PreconditionError
from torus_coulomb.lattice import TorusLattice, hamiltonian


def test_local_energy_change_matches_global(rng):
    lat = TorusLattice(4)
    for _ in range(300):
        x = HeightConfig.random(4, rng).heights.copy()
        v = int(rng.integers(1, 16))
        delta = int(rng.choice([-1, 1]))
        y = x.copy()
        y[v] += delta
        assert mc_dg.local_delta_h(lat, x, v, delta) == hamiltonian(lat, y) - hamiltonian(lat, x)


def test_flat_state_excitation_costs_four(lat4):
    x = np.zeros(16, dtype=np.int64)
    assert mc_dg.local_delta_h(lat4, x, 5, 1) == 4
    assert mc_dg.local_delta_h(lat4, x, 5, -1) == 4
    assert mc_dg.acceptance_probability(3.0, 4) == pytest.approx(math.exp(-12.0))


@pytest.mark.parametrize("dh", [1, 4, 12])
def test_acceptance_ratio_is_detailed_balance(dh):
    beta = 0.8
    ratio = mc_dg.acceptance_probability(beta, dh) / mc_dg.acceptance_probability(beta, -dh)
    assert ratio == pytest.approx(math.exp(-beta * dh))


def test_single_steps_keep_energy_and_pin():
    chain = mc_dg.DGChain.start(4, 0.5, seed=3)
    for _ in range(2000):
        record = mc_dg.dg_step(chain)
        assert record.site != 0
    chain.check_energy()
    assert chain.proposed == 2000
    assert 0 < chain.acceptance_rate < 1


def test_chain_start_requires_pinned_heights():
    with pytest.raises(PreconditionError):
        mc_dg.DGChain.start(4, 1.0, 0, heights=np.ones(16, dtype=int))
    with pytest.raises(InputDomainError):
        mc_dg.DGChain.start(4, 0.0, 0)


def test_kernel_sweeps_keep_energy_cache():
    chain = mc_dg.DGChain.start(6, 0.7, seed=11)
    diffs = mc_dg.advance(chain, 3000, 7, 9, record=True)
    assert diffs.shape == (3000,)
    assert chain.state[0] == 0
    assert chain.energy == hamiltonian(chain.lattice, chain.state)
    assert chain.sweeps == 3000
    assert chain.proposed == 3000 * 35


def test_same_seed_same_estimates():
    a = mc_dg.dg_estimate(4, 1.0, (1, 1), (2, 1), 2000, burn_in=100, seed=5)
    b = mc_dg.dg_estimate(4, 1.0, (1, 1), (2, 1), 2000, burn_in=100, seed=5)
    assert a.to_dict() == b.to_dict()


def test_too_few_sweeps_for_batches():
    with pytest.raises(ConfigurationError):
        mc_dg.dg_estimate(4, 1.0, 0, 1, 10, burn_in=0)


def test_result_lists_all_observables():
    result = mc_dg.dg_estimate(4, 1.0, 0, 5, 2000, burn_in=100, k_max=3)
    names = [r.observable for r in result.reports]
    assert names[:2] == ["O_ij", "mean(x_i-x_j)"]
    assert [result.tail(k).observable for k in (1, 2, 3)] == names[2:]
    with pytest.raises(KeyError):
        result.tail(4)
    tails = [result.tail(k).estimate for k in (1, 2, 3)]
    assert all(b <= a for a, b in zip(tails, tails[1:]))


def test_several_chains_pool_their_batches():
    result = mc_dg.run_chains(4, 1.0, 0, 5, 2000, burn_in=100, seed=2, chains=2, workers=1)
    assert result.seeds == [2, 3]
    assert result["O_ij"].batches == 64


def test_colder_chain_fluctuates_less():
    warm = mc_dg.dg_estimate(4, 0.5, (1, 1), (2, 1), 5000, burn_in=500, seed=1)
    cold = mc_dg.dg_estimate(4, 2.0, (1, 1), (2, 1), 5000, burn_in=500, seed=1)
    assert cold["O_ij"].estimate < warm["O_ij"].estimate


def test_agrees_with_exact_sum_on_three_torus():
    i, j = (1, 0), (2, 0)
    expected = exact.dg_moment_Oij(3, 1.0, i, j, exact.TruncationSpec(height_cutoff=4))
    result = mc_dg.dg_estimate(3, 1.0, i, j, 40_000, seed=0)
    assert result["O_ij"].within(expected, sigmas=3.0)
    assert result["mean(x_i-x_j)"].within(0.0, sigmas=3.0)


@pytest.mark.slow
@pytest.mark.parametrize("j", [(2, 1), (3, 1), (5, 1)])
def test_low_temperature_respects_peierls_bounds(j):
    beta = 3.0
    result = mc_dg.dg_estimate(8, beta, (1, 1), j, 100_000, seed=0)
    o = result["O_ij"]
    assert o.estimate <= contours.m_beta(beta) + 3 * o.stderr
    for k in range(1, 4):
        t = result.tail(k)
        assert t.estimate <= contours.tail_bound(beta, k) + 3 * t.stderr
    assert 0.0 < result.acceptance_rate < 0.1
