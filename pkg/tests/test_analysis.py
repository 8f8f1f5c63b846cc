import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcollide.analysis import (
    compare_models,
    distance_to_gibbs,
    equivalence_coupling,
    occupations,
    ratio_scan,
    truncation_envelope,
)
from qcollide.bath import build_bath_spec, partition_function
from qcollide.collisional import CollisionConfig, cm_evolve
from qcollide.linalg import herm_eig, trace_distance
from qcollide.metropolis import MetropolisConfig, acceptance_matrix, mc_evolve
from qcollide.model import (
    SpinChainParams,
    build_xxz,
    gibbs_state,
    transitions,
    uniform_superposition_state,
)

N2_ENERGIES = np.array([-2.0, -1.0, 0.0, 3.0])


def matched_coupling(beta, n=2):
    energies = herm_eig(build_xxz(SpinChainParams(n))).values
    z_a = partition_function(build_bath_spec(transitions(energies)), beta)
    return float(np.sqrt(z_a / (2**n - 1)))


def exact_chain_expectation(rho0, energies, beta, steps):
    """Closed-form expectation of the trajectory average, no sampling.

    Each run is summarized by (occupied eigenstate, still-rejecting flag,
    first source): occupations follow a d-state Markov chain, and a run that
    has rejected every step keeps its first source's initial coherence
    row/column, halved per step. Both marginals iterate in closed form.
    """
    d = len(energies)
    big_l = d - 1
    accept = acceptance_matrix(energies, beta).copy()
    np.fill_diagonal(accept, 0.0)
    stay = 1.0 - accept.sum(axis=1) / big_l  # rejection probability per source

    populations = np.real(np.diag(rho0)).copy()
    templates = {}
    off = rho0 - np.diag(np.diag(rho0))
    for m in range(d):
        if populations[m] > 0 and (np.any(off[m, :]) or np.any(off[:, m])):
            t = np.zeros_like(rho0)
            t[m, :] = off[m, :] / (2 * populations[m])
            t[:, m] = off[:, m] / (2 * populations[m])
            templates[m] = t

    states = [rho0.copy()]
    alive = None
    for n in range(1, steps + 1):
        alive = populations * stay if n == 1 else alive * stay
        populations = (accept.T / big_l) @ populations + stay * populations
        state = np.diag(populations).astype(complex)
        for m, t in templates.items():
            state += alive[m] * 2.0 ** (1 - n) * t
        states.append(state)
    return states


class TestOccupations:
    def test_gibbs_values(self):
        occ = occupations(gibbs_state(N2_ENERGIES, 2.0))
        assert_allclose(occ, [0.86678, 0.11731, 0.015876, 3.94e-05], atol=5e-6)
        assert abs(occ.sum() - 1.0) <= 1e-10

    def test_uniform_superposition(self):
        assert_allclose(occupations(uniform_superposition_state(8)), np.full(8, 1 / 8))

    def test_basis_state(self):
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0
        assert_allclose(occupations(rho), [1, 0, 0, 0])


class TestEquivalenceCoupling:
    def test_unit_ratio(self):
        with pytest.warns(RuntimeWarning):  # sits exactly at the validity edge
            assert equivalence_coupling(3.0, 4) == 1.0

    def test_two_site_value(self):
        z_a = partition_function(build_bath_spec(transitions(N2_ENERGIES)), 2.0)
        assert_allclose(equivalence_coupling(z_a, 4), 0.65621, atol=5e-5)
        assert_allclose(equivalence_coupling(z_a, 4), math.sqrt(z_a / 3), atol=1e-15)

    def test_validity_warning(self):
        # infinite-temperature two-site value sqrt(7/3) is not small
        with pytest.warns(RuntimeWarning):
            g_dt = equivalence_coupling(7.0, 4)
        assert_allclose(g_dt, math.sqrt(7 / 3), atol=1e-15)
        assert_allclose(g_dt, 1.5275, atol=5e-5)

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            equivalence_coupling(1.0, 1)


class TestRatioScan:
    def test_infinite_temperature_formula(self):
        points = ratio_scan(list(range(2, 9)), [0.0])
        for p in points:
            d = 2**p.n_sites
            expected = (math.comb(d, 2) + 1) / (d - 1)
            assert abs(p.za_over_l - expected) <= 1e-12
            assert abs(p.infinite_temperature_ratio - expected) <= 1e-12
            assert abs(p.nondegenerate_floor - 1 / (d - 1)) <= 1e-15

    def test_monotone_in_beta(self):
        points = ratio_scan([2], [0.2, 2.0, 20.0, 200.0])
        values = [p.za_over_l for p in points]
        assert np.all(np.diff(values) <= 0)

    def test_high_beta_floor_nondegenerate(self):
        (point,) = ratio_scan([2], [200.0])
        assert abs(point.za_over_l - 1 / 3) <= 1e-6

    def test_high_beta_approach_rate(self):
        # excited-level sum is bounded by M * exp(-beta * smallest gap)
        for beta in (10.0, 20.0):
            (point,) = ratio_scan([2], [beta])
            assert 0 <= point.za_over_l - 1 / 3 <= 6 * np.exp(-beta * 1.0)

    def test_row_order(self):
        points = ratio_scan([3, 2], [1.0, 0.0])
        assert [(p.n_sites, p.beta) for p in points] == [(3, 1.0), (3, 0.0), (2, 1.0), (2, 0.0)]


class TestCompareModels:
    def test_same_start_zero_distance(self):
        h = build_xxz(SpinChainParams(2))
        report = compare_models(h, beta=2.0, steps=5, runs=2000, seed=1)
        assert report.trace_distance[0] == 0.0
        assert report.trace_distance.shape == (6,)
        assert report.occupations_cm.shape == (6, 4)
        assert report.ratio > 0 and report.coupling_used > 0
        assert report.runs == 2000

    def test_deterministic(self):
        h = build_xxz(SpinChainParams(2))
        a = compare_models(h, 2.0, 4, 3000, 7)
        b = compare_models(h, 2.0, 4, 3000, 7)
        assert np.array_equal(a.trace_distance, b.trace_distance)

    def test_averaged_mode_equals_truncation_envelope(self):
        h = build_xxz(SpinChainParams(2))
        beta = 20.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = compare_models(h, beta, 10, 1, 0, mc_mode="averaged_map")
        envelope = truncation_envelope(
            h, beta, 10, report.coupling_used, uniform_superposition_state(4)
        )
        assert np.max(np.abs(report.trace_distance - envelope)) <= 1e-12

    def test_statistical_plus_deterministic_envelope(self):
        """D(CM, MC) <= deterministic gap + 3-sigma statistical envelope.

        The deterministic center of the trajectory average is the exact
        chain expectation computed below, not the averaged-map iterate: the
        averaged map reproduces the step expectation only on states with
        strictly positive diagonals, and after one step every run sits on a
        boundary state (point-mass diagonal plus a rejection-chain coherence
        row), where the chain damps coherences faster than the map does.
        The diagonal marginals of the two coincide exactly.
        """
        h = build_xxz(SpinChainParams(2))
        beta, steps, runs, seed = 20.0, 12, 40_000, 13
        rho0 = uniform_superposition_state(4)
        energies = herm_eig(h).values
        report = compare_models(h, beta, steps, runs, seed, rho0=rho0)

        expectation = exact_chain_expectation(rho0, energies, beta, steps)
        cm_series = cm_evolve(
            h,
            CollisionConfig(
                g=1.0,
                dt=report.coupling_used,
                ts=0.0,
                beta=beta,
                steps=steps,
                include_free_evolution=False,
            ),
            rho0,
            "exact",
        )
        deterministic_gap = np.array(
            [trace_distance(a, b) for a, b in zip(cm_series.states, expectation)]
        )

        # block means over disjoint seeds estimate the variance of the full
        # mean; trace norm <= sqrt(d) * Frobenius norm
        blocks = 10
        per_block = runs // blocks
        means = []
        for b in range(blocks):
            cfg = MetropolisConfig(beta=beta, steps=steps, runs=per_block, seed=seed + 1000 + b)
            means.append(np.array(mc_evolve(energies, cfg, rho0).states))
        means = np.array(means)
        var_of_mean = means.var(axis=0, ddof=1) / blocks
        d_stat = 3 * np.sqrt(4) / 2 * np.sqrt(
            np.abs(var_of_mean).reshape(steps + 1, -1).sum(axis=1)
        )
        assert np.all(report.trace_distance <= deterministic_gap + d_stat + 1e-12)

    def test_trajectory_mean_converges_to_chain_expectation(self):
        h = build_xxz(SpinChainParams(2))
        energies = herm_eig(h).values
        rho0 = uniform_superposition_state(4)
        beta, steps = 20.0, 10
        expectation = exact_chain_expectation(rho0, energies, beta, steps)

        def max_err(runs, seed):
            series = mc_evolve(energies, MetropolisConfig(beta, steps, runs, seed), rho0)
            return max(
                float(np.max(np.abs(s - e))) for s, e in zip(series.states, expectation)
            )

        assert max_err(40_000, 3) < 0.01  # ~3 sigma of a binomial at 4e4 runs
        # pooled 1/sqrt(R) scaling
        small = np.sqrt(np.mean([max_err(10_000, s) ** 2 for s in range(40, 52)]))
        large = np.sqrt(np.mean([max_err(160_000, s) ** 2 for s in range(60, 72)]))
        assert 2.6 <= small / large <= 6.2  # ideal factor 4


class TestTruncationEnvelope:
    def test_first_step_halving_ratio(self):
        h = build_xxz(SpinChainParams(2))
        rho0 = uniform_superposition_state(4)
        for beta in (2.0, 20.0):
            g_dt = matched_coupling(beta)
            full = truncation_envelope(h, beta, 2, g_dt, rho0)
            half = truncation_envelope(h, beta, 2, g_dt / 2, rho0)
            assert full[0] == 0.0
            assert full[1] / half[1] >= 8.0


class TestDistanceToGibbs:
    def test_decreasing_for_thermalizing_run(self):
        from qcollide.collisional import CollisionConfig, cm_evolve

        h = build_xxz(SpinChainParams(2))
        cfg = CollisionConfig(g=1, dt=1, ts=1, beta=2.0, steps=10)
        series = cm_evolve(h, cfg, uniform_superposition_state(4))
        distances = distance_to_gibbs(series, h, 2.0)
        assert distances[-1] < distances[0]


@pytest.mark.slow
def test_peak_distance_ordering_n3_vs_n4():
    """The matched-coupling deviation peaks higher for N=3 than N=4."""
    peaks = {}
    for n in (3, 4):
        h = build_xxz(SpinChainParams(n))
        report = compare_models(h, beta=20.0, steps=20, runs=50_000, seed=21)
        peaks[n] = report.trace_distance.max()
    assert peaks[4] <= peaks[3]
