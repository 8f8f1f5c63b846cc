import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcollide.bath import (
    ancilla_state,
    build_bath_spec,
    build_interaction,
    partition_function,
    ratio_za_l,
)
from qcollide.linalg import DimensionMismatch, herm_eig
from qcollide.model import SpinChainParams, build_xxz, transitions

N2_ENERGIES = np.array([-2.0, -1.0, 0.0, 3.0])


def n2_spec():
    return build_bath_spec(transitions(N2_ENERGIES))


class TestBathSpec:
    def test_two_site_levels(self):
        spec = n2_spec()
        assert_allclose(spec.levels, [0.0, 1.0, 2.0, 5.0, 1.0, 4.0, 3.0])
        assert spec.levels[0] == 0.0
        assert spec.dim == 7  # binomial(4, 2) + 1
        assert spec.num_transitions == 6

    def test_levels_match_gaps_bitwise(self):
        table = transitions(herm_eig(build_xxz(SpinChainParams(3, 0.9, 0.3, 1.4))).values)
        spec = build_bath_spec(table)
        for pair, level in spec.pair_index.items():
            assert spec.levels[level] == table.gaps[table.pairs.index(pair)]

    def test_single_gap(self):
        spec = build_bath_spec(transitions(np.array([0.0, 1.0])))
        assert_allclose(spec.levels, [0.0, 1.0])


class TestAncillaState:
    def test_infinite_temperature(self):
        rho = ancilla_state(n2_spec(), 0.0)
        assert_allclose(np.diag(rho), np.full(7, 1 / 7))

    def test_zero_temperature_limit(self):
        rho = ancilla_state(n2_spec(), 200.0)
        assert abs(np.real(rho[0, 0]) - 1.0) <= 1e-10

    def test_ground_population(self):
        # 1/Z_a with Z_a = 1 + 2 e^-2 + e^-4 + e^-6 + e^-8 + e^-10
        z = 1 + 2 * math.exp(-2) + sum(math.exp(-2 * k) for k in (2, 3, 4, 5))
        rho = ancilla_state(n2_spec(), 2.0)
        assert_allclose(np.real(rho[0, 0]), 1 / z, atol=1e-14)
        assert_allclose(np.real(rho[0, 0]), 0.77409, atol=5e-6)

    def test_trace_and_ordering(self):
        spec = n2_spec()
        rho = ancilla_state(spec, 1.7)
        assert abs(np.trace(rho).real - 1.0) <= 1e-12
        assert np.max(np.abs(rho - np.diag(np.diag(rho)))) == 0.0
        pops = np.real(np.diag(rho))
        for a in range(spec.dim):
            for b in range(spec.dim):
                if spec.levels[a] > spec.levels[b]:
                    assert pops[a] <= pops[b] + 1e-15


class TestPartitionFunction:
    def test_infinite_temperature(self):
        assert partition_function(n2_spec(), 0.0) == 7.0

    def test_direct_sum(self):
        z = 1 + 2 * math.exp(-2) + sum(math.exp(-2 * k) for k in (2, 3, 4, 5))
        assert_allclose(partition_function(n2_spec(), 2.0), z, atol=1e-14)
        assert_allclose(partition_function(n2_spec(), 2.0), 1.29185, atol=5e-6)

    def test_zero_temperature_nondegenerate(self):
        assert abs(partition_function(n2_spec(), 1e4) - 1.0) <= 1e-12

    def test_monotone_and_bounded(self):
        spec = n2_spec()
        betas = [0.0, 0.1, 0.5, 2.0, 10.0, 100.0]
        values = [partition_function(spec, b) for b in betas]
        assert np.all(np.diff(values) <= 0)
        assert all(1.0 <= v <= spec.dim for v in values)


class TestBuildInteraction:
    def test_structure(self):
        h = build_interaction(4, n2_spec(), 0.8)
        assert h.shape == (28, 28)
        nonzero = np.abs(h) > 0
        assert nonzero.sum() == 12  # two entries per pair
        assert_allclose(np.abs(h[nonzero]), 0.8)
        assert np.max(np.abs(h - h.conj().T)) == 0.0

    def test_energy_conserving_placement(self):
        # coupled joint states |i, ground> and |j, excited(i,j)> are degenerate
        spec = n2_spec()
        h = build_interaction(4, spec, 1.0)
        joint_levels = np.add.outer(N2_ENERGIES, spec.levels).ravel()
        rows, cols = np.nonzero(h)
        assert_allclose(joint_levels[rows], joint_levels[cols], atol=1e-12)

    def test_decoupled(self):
        assert np.all(build_interaction(4, n2_spec(), 0.0) == 0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            build_interaction(5, n2_spec(), 1.0)


class TestRatio:
    def test_infinite_temperature_formula(self):
        for n in range(2, 9):
            d = 2**n
            energies = herm_eig(build_xxz(SpinChainParams(n))).values
            spec = build_bath_spec(transitions(energies))
            expected = (math.comb(d, 2) + 1) / (d - 1)
            assert abs(ratio_za_l(spec, 0.0, d) - expected) <= 1e-12
            assert abs(expected - (d / 2 + 1 / (d - 1))) <= 1e-12

    def test_four_site_value(self):
        energies = herm_eig(build_xxz(SpinChainParams(4))).values
        spec = build_bath_spec(transitions(energies))
        assert_allclose(ratio_za_l(spec, 0.0, 16), 121 / 15, atol=1e-12)

    def test_zero_temperature_floor(self):
        # non-degenerate two-site spectrum: only the ground term survives
        assert abs(ratio_za_l(n2_spec(), 200.0, 4) - 1 / 3) <= 1e-10

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            ratio_za_l(n2_spec(), 1.0, 1)
