#!/usr/bin/env python3
"""
Unit tests for optical elements in src/elements.py
"""

import math
import os
import sys

import numpy as np
import pytest

# Add root directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.errors import ConfigurationError, DomainError
from src.elements import (
    ConverterSpec,
    adjoint,
    beam_splitter,
    compose,
    frequency_converter,
    identity,
    matrix_exponential_oracle,
    pair_hamiltonian,
    phase_shifter,
)
from src.fock import ModeSpec, Polarization, apply, build_basis, fidelity, pure_state, superpose, vacuum

IR_NM = 876.1
UV_NM = 416.8


def two_pair_basis(cutoff=2):
    modes = [ModeSpec("k1", IR_NM), ModeSpec("k2", IR_NM), ModeSpec("kb1", UV_NM), ModeSpec("kb2", UV_NM)]
    return build_basis(modes, cutoff), modes


def single_pair_basis(cutoff=1):
    modes = [ModeSpec("k", IR_NM), ModeSpec("kb", UV_NM)]
    return build_basis(modes, cutoff), modes


class TestBeamSplitter:
    """Test the two-mode beam splitter"""

    def test_balanced_splitter_on_single_photon(self):
        basis = build_basis([ModeSpec("a", IR_NM), ModeSpec("b", IR_NM)], 1)
        a, b = basis.modes
        out = apply(beam_splitter(basis, a, b, 0.5), pure_state(basis, (1, 0)))
        assert out.amplitude((1, 0)) == pytest.approx(2 ** -0.5)
        assert out.amplitude((0, 1)) == pytest.approx(1j * 2 ** -0.5)

    def test_hong_ou_mandel_dip(self):
        basis = build_basis([ModeSpec("a", IR_NM), ModeSpec("b", IR_NM)], 2)
        a, b = basis.modes
        out = apply(beam_splitter(basis, a, b, 0.5), pure_state(basis, (1, 1)))
        assert abs(out.amplitude((1, 1))) < 1e-12
        assert abs(out.amplitude((2, 0))) ** 2 == pytest.approx(0.5)
        assert abs(out.amplitude((0, 2))) ** 2 == pytest.approx(0.5)

    def test_full_transmission_is_identity(self):
        basis, modes = two_pair_basis()
        bs = beam_splitter(basis, modes[0], modes[1], 1.0)
        assert np.max(np.abs(bs.matrix - np.eye(basis.dimension))) < 1e-12

    def test_vacuum_is_fixed(self):
        basis, modes = two_pair_basis()
        out = apply(beam_splitter(basis, modes[0], modes[1], 0.3), vacuum(basis))
        assert fidelity(out, vacuum(basis)) == pytest.approx(1.0)

    def test_rejects_different_wavelengths(self):
        basis, modes = two_pair_basis()
        with pytest.raises(DomainError):
            beam_splitter(basis, modes[0], modes[2], 0.5)

    def test_rejects_different_polarizations(self):
        basis = build_basis([ModeSpec("aH", IR_NM, Polarization.H), ModeSpec("aV", IR_NM, Polarization.V)], 1)
        with pytest.raises(DomainError):
            beam_splitter(basis, basis.modes[0], basis.modes[1], 0.5)

    @pytest.mark.parametrize("transmissivity", [-0.1, 1.5])
    def test_rejects_transmissivity_out_of_range(self, transmissivity):
        basis, modes = two_pair_basis()
        with pytest.raises(DomainError):
            beam_splitter(basis, modes[0], modes[1], transmissivity)

    def test_rejects_mode_outside_basis(self):
        basis, modes = two_pair_basis()
        with pytest.raises(DomainError):
            beam_splitter(basis, modes[0], ModeSpec("k9", IR_NM), 0.5)


class TestPhaseShifter:
    """Test the single-mode phase shifter"""

    def test_phase_scales_with_photon_number(self):
        basis, modes = two_pair_basis()
        shifter = phase_shifter(basis, modes[1], 0.4)
        out = apply(shifter, pure_state(basis, (0, 2, 0, 0)))
        assert out.amplitude((0, 2, 0, 0)) == pytest.approx(np.exp(0.8j))

    def test_other_modes_untouched(self):
        basis, modes = two_pair_basis()
        out = apply(phase_shifter(basis, modes[1], 1.1), pure_state(basis, (1, 0, 0, 0)))
        assert out.amplitude((1, 0, 0, 0)) == pytest.approx(1.0)


class TestFrequencyConverter:
    """Test the pairwise frequency converter"""

    def test_vacuum_is_fixed(self):
        basis, modes = two_pair_basis()
        spec = ConverterSpec(pairs=((modes[0], modes[2]), (modes[1], modes[3])), theta=0.9, pump_phase=0.3)
        out = apply(frequency_converter(basis, spec), vacuum(basis))
        assert fidelity(out, vacuum(basis)) == pytest.approx(1.0)

    def test_single_photon_amplitudes(self):
        basis, (k, kb) = single_pair_basis()
        theta, pump_phase = 0.7, 0.25
        u = frequency_converter(basis, ConverterSpec(pairs=((k, kb),), theta=theta, pump_phase=pump_phase))
        out = apply(u, pure_state(basis, (1, 0)))
        assert out.amplitude((1, 0)) == pytest.approx(math.cos(theta))
        assert out.amplitude((0, 1)) == pytest.approx(-1j * np.exp(1j * pump_phase) * math.sin(theta))

    def test_half_period_is_full_conversion(self):
        basis, (k, kb) = single_pair_basis()
        u = frequency_converter(basis, ConverterSpec(pairs=((k, kb),), theta=math.pi / 2))
        out = apply(u, pure_state(basis, (1, 0)))
        assert abs(out.amplitude((0, 1))) ** 2 == pytest.approx(1.0)

    def test_conversion_probability_is_sin_squared(self):
        basis, (k, kb) = single_pair_basis()
        rng = np.random.default_rng(11)
        for theta in rng.uniform(0.0, 2 * math.pi, 50):
            u = frequency_converter(basis, ConverterSpec(pairs=((k, kb),), theta=float(theta)))
            out = apply(u, pure_state(basis, (1, 0)))
            assert abs(out.amplitude((0, 1))) ** 2 == pytest.approx(math.sin(theta) ** 2, abs=1e-12)

    def test_half_turn_shift_flips_sign_by_photon_parity(self):
        """Test that theta + pi equals theta up to (-1)^(photons on the converter modes)"""
        basis, modes = two_pair_basis(cutoff=2)
        k1, k2, kb1, kb2 = modes
        parity = np.diag((-1.0) ** basis.occupations.sum(axis=1))
        for theta in (0.0, 0.3, 1.2, 2.9):
            spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=theta, pump_phase=0.4)
            shifted = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=theta + math.pi, pump_phase=0.4)
            u = frequency_converter(basis, spec).matrix
            assert np.max(np.abs(frequency_converter(basis, shifted).matrix - parity @ u)) < 1e-10

    def test_half_turn_is_diagonal_parity(self):
        """Test that theta = pi converts nothing and leaves only the photon parity sign"""
        basis, modes = two_pair_basis(cutoff=2)
        k1, k2, kb1, kb2 = modes
        spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=math.pi, pump_phase=1.7)
        u = frequency_converter(basis, spec).matrix
        expected = np.diag((-1.0) ** basis.occupations.sum(axis=1))
        assert np.max(np.abs(u - expected)) < 1e-10

    def test_full_turn_is_identity(self):
        basis, modes = two_pair_basis(cutoff=2)
        k1, k2, kb1, kb2 = modes
        spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=2 * math.pi, pump_phase=0.9)
        u = frequency_converter(basis, spec).matrix
        assert np.max(np.abs(u - np.eye(basis.dimension))) < 1e-10

    def test_qubit_transfers_to_uv_with_relative_phase(self):
        basis, modes = two_pair_basis(cutoff=1)
        k1, k2, kb1, kb2 = modes
        a = 2 ** -0.5
        qubit = superpose([(a, pure_state(basis, (1, 0, 0, 0))), (a * np.exp(0.6j), pure_state(basis, (0, 1, 0, 0)))])
        spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=math.pi / 2, pump_phase=0.2)
        out = apply(frequency_converter(basis, spec), qubit)
        expected = superpose([(a, pure_state(basis, (0, 0, 1, 0))), (a * np.exp(0.6j), pure_state(basis, (0, 0, 0, 1)))])
        assert fidelity(out, expected) == pytest.approx(1.0)

    def test_pair_photon_number_conserved(self):
        basis, modes = two_pair_basis(cutoff=3)
        k1, k2, kb1, kb2 = modes
        spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=1.1, pair_thetas=(1.1, 0.4), pair_pump_phases=(0.0, 2.0))
        u = frequency_converter(basis, spec)
        occ = basis.occupations
        pair1 = occ[:, 0] + occ[:, 2]
        pair2 = occ[:, 1] + occ[:, 3]
        rows, cols = np.nonzero(np.abs(u.matrix) > 1e-12)
        assert np.array_equal(pair1[rows], pair1[cols])
        assert np.array_equal(pair2[rows], pair2[cols])

    def test_overlapping_pairs_rejected(self):
        basis, modes = two_pair_basis()
        with pytest.raises(ConfigurationError):
            ConverterSpec(pairs=((modes[0], modes[2]), (modes[1], modes[2])), theta=0.5)

    def test_pair_thetas_length_checked(self):
        basis, modes = two_pair_basis()
        with pytest.raises(ConfigurationError):
            ConverterSpec(pairs=((modes[0], modes[2]),), theta=0.5, pair_thetas=(0.5, 0.2))

    def test_quantum_efficiency(self):
        basis, modes = two_pair_basis()
        spec = ConverterSpec(pairs=((modes[0], modes[2]),), theta=math.pi / 4)
        assert spec.quantum_efficiency == pytest.approx(0.5)


class TestMatrixExponentialOracle:
    """The exact lift and the Hamiltonian exponential must agree"""

    def test_agreement_over_random_angles(self):
        basis, modes = two_pair_basis(cutoff=2)
        k1, k2, kb1, kb2 = modes
        rng = np.random.default_rng(2024)
        for theta in rng.uniform(0.0, 2 * math.pi, 20):
            spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=float(theta), pump_phase=float(rng.uniform(0, 2 * math.pi)))
            lifted = frequency_converter(basis, spec)
            oracle = matrix_exponential_oracle(pair_hamiltonian(basis, spec), spec.theta)
            assert np.max(np.abs(lifted.matrix - oracle.matrix)) < 1e-10

    def test_agreement_with_per_pair_settings(self):
        basis, modes = two_pair_basis(cutoff=2)
        k1, k2, kb1, kb2 = modes
        spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=0.8,
                             pair_thetas=(0.8, 0.3), pair_pump_phases=(0.0, 1.3))
        lifted = frequency_converter(basis, spec)
        oracle = matrix_exponential_oracle(pair_hamiltonian(basis, spec), spec.theta)
        assert np.max(np.abs(lifted.matrix - oracle.matrix)) < 1e-10

    def test_zero_common_theta_with_pair_angles_rejected(self):
        """Test that per-pair angles over a zero common theta raise instead of giving a wrong oracle"""
        basis, modes = two_pair_basis(cutoff=2)
        k1, k2, kb1, kb2 = modes
        spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=0.0, pair_thetas=(0.0, 0.7))
        with pytest.raises(DomainError):
            pair_hamiltonian(basis, spec)

    def test_all_zero_pair_angles_match_lift(self):
        basis, modes = two_pair_basis(cutoff=2)
        k1, k2, kb1, kb2 = modes
        spec = ConverterSpec(pairs=((k1, kb1), (k2, kb2)), theta=0.0, pair_thetas=(0.0, 0.0))
        oracle = matrix_exponential_oracle(pair_hamiltonian(basis, spec), spec.theta)
        assert np.max(np.abs(oracle.matrix - frequency_converter(basis, spec).matrix)) < 1e-10

    def test_hamiltonian_is_hermitian(self):
        basis, modes = two_pair_basis(cutoff=2)
        spec = ConverterSpec(pairs=((modes[0], modes[2]), (modes[1], modes[3])), theta=0.5, pump_phase=0.9)
        assert pair_hamiltonian(basis, spec).hermiticity_error() < 1e-12

    def test_zero_angle_is_identity(self):
        basis, modes = two_pair_basis(cutoff=2)
        spec = ConverterSpec(pairs=((modes[0], modes[2]), (modes[1], modes[3])), theta=0.0)
        oracle = matrix_exponential_oracle(pair_hamiltonian(basis, spec), 0.0)
        assert np.max(np.abs(oracle.matrix - np.eye(basis.dimension))) < 1e-12


class TestCompose:
    """Test network composition"""

    def test_application_order(self):
        basis, modes = two_pair_basis(cutoff=1)
        bs = beam_splitter(basis, modes[0], modes[1], 0.5)
        shift = phase_shifter(basis, modes[1], 0.9)
        network = compose([bs, shift])
        assert np.max(np.abs(network.matrix - shift.matrix @ bs.matrix)) < 1e-12
        assert network.name == f"{bs.name} -> {shift.name}"

    def test_adjoint_inverts(self):
        basis, modes = two_pair_basis(cutoff=2)
        spec = ConverterSpec(pairs=((modes[0], modes[2]), (modes[1], modes[3])), theta=0.7, pump_phase=0.4)
        u = frequency_converter(basis, spec)
        round_trip = compose([u, adjoint(u)])
        assert np.max(np.abs(round_trip.matrix - identity(basis).matrix)) < 1e-12

    def test_empty_list_rejected(self):
        with pytest.raises(DomainError):
            compose([])

    def test_basis_mismatch_rejected(self):
        basis_a, modes_a = two_pair_basis(cutoff=1)
        basis_b, _ = two_pair_basis(cutoff=2)
        with pytest.raises(DomainError):
            compose([identity(basis_a), identity(basis_b)])

    def test_mach_zehnder_returns_photon(self):
        basis = build_basis([ModeSpec("a", IR_NM), ModeSpec("b", IR_NM)], 1)
        a, b = basis.modes
        bs = beam_splitter(basis, a, b, 0.5)
        network = compose([bs, phase_shifter(basis, b, 0.0), bs])
        out = apply(network, pure_state(basis, (1, 0)))
        # two symmetric splitters with no phase send the photon to the other port
        assert abs(out.amplitude((0, 1))) ** 2 == pytest.approx(1.0)
