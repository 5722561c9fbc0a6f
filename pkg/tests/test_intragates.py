import json

import numpy as np
import pytest

from polyqubit.errors import DomainError
from polyqubit.intragates import (
    GatePulseProgram,
    cnot_program,
    cswap_program,
    cz_program,
    deutsch3_program,
    deutsch_matrix,
    deutsch_p_program,
    hadamard_program,
    identity_program,
    rotation_program,
    spectator_deviation,
    standard_programs,
    swap_program,
    toffoli_program,
    verify_program,
)
from polyqubit.linop import SIGMA_X, expm, kron, unitarity_error
from polyqubit.polyenc import PolyEncoding, atomic_pauli

ENC2, ENC3 = PolyEncoding(2), PolyEncoding(3)
TOFFOLI8 = np.eye(8)[[0, 1, 2, 3, 4, 5, 7, 6]]


def printed_d3(theta):
    # the 8x8 Deutsch matrix written out by hand
    m = np.eye(8, dtype=complex)
    m[6, 6] = m[7, 7] = 1j * np.cos(theta)
    m[6, 7] = m[7, 6] = np.sin(theta)
    return m


class TestCnot:
    def test_h_controls_v(self):
        u = cnot_program(ENC2, "H", "V").unitary()
        expected = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), SIGMA_X]])
        assert np.abs(u - expected).max() < 1e-10

    def test_written_out_factorisation(self):
        z_h = atomic_pauli(ENC2, "Z", 0, 2) + atomic_pauli(ENC2, "Z", 1, 3)
        u = np.exp(1j * np.pi / 4) * expm(z_h, np.pi / 4) @ expm(atomic_pauli(ENC2, "X", 2, 3), np.pi / 2)
        assert np.abs(u - cnot_program(ENC2, "H", "V").unitary()).max() < 1e-14

    def test_v_controls_h_by_relabeling(self):
        swap = np.eye(4)[[0, 2, 1, 3]]
        hv = cnot_program(ENC2, "H", "V").unitary()
        assert np.abs(cnot_program(ENC2, "V", "H").unitary() - swap @ hv @ swap).max() < 1e-10

    def test_basis_action(self):
        u = cnot_program(ENC2, "H", "V").unitary()
        for src, dst in {0: 0, 1: 1, 2: 3, 3: 2}.items():
            assert abs(u[dst, src] - 1) < 1e-12

    def test_same_label_rejected(self):
        with pytest.raises(DomainError):
            cnot_program(ENC2, "H", "H")

    def test_p1_rejected(self):
        with pytest.raises(DomainError):
            cnot_program(PolyEncoding(1), "V", "V")

    @pytest.mark.parametrize("p", [3, 4])
    def test_all_ordered_pairs(self, p):
        enc = PolyEncoding(p)
        for c in enc.qubit_labels:
            for t in enc.qubit_labels:
                if c != t:
                    assert verify_program(cnot_program(enc, c, t)).passed


class TestDeutsch:
    def test_zero_angle(self):
        expected = np.diag([1, 1, 1, 1, 1, 1, 1j, 1j])
        assert np.abs(deutsch3_program(0.0).unitary() - expected).max() < 1e-10

    def test_half_pi_is_toffoli(self):
        assert np.abs(deutsch3_program(np.pi / 2).unitary() - TOFFOLI8).max() < 1e-10

    def test_random_angles_match_printed_matrix(self):
        rng = np.random.default_rng(11)
        for theta in rng.uniform(0, 2 * np.pi, 20):
            u = deutsch3_program(theta).unitary()
            assert np.abs(u - printed_d3(theta)).max() < 1e-10
            assert unitarity_error(u) < 1e-12

    def test_general_form_agrees_at_p3(self):
        for theta in np.linspace(0, np.pi, 7):
            assert np.abs(deutsch_p_program(3, theta).unitary() - deutsch3_program(theta).unitary()).max() < 1e-12

    def test_p2_half_pi_is_cnot(self):
        u = deutsch_p_program(2, np.pi / 2).unitary()
        assert np.abs(u - cnot_program(ENC2, "H", "V").unitary()).max() < 1e-10

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_general_p(self, p):
        for theta in (0.0, 0.4, np.pi / 2, 2.5):
            assert np.abs(deutsch_p_program(p, theta).unitary() - deutsch_matrix(p, theta)).max() < 1e-10

    def test_p4_is_four_qubit_toffoli(self):
        u = toffoli_program(4).unitary()
        assert np.abs(u - np.eye(16)[list(range(14)) + [15, 14]]).max() < 1e-10

    @pytest.mark.parametrize("p", [1, 5])
    def test_range(self, p):
        with pytest.raises(DomainError):
            deutsch_p_program(p, 0.1)

    def test_corrupted_angle_is_detected(self):
        prog = deutsch3_program(np.pi / 2)
        bad = GatePulseProgram(prog.enc, [prog.steps[0], type(prog.steps[1])(prog.steps[1].terms, np.pi / 8 + 0.01)],
                               prog.target, prog.global_phase)
        report = verify_program(bad)
        assert not report.passed and report.max_error > 1e-3


class TestOtherGates:
    def test_identity(self):
        assert verify_program(identity_program(ENC3)).max_error == 0

    def test_hadamard(self):
        h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        assert np.abs(hadamard_program(ENC2, "V").unitary() - kron(np.eye(2), h)).max() < 1e-12

    def test_rotation(self):
        u = rotation_program(ENC2, "H", "X", np.pi).unitary()
        assert np.abs(u - kron(-1j * SIGMA_X, np.eye(2))).max() < 1e-12

    def test_cz(self):
        assert np.abs(cz_program(ENC2, "H", "V").unitary() - np.diag([1, 1, 1, -1])).max() < 1e-12

    def test_swap(self):
        assert np.abs(swap_program(ENC2, "H", "V").unitary() - np.eye(4)[[0, 2, 1, 3]]).max() < 1e-12

    def test_cswap(self):
        assert verify_program(cswap_program()).passed

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_standard_programs_verify(self, p):
        for prog in standard_programs(p):
            report = verify_program(prog)
            assert report.passed, report


class TestSpectators:
    def test_cnot_leaves_depth_qubit_alone(self):
        u = cnot_program(ENC3, "H", "V").unitary()
        assert spectator_deviation(u, ENC3, ["D"], n_states=200) < 1e-10

    @pytest.mark.parametrize("axis", ["X", "Y", "Z"])
    def test_rotation_spectators(self, axis):
        u = rotation_program(ENC3, "H", axis, 1.1).unitary()
        assert spectator_deviation(u, ENC3, ["D", "V"], n_states=200) < 1e-10

    def test_two_qubit_gates_p4(self):
        enc = PolyEncoding(4)
        for prog in (cz_program(enc, "W", "V"), swap_program(enc, "H", "V")):
            spectators = [lab for lab in enc.qubit_labels if lab not in prog.name]
            assert spectator_deviation(prog.unitary(), enc, spectators, n_states=200) < 1e-10

    def test_detects_a_disturbed_spectator(self):
        u = cnot_program(ENC3, "D", "V").unitary()
        assert spectator_deviation(u, ENC3, ["D"], n_states=50) > 1e-3

    def test_deutsch_acts_only_on_last_pair(self):
        rng = np.random.default_rng(2)
        for theta in rng.uniform(0, np.pi, 20):
            u = deutsch3_program(theta).unitary()
            assert np.abs(u[:6, :6] - np.eye(6)).max() < 1e-12
            assert np.abs(u[:6, 6:]).max() < 1e-12 and np.abs(u[6:, :6]).max() < 1e-12


class TestSerialisation:
    @pytest.mark.parametrize("prog", [cnot_program(ENC2, "H", "V"), deutsch3_program(0.3), cswap_program()])
    def test_round_trip(self, prog):
        data = json.loads(json.dumps(prog.to_dict()))
        back = GatePulseProgram.from_dict(data)
        assert np.abs(back.unitary() - prog.unitary()).max() < 1e-12
        assert np.array_equal(back.target, prog.target)

    def test_composition_order(self):
        a, b = hadamard_program(ENC2, "V"), cnot_program(ENC2, "H", "V")
        assert np.abs(a.then(b).unitary() - b.unitary() @ a.unitary()).max() < 1e-12
