import math

import numpy as np
import pytest

from twirlsim.errors import MissingStates, NotOrthogonal, RankDeficient
from twirlsim.estimation import (
    ExcitationUnitary,
    ExpectationDataset,
    bloch_real_state,
    build_excitation_unitary,
    excitation_roundtrip_check,
    reconstruct_real_state,
)
from twirlsim.oracle import exact_eigenpairs
from twirlsim.pauli import ModelParams, PauliString, build_model, exact_expectation, real_pauli_strings
from twirlsim.statevector import StateVector

from reference_values import (
    H2_FITTED_STATES,
    H2_FITTED_UNITARIZED,
    H2_TABLE_LABELS,
    H2_TABLE_ROWS,
    J1_EXCITED_FIT,
    J1_GROUND_FIT,
    J1_RAW_UNITARY,
    J1_UNITARIZED,
)


def dataset_for(v, labels):
    return ExpectationDataset.from_values(labels, [exact_expectation(PauliString(l), v) for l in labels])


def test_dataset_csv_roundtrip(tmp_path):
    d = ExpectationDataset.from_values(["ZZ", "XX"], [0.5, -1.0009], shots=100)
    p = tmp_path / "d.csv"
    d.save(p)
    back = ExpectationDataset.load(p)
    assert back == d
    assert p.read_text().splitlines()[0] == "pauli_label,value,shots"


def test_dataset_rejects_impossible_values():
    with pytest.raises(ValueError):
        ExpectationDataset.from_values(["Z"], [1.5])


def test_dim2_trivial():
    est = reconstruct_real_state(ExpectationDataset.from_values(["Z"], [1.0]), 2)
    assert np.allclose(est.amplitudes, [1, 0], atol=1e-7)
    assert est.residual < 1e-12


def test_dim2_sampled_ground_state():
    d = ExpectationDataset.from_values(["Z", "X"], [-0.70692, -0.70721])
    est = reconstruct_real_state(d, 2)
    assert np.allclose(est.amplitudes, J1_GROUND_FIT, atol=1e-4)
    assert est.cos_phi == -1.0
    closed = bloch_real_state(-0.70692, -0.70721)
    assert np.allclose(closed.amplitudes, J1_GROUND_FIT, atol=1e-4)


def test_bloch_excited_state():
    est = bloch_real_state(0.70700, 0.70687)
    assert np.allclose(est.amplitudes, J1_EXCITED_FIT, atol=1e-4)


def test_complex_phase_rejected():
    # X = 0 for a state with Z = 0 means cos(phi) = 0
    with pytest.raises(RankDeficient):
        bloch_real_state(0.0, 0.0)
    with pytest.raises(RankDeficient):
        reconstruct_real_state(ExpectationDataset.from_values(["Z", "X"], [0.0, 0.1]), 2)


def test_dim4_sign_ambiguity_is_rank_deficient():
    # ZZ alone cannot tell (|00> + |11>) from (|00> - |11>)
    d = ExpectationDataset.from_values(["ZZ", "ZI"], [1.0, 0.0])
    with pytest.raises(RankDeficient):
        reconstruct_real_state(d, 4)


def test_dim4_table_row_ground_state():
    est = reconstruct_real_state(ExpectationDataset.from_values(H2_TABLE_LABELS, H2_TABLE_ROWS[0]), 4)
    ref = np.array(H2_FITTED_STATES[0])
    assert abs(abs(est.amplitudes @ ref) / np.linalg.norm(ref) - 1) < 1e-6
    # largest component positive
    assert est.amplitudes[np.argmax(np.abs(est.amplitudes))] > 0


@pytest.mark.parametrize("dim", [2, 4])
def test_noiseless_roundtrip_random_states(dim, rng):
    n = int(math.log2(dim))
    labels = [p.label for p in real_pauli_strings(n)]
    for _ in range(25):
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        est = reconstruct_real_state(dataset_for(v, labels), dim)
        assert abs(est.amplitudes @ v) >= 0.9999


def test_build_unitary_single_qubit_exact():
    o = exact_eigenpairs(build_model(ModelParams.single_qubit(1.0)))
    u = build_excitation_unitary([o.eigenvector(0), o.eigenvector(1)], 0, 1)
    zhz = np.array([[1, -1], [-1, -1]]) / math.sqrt(2)
    assert np.allclose(np.abs(u.matrix), np.abs(zhz), atol=1e-12)
    assert u.unitarization_deviation < 1e-10

    o2 = exact_eigenpairs(build_model(ModelParams.single_qubit(2.0)))
    u2 = build_excitation_unitary([o2.eigenvector(0), o2.eigenvector(1)], 0, 1)
    ref = np.array([[1, -2], [-2, -1]]) / math.sqrt(5)
    assert min(np.abs(u2.matrix - ref).max(), np.abs(u2.matrix + ref).max()) < 1e-12


def test_build_unitary_from_fitted_single_qubit():
    u = build_excitation_unitary([np.array(J1_GROUND_FIT), np.array(J1_EXCITED_FIT)], 0, 1)
    assert np.allclose(u.raw.real, J1_RAW_UNITARY, atol=1e-4)
    assert np.allclose(ExcitationUnitary.from_matrix(J1_RAW_UNITARY).matrix.real, J1_UNITARIZED, atol=5e-6)


def test_build_unitary_h2_exact_properties():
    o = exact_eigenpairs(build_model(ModelParams.h2()))
    vecs = [o.eigenvector(k) for k in range(4)]
    u = build_excitation_unitary(vecs, 0, 1)
    assert abs(abs(np.vdot(vecs[1], u.matrix @ vecs[0])) - 1) < 1e-12
    assert np.allclose(u.matrix @ u.matrix, np.eye(4), atol=1e-10)
    assert u.unitarization_deviation < 1e-10


def test_sign_flip_changes_unitary_by_diagonal_conjugation():
    o = exact_eigenpairs(build_model(ModelParams.h2()))
    vecs = [o.eigenvector(k) for k in range(4)]
    u = build_excitation_unitary(vecs, 0, 1).matrix
    flipped = list(vecs)
    flipped[1] = -flipped[1]
    uf = build_excitation_unitary(flipped, 0, 1).matrix
    # in the eigenbasis, flipping E1 conjugates by diag(1, -1, 1, 1)
    b = np.column_stack(vecs)
    d = np.diag([1, -1, 1, 1])
    assert np.allclose(b.conj().T @ uf @ b, d @ (b.conj().T @ u @ b) @ d, atol=1e-12)
    q = PauliString("XI").to_dense()
    assert abs(abs(np.vdot(vecs[1], q @ vecs[0])) - abs(np.vdot(flipped[1], q @ flipped[0]))) < 1e-12


def test_fitted_h2_unitary_close_to_printed():
    u = build_excitation_unitary([np.array(v) for v in H2_FITTED_STATES], 0, 1)
    assert np.abs(u.matrix.real - H2_FITTED_UNITARIZED).max() < 5e-3


def test_sampled_pipeline_unitarization_deviation_small():
    from twirlsim.experiments import simulated_unitary
    from twirlsim.statevector import ShotPlan

    sim = simulated_unitary(ModelParams.h2(), ShotPlan(10**6, 4))
    assert 0.0 < sim.unitary.unitarization_deviation < 0.05


def test_build_unitary_errors():
    e = np.eye(4)
    with pytest.raises(MissingStates):
        build_excitation_unitary([e[0], e[1]], 0, 1)
    with pytest.raises(NotOrthogonal):
        build_excitation_unitary([e[0], (e[0] + e[1]) / math.sqrt(2), e[2], e[3]], 0, 1)
    with pytest.raises(ValueError):
        build_excitation_unitary([e[0], e[1], e[2], e[3]], 1, 1)


def test_roundtrip_energies():
    h = build_model(ModelParams.h2())
    o = exact_eigenpairs(h)
    u = build_excitation_unitary([o.eigenvector(k) for k in range(4)], 0, 1)
    after, back = excitation_roundtrip_check(u, StateVector.from_amplitudes(o.eigenvector(0)), h)
    assert after == pytest.approx(o.eigenvalues[1], abs=1e-12)
    assert back == pytest.approx(o.eigenvalues[0], abs=1e-12)
