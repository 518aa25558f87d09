import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import apply_kraus, dm, ket

from qwcomplexity.quantum_model import (
    HADAMARD,
    ChannelError,
    DensityMatrix,
    GateSequence,
    GateSpec,
    PureState,
    QuantumChannel,
    apply_channel,
    cat_state,
    channel_from_json,
    channel_to_json,
    circuit_from_json,
    circuit_to_json,
    cnot_chain,
    concatenate,
    depolarizing_channel,
    extend_with_identity,
    hadamard_layer,
    marginal_array,
    maximally_entangled,
    mix_channels,
    phase_aligned_distance,
    plus_state,
    random_channel,
    random_density_matrix,
    state_from_json,
    state_to_json,
    tensor_channels,
    validate_channel,
)
from qwcomplexity.tensor_core import ShapeError, SystemShape, embed

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
ONE = SystemShape(1, 2)
TWO = SystemShape(2, 2)


# states


def test_pure_state_normalization_enforced():
    with pytest.raises(ValueError):
        PureState(ONE, [1, 1])
    psi = PureState.normalized(ONE, [1, 1])
    np.testing.assert_allclose(psi.amplitudes, plus_state())


def test_basis_digits_most_significant_first():
    np.testing.assert_array_equal(PureState.basis(SystemShape(3, 2), [1, 0, 0]).amplitudes, ket([1, 0, 0]))
    np.testing.assert_array_equal(PureState.basis(SystemShape(2, 3), [0, 2]).amplitudes, np.eye(9)[2])


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(ONE, np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityMatrix(ONE, np.diag([0.5, 0.4]))
    assert DensityMatrix.maximally_mixed(TWO).trace() == pytest.approx(1)


def test_cat_state_examples():
    np.testing.assert_allclose(cat_state(1 / np.sqrt(2), 2).amplitudes, (ket([0, 0]) + ket([1, 1])) / np.sqrt(2))
    for a in (0.6, 0.9):
        psi = cat_state(a, 3)
        assert np.vdot(ket([0, 0, 0]), psi.amplitudes) == pytest.approx(a)
        assert np.count_nonzero(psi.amplitudes) == 2
        for site in range(3):
            np.testing.assert_allclose(marginal_array(dm(psi.amplitudes), site, 3, 2),
                                       np.diag([a**2, 1 - a**2]), atol=1e-15)
    for bad in (0, 1, 1.2):
        with pytest.raises(ValueError):
            cat_state(bad, 2)


def test_maximally_entangled_marginal():
    phi = maximally_entangled(3)
    np.testing.assert_allclose(marginal_array(dm(phi.amplitudes), 0, 2, 3), np.eye(3) / 3, atol=1e-15)


# channels


def test_identity_channel_action(rng):
    rho = random_density_matrix(TWO, rng)
    assert apply_channel(QuantumChannel.identity(TWO), rho).allclose(rho, 1e-14)


def test_depolarizing_examples():
    rho0 = DensityMatrix(ONE, np.diag([1.0, 0.0]))
    np.testing.assert_allclose(apply_channel(depolarizing_channel(0.0, 2), rho0).matrix, np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(apply_channel(depolarizing_channel(1.0, 2), rho0).matrix, rho0.matrix, atol=1e-15)
    assert len(depolarizing_channel(1.0, 2).kraus) == 1
    assert validate_channel(depolarizing_channel(0.3, 3))
    with pytest.raises(ValueError):
        depolarizing_channel(1.1, 2)


@pytest.mark.parametrize("d", [2, 3])
def test_depolarizing_matches_affine_definition(rng, d):
    for p in (0.0, 0.2, 0.5, 0.9, 1.0):
        rho = random_density_matrix(SystemShape(1, d), rng)
        got = apply_channel(depolarizing_channel(p, d), rho).matrix
        np.testing.assert_allclose(got, p * rho.matrix + (1 - p) * np.eye(d) / d, atol=1e-12)


def test_completeness_violation_rejected():
    with pytest.raises(ChannelError):
        QuantumChannel(ONE, (0,), (np.diag([1.0, 0.5]),))


def test_extend_with_identity_examples():
    D = depolarizing_channel(0.3, 2)
    assert extend_with_identity(D, 0) is D
    ext = extend_with_identity(QuantumChannel.identity(ONE), 2)
    assert ext.shape == SystemShape(3, 2) and ext.support == ()
    p, d = 0.4, 3
    ext = extend_with_identity(depolarizing_channel(p, d), 1)
    phi = dm(maximally_entangled(d).amplitudes)
    got = ext.apply_array(phi)
    np.testing.assert_allclose(got, p * phi + (1 - p) * np.eye(d * d) / d**2, atol=1e-12)


def test_concatenation_examples(rng):
    L = random_channel(TWO, rng)
    rho = random_density_matrix(TWO, rng).matrix
    both = concatenate(L, QuantumChannel.identity(TWO))
    np.testing.assert_allclose(both.apply_array(rho), L.apply_array(rho), atol=1e-12)
    Dp, Dq = depolarizing_channel(0.3, 2), depolarizing_channel(0.6, 2)
    r1 = random_density_matrix(ONE, rng).matrix
    np.testing.assert_allclose(concatenate(Dp, Dq).apply_array(r1),
                               depolarizing_channel(0.18, 2).apply_array(r1), atol=1e-12)


def test_concatenation_order(rng):
    # first ∘ second applies second first
    A = QuantumChannel.unitary(TWO, CNOT)
    B = QuantumChannel.unitary(TWO, HADAMARD, support=(0,))
    U = concatenate(A, B).full_kraus()
    np.testing.assert_allclose(U[0], CNOT @ np.kron(HADAMARD, np.eye(2)), atol=1e-14)


def test_concatenation_on_disjoint_supports(rng):
    a = random_channel(TWO, rng, support=(0,))
    b = random_channel(TWO, rng, support=(1,))
    rho = random_density_matrix(TWO, rng).matrix
    np.testing.assert_allclose(concatenate(a, b).apply_array(rho), a.apply_array(b.apply_array(rho)), atol=1e-12)


def test_tensor_channels(rng):
    ident = tensor_channels(QuantumChannel.identity(ONE), QuantumChannel.identity(ONE))
    assert ident.support == () and ident.shape == TWO
    a, b = random_channel(ONE, rng), random_channel(ONE, rng)
    r1, r2 = random_density_matrix(ONE, rng).matrix, random_density_matrix(ONE, rng).matrix
    np.testing.assert_allclose(tensor_channels(a, b).apply_array(np.kron(r1, r2)),
                               np.kron(a.apply_array(r1), b.apply_array(r2)), atol=1e-12)
    half = tensor_channels(QuantumChannel.identity(ONE), b)
    assert half.support == (1,)


def test_mix_channels(rng):
    a, b = random_channel(TWO, rng), random_channel(TWO, rng, support=(1,))
    rho = random_density_matrix(TWO, rng).matrix
    got = mix_channels([0.3, 0.7], [a, b]).apply_array(rho)
    np.testing.assert_allclose(got, 0.3 * a.apply_array(rho) + 0.7 * b.apply_array(rho), atol=1e-12)
    with pytest.raises(ValueError):
        mix_channels([0.5, 0.6], [a, b])


def test_adjoint_inverts_unitary(rng):
    from qwcomplexity.quantum_model import random_unitary
    U = QuantumChannel.unitary(TWO, random_unitary(4, rng))
    rho = random_density_matrix(TWO, rng).matrix
    np.testing.assert_allclose(U.adjoint().apply_array(U.apply_array(rho)), rho, atol=1e-12)


def test_apply_channel_shape_mismatch(rng):
    with pytest.raises(ShapeError):
        apply_channel(depolarizing_channel(0.5, 2), random_density_matrix(TWO, rng))


def test_apply_channel_against_padded_kraus_oracle(rng):
    ch = random_channel(SystemShape(3, 2), rng, support=(2, 0))
    rho = random_density_matrix(SystemShape(3, 2), rng).matrix
    kraus = [embed(K, (2, 0), 3, 2) for K in ch.kraus]
    np.testing.assert_allclose(ch.apply_array(rho), apply_kraus(kraus, rho), atol=1e-12)


# gates


def test_cnot_chain_two_qubits_is_cnot():
    np.testing.assert_allclose(cnot_chain(2).unitary(), CNOT, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cnot_chain_prepares_cat(n):
    psi = np.kron(plus_state(), ket([0] * (n - 1)))
    out = cnot_chain(n).unitary() @ psi
    np.testing.assert_allclose(out, (ket([0] * n) + ket([1] * n)) / np.sqrt(2), atol=1e-12)


def test_hadamard_layer_single_site():
    U = hadamard_layer(1).unitary()
    assert phase_aligned_distance(U, HADAMARD) < 1e-12
    out = U @ ket([0])
    assert abs(abs(np.vdot(plus_state(), out)) - 1) < 1e-12


def test_hadamard_layer_two_sites():
    assert phase_aligned_distance(hadamard_layer(2).unitary(), np.kron(HADAMARD, HADAMARD)) < 1e-12


def test_gate_validation():
    with pytest.raises(ValueError):
        GateSpec((0,), np.array([[0, 1], [0, 0]]), 1.0)
    with pytest.raises(ValueError):
        GateSpec((0,), np.eye(2), -1.0)
    with pytest.raises(ShapeError):
        GateSequence(TWO, (GateSpec((2,), np.eye(2), 1.0),))


def test_gate_sequence_order():
    from qwcomplexity.quantum_model import CNOT_HAMILTONIAN
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    # gates[0] runs first: X on site 0, then the CNOT flips site 1 -> |11>
    seq = GateSequence(TWO, (GateSpec((0,), X, np.pi / 2), GateSpec((0, 1), CNOT_HAMILTONIAN, np.pi / 2, sign=-1)))
    out = seq.unitary() @ ket([0, 0])
    assert abs(abs(out[3]) - 1) < 1e-12


# JSON


def test_channel_json_round_trip(rng):
    ch = random_channel(TWO, rng, support=(1,))
    back = channel_from_json(json.loads(json.dumps(channel_to_json(ch))))
    assert back.support == (1,)
    rho = random_density_matrix(TWO, rng).matrix
    np.testing.assert_allclose(back.apply_array(rho), ch.apply_array(rho), atol=1e-14)


def test_circuit_json_sign_convention():
    doc = circuit_to_json(cnot_chain(2))
    assert doc["gates"][0]["sign"] == "+"
    np.testing.assert_allclose(circuit_from_json(doc).unitary(), CNOT, atol=1e-12)
    doc["gates"][0]["sign"] = "-"
    np.testing.assert_allclose(circuit_from_json(doc).unitary(), CNOT.conj().T, atol=1e-12)
    doc["gates"][0]["sign"] = "?"
    with pytest.raises(ValueError):
        circuit_from_json(doc)


def test_state_json(rng):
    psi = PureState.normalized(TWO, [1, 2j, 0, 1])
    back = state_from_json(json.loads(json.dumps(state_to_json(psi))))
    np.testing.assert_allclose(back.amplitudes, psi.amplitudes)
    rho = state_from_json({"shape": {"n": 1, "d": 2}, "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]})
    assert isinstance(rho, DensityMatrix)


# properties


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 2), st.sampled_from([2, 3]))
def test_random_channels_are_cptp(seed, n, d):
    r = np.random.default_rng(seed)
    shape = SystemShape(n, d)
    ch = random_channel(shape, r)
    assert validate_channel(ch)
    out = ch.apply_array(random_density_matrix(shape, r).matrix)
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.linalg.eigvalsh((out + out.conj().T) / 2)[0] >= -1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_composite_channels_stay_complete(seed):
    r = np.random.default_rng(seed)
    a, b = random_channel(TWO, r), random_channel(TWO, r, support=(0,))
    for ch in (concatenate(a, b), mix_channels([0.4, 0.6], [a, b]),
               tensor_channels(random_channel(ONE, r), random_channel(ONE, r))):
        assert validate_channel(ch)
