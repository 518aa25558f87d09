import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwcomplexity.quantum_model import CNOT_HAMILTONIAN
from qwcomplexity.tensor_core import (
    NotHermitianError,
    Operator,
    ShapeError,
    SystemShape,
    embed,
    generalized_pauli,
    hermitian_eigen,
    hermitian_expm,
    jacobi_eigh,
    marginal,
    operator_from_json,
    operator_norm,
    operator_to_json,
    partial_trace,
    permute_sites,
    replace_with_identity,
    soft_threshold_hermitian,
    tensor_all,
    tensor_product,
    trace_norm,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def op(m):
    return Operator.from_array(np.asarray(m, dtype=complex))


def rand_herm(rng, D):
    g = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    return (g + g.conj().T) / 2


# tensor products


def test_identity_tensor_identity():
    assert tensor_product(op(I2), op(I2)).allclose(Operator.identity(SystemShape(2, 2)))


def test_z_tensor_z():
    np.testing.assert_allclose(tensor_product(op(Z), op(Z)).matrix, np.diag([1, -1, -1, 1]))


def test_projector_tensor_x_block():
    got = tensor_product(op(np.diag([1, 0])), op(X)).matrix
    want = np.zeros((4, 4), dtype=complex)
    want[:2, :2] = X
    np.testing.assert_array_equal(got, want)


def test_tensor_shape_and_dimension_mismatch():
    A = tensor_all([op(Z), op(X), op(I2)])
    assert A.shape == SystemShape(3, 2)
    with pytest.raises(ShapeError):
        tensor_product(op(Z), op(np.eye(3)))


def test_operator_is_immutable():
    A = op(Z)
    with pytest.raises(ValueError):
        A.matrix[0, 0] = 5


# partial trace


def test_partial_trace_bell_is_maximally_mixed():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = op(np.outer(bell, bell))
    np.testing.assert_allclose(partial_trace(rho, [1]).matrix, I2 / 2, atol=1e-15)
    np.testing.assert_allclose(marginal(rho, 0).matrix, I2 / 2, atol=1e-15)


def test_partial_trace_factorized(rng):
    A = op(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    B = op(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    got = partial_trace(tensor_product(A, B), [1]).matrix
    np.testing.assert_allclose(got, B.trace() * A.matrix, atol=1e-12)


def test_partial_trace_all_sites_is_scalar(rng):
    A = op(rng.normal(size=(8, 8)))
    assert partial_trace(A, [0, 1, 2]) == pytest.approx(np.trace(A.matrix))


def test_partial_trace_out_of_range():
    with pytest.raises(ShapeError):
        partial_trace(op(np.eye(4)), [2])


def test_partial_trace_middle_site_qutrits(rng):
    a, b, c = (rng.normal(size=(3, 3)) for _ in range(3))
    got = partial_trace(Operator(SystemShape(3, 3), np.kron(np.kron(a, b), c)), [1]).matrix
    np.testing.assert_allclose(got, np.trace(b) * np.kron(a, c), atol=1e-12)


def test_replace_with_identity_is_projection(rng):
    a = rand_herm(rng, 8)
    e = replace_with_identity(a, 1, 3, 2)
    np.testing.assert_allclose(replace_with_identity(e, 1, 3, 2), e, atol=1e-14)
    # the complement is traceless on site 1
    rest = op(a - e)
    np.testing.assert_allclose(partial_trace(rest, [1]).matrix, 0, atol=1e-14)


# spectra and norms


def test_eigen_pauli_z():
    w, _ = hermitian_eigen(op(Z))
    np.testing.assert_allclose(w, [-1, 1])


def test_eigen_pauli_x_vectors():
    w, v = hermitian_eigen(op(X))
    np.testing.assert_allclose(w, [-1, 1])
    minus = np.array([1, -1]) / np.sqrt(2)
    plus = np.array([1, 1]) / np.sqrt(2)
    assert abs(abs(np.vdot(v[:, 0], minus)) - 1) < 1e-12
    assert abs(abs(np.vdot(v[:, 1], plus)) - 1) < 1e-12


def test_eigen_cnot_hamiltonian_matches_factorization():
    # H_CNOT = |1><1| ⊗ (I - X)
    np.testing.assert_allclose(CNOT_HAMILTONIAN, np.kron(np.diag([0, 1]), I2 - X), atol=1e-15)
    w, _ = hermitian_eigen(op(CNOT_HAMILTONIAN))
    np.testing.assert_allclose(w, [0, 0, 0, 2], atol=1e-12)
    jw, _ = jacobi_eigh(CNOT_HAMILTONIAN)
    np.testing.assert_allclose(jw, w, atol=1e-12)


def test_eigen_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eigen(op([[0, 1], [0, 0]]))


@pytest.mark.parametrize("D", [2, 4, 8, 16])
def test_eigen_against_jacobi_oracle(rng, D):
    for _ in range(25):
        a = rand_herm(rng, D)
        w, v = hermitian_eigen(op(a))
        jw, jv = jacobi_eigh(a)
        np.testing.assert_allclose(w, jw, atol=1e-10 * max(1, np.abs(jw).max()))
        err = np.linalg.norm(v @ np.diag(w) @ v.conj().T - a, 2)
        assert err <= 1e-10 * operator_norm(a)
        assert np.linalg.norm(jv @ np.diag(jw) @ jv.conj().T - a, 2) <= 1e-10 * operator_norm(a)


def test_trace_norm_examples():
    assert trace_norm(op(Z)) == pytest.approx(2)
    rho, sig = np.diag([1, 0]), np.diag([0, 1])
    assert trace_norm(op(rho - sig)) == pytest.approx(2)
    assert trace_norm(Operator.zeros(SystemShape(2, 2))) == 0


def test_trace_norm_non_hermitian_uses_singular_values():
    assert trace_norm(op([[0, 2], [0, 0]])) == pytest.approx(2)


def test_operator_norm_examples():
    assert operator_norm(op(Z)) == pytest.approx(1)
    assert operator_norm(op(3 * I2)) == pytest.approx(3)
    assert operator_norm(op(CNOT_HAMILTONIAN)) == pytest.approx(2)


def test_soft_threshold_examples(rng):
    np.testing.assert_allclose(soft_threshold_hermitian(op(Z), 0.5).matrix, 0.5 * Z, atol=1e-15)
    a = rand_herm(rng, 4)
    np.testing.assert_allclose(soft_threshold_hermitian(op(a), 0).matrix, a, atol=1e-12)
    np.testing.assert_allclose(soft_threshold_hermitian(op(Z), 2).matrix, 0, atol=1e-15)
    with pytest.raises(ValueError):
        soft_threshold_hermitian(op(Z), -0.1)


# Heisenberg-Weyl operators and exponentials


def test_generalized_pauli_examples():
    np.testing.assert_allclose(generalized_pauli(1, 0, 2).matrix, X)
    np.testing.assert_allclose(generalized_pauli(0, 0, 3).matrix, np.eye(3))
    np.testing.assert_allclose(generalized_pauli(1, 1, 2).matrix, -1j * Y, atol=1e-15)
    np.testing.assert_allclose(generalized_pauli(4, 5, 3).matrix, generalized_pauli(1, 2, 3).matrix)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_twirl_gives_maximally_mixed(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    tw = np.zeros((d, d), dtype=complex)
    for s in range(d):
        for t in range(d):
            U = generalized_pauli(s, t, d).matrix
            tw += U @ rho @ U.conj().T
    np.testing.assert_allclose(tw / d**2, np.eye(d) / d, atol=1e-12)


def test_expm_examples():
    np.testing.assert_allclose(hermitian_expm(op(Z), np.pi / 2).matrix,
                               np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]), atol=1e-15)
    np.testing.assert_allclose(hermitian_expm(op(CNOT_HAMILTONIAN), 0).matrix, np.eye(4), atol=1e-15)


def test_expm_cnot_from_hamiltonian():
    np.testing.assert_allclose(hermitian_expm(op(CNOT_HAMILTONIAN), -np.pi / 2).matrix, CNOT, atol=1e-12)


def test_expm_inverse(rng):
    for D in (2, 4, 8):
        h = rand_herm(rng, D)
        t = rng.normal()
        U = hermitian_expm(op(h), t)
        assert U.is_unitary(1e-10)
        np.testing.assert_allclose((U @ hermitian_expm(op(h), -t)).matrix, np.eye(D), atol=1e-10)


# site handling


def test_embed_places_local_operator():
    np.testing.assert_allclose(embed(X, [1], 3, 2), np.kron(np.kron(I2, X), I2))
    # control on site 2, target on site 0
    np.testing.assert_allclose(embed(CNOT, [2, 0], 3, 2),
                               permute_sites(np.kron(CNOT, I2), [1, 2, 0], 3, 2), atol=1e-15)


def test_permute_sites_moves_factors(rng):
    x, y, z = (rng.normal(size=(2, 2)) for _ in range(3))
    np.testing.assert_allclose(permute_sites(np.kron(x, y), [1, 0], 2, 2), np.kron(y, x))
    # new site k is old site perm[k]
    got = permute_sites(np.kron(np.kron(x, y), z), [2, 0, 1], 3, 2)
    np.testing.assert_allclose(got, np.kron(np.kron(z, x), y), atol=1e-14)


def test_predicates():
    assert op(Z).is_hermitian() and op(Z).is_traceless() and op(Z).is_unitary()
    assert not op([[0, 1], [0, 0]]).is_hermitian()
    assert not op(I2).is_traceless()


def test_operator_json_round_trip(rng):
    A = Operator(SystemShape(2, 2), rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    doc = json.loads(json.dumps(operator_to_json(A)))
    assert doc["shape"] == {"n": 2, "d": 2}
    assert doc["matrix"][0][0] == [A.matrix[0, 0].real, A.matrix[0, 0].imag]
    assert operator_from_json(doc).allclose(A, 0)


def test_operator_json_rejects_bad_shape():
    with pytest.raises((ShapeError, ValueError)):
        operator_from_json({"shape": {"n": 2, "d": 2}, "matrix": [[[1, 0]]]})


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(2, 3), st.integers(0, 2**31 - 1))
def test_partial_trace_preserves_trace(n, d, seed):
    r = np.random.default_rng(seed)
    D = d**n
    A = Operator(SystemShape(n, d), r.normal(size=(D, D)) + 1j * r.normal(size=(D, D)))
    site = int(r.integers(n))
    out = partial_trace(A, [site])
    tr = out if n == 1 else out.trace()
    assert abs(tr - A.trace()) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_trace_norm_triangle(seed):
    r = np.random.default_rng(seed)
    a, b = rand_herm(r, 4), rand_herm(r, 4)
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10
    assert operator_norm(a) <= trace_norm(a) + 1e-12
