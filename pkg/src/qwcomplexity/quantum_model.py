"""States, Kraus channels, gate sequences and the standard named constructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor_core import (
    DEFAULT_TOL,
    NotHermitianError,
    Operator,
    ShapeError,
    SystemShape,
    decode_matrix,
    decode_shape,
    decode_vector,
    embed,
    encode_matrix,
    encode_shape,
    encode_vector,
    generalized_pauli,
    hermitian_expm_array,
    partial_trace_array,
)


class ChannelError(ValueError):
    """Kraus set fails completeness or does not fit its register."""


@dataclass(frozen=True, eq=False)
class PureState:
    shape: SystemShape
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex, copy=True).reshape(-1)
        if v.shape[0] != self.shape.dim:
            raise ShapeError(f"{v.shape[0]} amplitudes for register dimension {self.shape.dim}")
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm {nrm})")
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, shape: SystemShape, amplitudes) -> "PureState":
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(shape, v / np.linalg.norm(v))

    @classmethod
    def basis(cls, shape: SystemShape, digits: Sequence[int]) -> "PureState":
        """Computational basis state ``|digits[0] digits[1] ...>``."""
        if len(digits) != shape.n:
            raise ShapeError(f"{len(digits)} digits for {shape.n} qudits")
        idx = 0
        for k in digits:
            idx = idx * shape.d + int(k)
        v = np.zeros(shape.dim, dtype=complex)
        v[idx] = 1.0
        return cls(shape, v)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.shape, np.outer(self.amplitudes, self.amplitudes.conj()))

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(SystemShape(self.shape.n + other.shape.n, self.shape.d),
                         np.kron(self.amplitudes, other.amplitudes))


class DensityMatrix(Operator):
    """Positive semidefinite unit-trace operator."""

    def __init__(self, shape: SystemShape, matrix, tol: float = DEFAULT_TOL, check: bool = True):
        if isinstance(matrix, Operator):
            matrix = matrix.matrix
        super().__init__(shape, matrix)
        if check:
            m = self.matrix
            if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
                raise NotHermitianError("density matrix is not Hermitian")
            if abs(np.trace(m) - 1.0) > tol:
                raise ValueError(f"density matrix trace {np.trace(m).real} != 1")
            lo = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
            if lo < -tol:
                raise ValueError(f"density matrix has negative eigenvalue {lo}")

    @classmethod
    def maximally_mixed(cls, shape: SystemShape) -> "DensityMatrix":
        return cls(shape, np.eye(shape.dim) / shape.dim)

    def __repr__(self):
        return f"DensityMatrix(n={self.shape.n}, d={self.shape.d})"


def maximally_entangled(d: int, n_pairs: int = 1) -> PureState:
    """``(1/sqrt(d^k)) Σ_j |j>|j>`` with the first ``k`` sites paired to the last ``k``."""
    D = d**n_pairs
    v = np.zeros(D * D, dtype=complex)
    for j in range(D):
        v[j * D + j] = 1.0
    return PureState(SystemShape(2 * n_pairs, d), v / np.sqrt(D))


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map given by Kraus operators acting on ``support``; identity elsewhere.

    Kraus operators are stored on the support register with sites in the
    listed order of ``support``.
    """

    shape: SystemShape
    support: tuple
    kraus: tuple
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if len(set(support)) != len(support):
            raise ChannelError(f"repeated sites in support {support}")
        for s in support:
            if s < 0 or s >= self.shape.n:
                raise ShapeError(f"support site {s} out of range for {self.shape.n} qudits")
        dk = self.shape.d ** len(support)
        ks = []
        for K in self.kraus:
            K = np.array(K.matrix if isinstance(K, Operator) else K, dtype=complex, copy=True)
            if K.shape != (dk, dk):
                raise ChannelError(f"Kraus operator of shape {K.shape} does not fit support of size {len(support)}")
            K.flags.writeable = False
            ks.append(K)
        if not ks:
            raise ChannelError("channel needs at least one Kraus operator")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "kraus", tuple(ks))
        defect = completeness_defect(self)
        if defect > self.tol:
            raise ChannelError(f"Kraus completeness violated by {defect:.3e}")

    @classmethod
    def identity(cls, shape: SystemShape) -> "QuantumChannel":
        return cls(shape, (), (np.eye(1),))

    @classmethod
    def unitary(cls, shape: SystemShape, U, support: Sequence[int] | None = None) -> "QuantumChannel":
        if support is None:
            support = range(shape.n)
        return cls(shape, tuple(support), (np.asarray(U),))

    @property
    def k(self) -> int:
        """Number of qudits acted on nontrivially (support size)."""
        return len(self.support)

    @property
    def is_unitary(self) -> bool:
        return len(self.kraus) == 1

    def full_kraus(self) -> list[np.ndarray]:
        """Kraus operators padded with identities to the whole register."""
        n, d = self.shape.n, self.shape.d
        if not self.support:
            return [np.asarray(K)[0, 0] * np.eye(d**n) for K in self.kraus]
        return [embed(K, self.support, n, d) for K in self.kraus]

    def apply_array(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for K in self.full_kraus():
            out += K @ rho @ K.conj().T
        return out

    def adjoint(self) -> "QuantumChannel":
        """Kraus-adjoint; for unitary channels this is the inverse."""
        return QuantumChannel(self.shape, self.support, tuple(K.conj().T for K in self.kraus))


def completeness_defect(ch: QuantumChannel) -> float:
    dk = ch.shape.d ** len(ch.support)
    acc = np.zeros((dk, dk), dtype=complex)
    for K in ch.kraus:
        acc += K.conj().T @ K
    return float(np.max(np.abs(acc - np.eye(dk))))


def validate_channel(ch: QuantumChannel, tol: float = DEFAULT_TOL) -> bool:
    return completeness_defect(ch) <= tol


def apply_channel(ch: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    """``Σ_K (K ⊗ I) ρ (K ⊗ I)†``."""
    if rho.shape != ch.shape:
        raise ShapeError(f"channel on {ch.shape} applied to state on {rho.shape}")
    out = ch.apply_array(rho.matrix)
    return DensityMatrix(ch.shape, (out + out.conj().T) / 2, tol=1e-8)


def extend_with_identity(ch: QuantumChannel, m: int) -> QuantumChannel:
    """``Λ ⊗ I_m``: append ``m`` idle ancilla qudits of the same local dimension."""
    if m < 0:
        raise ValueError(f"ancilla count must be nonnegative, got {m}")
    if m == 0:
        return ch
    return QuantumChannel(ch.shape.extend(m), ch.support, ch.kraus)


def depolarizing_channel(p: float, d: int) -> QuantumChannel:
    """``D_p(ρ) = p ρ + (1-p) Tr[ρ] I/d`` in Heisenberg-Weyl Kraus form."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {p}")
    shape = SystemShape(1, d)
    kraus = []
    for s in range(d):
        for t in range(d):
            w = p + (1 - p) / d**2 if (s, t) == (0, 0) else (1 - p) / d**2
            if w > 0:
                kraus.append(np.sqrt(w) * generalized_pauli(s, t, d).matrix)
    return QuantumChannel(shape, (0,), tuple(kraus))


def cat_state(a: complex, n: int) -> PureState:
    """``a|0...0> + sqrt(1-|a|^2)|1...1>`` on ``n`` qubits."""
    if not 0 < abs(a) < 1:
        raise ValueError(f"cat amplitude must satisfy 0 < |a| < 1, got {a}")
    shape = SystemShape(n, 2)
    v = np.zeros(shape.dim, dtype=complex)
    v[0] = a
    v[-1] = np.sqrt(1 - abs(a) ** 2)
    return PureState(shape, v)


def plus_state() -> np.ndarray:
    return np.array([1, 1], dtype=complex) / np.sqrt(2)


# Gates and circuits


@dataclass(frozen=True, eq=False)
class GateSpec:
    """Gate ``exp(-i sign H T)`` acting on ``support``; ``sign = -1`` gives ``exp(+iHT)``."""

    support: tuple
    hamiltonian: np.ndarray
    time: float
    sign: int = 1

    def __post_init__(self):
        h = np.array(self.hamiltonian.matrix if isinstance(self.hamiltonian, Operator) else self.hamiltonian,
                     dtype=complex, copy=True)
        if np.max(np.abs(h - h.conj().T), initial=0.0) > DEFAULT_TOL:
            raise NotHermitianError("gate Hamiltonian is not Hermitian")
        if self.time < 0:
            raise ValueError(f"gate time must be nonnegative, got {self.time}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        h.flags.writeable = False
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "support", tuple(int(s) for s in self.support))

    @property
    def k(self) -> int:
        return len(self.support)

    def local_unitary(self) -> np.ndarray:
        return hermitian_expm_array(self.hamiltonian, self.sign * self.time)


@dataclass(frozen=True, eq=False)
class GateSequence:
    """Ordered gates; ``gates[0]`` runs first."""

    shape: SystemShape
    gates: tuple = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            for s in g.support:
                if s < 0 or s >= self.shape.n:
                    raise ShapeError(f"gate support site {s} out of range for {self.shape.n} qudits")
            if g.hamiltonian.shape != (self.shape.d**g.k,) * 2:
                raise ShapeError("gate Hamiltonian does not match its support")
        object.__setattr__(self, "gates", gates)

    def unitary(self) -> np.ndarray:
        n, d = self.shape.n, self.shape.d
        U = np.eye(d**n, dtype=complex)
        for g in self.gates:
            U = embed(g.local_unitary(), g.support, n, d) @ U
        return U

    def channel(self) -> QuantumChannel:
        return QuantumChannel.unitary(self.shape, self.unitary())


CNOT_HAMILTONIAN = 0.5 * (
    np.eye(4)
    - np.kron(np.diag([1, -1]), np.eye(2))
    - np.kron(np.eye(2), np.array([[0, 1], [1, 0]]))
    + np.kron(np.diag([1, -1]), np.array([[0, 1], [1, 0]]))
).astype(complex)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
# H = exp(-i (π/2) (X+Z)/√2) up to the global phase -i
HADAMARD_HAMILTONIAN = (np.array([[0, 1], [1, 0]]) + np.diag([1, -1])).astype(complex) / np.sqrt(2)


def hadamard_layer(n: int) -> GateSequence:
    """One Hadamard per site, each realized as ``exp(-i (π/2) (X+Z)/√2)``."""
    if n < 1:
        raise ValueError("hadamard_layer needs n >= 1")
    gates = [GateSpec((i,), HADAMARD_HAMILTONIAN, np.pi / 2) for i in range(n)]
    return GateSequence(SystemShape(n, 2), tuple(gates))


def cnot_chain(n: int) -> GateSequence:
    """``CNOT_{0,1}`` then ``CNOT_{1,2}`` ... each realized as ``exp(+i H π/2)``."""
    if n < 2:
        raise ValueError("cnot_chain needs n >= 2")
    gates = [GateSpec((i, i + 1), CNOT_HAMILTONIAN, np.pi / 2, sign=-1) for i in range(n - 1)]
    return GateSequence(SystemShape(n, 2), tuple(gates))


def phase_aligned_distance(U: np.ndarray, V: np.ndarray) -> float:
    """``min_φ ||U - e^{iφ} V||_∞`` with φ taken from the Hilbert-Schmidt overlap."""
    ov = np.trace(V.conj().T @ U)
    phase = ov / abs(ov) if abs(ov) > 1e-15 else 1.0
    return float(np.linalg.norm(U - phase * V, 2))


def concatenate(first: QuantumChannel, second: QuantumChannel) -> QuantumChannel:
    """``first ∘ second``: apply ``second`` then ``first``."""
    if first.shape != second.shape:
        raise ShapeError(f"shape mismatch: {first.shape} vs {second.shape}")
    support = tuple(sorted(set(first.support) | set(second.support)))
    n, d = first.shape.n, first.shape.d
    k = len(support)
    if k == 0:
        return QuantumChannel.identity(first.shape)

    def local(ch):
        # Kraus operators of ch expressed on the joint support register
        pos = [support.index(s) for s in ch.support]
        if not ch.support:
            return [K[0, 0] * np.eye(d**k) for K in ch.kraus]
        return [embed(K, pos, k, d) for K in ch.kraus]

    kraus = [A @ B for A in local(first) for B in local(second)]
    return QuantumChannel(first.shape, support, tuple(kraus))


def tensor_channels(a: QuantumChannel, b: QuantumChannel) -> QuantumChannel:
    """``a ⊗ b``; the sites of ``b`` are appended after those of ``a``."""
    if a.shape.d != b.shape.d:
        raise ShapeError("local dimensions differ")
    shape = SystemShape(a.shape.n + b.shape.n, a.shape.d)
    support = a.support + tuple(s + a.shape.n for s in b.support)
    if not support:
        return QuantumChannel.identity(shape)
    kraus = []
    for A in a.kraus:
        for B in b.kraus:
            if not a.support:
                kraus.append(A[0, 0] * B)
            elif not b.support:
                kraus.append(A * B[0, 0])
            else:
                kraus.append(np.kron(A, B))
    return QuantumChannel(shape, support, tuple(kraus))


def mix_channels(weights: Sequence[float], channels: Sequence[QuantumChannel]) -> QuantumChannel:
    """Convex combination ``Σ p_i Λ_i`` as a single Kraus set on the union support."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise ValueError("weights must form a probability vector")
    shape = channels[0].shape
    support = tuple(sorted(set().union(*[set(c.support) for c in channels])))
    if not support:
        return QuantumChannel.identity(shape)
    d, k = shape.d, len(support)
    kraus = []
    for w, ch in zip(weights, channels):
        if ch.shape != shape:
            raise ShapeError("shape mismatch in mixture")
        if w == 0:
            continue
        pos = [support.index(s) for s in ch.support]
        for K in ch.kraus:
            Kl = K[0, 0] * np.eye(d**k) if not ch.support else embed(K, pos, k, d)
            kraus.append(np.sqrt(w) * Kl)
    return QuantumChannel(shape, support, tuple(kraus))


def random_unitary(D: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_state(shape: SystemShape, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=shape.dim) + 1j * rng.normal(size=shape.dim)
    return PureState.normalized(shape, v)


def random_density_matrix(shape: SystemShape, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    D = shape.dim
    rank = D if rank is None else rank
    g = rng.normal(size=(D, rank)) + 1j * rng.normal(size=(D, rank))
    rho = g @ g.conj().T
    return DensityMatrix(shape, rho / np.trace(rho).real)


def random_channel(shape: SystemShape, rng: np.random.Generator, support: Sequence[int] | None = None,
                   rank: int | None = None) -> QuantumChannel:
    """Random channel with Kraus rank 1-4 from an isometry (orthonormalized Gaussian block)."""
    support = tuple(range(shape.n)) if support is None else tuple(support)
    dk = shape.d ** len(support)
    rank = int(rng.integers(1, 5)) if rank is None else rank
    g = rng.normal(size=(rank * dk, dk)) + 1j * rng.normal(size=(rank * dk, dk))
    q, _ = np.linalg.qr(g)
    kraus = tuple(q[r * dk:(r + 1) * dk, :] for r in range(rank))
    return QuantumChannel(shape, support, kraus)


# JSON


def channel_to_json(ch: QuantumChannel) -> dict:
    return {"shape": encode_shape(ch.shape), "support": list(ch.support),
            "kraus": [encode_matrix(K) for K in ch.kraus]}


def channel_from_json(doc) -> QuantumChannel:
    shape = decode_shape(doc["shape"])
    support = tuple(doc.get("support", []))
    kraus = tuple(decode_matrix(k) for k in doc["kraus"])
    if not support and all(np.asarray(K).shape == (shape.dim, shape.dim) for K in kraus) and shape.dim > 1:
        # empty support with full-size Kraus operators is read as acting everywhere
        support = tuple(range(shape.n))
    return QuantumChannel(shape, support, kraus)


def circuit_to_json(seq: GateSequence) -> dict:
    return {
        "shape": encode_shape(seq.shape),
        "gates": [
            {"support": list(g.support), "hamiltonian": encode_matrix(g.hamiltonian),
             "time": float(g.time), "sign": "-" if g.sign == 1 else "+"}
            for g in seq.gates
        ],
    }


def circuit_from_json(doc) -> GateSequence:
    shape = decode_shape(doc["shape"])
    gates = []
    for g in doc.get("gates", []):
        sign = g.get("sign", "-")
        if sign not in ("+", "-"):
            raise ValueError(f"gate sign must be '+' or '-', got {sign!r}")
        gates.append(GateSpec(tuple(g["support"]), decode_matrix(g["hamiltonian"]), float(g["time"]),
                              sign=1 if sign == "-" else -1))
    return GateSequence(shape, tuple(gates))


def state_to_json(psi: PureState) -> dict:
    return {"shape": encode_shape(psi.shape), "amplitudes": encode_vector(psi.amplitudes)}


def state_from_json(doc) -> PureState | DensityMatrix:
    """Accepts either ``{"amplitudes": ...}`` (pure) or ``{"matrix": ...}`` (density)."""
    shape = decode_shape(doc["shape"])
    if "amplitudes" in doc:
        return PureState(shape, decode_vector(doc["amplitudes"]))
    return DensityMatrix(shape, decode_matrix(doc["matrix"]))


def marginal_array(rho: np.ndarray, site: int, n: int, d: int) -> np.ndarray:
    return partial_trace_array(rho, [i for i in range(n) if i != site], n, d)
