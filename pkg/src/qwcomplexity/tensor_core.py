"""Dense linear algebra on composite qudit registers.

Operators live on ``(C^d)^{⊗n}`` with site 0 as the most significant base-d
digit, which is the ordering produced by :func:`numpy.kron`. All routines are
pure functions returning new immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 2**16
DEFAULT_TOL = 1e-9


class ShapeError(ValueError):
    """Incompatible or out-of-range register shape."""


class NotHermitianError(ValueError):
    """A Hermitian operator was required."""


@dataclass(frozen=True)
class SystemShape:
    """Register of ``n`` qudits of local dimension ``d``."""

    n: int
    d: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ShapeError(f"qudit count must be a nonnegative integer, got {self.n}")
        if int(self.d) != self.d or self.d < 2:
            raise ShapeError(f"local dimension must be an integer >= 2, got {self.d}")
        if self.d**self.n > MAX_DIM:
            raise ShapeError(f"total dimension {self.d}^{self.n} exceeds {MAX_DIM}")

    @property
    def dim(self) -> int:
        return self.d**self.n

    def extend(self, m: int) -> "SystemShape":
        return SystemShape(self.n + m, self.d)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tagged with its register shape."""

    shape: SystemShape
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        D = self.shape.dim
        if m.shape != (D, D):
            raise ShapeError(f"matrix of shape {m.shape} does not match register dimension {D}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_array(cls, matrix, d: int = 2) -> "Operator":
        """Wrap a square array, inferring the qudit count from ``d``."""
        matrix = np.asarray(matrix)
        D = matrix.shape[0]
        n = int(round(np.log(D) / np.log(d))) if D > 1 else 0
        if d**n != D:
            raise ShapeError(f"dimension {D} is not a power of {d}")
        return cls(SystemShape(n, d), matrix)

    @classmethod
    def identity(cls, shape: SystemShape) -> "Operator":
        return cls(shape, np.eye(shape.dim))

    @classmethod
    def zeros(cls, shape: SystemShape) -> "Operator":
        return cls(shape, np.zeros((shape.dim, shape.dim)))

    @property
    def n(self) -> int:
        return self.shape.n

    @property
    def d(self) -> int:
        return self.shape.d

    @property
    def dag(self) -> "Operator":
        return Operator(self.shape, self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def is_traceless(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(np.trace(self.matrix)) <= tol

    def is_unitary(self, tol: float = DEFAULT_TOL) -> bool:
        eye = np.eye(self.shape.dim)
        return bool(np.max(np.abs(self.matrix @ self.matrix.conj().T - eye), initial=0.0) <= tol)

    def allclose(self, other: "Operator", atol: float = 1e-12) -> bool:
        return self.shape == other.shape and np.allclose(self.matrix, other.matrix, atol=atol, rtol=0)

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.shape != self.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")
        return None

    def __add__(self, other):
        bad = self._check(other)
        if bad is NotImplemented:
            return bad
        return Operator(self.shape, self.matrix + other.matrix)

    def __sub__(self, other):
        bad = self._check(other)
        if bad is NotImplemented:
            return bad
        return Operator(self.shape, self.matrix - other.matrix)

    def __matmul__(self, other):
        bad = self._check(other)
        if bad is NotImplemented:
            return bad
        return Operator(self.shape, self.matrix @ other.matrix)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(self.shape, self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.shape, self.matrix / scalar)

    def __neg__(self):
        return Operator(self.shape, -self.matrix)

    def __repr__(self):
        return f"Operator(n={self.shape.n}, d={self.shape.d})"


def _as_array(A) -> np.ndarray:
    return A.matrix if isinstance(A, Operator) else np.asarray(A, dtype=complex)


def tensor_product(A: Operator, B: Operator) -> Operator:
    """Kronecker product; the sites of ``A`` come first."""
    if A.d != B.d:
        raise ShapeError(f"local dimensions differ: {A.d} vs {B.d}")
    shape = SystemShape(A.n + B.n, A.d)
    return Operator(shape, np.kron(A.matrix, B.matrix))


def tensor_all(ops: Iterable[Operator]) -> Operator:
    ops = list(ops)
    out = ops[0]
    for op in ops[1:]:
        out = tensor_product(out, op)
    return out


def _check_sites(sites: Iterable[int], n: int) -> list[int]:
    sites = sorted(set(int(s) for s in sites))
    for s in sites:
        if s < 0 or s >= n:
            raise ShapeError(f"site {s} out of range for {n} qudits")
    return sites


def partial_trace_array(a: np.ndarray, sites: Sequence[int], n: int, d: int) -> np.ndarray:
    """Trace out ``sites`` of a ``d^n`` square array; returns the reduced array."""
    sites = _check_sites(sites, n)
    if not sites:
        return np.array(a, dtype=complex, copy=True)
    t = np.asarray(a).reshape((d,) * (2 * n))
    keep = [i for i in range(n) if i not in sites]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[i] for i in range(n)]
    col = [letters[n + i] for i in range(n)]
    for s in sites:
        col[s] = row[s]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    Dk = d ** len(keep)
    return r.reshape(Dk, Dk)


def partial_trace(A: Operator, sites: Iterable[int]) -> Operator | complex:
    """Trace out ``sites`` (0-based). Tracing out every site returns the scalar trace."""
    sites = _check_sites(sites, A.n)
    if len(sites) == A.n:
        return A.trace()
    red = partial_trace_array(A.matrix, sites, A.n, A.d)
    return Operator(SystemShape(A.n - len(sites), A.d), red)


def marginal(A: Operator, site: int) -> Operator:
    """Single-site reduced operator on ``site``."""
    others = [i for i in range(A.n) if i != site]
    _check_sites([site], A.n)
    return Operator(SystemShape(1, A.d), partial_trace_array(A.matrix, others, A.n, A.d))


def replace_with_identity(a: np.ndarray, site: int, n: int, d: int) -> np.ndarray:
    """Map ``X -> (I/d)_site ⊗ Tr_site X`` keeping the site order.

    This is the orthogonal projection onto operators acting trivially on ``site``.
    """
    L, R = d**site, d ** (n - site - 1)
    t = np.asarray(a).reshape(L, d, R, L, d, R)
    red = np.einsum("aibcie->abce", t) / d
    out = np.zeros_like(t, dtype=np.result_type(red, float))
    for j in range(d):
        out[:, j, :, :, j, :] = red
    return out.reshape(d**n, d**n)


def _check_hermitian(a: np.ndarray, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if np.max(np.abs(a - a.conj().T), initial=0.0) > tol * scale:
        raise NotHermitianError("operator is not Hermitian")


def hermitian_eigen(A: Operator, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns of a Hermitian operator."""
    a = _as_array(A)
    _check_hermitian(a, tol)
    h = (a + a.conj().T) / 2
    return np.linalg.eigh(h)


def jacobi_eigh(a, tol: float = 1e-14, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi eigensolver for Hermitian matrices.

    Slow but dependency-free; kept as an independent check on the LAPACK path.

    Parameters
    ----------
    a : array_like
        Hermitian matrix.
    tol : float
        Stop once the off-diagonal Frobenius norm falls below ``tol * ||a||_F``.

    Returns
    -------
    (eigenvalues ascending, eigenvector columns)
    """
    a = np.array(a, dtype=complex, copy=True)
    a = (a + a.conj().T) / 2
    N = a.shape[0]
    v = np.eye(N, dtype=complex)
    scale = np.linalg.norm(a) or 1.0
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(N - 1):
            for q in range(p + 1, N):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # unitary rotation in the (p,q) plane zeroing a[p,q]
                phase = apq / abs(apq)
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2 * abs(apq), aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                J = np.eye(N, dtype=complex)
                J[p, p] = c
                J[q, q] = c
                J[p, q] = s * phase
                J[q, p] = -s * np.conj(phase)
                a = J.conj().T @ a @ J
                v = v @ J
    w = np.real(np.diag(a))
    order = np.argsort(w)
    return w[order], v[:, order]


def trace_norm(A) -> float:
    """Sum of singular values."""
    a = _as_array(A)
    if a.size == 0:
        return 0.0
    if np.allclose(a, a.conj().T, atol=1e-13, rtol=0):
        return float(np.sum(np.abs(np.linalg.eigvalsh((a + a.conj().T) / 2))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def operator_norm(A) -> float:
    """Largest singular value."""
    a = _as_array(A)
    if a.size == 0:
        return 0.0
    if np.allclose(a, a.conj().T, atol=1e-13, rtol=0):
        return float(np.max(np.abs(np.linalg.eigvalsh((a + a.conj().T) / 2))))
    return float(np.linalg.svd(a, compute_uv=False)[0])


def soft_threshold_array(a: np.ndarray, tau: float) -> np.ndarray:
    h = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(h)
    w = np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)
    return (v * w) @ v.conj().T


def soft_threshold_hermitian(A: Operator, tau: float) -> Operator:
    """Shrink every eigenvalue toward zero by ``tau`` (proximal map of ``tau·||·||_1``)."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    _check_hermitian(A.matrix, DEFAULT_TOL)
    return Operator(A.shape, soft_threshold_array(A.matrix, tau))


def shift_operator(d: int) -> np.ndarray:
    """``X|j> = |j+1 mod d>``."""
    return np.roll(np.eye(d), 1, axis=0).astype(complex)


def clock_operator(d: int) -> np.ndarray:
    """``Z|j> = ω^j |j>`` with ``ω = exp(2πi/d)``."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def generalized_pauli(s: int, t: int, d: int) -> Operator:
    """Heisenberg-Weyl operator ``X^s Z^t`` on one qudit; ``s, t`` are taken mod ``d``."""
    if d < 2:
        raise ShapeError(f"local dimension must be >= 2, got {d}")
    s, t = s % d, t % d
    m = np.linalg.matrix_power(shift_operator(d), s) @ np.linalg.matrix_power(clock_operator(d), t)
    return Operator(SystemShape(1, d), m)


def hermitian_expm_array(h: np.ndarray, t: float) -> np.ndarray:
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def hermitian_expm(H: Operator, t: float) -> Operator:
    """``exp(-i H t)`` via the spectral decomposition."""
    _check_hermitian(H.matrix, DEFAULT_TOL)
    return Operator(H.shape, hermitian_expm_array(H.matrix, t))


def embed(local: np.ndarray, support: Sequence[int], n: int, d: int) -> np.ndarray:
    """Place an operator acting on ``support`` (in the listed order) into an ``n``-site register."""
    support = list(support)
    k = len(support)
    if len(set(support)) != k:
        raise ShapeError(f"repeated sites in support {support}")
    _check_sites(support, n)
    local = np.asarray(local, dtype=complex)
    if local.shape != (d**k, d**k):
        raise ShapeError(f"local operator of shape {local.shape} does not fit {k} sites")
    rest = [i for i in range(n) if i not in support]
    full = np.kron(local, np.eye(d ** len(rest)))
    # full acts on order support + rest; permute into natural site order
    order = support + rest
    perm = np.argsort(order)
    t = full.reshape((d,) * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(d**n, d**n)


def permute_sites(a: np.ndarray, perm: Sequence[int], n: int, d: int) -> np.ndarray:
    """Relabel sites so that new site ``k`` is old site ``perm[k]``."""
    perm = list(perm)
    t = np.asarray(a).reshape((d,) * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(d**n, d**n)


# JSON encoding shared by every file format in the package.


def encode_matrix(m) -> list:
    m = _as_array(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[-1] != 2:
        raise ValueError("matrix must be a nested list of [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def decode_vector(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 2 or a.shape[-1] != 2:
        raise ValueError("vector must be a list of [re, im] pairs")
    return a[:, 0] + 1j * a[:, 1]


def encode_shape(shape: SystemShape) -> dict:
    return {"n": shape.n, "d": shape.d}


def decode_shape(doc) -> SystemShape:
    return SystemShape(int(doc["n"]), int(doc["d"]))


def operator_to_json(A: Operator) -> dict:
    return {"shape": encode_shape(A.shape), "matrix": encode_matrix(A.matrix)}


def operator_from_json(doc) -> Operator:
    return Operator(decode_shape(doc["shape"]), decode_matrix(doc["matrix"]))
