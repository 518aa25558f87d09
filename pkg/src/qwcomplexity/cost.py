"""Control-schedule cost, experimental gate cost, and the cost/complexity inequalities.

A schedule is evaluated, never optimized: ``schedule_cost`` of any schedule
realizing ``U`` upper-bounds the circuit cost of ``U``, which is the direction
the inequality checks need.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .complexity import ComplexityEstimate, OptimizerConfig, ac_w1, c_w1
from .quantum_model import (
    CNOT_HAMILTONIAN,
    GateSequence,
    GateSpec,
    PureState,
    QuantumChannel,
    phase_aligned_distance,
)
from .tensor_core import (
    SystemShape,
    decode_matrix,
    decode_shape,
    embed,
    encode_matrix,
    encode_shape,
    hermitian_expm_array,
)
from .w1 import SolverConfig, w1_distance

SQRT2 = np.sqrt(2.0)
COST_CONSTANT = 4 * SQRT2
COST_NOTE = (
    "checked direction: C_W1(U) <= 4*sqrt(2)*Cost(U); "
    "the reverse form Cost(U) >= 4*sqrt(2)*C_W1(U) fails already for one Hadamard (cost pi/2 < 4*sqrt(2))"
)


@dataclass(frozen=True, eq=False)
class ControlSchedule:
    """Piecewise-constant controls ``r_j`` on ``N`` slices of ``[0, 1]``.

    ``controls[j, t]`` is ``r_j`` on slice ``t``; generator ``j`` is
    ``generators[j] = (support, h_j)`` with ``h_j`` traceless, Hermitian and
    of unit operator norm.
    """

    shape: SystemShape
    generators: tuple
    controls: np.ndarray

    def __post_init__(self):
        gens = []
        for support, h in self.generators:
            support = tuple(int(s) for s in support)
            h = np.array(h, dtype=complex, copy=True)
            if not 1 <= len(support) <= 2:
                raise ValueError(f"generator support must have 1 or 2 sites, got {support}")
            if any(s < 0 or s >= self.shape.n for s in support):
                raise ValueError(f"generator support {support} out of range")
            if h.shape != (self.shape.d ** len(support),) * 2:
                raise ValueError("generator matrix does not match its support")
            if np.max(np.abs(h - h.conj().T)) > 1e-9:
                raise ValueError("generator is not Hermitian")
            if abs(np.trace(h)) > 1e-9:
                raise ValueError("generator is not traceless")
            if abs(np.max(np.abs(np.linalg.eigvalsh(h))) - 1.0) > 1e-9:
                raise ValueError("generator must have unit operator norm")
            h.flags.writeable = False
            gens.append((support, h))
        c = np.array(self.controls, dtype=float, copy=True)
        if c.ndim != 2 or c.shape[0] != len(gens) or c.shape[1] < 1:
            raise ValueError(f"controls must have shape (generators, N >= 1), got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "generators", tuple(gens))
        object.__setattr__(self, "controls", c)

    @property
    def grid(self) -> int:
        return self.controls.shape[1]

    @classmethod
    def from_functions(cls, shape: SystemShape, generators, funcs: Sequence[Callable[[float], float]],
                       N: int) -> "ControlSchedule":
        """Sample continuous controls at ``s = t/N`` for ``t = 1..N``."""
        s = np.arange(1, N + 1) / N
        controls = np.array([[f(x) for x in s] for f in funcs], dtype=float).reshape(len(funcs), N)
        return cls(shape, tuple(generators), controls)


@dataclass(frozen=True)
class CostReport:
    cost: float
    realized_unitary: np.ndarray
    target_mismatch: float | None = None


@dataclass(frozen=True)
class GateCost:
    k: int
    E: float
    T: float
    R: float


@dataclass(frozen=True)
class ExperimentalCostReport:
    per_gate: tuple
    total: float
    notes: tuple = ()


@dataclass(frozen=True)
class BoundCheck:
    """One inequality ``lhs >= rhs - tol``."""

    lhs: float
    rhs: float
    margin: float
    passed: bool
    estimate: ComplexityEstimate | None = None
    note: str = ""
    extra: dict = field(default_factory=dict)


def _full_generators(sched: ControlSchedule) -> list[np.ndarray]:
    n, d = sched.shape.n, sched.shape.d
    return [embed(h, support, n, d) for support, h in sched.generators]


def schedule_unitary(sched: ControlSchedule) -> np.ndarray:
    """``W_N ... W_1`` with ``W_t = exp(-(i/N) Σ_j r_j(t/N) h_j)``."""
    gens = _full_generators(sched)
    N = sched.grid
    D = sched.shape.dim
    U = np.eye(D, dtype=complex)
    for t in range(N):
        Ht = np.zeros((D, D), dtype=complex)
        for j, h in enumerate(gens):
            Ht += sched.controls[j, t] * h
        U = hermitian_expm_array(Ht, 1.0 / N) @ U
    return U


def schedule_cost(sched: ControlSchedule) -> float:
    """``(1/N) Σ_t Σ_j |r_j(t/N)|``."""
    return float(np.sum(np.abs(sched.controls)) / sched.grid)


def evaluate_schedule(sched: ControlSchedule, target: np.ndarray | None = None) -> CostReport:
    U = schedule_unitary(sched)
    mismatch = None if target is None else phase_aligned_distance(U, np.asarray(target))
    return CostReport(schedule_cost(sched), U, mismatch)


def grid_convergence(shape: SystemShape, generators, funcs, N: int) -> tuple[float, float]:
    """``(||U_N - U_2N||_∞, N * that)`` for controls sampled from continuous ``funcs``."""
    a = schedule_unitary(ControlSchedule.from_functions(shape, generators, funcs, N))
    b = schedule_unitary(ControlSchedule.from_functions(shape, generators, funcs, 2 * N))
    diff = float(np.linalg.norm(a - b, 2))
    return diff, diff * N


def seminorm(H) -> float:
    """Half the spectral spread ``(h_max - h_min)/2``."""
    h = np.asarray(getattr(H, "matrix", H), dtype=complex)
    if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-9:
        raise ValueError("seminorm needs a Hermitian operator")
    w = np.linalg.eigvalsh((h + h.conj().T) / 2)
    return float((w[-1] - w[0]) / 2)


def _is_cnot_cascade(seq: GateSequence) -> bool:
    if seq.shape.d != 2 or len(seq.gates) != seq.shape.n - 1 or not seq.gates:
        return False
    for i, g in enumerate(seq.gates):
        if g.support != (i, i + 1) or abs(g.time - np.pi / 2) > 1e-12:
            return False
        if np.max(np.abs(g.hamiltonian - CNOT_HAMILTONIAN)) > 1e-12:
            return False
    return True


def experimental_cost(seq: GateSequence) -> ExperimentalCostReport:
    """``R_U = Σ_l k_l E_l T_l``."""
    per = []
    for g in seq.gates:
        E = seminorm(g.hamiltonian)
        per.append(GateCost(g.k, E, float(g.time), g.k * E * float(g.time)))
    total = float(sum(p.R for p in per))
    notes = ()
    if _is_cnot_cascade(seq):
        n = seq.shape.n
        gates = f"{n - 1} gate" + ("s" if n > 2 else "")
        notes = (f"CNOT cascade on {n} qubits has {gates}: R = pi*(n-1) = {total:.12g}, "
                 f"not pi*n = {np.pi * n:.12g}",)
    return ExperimentalCostReport(tuple(per), total, notes)


def verify_cost_bound(sched: ControlSchedule, cfg: OptimizerConfig | None = None, tol: float = 1e-6) -> BoundCheck:
    """Check ``Cost >= C_W1(U).lower / (4√2)`` for ``U`` realized by the schedule."""
    U = schedule_unitary(sched)
    est = c_w1(QuantumChannel.unitary(sched.shape, U), cfg)
    lhs = schedule_cost(sched)
    rhs = est.lower / COST_CONSTANT
    margin = lhs - rhs
    return BoundCheck(lhs, rhs, margin, margin >= -tol, est, COST_NOTE)


def verify_experimental_bound(seq: GateSequence, cfg: OptimizerConfig | None = None, tol: float = 1e-6,
                              m_cap: int | None = None, with_ancilla: bool = True) -> BoundCheck:
    """Check ``R_U >= C_W1(U).lower / 2`` and, optionally, the same with ``AC_W1`` at ``m_cap``."""
    R = experimental_cost(seq).total
    ch = seq.channel()
    est = c_w1(ch, cfg)
    rhs = est.lower / 2
    extra = {}
    passed = R - rhs >= -tol
    if with_ancilla:
        m_cap = seq.shape.n if m_cap is None else m_cap
        ac = ac_w1(ch, m_cap, cfg)
        extra = {"ac_lower": ac.lower, "ac_upper": ac.upper, "ac_rhs": ac.lower / 2,
                 "ac_margin": R - ac.lower / 2, "per_m": ac.per_m}
        passed = passed and (R - ac.lower / 2 >= -tol)
    return BoundCheck(R, rhs, R - rhs, passed, est, "", extra)


@dataclass(frozen=True)
class SpeedLimitRow:
    gate: int
    trace_distance: float
    ET: float
    w1_upper: float
    w1_bound: float
    passed: bool


def speed_limit_chain(seq: GateSequence, psi: PureState, cfg: SolverConfig | None = None,
                      tol: float = 1e-6) -> tuple[SpeedLimitRow, ...]:
    """Per gate: ``1/2||ψ_{l+1}-ψ_l||_1 <= E_l T_l`` and ``||ψ_{l+1}-ψ_l||_W1 <= 2 k_l E_l T_l``."""
    n, d = seq.shape.n, seq.shape.d
    v = psi.amplitudes
    rows = []
    for idx, g in enumerate(seq.gates):
        U = embed(g.local_unitary(), g.support, n, d)
        w = U @ v
        a, b = PureState(seq.shape, v / np.linalg.norm(v)), PureState(seq.shape, w / np.linalg.norm(w))
        diff = np.outer(a.amplitudes, a.amplitudes.conj()) - np.outer(b.amplitudes, b.amplitudes.conj())
        td = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
        ET = seminorm(g.hamiltonian) * g.time
        res = w1_distance(a, b, cfg)
        bound = 2 * g.k * ET
        rows.append(SpeedLimitRow(idx, td, ET, res.upper, bound, td <= ET + tol and res.upper <= bound + tol))
        v = w
    return tuple(rows)


# Random corpora


def random_generator(n: int, d: int, rng: np.random.Generator) -> tuple[tuple, np.ndarray]:
    """Traceless Hermitian with unit operator norm on one or two random sites."""
    k = 1 if n == 1 else int(rng.integers(1, 3))
    support = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
    D = d**k
    g = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    h = g + g.conj().T
    h -= np.trace(h) / D * np.eye(D)
    h /= np.max(np.abs(np.linalg.eigvalsh(h)))
    return support, h


def random_schedule(shape: SystemShape, rng: np.random.Generator, n_generators: int = 3, N: int = 4,
                    scale: float = 1.0) -> ControlSchedule:
    gens = tuple(random_generator(shape.n, shape.d, rng) for _ in range(n_generators))
    controls = scale * rng.normal(size=(n_generators, N))
    return ControlSchedule(shape, gens, controls)


def random_gate_sequence(shape: SystemShape, rng: np.random.Generator, n_gates: int = 3) -> GateSequence:
    gates = []
    for _ in range(n_gates):
        k = 1 if shape.n == 1 else int(rng.integers(1, 3))
        support = tuple(sorted(rng.choice(shape.n, size=k, replace=False).tolist()))
        D = shape.d**k
        g = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
        gates.append(GateSpec(support, (g + g.conj().T) / 2, float(rng.uniform(0.05, 1.5)),
                              sign=int(rng.choice([1, -1]))))
    return GateSequence(shape, tuple(gates))


def hadamard_schedule() -> ControlSchedule:
    """One generator ``(X+Z)/√2`` driven at ``π/2`` for one slice; realizes H up to phase."""
    h = (np.array([[0, 1], [1, 0]]) + np.diag([1, -1])).astype(complex) / SQRT2
    return ControlSchedule(SystemShape(1, 2), (((0,), h),), np.array([[np.pi / 2]]))


# JSON


def schedule_to_json(sched: ControlSchedule) -> dict:
    return {
        "shape": encode_shape(sched.shape),
        "generators": [{"support": list(s), "matrix": encode_matrix(h)} for s, h in sched.generators],
        "grid": sched.grid,
        "controls": sched.controls.tolist(),
    }


def schedule_from_json(doc) -> ControlSchedule:
    shape = decode_shape(doc["shape"])
    gens = tuple((tuple(g["support"]), decode_matrix(g["matrix"])) for g in doc["generators"])
    controls = np.asarray(doc["controls"], dtype=float)
    if "grid" in doc and controls.ndim == 2 and controls.shape[1] != int(doc["grid"]):
        raise ValueError(f"grid {doc['grid']} does not match {controls.shape[1]} control samples")
    return ControlSchedule(shape, gens, controls)
