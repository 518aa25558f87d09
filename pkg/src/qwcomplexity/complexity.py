"""Wasserstein complexity of channels, closed forms and the Wasserstein rate.

``C_W1(Λ) = max_ψ ||ψ - Λ(ψ)||_W1`` is a nonconvex maximization, so every
estimate is a bracket: the lower end is a certified W1 lower bound at an
explicit witness state, the upper end comes from support-size bounds (and the
exact single-qudit unitary formula when it applies).
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .quantum_model import (
    PureState,
    QuantumChannel,
    extend_with_identity,
    random_pure_state,
)
from .tensor_core import (
    Operator,
    SystemShape,
    embed,
    hermitian_expm_array,
    operator_norm,
    partial_trace_array,
    shift_operator,
)
from .w1 import SolverConfig, W1Result, w1_norm

log = logging.getLogger(__name__)

MAX_STRUCTURED_SEEDS = 4096


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    local_steps: int = 200
    step_size: float = 0.05
    perturbation: float = 0.02
    seed: int = 0
    solver_cfg: SolverConfig = field(default_factory=SolverConfig)
    structured_seeds: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.restarts < 0 or self.local_steps < 0 or self.step_size <= 0 or self.perturbation <= 0:
            raise ValueError("optimizer counts must be nonnegative and step sizes positive")


@dataclass(frozen=True, eq=False)
class ComplexityEstimate:
    lower: float
    upper: float
    witness: PureState | None
    ancilla_count: int = 0
    trace: dict = field(default_factory=dict)
    per_m: tuple = ()

    def to_json(self) -> dict:
        from .tensor_core import encode_vector
        return {
            "lower": self.lower,
            "upper": self.upper,
            "witness": None if self.witness is None else encode_vector(self.witness.amplitudes),
            "ancilla_count": self.ancilla_count,
            "per_m": [list(x) for x in self.per_m],
        }


# Certified objective on raw state vectors


class _Objective:
    """``psi -> max(1/2||A||_1, Σ_i 1/2||A_i||_1)`` with ``A = ψψ† - Λ(ψψ†)``."""

    def __init__(self, channel: QuantumChannel):
        self.n, self.d = channel.shape.n, channel.shape.d
        self.kraus = channel.full_kraus()
        self.evals = 0

    def difference(self, psi: np.ndarray) -> np.ndarray:
        rho = np.outer(psi, psi.conj())
        out = rho.copy()
        for K in self.kraus:
            phi = K @ psi
            out -= np.outer(phi, phi.conj())
        return out

    def __call__(self, psi: np.ndarray) -> float:
        self.evals += 1
        psi = psi / np.linalg.norm(psi)
        A = self.difference(psi)
        n, d = self.n, self.d
        half = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(A))))
        if n == 1:
            return half
        marg = 0.0
        for i in range(n):
            m = partial_trace_array(A, [j for j in range(n) if j != i], n, d)
            marg += 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(m))))
        return max(half, marg)


def _local_bases(d: int) -> list[np.ndarray]:
    """Eigenbases of Z, X (and Y for qubits) as columns."""
    bases = [np.eye(d, dtype=complex)]
    _, v = np.linalg.eig(shift_operator(d))
    bases.append(v)
    if d == 2:
        bases.append(np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2))
    return bases


def _structured_candidates(channel: QuantumChannel, n_anc: int) -> list[np.ndarray]:
    """Product states from standard local bases, and maximally entangled support/ancilla pairs."""
    shape = channel.shape
    n, d = shape.n, shape.d
    local = [b[:, j] for b in _local_bases(d) for j in range(d)]
    cands = []
    if len(local) ** n <= MAX_STRUCTURED_SEEDS:
        for combo in itertools.product(local, repeat=n):
            v = combo[0]
            for c in combo[1:]:
                v = np.kron(v, c)
            cands.append(v)
    if n_anc > 0 and channel.support:
        sys_sites = [s for s in channel.support if s < n - n_anc]
        anc_sites = list(range(n - n_anc, n))
        pairs = list(zip(sys_sites, anc_sites))
        if pairs:
            phi = np.zeros(d * d, dtype=complex)
            for j in range(d):
                phi[j * d + j] = 1 / np.sqrt(d)
            # build ⊗ over pairs of Φ with |0> elsewhere, then place in site order
            v = np.ones(1, dtype=complex)
            order = []
            for a, b in pairs:
                v = np.kron(v, phi)
                order += [a, b]
            rest = [s for s in range(n) if s not in order]
            for _ in rest:
                v = np.kron(v, np.eye(d)[0])
            order += rest
            perm = np.argsort(order)
            v = v.reshape((d,) * n).transpose(perm).reshape(-1)
            cands.append(v)
    return cands


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _spsa_ascent(f, x0: np.ndarray, steps: int, step: float, pert: float, rng) -> tuple[float, np.ndarray]:
    """Simultaneous-perturbation ascent on the unit sphere; returns the best visited point."""
    x = x0 / np.linalg.norm(x0)
    best_f, best_x = f(x), x
    D = x.shape[0]
    for t in range(1, steps + 1):
        a = step / np.sqrt(t)
        c = pert / t**0.101
        delta = rng.choice([-1.0, 1.0], size=D) + 1j * rng.choice([-1.0, 1.0], size=D)
        xp = x + c * delta
        xm = x - c * delta
        fp, fm = f(xp / np.linalg.norm(xp)), f(xm / np.linalg.norm(xm))
        g = (fp - fm) / (2 * c) * delta
        if fp > best_f:
            best_f, best_x = fp, xp / np.linalg.norm(xp)
        if fm > best_f:
            best_f, best_x = fm, xm / np.linalg.norm(xm)
        x = x + a * g / max(1.0, np.linalg.norm(g))
        x = x / np.linalg.norm(x)
        fx = f(x)
        if fx > best_f:
            best_f, best_x = fx, x
    return best_f, best_x


def _is_trivial(channel: QuantumChannel) -> bool:
    if not channel.support:
        return True
    dk = channel.kraus[0].shape[0]
    for K in channel.kraus:
        c = K[0, 0]
        if np.max(np.abs(K - c * np.eye(dk))) > 1e-12:
            return False
    return True


def _single_site_unitary_phases(channel: QuantumChannel) -> np.ndarray | None:
    if channel.k != 1 or len(channel.kraus) != 1:
        return None
    ev = np.linalg.eigvals(channel.kraus[0])
    return np.angle(ev)


def complexity_upper(channel: QuantumChannel) -> tuple[float, dict]:
    """Upper bound on ``C_W1`` (and on ``AC_W1``) from structure alone."""
    k, d, n = channel.k, channel.shape.d, channel.shape.n
    if _is_trivial(channel):
        return 0.0, {"k_bound": 0.0, "alt_bound": 0.0, "identity": True}
    k_bound = float(k)
    alt = 2 * k * (d * d - 1) / (d * d)
    info = {"k_bound": k_bound, "alt_bound": alt, "n_bound": float(n)}
    up = min(k_bound, alt, float(n))
    phases = _single_site_unitary_phases(channel)
    if phases is not None:
        exact = single_qudit_unitary_complexity(phases)
        info["single_qudit_unitary"] = exact
        up = min(up, exact)
    return up, info


_PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.diag([1.0, -1.0]).astype(complex),
)


def _max_affine_norm_on_sphere(M: np.ndarray, t: np.ndarray) -> float:
    """``max_{|r|=1} |M r - t|`` via the secular equation of the trust-region problem."""
    B = M.T @ M
    b = M.T @ t
    beta, U = np.linalg.eigh(B)
    c = U.T @ b
    top = beta[-1]
    scale = max(1.0, float(np.max(np.abs(B))), float(np.max(np.abs(b))))
    # maximizers satisfy (B - λ) r = b with λ >= top; φ(λ) = |r(λ)|² decreases on (top, ∞)
    def phi(lam):
        return float(np.sum(c**2 / (lam - beta) ** 2))

    cands = []
    lo = top + 1e-15 * scale
    if phi(lo) > 1:
        hi = top + np.linalg.norm(b) + scale
        while phi(hi) > 1:
            hi = top + 2 * (hi - top)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if phi(mid) > 1 else (lo, mid)
        cands.append(U @ (c / (beta - hi)))
    else:
        # hard case: components along the top eigenspace vanish
        mask = np.abs(beta - top) > 1e-12 * scale
        r0 = np.zeros(3)
        r0[mask] = c[mask] / (beta[mask] - top)
        tau = np.sqrt(max(0.0, 1.0 - float(r0 @ r0)))
        for sgn in (1, -1):
            cands.append(U @ r0 + sgn * tau * U[:, -1])
    cands += [np.eye(3)[j] * s for j in range(3) for s in (1, -1)]
    best = max(np.linalg.norm(M @ (r / np.linalg.norm(r)) - t) for r in cands)
    return float(best)


def single_qubit_channel_complexity(channel: QuantumChannel) -> float:
    """Exact ``C_W1`` of a one-qubit channel from its Bloch-ball action.

    With ``Λ(I + r·σ)/2 = (I + (T r + t)·σ)/2`` the objective on a pure input
    is ``|(1 - T) r - t| / 2``, maximized over the unit sphere.
    """
    if channel.shape.n != 1 or channel.shape.d != 2:
        raise ValueError("needs a channel on a single qubit")
    T = np.empty((3, 3))
    t = np.empty(3)
    out_id = channel.apply_array(np.eye(2, dtype=complex))
    for j, sj in enumerate(_PAULIS):
        t[j] = 0.5 * np.real(np.trace(sj @ out_id))
        for k, sk in enumerate(_PAULIS):
            T[j, k] = 0.5 * np.real(np.trace(sj @ channel.apply_array(sk)))
    return 0.5 * _max_affine_norm_on_sphere(np.eye(3) - T, t)


def _refine(channel: QuantumChannel, psi: np.ndarray, cfg: SolverConfig) -> W1Result:
    obj = _Objective(channel)
    A = obj.difference(psi / np.linalg.norm(psi))
    A = (A + A.conj().T) / 2
    A -= np.trace(A) * np.eye(A.shape[0]) / A.shape[0]
    return w1_norm(Operator(channel.shape, A), cfg)


def c_w1(channel: QuantumChannel, cfg: OptimizerConfig | None = None, n_ancilla: int = 0,
         start: Sequence[np.ndarray] = (), refine: bool = True) -> ComplexityEstimate:
    """Bracket ``C_W1(Λ)`` by searching pure input states.

    ``n_ancilla`` marks the trailing sites as idle ancillas (used only to build
    entangled starting points). ``start`` adds caller-supplied starting states.
    """
    cfg = cfg or OptimizerConfig()
    shape = channel.shape
    upper, info = complexity_upper(channel)
    if upper > 0.0 and shape.n == 1 and shape.d == 2:
        # valid for product inputs only, so AC keeps the structural bound
        exact = single_qubit_channel_complexity(channel)
        info["single_qubit_channel"] = exact
        upper = min(upper, exact + 1e-12)
    if upper == 0.0:
        psi = PureState.basis(shape, [0] * shape.n)
        return ComplexityEstimate(0.0, 0.0, psi, n_ancilla, {"upper_info": info, "evaluations": 0})

    f = _Objective(channel)
    scored = []
    for v in list(start):
        scored.append((f(v), v / np.linalg.norm(v), "start"))
    if cfg.structured_seeds:
        for v in _structured_candidates(channel, n_ancilla):
            scored.append((f(v), v, "structured"))
    scored.sort(key=lambda s: -s[0])
    best_f, best_x, best_src = scored[0] if scored else (-np.inf, None, None)

    n_struct = min(len(scored), max(1, cfg.restarts // 4)) if scored else 0
    starts = [(s[1], s[2]) for s in scored[:n_struct]]
    def run(r):
        rng = _rng(cfg.seed, r)
        if r < len(starts):
            x0, src = starts[r]
        else:
            x0, src = random_pure_state(shape, rng).amplitudes, "haar"
        local = _Objective(channel)
        val, x = _spsa_ascent(local, np.array(x0), cfg.local_steps, cfg.step_size, cfg.perturbation, rng)
        return r, src, val, x, local.evals

    if cfg.workers > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, range(cfg.restarts)))
    else:
        results = [run(r) for r in range(cfg.restarts)]
    restart_log = []
    evals = f.evals
    # merge in restart order so ties resolve identically for any worker count
    for r, src, val, x, ev in results:
        restart_log.append((r, src, val))
        evals += ev
        if val > best_f:
            best_f, best_x, best_src = val, x, src

    if best_x is None:
        best_x = PureState.basis(shape, [0] * shape.n).amplitudes
        best_f = f(best_x)
    best_x = best_x / np.linalg.norm(best_x)
    lower = best_f
    solver = None
    if refine:
        solver = _refine(channel, best_x, cfg.solver_cfg)
        lower = max(lower, solver.lower)
    lower = min(max(lower, 0.0), upper)
    trace = {
        "upper_info": info,
        "evaluations": evals,
        "best_source": best_src,
        "restarts": restart_log,
        "solver": None if solver is None else solver.to_json(),
    }
    return ComplexityEstimate(float(lower), float(upper), PureState(shape, best_x), n_ancilla, trace)


def witness_value(channel: QuantumChannel, psi: PureState, cfg: SolverConfig | None = None) -> W1Result:
    """Re-evaluate ``||ψ - Λ(ψ)||_W1`` at a stored witness."""
    return _refine(channel, psi.amplitudes, cfg or SolverConfig())


def ac_w1(channel: QuantumChannel, m_cap: int | None = None, cfg: OptimizerConfig | None = None) -> ComplexityEstimate:
    """Bracket ``AC_W1(Λ) = sup_m C_W1(Λ ⊗ I_m)`` over ``m = 0..m_cap``.

    The per-``m`` lower bounds are made monotone by carrying the previous
    witness forward with an extra ``|0>`` ancilla, which leaves the W1 value
    unchanged.
    """
    cfg = cfg or OptimizerConfig()
    n, d = channel.shape.n, channel.shape.d
    m_cap = n if m_cap is None else m_cap
    if m_cap < 0:
        raise ValueError("m_cap must be nonnegative")
    upper, info = complexity_upper(channel)
    per_m = []
    best = None
    prev = None
    for m in range(m_cap + 1):
        ext = extend_with_identity(channel, m)
        start = []
        if prev is not None:
            carried = np.kron(prev.witness.amplitudes, np.eye(d)[0])
            start.append(carried)
        est = c_w1(ext, replace(cfg, seed=cfg.seed + 7919 * m), n_ancilla=m, start=start)
        if prev is not None and prev.lower > est.lower:
            carried = PureState(ext.shape, np.kron(prev.witness.amplitudes, np.eye(d)[0]))
            est = ComplexityEstimate(prev.lower, est.upper, carried, m, est.trace)
        per_m.append((m, est.lower, est.upper))
        prev = est
        if best is None or est.lower > best.lower:
            best = est
    lower = min(best.lower, upper)
    trace = dict(best.trace)
    trace["upper_info"] = info
    return ComplexityEstimate(lower, upper, best.witness, best.ancilla_count, trace, tuple(per_m))


# Closed forms


def single_qudit_unitary_complexity(phases: Sequence[float]) -> float:
    """Exact ``C_W1`` of a one-qudit unitary with eigenphases ``θ_j``.

    ``sqrt(1 - r²)`` where ``r`` is the distance from the origin to the convex
    hull of the points ``exp(iθ_j)``.
    """
    theta = np.mod(np.asarray(phases, dtype=float).ravel(), 2 * np.pi)
    if theta.size == 0:
        raise ValueError("need at least one phase")
    pts = np.exp(1j * theta)
    srt = np.sort(theta)
    gaps = np.diff(np.concatenate([srt, [srt[0] + 2 * np.pi]]))
    if theta.size > 1 and np.max(gaps) <= np.pi + 1e-14:
        return 1.0
    r = float(np.min(np.abs(pts)))
    for a, b in itertools.combinations(pts, 2):
        seg = b - a
        L = abs(seg) ** 2
        if L == 0:
            continue
        s = np.clip(-np.real(np.conj(seg) * a) / L, 0.0, 1.0)
        r = min(r, abs(a + s * seg))
    return float(np.sqrt(max(0.0, 1.0 - r * r)))


def depolarizing_closed_forms(p: float, d: int) -> tuple[float, float]:
    """``(C_W1, AC_W1)`` of the one-qudit depolarizing channel."""
    if not 0 <= p <= 1 or d < 2:
        raise ValueError("need 0 <= p <= 1 and d >= 2")
    return (1 - p) * (1 - 1 / d), (1 - p) * (1 - 1 / d**2)


# Rates


@dataclass(frozen=True)
class RateEstimate:
    value: float
    quotients: tuple
    brackets: tuple
    steps: tuple
    converged: bool

    @property
    def finite_width(self) -> float:
        lo, hi = self.brackets[-1]
        return hi - lo


def _full_hamiltonian(H, support, n, d) -> np.ndarray:
    h = H.matrix if isinstance(H, Operator) else np.asarray(H, dtype=complex)
    if support is None:
        return h
    return embed(h, support, n, d)


def wasserstein_rate(psi: PureState, H, support: Sequence[int] | None = None, cfg: SolverConfig | None = None,
                     h: float = 1e-2, levels: int = 4) -> RateEstimate:
    """Richardson-extrapolated ``lim ||(ψ - U_Δt ψ U_Δt†)/Δt||_W1`` on steps ``h, h/2, ...``."""
    cfg = cfg or SolverConfig(gap_tol=1e-8)
    n, d = psi.shape.n, psi.shape.d
    Hf = _full_hamiltonian(H, support, n, d)
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    steps, quots, brackets = [], [], []
    ok = True
    for j in range(levels):
        dt = h / 2**j
        U = hermitian_expm_array(Hf, dt)
        A = (rho - U @ rho @ U.conj().T) / dt
        A = (A + A.conj().T) / 2
        A -= np.trace(A) * np.eye(A.shape[0]) / A.shape[0]
        res = w1_norm(Operator(psi.shape, A), cfg)
        ok = ok and res.converged
        steps.append(dt)
        quots.append(res.value)
        brackets.append((res.lower, res.upper))
    # Richardson table for error expansion in powers of dt
    T = [list(quots)]
    for j in range(1, levels):
        prev = T[-1]
        T.append([(2**j * prev[i + 1] - prev[i]) / (2**j - 1) for i in range(len(prev) - 1)])
    return RateEstimate(float(T[-1][0]), tuple(quots), tuple(brackets), tuple(steps), ok)


def rate_bound(H, k: int, d: int) -> tuple[float, float]:
    """``(2√2 k ||H||_∞, 2√2 k (d²-1)/d² ||H||_∞)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hn = operator_norm(H)
    loose = 2 * np.sqrt(2) * k * hn
    return loose, loose * (d * d - 1) / (d * d)


def finite_step_bound(H, k: int, d: int, dt: float) -> float:
    """``2√2 k (d²-1)/d² ||H||_∞ |Δt| exp(||H||_∞ |Δt|)`` on ``||ψ - U_Δt ψ U_Δt†||_W1``."""
    hn = operator_norm(H)
    return 2 * np.sqrt(2) * k * (d * d - 1) / (d * d) * hn * abs(dt) * np.exp(hn * abs(dt))


@dataclass(frozen=True)
class IncrementalReport:
    rows: tuple
    k: int
    passed: bool


def incremental_check(H, k: int, times: Sequence[float], dt: float, support: Sequence[int] | None = None,
                      n: int | None = None, d: int = 2, cfg: OptimizerConfig | None = None,
                      tol: float = 1e-6) -> IncrementalReport:
    """Check ``lower C(U_{t+Δt}) - upper C(U_t) <= k`` on a time grid for ``U_t = exp(-iHt)``."""
    h = H.matrix if isinstance(H, Operator) else np.asarray(H, dtype=complex)
    if support is None:
        kk = int(round(np.log(h.shape[0]) / np.log(d)))
        support = tuple(range(kk))
    n = len(support) if n is None else n
    shape = SystemShape(n, d)
    rows = []
    for t in times:
        a = c_w1(QuantumChannel.unitary(shape, hermitian_expm_array(h, t), support), cfg)
        b = c_w1(QuantumChannel.unitary(shape, hermitian_expm_array(h, t + dt), support), cfg)
        diff = b.lower - a.upper
        rows.append((float(t), a.lower, a.upper, b.lower, b.upper, diff, diff <= k + tol))
    return IncrementalReport(tuple(rows), k, all(r[-1] for r in rows))
