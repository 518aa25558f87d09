"""
Rates, circuit cost and experimental cost
=========================================

A k-local Hamiltonian changes the W1 distance at a bounded rate, so the
complexity of a circuit lower-bounds what it costs to run it. Three views of
the same fact.
"""

import numpy as np

from qwcomplexity import OptimizerConfig, PureState, SystemShape, wasserstein_rate
from qwcomplexity.complexity import rate_bound
from qwcomplexity.cost import (
    COST_NOTE,
    evaluate_schedule,
    experimental_cost,
    hadamard_schedule,
    verify_cost_bound,
    verify_experimental_bound,
)
from qwcomplexity.quantum_model import CNOT_HAMILTONIAN, HADAMARD, cnot_chain

cfg = OptimizerConfig(restarts=8, local_steps=40)

# rate of |+> under Z: the analytic value is 1
plus = PureState.normalized(SystemShape(1, 2), [1, 1])
Z = np.diag([1.0, -1.0])
r = wasserstein_rate(plus, Z)
print(f"rate(|+>, Z) = {r.value:.6f}; bound 2*sqrt(2)*k*||H|| = {rate_bound(Z, 1, 2)[0]:.4f}")

# the CNOT Hamiltonian on a random two-qubit state
rng = np.random.default_rng(7)
v = rng.normal(size=4) + 1j * rng.normal(size=4)
psi = PureState.normalized(SystemShape(2, 2), v)
r = wasserstein_rate(psi, CNOT_HAMILTONIAN)
print(f"rate(psi, H_CNOT) = {r.value:.6f} <= {rate_bound(CNOT_HAMILTONIAN, 2, 2)[0]:.4f}")

# a one-slice control schedule that implements the Hadamard gate
rep = evaluate_schedule(hadamard_schedule(), HADAMARD)
chk = verify_cost_bound(hadamard_schedule(), cfg)
print(f"Hadamard schedule: cost {rep.cost:.6f}, mismatch {rep.target_mismatch:.1e}")
print(f"  cost >= C_W1/(4 sqrt 2): {chk.lhs:.4f} >= {chk.rhs:.4f} -> {chk.passed}")
print(" ", COST_NOTE)

# experimental cost of CNOT cascades
for n in (2, 3, 4):
    rep = experimental_cost(cnot_chain(n))
    print(f"CNOT cascade n={n}: R = {rep.total:.6f}")
    for note in rep.notes:
        print("  note:", note)
chk = verify_experimental_bound(cnot_chain(3), cfg, m_cap=0)
print(f"R >= C_W1/2 on the n=3 cascade: {chk.lhs:.4f} >= {chk.rhs:.4f} -> {chk.passed}")
