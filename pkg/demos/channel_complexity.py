"""
Wasserstein complexity of channels
==================================

C_W1 is the largest W1 distance a channel can move a pure input. Every
estimate is a bracket: the lower end is certified at an explicit witness state,
the upper end comes from the support size of the channel.
"""

import numpy as np

from qwcomplexity import OptimizerConfig, c_w1, depolarizing_closed_forms
from qwcomplexity.complexity import witness_value
from qwcomplexity.quantum_model import cnot_chain, depolarizing_channel, hadamard_layer

cfg = OptimizerConfig(restarts=8, local_steps=40)

# depolarizing channels match the closed form (1-p)(1-1/d)
for p in (0.0, 0.25, 0.5, 0.75):
    est = c_w1(depolarizing_channel(p, 2), cfg)
    print(f"D_{p}: [{est.lower:.6f}, {est.upper:.6f}]  formula {depolarizing_closed_forms(p, 2)[0]:.6f}")

# a Hadamard on every qubit reaches the maximum n
for n in (1, 2):
    est = c_w1(hadamard_layer(n).channel(), cfg)
    print(f"H^{n}: [{est.lower:.6f}, {est.upper:.6f}]")

# the CNOT cascade on three qubits sits between n/2 and n
ch = cnot_chain(3).channel()
est = c_w1(ch, cfg)
print(f"CNOT chain n=3: [{est.lower:.6f}, {est.upper:.6f}]")
print("witness amplitudes:", np.round(est.witness.amplitudes, 3))

# anyone can re-check the lower end from the stored witness
again = witness_value(ch, est.witness)
print(f"re-evaluated witness: [{again.lower:.6f}, {again.upper:.6f}]")
