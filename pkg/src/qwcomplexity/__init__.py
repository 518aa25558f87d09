"""Quantum Wasserstein distance of order 1 and the complexity measures built on it."""

__version__ = "0.1.0"

from .tensor_core import Operator, SystemShape, partial_trace, tensor_product, trace_norm
from .quantum_model import (
    DensityMatrix,
    GateSequence,
    GateSpec,
    PureState,
    QuantumChannel,
    apply_channel,
    cnot_chain,
    depolarizing_channel,
    hadamard_layer,
)
from .w1 import SolverConfig, W1Result, validate_decomposition, w1_distance, w1_norm
from .complexity import (
    ComplexityEstimate,
    OptimizerConfig,
    ac_w1,
    c_w1,
    depolarizing_closed_forms,
    wasserstein_rate,
)
from .cost import ControlSchedule, evaluate_schedule, experimental_cost

__all__ = [
    "__version__", "Operator", "SystemShape", "partial_trace", "tensor_product", "trace_norm",
    "DensityMatrix", "GateSequence", "GateSpec", "PureState", "QuantumChannel", "apply_channel",
    "cnot_chain", "depolarizing_channel", "hadamard_layer", "SolverConfig", "W1Result",
    "validate_decomposition", "w1_distance", "w1_norm", "ComplexityEstimate", "OptimizerConfig",
    "ac_w1", "c_w1", "depolarizing_closed_forms", "wasserstein_rate", "ControlSchedule",
    "evaluate_schedule", "experimental_cost",
]
