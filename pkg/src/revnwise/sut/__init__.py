from .base import Aggregation, FunctionSUT, SystemUnderTest, abstract_eval
from .quantum import (
    Circuit,
    Gate,
    Noise,
    QuantumCircuitSUT,
    apply_noise_and_sample,
    quantum_space,
    run_circuit,
    ry_circuit,
    simulate_statevector,
)
from .subprocess import SubprocessSUT
from .synthetic import Perturbation, SyntheticTabularSUT, adult_space

__all__ = [
    "Aggregation",
    "FunctionSUT",
    "SystemUnderTest",
    "abstract_eval",
    "Circuit",
    "Gate",
    "Noise",
    "QuantumCircuitSUT",
    "apply_noise_and_sample",
    "quantum_space",
    "run_circuit",
    "ry_circuit",
    "simulate_statevector",
    "SubprocessSUT",
    "Perturbation",
    "SyntheticTabularSUT",
    "adult_space",
]
