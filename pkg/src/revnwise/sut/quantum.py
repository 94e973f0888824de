"""Dense statevector simulation of small circuits with Pauli noise.

Qubit 0 is the most significant bit of an outcome index, so the amplitude
of ``|q0 q1 ... q_{n-1}>`` sits at the integer with that bit pattern.

Noise is simulated by trajectories: after every circuit layer each qubit
independently suffers X with probability ``p_x`` and Z with probability
``p_z``. Shots that drew the same error pattern share one simulation.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from ..domain import (
    CategoricalPartition,
    Continuous,
    DominancePartition,
    InputDomain,
    IntervalPartition,
    OutputSpace,
)
from ..errors import ValidationError
from .base import SystemUnderTest

MAX_QUBITS = 6
SYNDROMES = ("no_error", "bitflip", "phaseflip", "correlated")

_S2 = 1 / math.sqrt(2)
_FIXED = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _rotation(name, t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    if name == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if name == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[complex(math.cos(t / 2), -math.sin(t / 2)), 0], [0, complex(math.cos(t / 2), math.sin(t / 2))]])


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple
    param: object = None  # float, parameter name, or None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        n_q = 2 if self.name == "CNOT" else 1
        if self.name not in ("H", "X", "Z", "RX", "RY", "RZ", "CNOT"):
            raise ValidationError(f"unsupported gate {self.name!r}")
        if len(self.qubits) != n_q or len(set(self.qubits)) != n_q:
            raise ValidationError(f"gate {self.name} needs {n_q} distinct qubit(s), got {self.qubits}")
        if (self.name in ("RX", "RY", "RZ")) != (self.param is not None):
            raise ValidationError(f"gate {self.name}: parameter mismatch")


@dataclass(frozen=True)
class Circuit:
    """Gate program with named free parameters and their bounds."""

    n_qubits: int
    gates: tuple
    params: tuple = ()  # ((name, low, high), ...)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "params", tuple((str(n), float(lo), float(hi)) for n, lo, hi in self.params))
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValidationError(f"n_qubits must be in 1..{MAX_QUBITS}")
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise ValidationError(f"gate {g} addresses a qubit beyond {self.n_qubits}")

    @property
    def param_names(self):
        return tuple(p[0] for p in self.params)

    def layers(self):
        """Greedy as-soon-as-possible grouping of gates into layers."""
        depth = [0] * self.n_qubits
        layers = []
        for g in self.gates:
            k = max(depth[q] for q in g.qubits)
            if k == len(layers):
                layers.append([])
            layers[k].append(g)
            for q in g.qubits:
                depth[q] = k + 1
        return layers

    def bind(self, theta):
        if isinstance(theta, dict):
            values = dict(theta)
        else:
            theta = list(theta)
            if len(theta) != len(self.params):
                raise ValidationError(f"expected {len(self.params)} parameters, got {len(theta)}")
            values = dict(zip(self.param_names, theta))
        for g in self.gates:
            if isinstance(g.param, str) and g.param not in values:
                raise ValidationError(f"unbound parameter {g.param!r}")
        return values


def _apply(state, g, values, n):
    psi = state.reshape([2] * n)
    if g.name == "CNOT":
        c, t = g.qubits
        psi = psi.copy()
        idx1 = [slice(None)] * n
        idx1[c] = 1
        sub = psi[tuple(idx1)]
        t_axis = t if t < c else t - 1
        psi[tuple(idx1)] = np.flip(sub, axis=t_axis)
        return psi.reshape(-1)
    if g.name in _FIXED:
        U = _FIXED[g.name]
    else:
        t = g.param if not isinstance(g.param, str) else values[g.param]
        U = _rotation(g.name, float(t))
    q = g.qubits[0]
    psi = np.moveaxis(np.tensordot(U, psi, axes=([1], [q])), 0, q)
    return psi.reshape(-1)


def simulate_statevector(circuit, theta=()):
    values = circuit.bind(theta)
    n = circuit.n_qubits
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    for g in circuit.gates:
        state = _apply(state, g, values, n)
    return state


def _pauli(state, n, xs, zs):
    psi = state.reshape([2] * n)
    for q in range(n):
        if zs[q]:
            idx = [slice(None)] * n
            idx[q] = 1
            psi = psi.copy()
            psi[tuple(idx)] *= -1
        if xs[q]:
            psi = np.flip(psi, axis=q)
    return psi.reshape(-1)


def classify_syndrome(xs, zs):
    """Syndrome class of one shot from its injected X / Z record per qubit."""
    xs, zs = np.asarray(xs, bool), np.asarray(zs, bool)
    hit = xs | zs
    if not hit.any():
        return "no_error"
    if hit.sum() >= 2 or (xs.any() and zs.any()):
        return "correlated"
    return "bitflip" if xs.any() else "phaseflip"


@dataclass(frozen=True)
class Noise:
    p_x: float = 0.0
    p_z: float = 0.0

    def __post_init__(self):
        for p in (self.p_x, self.p_z):
            if not 0.0 <= p < 1.0:
                raise ValidationError(f"noise probabilities must lie in [0, 1), got {p}")


@dataclass
class ShotRecord:
    counts: np.ndarray
    fidelity: float
    syndromes: Counter

    @property
    def distribution(self):
        return self.counts / self.counts.sum()

    @property
    def modal_syndrome(self):
        top = max(self.syndromes.values())
        return next(s for s in SYNDROMES if self.syndromes.get(s, 0) == top)


def _sample(states_by_pattern, ideal, shots, rng, n):
    counts = np.zeros(2**n, dtype=np.int64)
    fid = 0.0
    for (state, mult) in states_by_pattern:
        p = np.abs(state) ** 2
        counts += rng.multinomial(mult, p / p.sum())
        fid += mult * abs(np.vdot(ideal, state)) ** 2
    return counts, min(1.0, fid / shots)


def apply_noise_and_sample(statevector, noise, shots, seed):
    """One noise layer on a prepared state, then computational-basis sampling."""
    state = np.asarray(statevector, dtype=complex)
    n = int(round(math.log2(state.shape[0])))
    return _trajectories(lambda xs, zs: _pauli(state, n, xs[0], zs[0]), state, n, 1, noise, shots, seed)


def run_circuit(circuit, theta, noise, shots, seed):
    """Simulate ``shots`` noisy trajectories with noise after every layer."""
    values = circuit.bind(theta)
    n = circuit.n_qubits
    layers = circuit.layers() or [[]]
    ideal = simulate_statevector(circuit, values)

    def evolve(xs, zs):
        state = np.zeros(2**n, dtype=complex)
        state[0] = 1.0
        for k, layer in enumerate(layers):
            for g in layer:
                state = _apply(state, g, values, n)
            state = _pauli(state, n, xs[k], zs[k])
        return state

    return _trajectories(evolve, ideal, n, len(layers), noise, shots, seed)


def _trajectories(evolve, ideal, n, n_layers, noise, shots, seed):
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    X = rng.random((shots, n_layers, n)) < noise.p_x
    Z = rng.random((shots, n_layers, n)) < noise.p_z
    keys = np.concatenate([X.reshape(shots, -1), Z.reshape(shots, -1)], axis=1)
    uniq, inverse, mult = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    syndromes = Counter()
    groups = []
    half = n_layers * n
    for u, m in zip(uniq, mult):
        xs = u[:half].reshape(n_layers, n)
        zs = u[half:].reshape(n_layers, n)
        groups.append((evolve(xs, zs), int(m)))
        syndromes[classify_syndrome(xs.any(axis=0), zs.any(axis=0))] += int(m)
    counts, fid = _sample(groups, ideal, shots, rng, n)
    return ShotRecord(counts, fid, syndromes)


def measurement_partition(n_qubits, threshold=0.7):
    if n_qubits == 1:
        return DominancePartition(("|0>-dom", "|1>-dom"), threshold, "superposition")
    labels = tuple(f"|{i:0{n_qubits}b}>-dom" for i in range(2**n_qubits))
    return DominancePartition(labels, threshold, "superposition")


def quantum_space(n_qubits=1, threshold=0.7):
    return OutputSpace(
        (
            ("measurement", measurement_partition(n_qubits, threshold)),
            ("fidelity", IntervalPartition((0.0, 0.8, 0.95, 1.0), ("low", "med", "high"))),
            ("syndrome", CategoricalPartition(tuple((s, s) for s in SYNDROMES))),
        )
    )


@dataclass(frozen=True)
class QuantumCircuitSUT(SystemUnderTest):
    """Circuit parameters (and optionally the noise rates) as the input domain.

    Outputs are the empirical outcome distribution, the trajectory-averaged
    fidelity against the noiseless state, and the modal syndrome class.
    Every call reuses ``seed``, so identical inputs give identical outputs.
    """

    circuit: Circuit
    noise: Noise = field(default_factory=Noise)
    shots: int = 10_000
    seed: int = 0
    noise_inputs: bool = False
    max_noise: float = 0.95

    output_names = ("measurement", "fidelity", "syndrome")
    stochastic = True

    def __post_init__(self):
        if self.shots < 1:
            raise ValidationError("shots must be >= 1")

    @property
    def input_domain(self):
        dims = [Continuous(lo, hi, name) for name, lo, hi in self.circuit.params]
        if self.noise_inputs:
            dims += [Continuous(0.0, self.max_noise, "p_x"), Continuous(0.0, self.max_noise, "p_z")]
        return InputDomain(tuple(dims))

    def with_shots(self, shots):
        return replace(self, shots=int(shots))

    def run(self, x, repetition=0):
        x = [float(v) for v in x]
        k = len(self.circuit.params)
        noise = Noise(x[k], x[k + 1]) if self.noise_inputs else self.noise
        seed = self.seed if repetition == 0 else (self.seed, repetition)
        return run_circuit(self.circuit, x[:k], noise, self.shots, np.random.SeedSequence(seed))

    def evaluate(self, x, repetition=0):
        rec = self.run(x, repetition)
        return [rec.distribution, rec.fidelity, rec.modal_syndrome]


def ry_circuit():
    """Single qubit, ``RY(theta)|0>`` with theta in [0, pi]."""
    return Circuit(1, (Gate("RY", (0,), "theta"),), (("theta", 0.0, math.pi),))
