import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revnwise.domain import CategoricalInput, InputDomain, OutputSpace
from revnwise.errors import ValidationError
from revnwise.search import (
    BayesianSolver,
    InverseTarget,
    JayaSolver,
    LossSpec,
    OptimizerConfig,
    QuantumParamSolver,
    loss,
    nelder_mead,
    solve,
    wasserstein_1d,
)
from revnwise.sut import FunctionSUT, QuantumCircuitSUT, quantum_space, ry_circuit

from conftest import uniform_space

SPACE = OutputSpace(tuple((n, uniform_space((2,)).schemes[0]) for n in ("a", "b")))
# both dimensions split [0, 2] at 1: class 0 below, class 1 above


class CountingSUT(FunctionSUT):
    def __init__(self, fn, domain, names):
        super().__init__(fn, domain, names)
        self.calls = 0

    def evaluate(self, x, repetition=0):
        self.calls += 1
        return super().evaluate(x, repetition)


def twin_sut():
    """Both outputs equal 2x on [0, 1]; the mixed tuples are unreachable."""
    return CountingSUT(lambda x: [2 * x[0], 2 * x[0]], InputDomain.box([0.0], [1.0]), ("a", "b"))


def target(*classes):
    return InverseTarget(SPACE, classes)


# -- loss ---------------------------------------------------------------------

def test_loss_zero_on_match():
    assert loss(twin_sut(), (0.25,), target(0, 0)) == 0


def test_loss_counts_mismatches():
    assert loss(twin_sut(), (0.25,), target(1, 1)) == 2


def test_loss_penalizes_out_of_domain():
    # evaluated at the clipped point 1.0, which matches; 0.5 outside adds 0.5**2
    assert loss(twin_sut(), (1.5,), target(1, 1)) == pytest.approx(0.25)


def test_loss_weight_zero_drops_penalty():
    assert loss(twin_sut(), (1.5,), target(1, 1), LossSpec(reg_weight=0.0)) == 0


def test_loss_arity():
    with pytest.raises(ValidationError):
        loss(twin_sut(), (0.1, 0.2), target(0, 0))


@given(st.floats(-2, 3, allow_nan=False), st.sampled_from([(0, 0), (0, 1), (1, 0), (1, 1)]))
def test_loss_is_bounded_below_by_mismatch_floor(x, z):
    value = loss(twin_sut(), (x,), target(*z))
    assert value >= 0
    if 0 <= x <= 1:
        assert value == int(value)


# -- Jaya -----------------------------------------------------------------------

def test_jaya_reaches_reachable_tuple():
    out = JayaSolver(budget=200, seed=0).fit(twin_sut(), target(1, 1)).outcome_
    assert out.success and out.best_loss == 0
    assert 0.5 <= out.best_input[0] <= 1.0
    assert out.achieved == (1, 1)


def test_jaya_unreachable_tuple_keeps_a_floor():
    out = JayaSolver(budget=120, seed=0).fit(twin_sut(), target(0, 1)).outcome_
    assert not out.success
    assert out.best_loss >= 1
    assert out.oracle_calls == 120


def test_jaya_trace_never_increases():
    out = JayaSolver(budget=150, seed=2).fit(twin_sut(), target(0, 1)).outcome_
    assert all(b <= a for a, b in zip(out.trace, out.trace[1:]))


@given(st.integers(1, 80), st.integers(0, 1000))
def test_jaya_budget_is_honest(budget, seed):
    sut = twin_sut()
    out = JayaSolver(population=6, elite=1, budget=budget, seed=seed).fit(sut, target(0, 1)).outcome_
    assert out.oracle_calls == sut.calls <= budget


def test_jaya_is_deterministic():
    a = JayaSolver(seed=5).fit(twin_sut(), target(1, 1)).outcome_
    b = JayaSolver(seed=5).fit(twin_sut(), target(1, 1)).outcome_
    assert a.best_input == b.best_input and a.oracle_calls == b.oracle_calls


def test_jaya_categorical_inputs():
    dom = InputDomain((CategoricalInput(("lo", "mid", "hi"), "level"),))
    table = {"lo": [0.2, 0.2], "mid": [0.2, 1.5], "hi": [1.5, 1.5]}
    sut = FunctionSUT(lambda x: table[x[0]], dom, ("a", "b"))
    out = JayaSolver(budget=60, seed=1).fit(sut, target(0, 1)).outcome_
    assert out.success and out.best_input == ("mid",)


def test_jaya_rejects_bad_settings():
    with pytest.raises(ValidationError):
        JayaSolver(budget=0).fit(twin_sut(), target(0, 0))
    with pytest.raises(ValidationError):
        JayaSolver(population=4, elite=4).fit(twin_sut(), target(0, 0))


# -- Bayesian -------------------------------------------------------------------

def test_bayes_reaches_reachable_tuple():
    out = BayesianSolver(T=20, budget=40, seed=0).fit(twin_sut(), target(1, 1)).outcome_
    assert out.success and 0.5 <= out.best_input[0] <= 1.0


def test_bayes_on_constant_sut():
    sut = CountingSUT(lambda x: [0.2, 0.2], InputDomain.box([0.0, 0.0], [1.0, 1.0]), ("a", "b"))
    out = BayesianSolver(T=10, budget=15, seed=0).fit(sut, target(1, 1)).outcome_
    assert not out.success and out.best_loss == 2
    assert out.oracle_calls == sut.calls <= 15


def test_bayes_is_deterministic():
    a = BayesianSolver(T=8, seed=3).fit(twin_sut(), target(0, 1)).outcome_
    b = BayesianSolver(T=8, seed=3).fit(twin_sut(), target(0, 1)).outcome_
    assert a.best_input == b.best_input and a.trace == b.trace


def test_bayes_rejects_categorical_domain():
    dom = InputDomain((CategoricalInput(("lo", "hi"), "level"),))
    sut = FunctionSUT(lambda x: [0.2, 0.2], dom, ("a", "b"))
    with pytest.raises(ValidationError, match="continuous"):
        BayesianSolver().fit(sut, target(0, 0))


def test_dispatch_by_strategy():
    for strategy in ("metaheuristic", "bayesian"):
        out = solve(twin_sut(), target(0, 0), OptimizerConfig(strategy=strategy, budget=40, T=10))
        assert out.success and out.strategy == strategy


# -- quantum parameters -----------------------------------------------------------

def test_wasserstein_examples():
    assert wasserstein_1d([1, 0], [0, 1]) == pytest.approx(1.0)
    assert wasserstein_1d([1, 0, 0], [0, 0, 1]) == pytest.approx(2.0)
    assert wasserstein_1d([0.5, 0.5], [0.5, 0.5]) == 0


def test_nelder_mead_on_quadratic():
    best = nelder_mead(lambda x: float(np.sum((x - 0.3) ** 2)), np.array([1.0, -1.0]), np.array([0.5, 0.5]), 400)
    assert np.allclose(best[0], 0.3, atol=1e-3)


@pytest.mark.parametrize(
    "label, theta",
    [("|0>-dom", 0.0), ("superposition", math.pi / 2), ("|1>-dom", math.pi)],
)
def test_quantum_solver_finds_rotation(label, theta):
    space = quantum_space(1)
    sut = QuantumCircuitSUT(ry_circuit(), shots=2000)
    tgt = InverseTarget.from_labels(space, (label, "high", "no_error"))
    out = QuantumParamSolver(shots=2000, budget=60, seed=0).fit(sut, tgt).outcome_
    assert out.success
    assert abs(out.best_input[0] - theta) < 0.25
