"""Targets, loss and bookkeeping shared by the inverse-mapping solvers."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..errors import SUTError, ValidationError
from ..sut.base import abstract_eval

STRATEGIES = ("metaheuristic", "bayesian", "quantum")


@dataclass(frozen=True)
class InverseTarget:
    space: object
    classes: tuple

    def __post_init__(self):
        object.__setattr__(self, "classes", self.space.validate_tuple(self.classes))

    @classmethod
    def from_labels(cls, space, labels):
        return cls(space, space.indices_of(labels))


@dataclass(frozen=True)
class LossSpec:
    reg_weight: float = 1.0

    def __post_init__(self):
        if self.reg_weight < 0:
            raise ValidationError("reg_weight must be nonnegative")


@dataclass(frozen=True)
class OptimizerConfig:
    strategy: str = "metaheuristic"
    population: int = 20
    generations: int = 100
    elite: int = 4
    budget: int = 200
    seed: int = 0
    T: int = 50
    xi: float = 0.01
    n_acquisition: int = 1000
    simplex_size: float = 0.5
    shots: int = 10_000

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"strategy: expected one of {STRATEGIES}, got {self.strategy!r}")
        if self.budget <= 0:
            raise ValidationError("budget must be > 0")
        if self.population < 2:
            raise ValidationError("population must be >= 2")
        if not 0 <= self.elite < self.population:
            raise ValidationError("elite size must be smaller than the population")
        if self.generations < 0 or self.T < 0:
            raise ValidationError("generations and T must be >= 0")
        if self.shots < 1:
            raise ValidationError("shots must be >= 1")

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"optimizer: unknown field(s) {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return asdict(self)


@dataclass
class SearchOutcome:
    best_input: tuple
    best_loss: float
    oracle_calls: int
    success: bool
    trace: list = field(default_factory=list)
    achieved: Optional[tuple] = None
    mismatches: Optional[int] = None
    fallback: bool = False
    strategy: str = ""

    def to_json(self, space=None):
        out = {
            "best_input": [v if isinstance(v, str) else float(v) for v in self.best_input],
            "best_loss": float(self.best_loss),
            "oracle_calls": int(self.oracle_calls),
            "success": bool(self.success),
            "mismatches": self.mismatches,
            "fallback": self.fallback,
            "strategy": self.strategy,
            "trace": [float(t) for t in self.trace],
        }
        if self.achieved is not None:
            out["achieved"] = list(space.labels_of(self.achieved)) if space else list(self.achieved)
        return out


class BudgetExhausted(Exception):
    pass


class Objective:
    """Counts oracle calls, enforces the budget and remembers the best point.

    The SUT is always evaluated at the projection of ``x`` onto the input
    domain; the out-of-bounds distance enters the loss through the
    regularizer.
    """

    def __init__(self, sut, target, spec=None, budget=None, shaping=None, domain=None):
        self.sut = sut
        self.target = target
        self.spec = spec or LossSpec()
        self.budget = budget
        self.shaping = shaping
        self.domain = domain or sut.input_domain
        self.calls = 0
        self.best = None  # (loss, mismatches, point, achieved)

    def __call__(self, vec):
        if self.budget is not None and self.calls >= self.budget:
            raise BudgetExhausted
        vec = np.asarray(vec, dtype=float)
        point = self.domain.decode(self.domain.clip(vec))
        penalty = self.spec.reg_weight * self.domain.violation(vec)
        self.calls += 1
        try:
            if self.shaping is None:
                achieved = abstract_eval(self.sut, self.target.space, point)
                extra = 0.0
            else:
                achieved, extra = self.shaping(point)
        except SUTError:
            raise
        except Exception as exc:
            raise SUTError(f"evaluation failed: {exc}", input=point) from exc
        mism = sum(a != b for a, b in zip(achieved, self.target.classes))
        value = mism + extra + penalty
        if self.best is None or value < self.best[0]:
            self.best = (value, mism, point, achieved, penalty)
        return value

    def outcome(self, trace, strategy, fallback=False):
        if self.best is None:
            raise ValidationError("no evaluation was made")
        value, mism, point, achieved, penalty = self.best
        return SearchOutcome(
            best_input=point,
            best_loss=float(value),
            oracle_calls=self.calls,
            success=(mism == 0 and penalty == 0.0),
            trace=list(trace),
            achieved=tuple(achieved),
            mismatches=int(mism),
            fallback=fallback,
            strategy=strategy,
        )


def loss(sut, x, target, spec=None):
    """Mismatched output dimensions plus the weighted bound violation of ``x``."""
    dom = sut.input_domain
    if len(x) != len(dom):
        raise ValidationError(f"input arity {len(x)} != {len(dom)}")
    return Objective(sut, target, spec)(dom.encode(x) if _has_labels(x) else np.asarray(x, dtype=float))


def _has_labels(x):
    return any(isinstance(v, str) for v in x)
