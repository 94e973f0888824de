"""The system-under-test contract."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..domain import InputDomain, abstract_output
from ..errors import SUTError, ValidationError


@dataclass(frozen=True)
class Aggregation:
    """How repeated evaluations of a stochastic SUT collapse to one output.

    ``modal`` classifies every repetition and keeps the most frequent
    abstract tuple (ties: smallest tuple). ``mean`` averages numeric and
    distribution outputs before classifying; label outputs take the mode.
    """

    repetitions: int = 1
    combine: str = "modal"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValidationError("aggregation repetitions must be >= 1")
        if self.combine not in ("modal", "mean"):
            raise ValidationError(f"unknown aggregation rule {self.combine!r}")


class SystemUnderTest:
    """Black box mapping an input point to a concrete output vector.

    Subclasses set ``input_domain`` and ``output_names`` and implement
    :meth:`evaluate`. ``concurrency`` is ``"safe"`` when one instance may be
    evaluated from several threads at once, ``"serialize"`` otherwise.
    """

    input_domain: InputDomain
    output_names: tuple
    stochastic = False
    concurrency = "safe"
    aggregation = Aggregation()

    def evaluate(self, x, repetition=0):
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(x)


class FunctionSUT(SystemUnderTest):
    """Wrap a plain callable returning the concrete output vector."""

    def __init__(self, fn, input_domain, output_names):
        self.fn = fn
        self.input_domain = input_domain
        self.output_names = tuple(output_names)

    def evaluate(self, x, repetition=0):
        try:
            out = self.fn(x)
        except Exception as exc:
            raise SUTError(f"evaluation failed: {exc}", input=x) from exc
        return list(out) if isinstance(out, (list, tuple, np.ndarray)) else [out]


def abstract_eval(sut, space, x):
    """Abstract output of one (possibly aggregated) evaluation."""
    agg = getattr(sut, "aggregation", None) or Aggregation()
    if agg.repetitions == 1:
        return abstract_output(space, sut.evaluate(x))
    outs = [sut.evaluate(x, repetition=r) for r in range(agg.repetitions)]
    if agg.combine == "modal":
        counts = Counter(abstract_output(space, o) for o in outs)
        top = max(counts.values())
        return min(t for t, c in counts.items() if c == top)
    merged = []
    for j in range(space.q):
        vals = [o[j] for o in outs]
        if isinstance(vals[0], str):
            c = Counter(vals)
            top = max(c.values())
            merged.append(min(v for v, k in c.items() if k == top))
        else:
            merged.append(np.mean(np.asarray(vals, dtype=float), axis=0))
    return abstract_output(space, merged)
