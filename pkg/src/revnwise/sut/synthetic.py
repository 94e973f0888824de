"""A synthetic tabular income classifier with behavioral knobs.

Six features on [0, 1] drive five observable outputs:

* ``prediction``: score from a logistic in ``x0`` (plus a little ``x5``),
  threshold and slope set by the ``threshold`` / ``sharpness`` knobs;
* ``confidence``: ``|2*score - 1|`` shifted by ``calibration_skew``, so low
  confidence means the input sits near the decision boundary;
* ``calibration``: -1/0/+1 indicator from the gap ``1.2*(x2 - 0.5) + skew``;
* ``sex_fairness`` / ``age_fairness``: ``2*x - 1`` plus a group bias offset.

``x1`` is a nuisance feature with no effect. Every one of the 162 abstract
tuples of :func:`adult_space` is reachable with reference knobs.

Perturbations model localized faults: each adds ``delta`` to one knob for
inputs whose reference abstract output matches its trigger.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..domain import InputDomain, IntervalPartition, OutputSpace
from ..errors import ValidationError
from .base import SystemUnderTest

KNOBS = ("threshold", "sharpness", "sex_bias", "age_bias", "calibration_skew")

ADULT_PARTITIONS = [
    {"name": "prediction", "kind": "interval", "edges": [0.0, 0.5, 1.0], "labels": ["<=50K", ">50K"]},
    {"name": "confidence", "kind": "interval", "edges": [0.0, 0.4, 0.7, 1.0], "labels": ["low", "med", "high"]},
    {
        "name": "calibration",
        "kind": "categorical",
        "mapping": [[-1, "under"], [0, "well"], [1, "over"]],
        "classes": ["under", "well", "over"],
    },
    {
        "name": "sex_fairness",
        "kind": "interval",
        "edges": [-1.0, -0.6, 0.6, 1.0],
        "labels": ["favored_male", "neutral", "favored_female"],
    },
    {
        "name": "age_fairness",
        "kind": "interval",
        "edges": [-1.0, -0.6, 0.6, 1.0],
        "labels": ["favored_young", "neutral", "favored_old"],
    },
]

CALIBRATION_BAND = 0.3


def adult_space():
    return OutputSpace.from_list(ADULT_PARTITIONS)


@dataclass(frozen=True)
class Perturbation:
    knob: str
    delta: float
    trigger: tuple = ()  # ((dimension name, class label), ...)

    def __post_init__(self):
        if self.knob not in KNOBS:
            raise ValidationError(f"unknown knob {self.knob!r}; expected one of {KNOBS}")
        object.__setattr__(self, "trigger", tuple(tuple(t) for t in self.trigger))


@dataclass(frozen=True)
class SyntheticTabularSUT(SystemUnderTest):
    threshold: float = 0.55
    sharpness: float = 1.0
    sex_bias: float = 0.0
    age_bias: float = 0.0
    calibration_skew: float = 0.0
    perturbations: tuple = ()
    space: OutputSpace = field(default_factory=adult_space, compare=False, repr=False)

    input_domain = InputDomain.box([0.0] * 6, [1.0] * 6, [f"x{i}" for i in range(6)])
    output_names = tuple(p["name"] for p in ADULT_PARTITIONS)

    def knobs(self):
        return {k: getattr(self, k) for k in KNOBS}

    def with_perturbation(self, p):
        return replace(self, perturbations=self.perturbations + (p,))

    @staticmethod
    def _raw(X, kn):
        u = X[:, 0] + 0.2 * (X[:, 5] - 0.5) - kn["threshold"]
        score = 1.0 / (1.0 + np.exp(-10.0 * kn["sharpness"] * u))
        skew = kn["calibration_skew"]
        confidence = np.clip(np.abs(2.0 * score - 1.0) + skew, 0.0, 1.0)
        gap = 1.2 * (X[:, 2] - 0.5) + skew
        calibration = np.where(gap > CALIBRATION_BAND, 1, np.where(gap < -CALIBRATION_BAND, -1, 0))
        sex = np.clip(2.0 * X[:, 3] - 1.0 + kn["sex_bias"], -1.0, 1.0)
        age = np.clip(2.0 * X[:, 4] - 1.0 + kn["age_bias"], -1.0, 1.0)
        return score, confidence, calibration, sex, age

    def _trigger_mask(self, outs, trigger):
        mask = np.ones(len(outs[0]), dtype=bool)
        for name, label in trigger:
            j = self.space.index(name)
            scheme = self.space.schemes[j]
            mask &= classify_many(scheme, outs[j]) == scheme.classes.index(label)
        return mask

    def evaluate_many(self, X):
        """Concrete outputs for a batch, as five arrays of length ``len(X)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        base = {k: np.full(len(X), float(v)) for k, v in self.knobs().items()}
        outs = self._raw(X, base)
        if not self.perturbations:
            return outs
        offsets = {k: [] for k in KNOBS}
        for p in self.perturbations:
            offsets[p.knob].append(np.where(self._trigger_mask(outs, p.trigger), p.delta, 0.0))
        kn = dict(base)
        for k, parts in offsets.items():
            if parts:
                kn[k] = base[k] + np.sum(parts, axis=0)
        return self._raw(X, kn)

    def evaluate(self, x, repetition=0):
        x = self.input_domain.validate(tuple(float(v) for v in x))
        score, conf, cal, sex, age = self.evaluate_many([x])
        return [float(score[0]), float(conf[0]), int(cal[0]), float(sex[0]), float(age[0])]

    def abstract_many(self, X, space=None):
        """Abstract tuples for a batch; integer array of shape (n, 5)."""
        space = space or self.space
        outs = self.evaluate_many(X)
        return np.stack([classify_many(sc, v) for sc, v in zip(space.schemes, outs)], axis=1)


def classify_many(scheme, values):
    """Vectorized ``scheme.classify`` over a 1-D array."""
    values = np.asarray(values)
    if isinstance(scheme, IntervalPartition):
        edges = np.asarray(scheme.edges)
        if np.any(values < edges[0]) or np.any(values > edges[-1]) or np.any(np.isnan(values)):
            return np.array([scheme.classify(v) for v in values.tolist()], dtype=int)
        idx = np.searchsorted(edges, values, side="right") - 1
        return np.minimum(idx, len(scheme.labels) - 1).astype(int)
    return np.array([scheme.classify(v) for v in values.tolist()], dtype=int)
