"""Behavioral fault analogs for the synthetic classifier and a differential detector.

Each fault shifts one knob of :class:`~revnwise.sut.SyntheticTabularSUT`,
but only for inputs whose reference abstract output matches the fault's
trigger (a pair of output classes). A fault is detected by a suite when
some suite input gets a different abstract tuple from the faulted SUT
than from the reference.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .errors import ValidationError
from .sut.synthetic import KNOBS, Perturbation, SyntheticTabularSUT

# kind -> (knob, sign)
FAULT_KINDS = {
    "calibration_under": ("calibration_skew", -1.0),
    "calibration_over": ("calibration_skew", 1.0),
    "sex_bias_pos": ("sex_bias", 1.0),
    "sex_bias_neg": ("sex_bias", -1.0),
    "age_bias_pos": ("age_bias", 1.0),
    "age_bias_neg": ("age_bias", -1.0),
    "boundary_shift_up": ("threshold", 1.0),
    "boundary_shift_down": ("threshold", -1.0),
}

# id, kind, trigger on the reference abstract output
DEFAULT_CATALOG = (
    ("F1", "calibration_under", (("calibration", "over"), ("sex_fairness", "favored_female"))),
    ("F2", "calibration_over", (("calibration", "under"), ("age_fairness", "favored_old"))),
    ("F3", "sex_bias_pos", (("sex_fairness", "favored_male"), ("age_fairness", "favored_old"))),
    ("F4", "sex_bias_neg", (("sex_fairness", "favored_female"), ("age_fairness", "favored_young"))),
    ("F5", "age_bias_pos", (("age_fairness", "favored_young"), ("calibration", "under"))),
    ("F6", "age_bias_neg", (("age_fairness", "favored_old"), ("calibration", "over"))),
    ("F7", "boundary_shift_up", (("confidence", "low"), ("sex_fairness", "favored_female"))),
    ("F8", "boundary_shift_down", (("confidence", "low"), ("age_fairness", "favored_young"))),
)

CENSUS_SIZE = 10_000
# calibrated magnitudes are scaled by this so that points on the domain
# boundary, which the census only approaches, flip as well
CALIBRATION_MARGIN = 1.1


@dataclass(frozen=True)
class FaultSpec:
    id: str
    kind: str
    magnitude: float
    trigger: tuple = ()

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise ValidationError(f"fault {self.id}: unknown kind {self.kind!r}; expected one of {sorted(FAULT_KINDS)}")
        if not self.magnitude > 0:
            raise ValidationError(f"fault {self.id}: magnitude must be > 0, got {self.magnitude}")
        object.__setattr__(self, "trigger", tuple((str(n), str(l)) for n, l in self.trigger))

    @property
    def knob(self):
        return FAULT_KINDS[self.kind][0]

    @property
    def delta(self):
        return FAULT_KINDS[self.kind][1] * self.magnitude

    def perturbation(self):
        return Perturbation(self.knob, self.delta, self.trigger)

    def to_json(self):
        out = {"id": self.id, "kind": self.kind, "magnitude": self.magnitude}
        if self.trigger:
            out["trigger"] = {n: l for n, l in self.trigger}
        return out

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(obj["id"], obj["kind"], float(obj["magnitude"]), tuple(obj.get("trigger", {}).items()))
        except KeyError as exc:
            raise ValidationError(f"fault entry missing field {exc}") from None


def inject(reference, fault):
    """A copy of ``reference`` with the fault's gated knob shift; ``reference`` is untouched."""
    if not isinstance(reference, SyntheticTabularSUT) or fault.knob not in KNOBS:
        raise ValidationError(f"fault kind {fault.kind!r} does not apply to {type(reference).__name__}")
    space = reference.space
    for name, label in fault.trigger:
        if label not in space.classes(space.index(name)):
            raise ValidationError(f"fault {fault.id}: trigger class {label!r} unknown for {name!r}")
    return reference.with_perturbation(fault.perturbation())


def inverse(fault):
    """Same trigger and knob, opposite shift."""
    flipped = {"_under": "_over", "_over": "_under", "_pos": "_neg", "_neg": "_pos", "_up": "_down", "_down": "_up"}
    for a, b in flipped.items():
        if fault.kind.endswith(a):
            return FaultSpec(f"{fault.id}-inv", fault.kind[: -len(a)] + b, fault.magnitude, fault.trigger)
    raise ValidationError(f"no inverse for kind {fault.kind!r}")


def census(domain, n=CENSUS_SIZE, seed=0):
    """Scrambled Halton points over the (continuous) input box."""
    pts = qmc.Halton(d=len(domain), seed=seed).random(n)
    return domain.lower + pts * (domain.upper - domain.lower)


def calibrate(reference, kind, trigger, census_points, hi=2.0, tol=1e-6):
    """Smallest magnitude (times the margin) at which every census point in the trigger region changes class."""
    base = reference.abstract_many(census_points)
    region = reference._trigger_mask(reference.evaluate_many(census_points), trigger)
    if not region.any():
        raise ValidationError(f"trigger {trigger} is empty on the census")
    pts, ref = census_points[region], base[region]

    def flips_all(m):
        faulted = inject(reference, FaultSpec("probe", kind, m, trigger))
        return bool(np.any(faulted.abstract_many(pts) != ref, axis=1).all())

    if not flips_all(hi):
        raise ValidationError(f"{kind} on {trigger}: no magnitude up to {hi} flips the whole region")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if flips_all(mid) else (mid, hi)
    return round(hi * CALIBRATION_MARGIN, 6)


def default_faults(reference=None, census_size=CENSUS_SIZE, seed=0):
    reference = reference or SyntheticTabularSUT()
    pts = census(reference.input_domain, census_size, seed)
    return [FaultSpec(fid, kind, calibrate(reference, kind, trig, pts), trig) for fid, kind, trig in DEFAULT_CATALOG]


@dataclass
class Detection:
    fault_id: str
    detected: bool
    test_index: Optional[int] = None
    input: Optional[tuple] = None
    reference_tuple: Optional[tuple] = None
    faulted_tuple: Optional[tuple] = None

    def to_json(self, space):
        out = {"id": self.fault_id, "detected": self.detected}
        if self.detected:
            out.update(
                test_index=self.test_index,
                input=[float(v) for v in self.input],
                reference=list(space.labels_of(self.reference_tuple)),
                faulted=list(space.labels_of(self.faulted_tuple)),
            )
        return out


def _inputs(suite):
    out = []
    for t in suite:
        x = t[0] if isinstance(t, (tuple, list)) and t and isinstance(t[0], (tuple, list, np.ndarray)) else t
        out.append(tuple(float(v) for v in x))
    return out


def detect(suite, reference, faulted, space=None, fault_id=""):
    """First suite input whose abstract tuple differs between the two SUTs.

    ``suite`` holds inputs or ``(input, tuple)`` pairs.
    """
    inputs = _inputs(suite)
    if not inputs:
        raise ValidationError("detection needs a nonempty suite")
    space = space or reference.space
    X = np.array(inputs)
    a, b = reference.abstract_many(X, space), faulted.abstract_many(X, space)
    diff = np.flatnonzero(np.any(a != b, axis=1))
    if not len(diff):
        return Detection(fault_id, False)
    i = int(diff[0])
    return Detection(fault_id, True, i, inputs[i], tuple(map(int, a[i])), tuple(map(int, b[i])))


@dataclass
class FaultReport:
    detections: list = field(default_factory=list)

    @property
    def detected(self):
        return sum(d.detected for d in self.detections)

    @property
    def total(self):
        return len(self.detections)

    @property
    def rate(self):
        """Detected over injected; None when nothing was injected."""
        return self.detected / self.total if self.total else None

    def to_json(self, space):
        return {
            "detected": self.detected,
            "total": self.total,
            "fdr": self.rate,
            "faults": [d.to_json(space) for d in self.detections],
        }


def fdr(faults, suite, reference, space=None):
    space = space or reference.space
    if not faults:
        return FaultReport([])
    return FaultReport([detect(suite, reference, inject(reference, f), space, f.id) for f in faults])


def random_suite(domain, n=25, seed=0):
    """Uniform random inputs, the baseline the covering suite is compared against."""
    return [tuple(row) for row in domain.sample(np.random.default_rng(seed), n)]


def load_faults(path):
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ValidationError("fault file must hold a top-level list")
    faults = [FaultSpec.from_json(o) for o in data]
    ids = [f.id for f in faults]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate fault ids")
    return faults


def dump_faults(faults, path):
    Path(path).write_text(json.dumps([f.to_json() for f in faults], indent=2) + "\n")
