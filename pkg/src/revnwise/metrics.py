"""Behavioral coverage: target and realized tuple sets and what is computed from them.

A tuple here is a :class:`~revnwise.domain.SubTuple` of strength ``s``.
Targets are the ``s``-projections of covering-array rows. Realized tuples
are the ``s``-projections of the abstract outputs of executed tests and
may include tuples outside the targets; coverage counts only the overlap,
efficiency counts everything realized.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .domain import OutputSpace, SubTuple, all_subsets, project
from .errors import ValidationError


def _key(t):
    return (t.dims, t.classes)


def _sorted(tuples):
    return sorted(tuples, key=_key)


def tuple_to_json(space, t):
    return {space.names[j]: space.classes(j)[c] for j, c in zip(t.dims, t.classes)}


def tuple_from_json(space, obj):
    items = sorted((space.index(name), label) for name, label in obj.items())
    dims = tuple(j for j, _ in items)
    classes = []
    for j, label in items:
        if label not in space.classes(j):
            raise ValidationError(f"dimension '{space.names[j]}': unknown class {label!r}")
        classes.append(space.classes(j).index(label))
    return SubTuple(dims, tuple(classes))


class CoverageLedger:
    """Target set ``T``, realized set ``R`` and a per-test log for one strength."""

    def __init__(self, space, strength, targets=()):
        if not 1 <= strength <= space.q:
            raise ValidationError(f"strength must lie in [1, {space.q}], got {strength}")
        self.space = space
        self.strength = strength
        self._subsets = all_subsets(space.q, strength)
        self.targets = frozenset(SubTuple(*t) for t in targets)
        for t in self.targets:
            if len(t.dims) != strength:
                raise ValidationError(f"target {t} does not have strength {strength}")
        self.realized = set()
        self.log = []  # (full tuple, number of new realized tuples)

    @classmethod
    def from_oca(cls, oca):
        if oca.M == 0:
            warnings.warn("covering array has no rows; the target set is empty", stacklevel=2)
        subsets = all_subsets(oca.space.q, oca.strength)
        targets = {project(row, S) for row in oca.rows for S in subsets}
        return cls(oca.space, oca.strength, targets)

    def projections(self, tup):
        tup = self.space.validate_tuple(tup)
        return {project(tup, S) for S in self._subsets}

    def record(self, tup):
        """Insert all projections of a full tuple; returns how many were new to ``R``."""
        new = self.projections(tup) - self.realized
        self.realized |= new
        self.log.append((tuple(int(c) for c in tup), len(new)))
        return len(new)

    def incremental_gain(self, tup):
        """Coverage increase that recording ``tup`` would produce. Does not mutate."""
        if not self.targets:
            return 0.0
        fresh = (self.projections(tup) & self.targets) - self.realized
        return len(fresh) / len(self.targets)

    @property
    def covered(self):
        return self.realized & self.targets

    @property
    def uncovered(self):
        return self.targets - self.realized

    @property
    def n_tests(self):
        return len(self.log)

    def ocov(self):
        if not self.targets:
            return 0.0
        return len(self.covered) / len(self.targets)

    def ocov_fraction(self):
        return Fraction(len(self.covered), len(self.targets)) if self.targets else Fraction(0)

    def efficiency(self, M=None):
        M = self.n_tests if M is None else M
        if M < 1:
            raise ValidationError("efficiency needs at least one test")
        return len(self.realized) / M

    def copy(self):
        out = CoverageLedger(self.space, self.strength, self.targets)
        out.realized = set(self.realized)
        out.log = list(self.log)
        return out

    def fresh(self):
        """Same targets, nothing recorded."""
        return CoverageLedger(self.space, self.strength, self.targets)

    def merge(self, other):
        """Union of realized sets and concatenated logs; targets must agree."""
        self._check_compatible(other)
        out = self.copy()
        out.realized |= other.realized
        out.log.extend(other.log)
        return out

    def _check_compatible(self, other):
        if self.space.signature() != other.space.signature() or self.strength != other.strength:
            raise ValidationError("ledgers are over different output spaces or strengths")
        if self.targets != other.targets:
            raise ValidationError("ledgers have different target sets")

    def report(self, M=None):
        M = self.n_tests if M is None else M
        return CoverageReport(
            space=self.space,
            strength=self.strength,
            M=M,
            targets=_sorted(self.targets),
            realized=_sorted(self.realized),
        )


@dataclass
class CoverageReport:
    space: OutputSpace
    strength: int
    M: int
    targets: list
    realized: list
    _covered: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        self.targets = _sorted(SubTuple(*t) for t in self.targets)
        self.realized = _sorted(SubTuple(*t) for t in self.realized)
        self._covered = frozenset(self.targets) & frozenset(self.realized)

    @property
    def ocov(self):
        return len(self._covered) / len(self.targets) if self.targets else 0.0

    @property
    def eta(self):
        return len(self.realized) / self.M if self.M else None

    @property
    def uncovered(self):
        return [t for t in self.targets if t not in self._covered]

    def subset_coverage(self):
        """Coverage per dimension subset of size ``strength``."""
        out = {}
        for S in all_subsets(self.space.q, self.strength):
            tg = [t for t in self.targets if t.dims == S]
            if tg:
                out[S] = sum(t in self._covered for t in tg) / len(tg)
        return out

    def pair_matrices(self):
        """Per dimension pair: 1 covered, 0 targeted but uncovered, None not targeted.

        For strength above two, targets and realized tuples are projected to pairs.
        """
        def pairs(tuples):
            return {project(t, P) for t in tuples for P in combinations(t.dims, 2)}

        tg, rz = pairs(self.targets), pairs(self.realized)
        out = {}
        for a, b in combinations(range(self.space.q), 2):
            ca, cb = self.space.classes(a), self.space.classes(b)
            out[(a, b)] = [
                [(1 if SubTuple((a, b), (i, k)) in rz else 0) if SubTuple((a, b), (i, k)) in tg else None
                 for k in range(len(cb))]
                for i in range(len(ca))
            ]
        return out

    def to_json(self):
        names = self.space.names
        return {
            "strength": self.strength,
            "ocov": self.ocov,
            "eta": self.eta,
            "M": self.M,
            "n_targets": len(self.targets),
            "n_realized": len(self.realized),
            "n_covered": len(self._covered),
            "uncovered": [tuple_to_json(self.space, t) for t in self.uncovered],
            "pair_matrix": {f"{names[a]}|{names[b]}": m for (a, b), m in self.pair_matrices().items()}
            if self.space.q >= 2 else {},
            "space": self.space.to_list(),
            "targets": [tuple_to_json(self.space, t) for t in self.targets],
            "realized": [tuple_to_json(self.space, t) for t in self.realized],
        }

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_json(cls, data):
        try:
            space = OutputSpace.from_list(data["space"])
            return cls(
                space=space,
                strength=int(data["strength"]),
                M=int(data["M"]),
                targets=[tuple_from_json(space, t) for t in data["targets"]],
                realized=[tuple_from_json(space, t) for t in data["realized"]],
            )
        except KeyError as exc:
            raise ValidationError(f"coverage report: missing field {exc}") from None

    @classmethod
    def load(cls, path):
        return cls.from_json(json.loads(Path(path).read_text()))

    def write_heatmaps(self, directory):
        """One CSV per dimension pair: rows are classes of the first, columns of the second."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        names = self.space.names
        written = []
        for (a, b), mat in self.pair_matrices().items():
            path = directory / f"heatmap_{names[a]}__{names[b]}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow([f"{names[a]}\\{names[b]}", *self.space.classes(b)])
                for label, row in zip(self.space.classes(a), mat):
                    w.writerow([label, *("" if v is None else v for v in row)])
            written.append(path)
        return written


def prioritize(tests, ledger):
    """Greedy order by incremental coverage against an empty copy of ``ledger``.

    ``tests`` is a list of ``(input, tuple)``; ties keep the original order.
    """
    work = ledger.fresh()
    remaining = list(range(len(tests)))
    order = []
    while remaining:
        best = max(remaining, key=lambda i: (work.incremental_gain(tests[i][1]), -i))
        work.record(tests[best][1])
        order.append(best)
        remaining.remove(best)
    return [tests[i] for i in order]


def guarantee_check(alpha, ledger):
    """True iff the ledger's coverage is at least ``alpha`` (compared exactly)."""
    alpha = Fraction(alpha).limit_denominator(10**9) if not isinstance(alpha, Fraction) else alpha
    if alpha <= 0:
        return True
    return ledger.ocov_fraction() >= alpha


@dataclass
class DriftReport:
    delta: float
    per_subset: dict
    regressed: list
    alerts: list
    threshold: float

    def to_json(self, space):
        names = space.names
        return {
            "delta_ocov": self.delta,
            "threshold": self.threshold,
            "per_subset": {"|".join(names[j] for j in S): d for S, d in self.per_subset.items()},
            "regressed": [tuple_to_json(space, t) for t in self.regressed],
            "alerts": ["|".join(names[j] for j in S) for S in self.alerts],
        }


def drift(report_v, report_v1, threshold=0.1):
    """Signed coverage change from version ``v`` to ``v+1`` over a shared target set.

    A subset raises an alert when its coverage dropped by at least ``threshold``.
    """
    if report_v.space.signature() != report_v1.space.signature():
        raise ValidationError("drift needs reports over the same output space")
    if report_v.strength != report_v1.strength or report_v.targets != report_v1.targets:
        raise ValidationError("drift needs reports over the same target tuples")
    cov_v, cov_v1 = report_v.subset_coverage(), report_v1.subset_coverage()
    per = {S: cov_v1[S] - cov_v[S] for S in cov_v}
    covered_v1 = set(report_v1.realized)
    regressed = [t for t in report_v.targets if t in set(report_v.realized) and t not in covered_v1]
    alerts = [S for S, d in per.items() if d <= -threshold + 1e-12]
    return DriftReport(report_v1.ocov - report_v.ocov, per, regressed, alerts, threshold)
