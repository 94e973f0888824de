"""Input domains, output partitions and the abstract output map.

Every output dimension of a system under test is paired with a partition
scheme that maps a concrete value (a score, a label, a probability vector,
an embedding) onto one of a small number of named classes. A full abstract
output is the tuple of class indices over all dimensions.
"""
from __future__ import annotations

import bisect
import json
import math
import numbers
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ClassificationError, ValidationError

__all__ = [
    "Continuous",
    "CategoricalInput",
    "InputDomain",
    "IntervalPartition",
    "CategoricalPartition",
    "DominancePartition",
    "ClusterPartition",
    "OutputSpace",
    "SubTuple",
    "classify",
    "abstract_output",
    "project",
    "all_subsets",
    "KMeansPartitioner",
    "fit_cluster_partition",
    "output_space_cardinality",
    "load_partitions",
    "dump_partitions",
]


# ---------------------------------------------------------------------------
# input side


@dataclass(frozen=True)
class Continuous:
    low: float
    high: float
    name: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high)):
            raise ValidationError(f"input '{self.name}': bounds must be finite")
        if not self.low < self.high:
            raise ValidationError(f"input '{self.name}': need low < high, got [{self.low}, {self.high}]")


@dataclass(frozen=True)
class CategoricalInput:
    labels: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise ValidationError(f"input '{self.name}': categorical dimension needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError(f"input '{self.name}': duplicate labels")


@dataclass(frozen=True)
class InputDomain:
    """Ordered product of continuous and categorical input dimensions.

    Solvers work on a numeric encoding: continuous values pass through,
    categorical values become their label index.
    """

    dimensions: tuple

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise ValidationError("input domain needs at least one dimension")

    @classmethod
    def box(cls, lows, highs, names=None):
        names = names or [f"x{i}" for i in range(len(lows))]
        return cls(tuple(Continuous(float(lo), float(hi), n) for lo, hi, n in zip(lows, highs, names)))

    def __len__(self):
        return len(self.dimensions)

    @property
    def names(self):
        return tuple(d.name for d in self.dimensions)

    @property
    def is_continuous(self):
        return all(isinstance(d, Continuous) for d in self.dimensions)

    @property
    def categorical_mask(self):
        return np.array([isinstance(d, CategoricalInput) for d in self.dimensions])

    @property
    def lower(self):
        return np.array([d.low if isinstance(d, Continuous) else 0.0 for d in self.dimensions])

    @property
    def upper(self):
        return np.array(
            [d.high if isinstance(d, Continuous) else float(len(d.labels) - 1) for d in self.dimensions]
        )

    def validate(self, point):
        if len(point) != len(self.dimensions):
            raise ValidationError(f"input arity {len(point)} != domain arity {len(self.dimensions)}")
        for i, (d, v) in enumerate(zip(self.dimensions, point)):
            if isinstance(d, Continuous):
                if not isinstance(v, numbers.Real) or not d.low <= v <= d.high:
                    raise ValidationError(f"input {i} ('{d.name}'): {v!r} outside [{d.low}, {d.high}]")
            elif v not in d.labels:
                raise ValidationError(f"input {i} ('{d.name}'): {v!r} not among {list(d.labels)}")
        return tuple(point)

    def contains(self, point):
        try:
            self.validate(point)
        except ValidationError:
            return False
        return True

    def encode(self, point):
        out = np.empty(len(self.dimensions))
        for i, (d, v) in enumerate(zip(self.dimensions, point)):
            out[i] = float(v) if isinstance(d, Continuous) else d.labels.index(v)
        return out

    def decode(self, vec):
        """Map a numeric vector back to a point; categorical indices are rounded and clipped."""
        out = []
        for d, v in zip(self.dimensions, vec):
            if isinstance(d, Continuous):
                out.append(float(v))
            else:
                k = int(np.clip(np.rint(v), 0, len(d.labels) - 1))
                out.append(d.labels[k])
        return tuple(out)

    def clip(self, vec):
        return np.clip(np.asarray(vec, dtype=float), self.lower, self.upper)

    def violation(self, vec):
        """Sum of squared per-dimension bound violations; 0 inside the domain."""
        vec = np.asarray(vec, dtype=float)
        below = np.maximum(self.lower - vec, 0.0)
        above = np.maximum(vec - self.upper, 0.0)
        return float(np.sum(below**2 + above**2))

    def sample(self, rng, n):
        """Uniform random encoded points, shape (n, p)."""
        lo, hi = self.lower, self.upper
        X = rng.uniform(lo, hi, size=(n, len(self.dimensions)))
        cat = self.categorical_mask
        if cat.any():
            counts = np.array([len(d.labels) for d in self.dimensions])[cat]
            X[:, cat] = rng.integers(0, counts, size=(n, int(cat.sum())))
        return X

    def to_dict(self):
        out = []
        for d in self.dimensions:
            if isinstance(d, Continuous):
                out.append({"name": d.name, "kind": "continuous", "low": d.low, "high": d.high})
            else:
                out.append({"name": d.name, "kind": "categorical", "labels": list(d.labels)})
        return out

    @classmethod
    def from_dict(cls, items):
        dims = []
        for i, item in enumerate(items):
            kind = item.get("kind")
            name = item.get("name", f"x{i}")
            if kind == "continuous":
                dims.append(Continuous(float(item["low"]), float(item["high"]), name))
            elif kind == "categorical":
                dims.append(CategoricalInput(tuple(item["labels"]), name))
            else:
                raise ValidationError(f"inputs[{i}].kind: unknown input kind {kind!r}")
        return cls(tuple(dims))


# ---------------------------------------------------------------------------
# partition schemes


def _check_labels(labels):
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise ValidationError(f"class labels must be distinct: {list(labels)}")
    return labels


def _is_real(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


@dataclass(frozen=True)
class IntervalPartition:
    """Cells ``[e0, e1), [e1, e2), ..., [e_{k-1}, e_k]``; one label per cell."""

    edges: tuple
    labels: tuple
    kind = "interval"

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "labels", _check_labels(self.labels))
        if len(edges) != len(self.labels) + 1:
            raise ValidationError(f"interval partition: {len(edges)} edges for {len(self.labels)} labels")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValidationError("interval partition: edges must be strictly increasing")

    @property
    def classes(self):
        return self.labels

    def classify(self, value):
        if isinstance(value, np.generic):
            value = value.item()
        if not _is_real(value):
            raise ClassificationError(f"interval partition expects a real value, got {type(value).__name__}")
        if math.isnan(value) or value < self.edges[0] or value > self.edges[-1]:
            raise ClassificationError(f"value {value} outside [{self.edges[0]}, {self.edges[-1]}]")
        return min(bisect.bisect_right(self.edges, value) - 1, len(self.labels) - 1)

    def to_dict(self):
        return {"kind": self.kind, "edges": list(self.edges), "labels": list(self.labels)}


@dataclass(frozen=True)
class CategoricalPartition:
    """Lookup table from concrete labels to classes.

    ``mapping`` is a sequence of ``(concrete, class_label)`` pairs. Class order
    follows ``classes`` when given, else first appearance in the mapping.
    """

    mapping: tuple
    classes: tuple = ()
    kind = "categorical"

    def __post_init__(self):
        pairs = tuple((k, v) for k, v in self.mapping)
        object.__setattr__(self, "mapping", pairs)
        keys = [k for k, _ in pairs]
        if len(set(keys)) != len(keys):
            raise ValidationError("categorical partition: duplicate concrete value")
        classes = self.classes or tuple(dict.fromkeys(v for _, v in pairs))
        object.__setattr__(self, "classes", _check_labels(classes))
        unknown = {v for _, v in pairs} - set(self.classes)
        if unknown:
            raise ValidationError(f"categorical partition: classes {sorted(map(str, unknown))} not declared")
        object.__setattr__(self, "_index", {k: self.classes.index(v) for k, v in pairs})

    def classify(self, value):
        if isinstance(value, np.generic):
            value = value.item()
        try:
            return self._index[value]
        except (KeyError, TypeError):
            raise ClassificationError(f"no class for concrete value {value!r}") from None

    def to_dict(self):
        return {"kind": self.kind, "mapping": [list(p) for p in self.mapping], "classes": list(self.classes)}


@dataclass(frozen=True)
class DominancePartition:
    """Class ``i`` when outcome ``i`` has probability above ``threshold``, else mixed."""

    labels: tuple
    threshold: float = 0.7
    mixed: str = "mixed"
    kind = "dominance"

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "threshold", float(self.threshold))
        if not 0.5 < self.threshold <= 1.0:
            raise ValidationError(f"dominance threshold must lie in (0.5, 1], got {self.threshold}")
        _check_labels(self.labels + (self.mixed,))

    @property
    def classes(self):
        return self.labels + (self.mixed,)

    @property
    def n_outcomes(self):
        return len(self.labels)

    def classify(self, value):
        try:
            p = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            raise ClassificationError("dominance partition expects a probability vector") from None
        if p.ndim != 1 or p.shape[0] != len(self.labels):
            raise ClassificationError(f"expected a probability vector of length {len(self.labels)}")
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-6:
            raise ValidationError(f"not a probability vector (sum={p.sum():.8g})")
        k = int(np.argmax(p))
        return k if p[k] > self.threshold else len(self.labels)

    def canonical_distribution(self, index):
        """Representative distribution of a class: one-hot when dominant, uniform when mixed."""
        n = len(self.labels)
        if index == n:
            return np.full(n, 1.0 / n)
        out = np.zeros(n)
        out[index] = 1.0
        return out

    def to_dict(self):
        return {"kind": self.kind, "labels": list(self.labels), "threshold": self.threshold, "mixed": self.mixed}


@dataclass(frozen=True)
class ClusterPartition:
    """Nearest-centroid assignment; ties go to the lower centroid index."""

    centroids: tuple
    labels: tuple
    kind = "cluster"

    def __post_init__(self):
        cents = tuple(tuple(float(c) for c in row) for row in self.centroids)
        object.__setattr__(self, "centroids", cents)
        object.__setattr__(self, "labels", _check_labels(self.labels))
        if len(cents) != len(self.labels) or not cents:
            raise ValidationError("cluster partition: need one label per centroid")
        if len({len(c) for c in cents}) != 1:
            raise ValidationError("cluster partition: centroids differ in dimension")

    @property
    def classes(self):
        return self.labels

    def classify(self, value):
        try:
            x = np.asarray(value, dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise ClassificationError("cluster partition expects a numeric point") from None
        C = np.asarray(self.centroids)
        if x.shape[0] != C.shape[1]:
            raise ClassificationError(f"point of dimension {x.shape[0]}, centroids have {C.shape[1]}")
        return int(np.argmin(((C - x) ** 2).sum(axis=1)))

    def to_dict(self):
        return {"kind": self.kind, "centroids": [list(c) for c in self.centroids], "labels": list(self.labels)}


_SCHEMES = {
    "interval": IntervalPartition,
    "categorical": CategoricalPartition,
    "dominance": DominancePartition,
    "cluster": ClusterPartition,
}


def scheme_from_dict(item):
    kind = item.get("kind")
    try:
        if kind == "interval":
            return IntervalPartition(item["edges"], item["labels"])
        if kind == "categorical":
            return CategoricalPartition(item["mapping"], tuple(item.get("classes", ())))
        if kind == "dominance":
            return DominancePartition(item["labels"], item.get("threshold", 0.7), item.get("mixed", "mixed"))
        if kind == "cluster":
            return ClusterPartition(item["centroids"], item["labels"])
    except KeyError as exc:
        raise ValidationError(f"missing field {exc.args[0]!r}") from None
    raise ValidationError(f"kind: unknown partition kind {kind!r}")


def classify(scheme, concrete):
    return scheme.classify(concrete)


# ---------------------------------------------------------------------------
# output space and tuples


class SubTuple(NamedTuple):
    """Classes at an explicit sorted set of dimension indices."""

    dims: tuple
    classes: tuple


@dataclass(frozen=True)
class OutputSpace:
    dimensions: tuple  # of (name, scheme)
    _names: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple((str(n), s) for n, s in self.dimensions)
        if not dims:
            raise ValidationError("output space needs at least one dimension")
        names = tuple(n for n, _ in dims)
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate output dimension names: {list(names)}")
        object.__setattr__(self, "dimensions", dims)
        object.__setattr__(self, "_names", names)

    @property
    def q(self):
        return len(self.dimensions)

    @property
    def names(self):
        return self._names

    @property
    def schemes(self):
        return tuple(s for _, s in self.dimensions)

    @property
    def cardinalities(self):
        return tuple(len(s.classes) for _, s in self.dimensions)

    def classes(self, j):
        return self.dimensions[j][1].classes

    def index(self, name):
        try:
            return self._names.index(name)
        except ValueError:
            raise ValidationError(f"unknown output dimension {name!r}") from None

    def labels_of(self, tup):
        """Class labels for a full tuple or a SubTuple."""
        if isinstance(tup, SubTuple):
            return {self._names[j]: self.classes(j)[c] for j, c in zip(tup.dims, tup.classes)}
        return tuple(self.classes(j)[c] for j, c in enumerate(tup))

    def indices_of(self, labels):
        """Inverse of labels_of for a full tuple of labels."""
        if len(labels) != self.q:
            raise ValidationError(f"tuple arity {len(labels)} != q={self.q}")
        out = []
        for j, lab in enumerate(labels):
            cls = self.classes(j)
            if lab not in cls:
                raise ValidationError(f"dimension '{self._names[j]}': unknown class {lab!r}")
            out.append(cls.index(lab))
        return tuple(out)

    def signature(self):
        """Names and class labels; two spaces with equal signatures are interchangeable."""
        return tuple((n, tuple(map(str, s.classes))) for n, s in self.dimensions)

    def validate_tuple(self, tup):
        tup = tuple(int(c) for c in tup)
        if len(tup) != self.q:
            raise ValidationError(f"tuple arity {len(tup)} != q={self.q}")
        for j, (c, w) in enumerate(zip(tup, self.cardinalities)):
            if not 0 <= c < w:
                raise ValidationError(f"class index {c} out of range for dimension {j}")
        return tup

    def to_list(self):
        return [{"name": n, **s.to_dict()} for n, s in self.dimensions]

    @classmethod
    def from_list(cls, items):
        if not isinstance(items, list):
            raise ValidationError("partition file must hold a top-level list")
        dims = []
        for i, item in enumerate(items):
            if "name" not in item:
                raise ValidationError(f"[{i}].name: missing")
            try:
                dims.append((item["name"], scheme_from_dict(item)))
            except ValidationError as exc:
                raise ValidationError(f"[{i}] ({item['name']}): {exc}") from None
        return cls(tuple(dims))


def abstract_output(space, concrete):
    if len(concrete) != space.q:
        raise ValidationError(f"concrete output arity {len(concrete)} != q={space.q}")
    out = []
    for j, ((_, scheme), value) in enumerate(zip(space.dimensions, concrete)):
        try:
            out.append(scheme.classify(value))
        except ClassificationError as exc:
            raise ClassificationError(str(exc), dimension=j) from None
    return tuple(out)


def project(tup, subset):
    """Sub-tuple at the sorted index set ``subset``.

    Works on full tuples and on SubTuples (nested projection), in which case
    ``subset`` must be contained in the SubTuple's own index set.
    """
    subset = tuple(sorted(subset))
    if not subset:
        raise ValidationError("projection needs a non-empty index set")
    if isinstance(tup, SubTuple):
        pos = {d: i for i, d in enumerate(tup.dims)}
        missing = [j for j in subset if j not in pos]
        if missing:
            raise ValidationError(f"indices {missing} not in the tuple's index set {list(tup.dims)}")
        return SubTuple(subset, tuple(tup.classes[pos[j]] for j in subset))
    if subset[0] < 0 or subset[-1] >= len(tup):
        raise ValidationError(f"projection indices {list(subset)} out of range for width {len(tup)}")
    return SubTuple(subset, tuple(tup[j] for j in subset))


def all_subsets(q, s):
    return list(combinations(range(q), s))


def output_space_cardinality(space):
    return math.prod(space.cardinalities)


# ---------------------------------------------------------------------------
# k-means cluster partitions


class KMeansPartitioner(ClusterMixin, BaseEstimator):
    """Lloyd's k-means producing a :class:`ClusterPartition`.

    Seeding picks one sample at random, then repeatedly the sample farthest
    from all chosen centroids. Fitted centroids are sorted lexicographically
    so the labels ``cluster_0 .. cluster_{k-1}`` do not depend on seeding order.
    """

    def __init__(self, n_clusters=5, seed=0, max_iter=100, tol=1e-9):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        k = self.n_clusters
        if k < 2:
            raise ValidationError("n_clusters must be >= 2")
        n_distinct = len(np.unique(X, axis=0))
        if X.shape[0] < k or n_distinct < k:
            raise ValidationError(f"need at least {k} distinct samples, got {n_distinct} distinct of {X.shape[0]}")
        rng = np.random.default_rng(self.seed)
        C = [X[rng.integers(X.shape[0])]]
        d2 = ((X - C[0]) ** 2).sum(axis=1)
        for _ in range(1, k):
            C.append(X[int(np.argmax(d2))])
            d2 = np.minimum(d2, ((X - C[-1]) ** 2).sum(axis=1))
        C = np.array(C)

        prev = np.inf
        for it in range(self.max_iter):
            dist = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
            assign = dist.argmin(axis=1)
            inertia = float(dist[np.arange(X.shape[0]), assign].sum())
            for c in range(k):
                members = X[assign == c]
                if len(members):
                    C[c] = members.mean(axis=0)
            if abs(prev - inertia) <= self.tol:
                break
            prev = inertia
        self.n_iter_ = it + 1

        order = np.lexsort(C.T[::-1])
        self.cluster_centers_ = C[order]
        self.inertia_ = float(((X[:, None, :] - self.cluster_centers_[None]) ** 2).sum(axis=2).min(axis=1).sum())
        self.labels_ = self.predict(X)
        self.partition_ = ClusterPartition(
            tuple(map(tuple, self.cluster_centers_)), tuple(f"cluster_{i}" for i in range(k))
        )
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=float)
        return ((X[:, None, :] - self.cluster_centers_[None]) ** 2).sum(axis=2).argmin(axis=1)


def fit_cluster_partition(samples, k, seed=0):
    return KMeansPartitioner(n_clusters=k, seed=seed).fit(samples).partition_


# ---------------------------------------------------------------------------
# partition files


def load_partitions(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return OutputSpace.from_list(data)


def dump_partitions(space, path):
    Path(path).write_text(json.dumps(space.to_list(), indent=2) + "\n")
