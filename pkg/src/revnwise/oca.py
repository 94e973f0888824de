"""Output covering arrays: feasibility, greedy generation, verification, bounds.

Rows are full abstract tuples (one class index per output dimension). A
strength-``s`` array covers every feasible ``s``-tuple over every choice of
``s`` dimensions in at least one row.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np
from sklearn.base import BaseEstimator

from .domain import CategoricalPartition, OutputSpace, SubTuple, all_subsets, project
from .errors import EnumerationGuardError, InfeasibleTupleError, ValidationError

__all__ = [
    "FeasibilityModel",
    "FeasibleSet",
    "OutputCoveringArray",
    "CoveringArrayGenerator",
    "VerificationReport",
    "enumerate_feasible_tuples",
    "generate_oca",
    "verify_oca",
    "size_lower_bound",
    "preimage_count",
    "read_oca",
]

TUPLE_GUARD = 10**7
EXHAUSTIVE_LIMIT = 10**6
GRID_GUARD = 10**6
_DENSE_MEMO_LIMIT = 1 << 22


class FeasibilityModel:
    """Forbidden sub-tuples plus an optional predicate over full rows.

    A full row is feasible when it contains none of the forbidden sub-tuples
    and the predicate (if any) accepts it.
    """

    def __init__(self, forbidden: Iterable = (), predicate: Optional[Callable] = None):
        clauses = []
        for item in forbidden:
            dims, classes = (item.dims, item.classes) if isinstance(item, SubTuple) else item
            order = np.argsort(dims)
            dims = tuple(int(dims[i]) for i in order)
            classes = tuple(int(classes[i]) for i in order)
            if len(set(dims)) != len(dims) or not dims:
                raise ValidationError(f"forbidden tuple has bad dimension set {dims}")
            clauses.append(SubTuple(dims, classes))
        self.forbidden = tuple(dict.fromkeys(clauses))
        self.predicate = predicate
        self._extendable = {}
        self._by_dim = {}
        for c in self.forbidden:
            for d in c.dims:
                self._by_dim.setdefault(d, []).append(c)

    @classmethod
    def from_labels(cls, space, clauses, predicate=None):
        """Build from ``[{dim_name: class_label, ...}, ...]``."""
        out = []
        for i, clause in enumerate(clauses):
            if not clause:
                raise ValidationError(f"forbidden[{i}]: empty clause")
            dims, classes = [], []
            for name, label in clause.items():
                j = space.index(name)
                if label not in space.classes(j):
                    raise ValidationError(f"forbidden[{i}].{name}: unknown class {label!r}")
                dims.append(j)
                classes.append(space.classes(j).index(label))
            out.append((dims, classes))
        return cls(out, predicate)

    @classmethod
    def load(cls, path, space):
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict) or "forbidden" not in data:
            raise ValidationError(f"{path}: expected an object with a 'forbidden' list")
        return cls.from_labels(space, data["forbidden"])

    def to_json(self, space):
        return {"forbidden": [space.labels_of(c) for c in self.forbidden]}

    def __len__(self):
        return len(self.forbidden)

    @property
    def constrained_dims(self):
        return sorted(self._by_dim)

    @property
    def trivial(self):
        return not self.forbidden and self.predicate is None

    def _hits(self, clause, partial):
        return all(partial[d] == c for d, c in zip(clause.dims, clause.classes))

    def consistent(self, partial, touched=None):
        """No forbidden clause is fully assigned in ``partial`` (-1 = unassigned)."""
        clauses = self.forbidden if touched is None else self._by_dim.get(touched, ())
        return not any(self._hits(c, partial) for c in clauses)

    def clauses_ok(self, row):
        return self.consistent(row)

    def row_ok(self, row):
        if not self.consistent(row):
            return False
        return self.predicate is None or bool(self.predicate(tuple(int(c) for c in row)))

    def extend(self, partial, cardinalities):
        """Complete ``partial`` to a clause-consistent row, or return None.

        Only dimensions that occur in some clause need search; the rest are
        filled with class 0. The predicate is not consulted.
        """
        partial = np.array(partial, dtype=int)
        if not self.consistent(partial):
            return None
        todo = [d for d in self.constrained_dims if partial[d] < 0]
        if not self._dfs(partial, todo, 0, cardinalities):
            return None
        partial[partial < 0] = 0
        return partial

    def extendable(self, partials, cardinalities):
        """Per row of ``partials``, whether :meth:`extend` would succeed.

        Memoized on the assignment of the constrained dimensions, the only
        ones that can matter.
        """
        P = np.atleast_2d(np.asarray(partials, dtype=int))
        C = self.constrained_dims
        if not C:
            return np.ones(len(P), dtype=bool)
        sizes = [cardinalities[d] + 1 for d in C]
        radix = np.cumprod([1] + sizes[:-1])
        keys = ((P[:, C] + 1) * radix).sum(axis=1)
        cache_key = tuple(cardinalities)
        if math.prod(sizes) > _DENSE_MEMO_LIMIT:
            memo = self._extendable.setdefault(cache_key, {})
            out = np.empty(len(P), dtype=bool)
            for i, k in enumerate(keys.tolist()):
                hit = memo.get(k)
                if hit is None:
                    hit = memo[k] = self.extend(P[i], cardinalities) is not None
                out[i] = hit
            return out
        # dense memo: -1 unknown, 0 no, 1 yes
        table = self._extendable.get(cache_key)
        if table is None:
            table = self._extendable[cache_key] = np.full(math.prod(sizes), -1, dtype=np.int8)
        out = table[keys]
        for i in np.flatnonzero(out < 0):
            out[i] = table[keys[i]] = self.extend(P[i], cardinalities) is not None
        return out.astype(bool)

    def _dfs(self, partial, todo, i, cards):
        if i == len(todo):
            return True
        d = todo[i]
        for v in range(cards[d]):
            partial[d] = v
            if self.consistent(partial, touched=d) and self._dfs(partial, todo, i + 1, cards):
                return True
        partial[d] = -1
        return False


@dataclass
class FeasibleSet:
    """Per-subset feasible s-tuples and unconfirmed leftovers.

    ``witnesses`` maps ``(subset, tuple)`` to a feasible full row projecting
    onto it; it is only filled when the model has a predicate.
    """

    strength: int
    subsets: list
    confirmed: dict
    unconfirmed: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    exhaustive: bool = True

    def __getitem__(self, S):
        return self.confirmed[tuple(S)]

    def __iter__(self):
        return iter(self.subsets)

    def items(self):
        return ((S, self.confirmed[S]) for S in self.subsets)

    def count(self):
        return sum(len(v) for v in self.confirmed.values())

    def tuples(self):
        for S in self.subsets:
            for z in sorted(self.confirmed[S]):
                yield SubTuple(S, z)

    def unconfirmed_tuples(self):
        for S in self.subsets:
            for z in sorted(self.unconfirmed.get(S, ())):
                yield SubTuple(S, z)


def _guard(space, s):
    if not 1 <= s <= space.q:
        raise ValidationError(f"strength must satisfy 1 <= s <= q={space.q}, got {s}")
    cards = space.cardinalities
    total = sum(math.prod(cards[j] for j in S) for S in itertools.combinations(range(space.q), s))
    if total > TUPLE_GUARD:
        raise EnumerationGuardError(
            f"{total} candidate {s}-tuples exceed the enumeration guard of {TUPLE_GUARD}; "
            "tighten constraints, merge classes or lower the strength"
        )
    return total


def enumerate_feasible_tuples(space, s, feas=None, sample_budget=20000, seed=0):
    """Feasible s-tuples for every subset of ``s`` output dimensions.

    A tuple is feasible when some feasible full row projects onto it. With
    forbidden clauses only this is decided exactly by backtracking. With a
    predicate the full row space is scanned when it has at most 10^6 rows;
    beyond that, random completions are tried and tuples without a witness
    are reported as unconfirmed.
    """
    _guard(space, s)
    feas = FeasibilityModel() if feas is None else feas
    cards = space.cardinalities
    subsets = all_subsets(space.q, s)
    confirmed = {S: set() for S in subsets}
    unconfirmed = {S: set() for S in subsets}
    witnesses = {}

    if feas.trivial:
        for S in subsets:
            confirmed[S] = set(itertools.product(*(range(cards[j]) for j in S)))
        return FeasibleSet(s, subsets, confirmed)

    index = _TupleIndex(cards, subsets)
    seen = np.zeros(index.size, dtype=bool)

    def add_witness(row):
        flat = index.rows_index(row)[0]
        fresh = flat[~seen[flat]]
        seen[fresh] = True
        if feas.predicate is not None and len(fresh):
            row = tuple(int(c) for c in row)
            for u in fresh:
                witnesses[index.decode(int(u))] = row

    def collect(exhaustive):
        for k, S in enumerate(subsets):
            lo = int(index.offsets[k])
            block = seen[lo : lo + index.sizes[k]].reshape([cards[j] for j in S])
            confirmed[S] = set(map(tuple, np.argwhere(block).tolist()))
        return FeasibleSet(s, subsets, confirmed, unconfirmed, witnesses, exhaustive)

    total_rows = math.prod(cards)
    if feas.predicate is not None and total_rows <= EXHAUSTIVE_LIMIT:
        for row in itertools.product(*(range(w) for w in cards)):
            if feas.row_ok(row):
                add_witness(row)
        return collect(True)

    rng = np.random.default_rng(seed)
    if feas.predicate is not None:
        for row in rng.integers(0, cards, size=(sample_budget, space.q)):
            if feas.row_ok(row):
                add_witness(row)

    tries = max(1, sample_budget // 1000)
    for k, S in enumerate(subsets):
        lo = int(index.offsets[k])
        for off, z in enumerate(itertools.product(*(range(cards[j]) for j in S))):
            if seen[lo + off]:
                continue
            partial = np.full(space.q, -1)
            partial[list(S)] = z
            if not feas.consistent(partial):
                continue
            row = feas.extend(partial, cards)
            if row is None:
                continue
            if feas.predicate is None:
                add_witness(row)
                continue
            free = partial < 0
            found = False
            for _ in range(tries):
                trial = partial.copy()
                trial[free] = rng.integers(0, np.asarray(cards)[free])
                if feas.row_ok(trial):
                    add_witness(trial)
                    found = True
                    break
            if not found:
                if feas.row_ok(row):
                    add_witness(row)
                else:
                    unconfirmed[S].add(z)
    return collect(feas.predicate is None)


# ---------------------------------------------------------------------------
# the array


@dataclass(eq=False)
class OutputCoveringArray:
    rows: np.ndarray
    strength: int
    space: OutputSpace
    generator: str = "greedy"
    seed: Optional[int] = None
    n_candidates: Optional[int] = None
    feasible: Optional[FeasibleSet] = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=int).reshape(-1, self.space.q)

    @property
    def M(self):
        return int(self.rows.shape[0])

    def __len__(self):
        return self.M

    def row_tuples(self):
        return [tuple(int(c) for c in r) for r in self.rows]

    def metadata(self):
        return {
            "strength": self.strength,
            "seed": self.seed,
            "generator": self.generator,
            "M": self.M,
            "classes": {n: list(map(str, s.classes)) for n, s in self.space.dimensions},
        }

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.space.names)
            for r in self.rows:
                w.writerow([str(lab) for lab in self.space.labels_of(r)])
        sidecar = _sidecar(path)
        sidecar.write_text(json.dumps(self.metadata(), indent=2) + "\n")
        return path, sidecar


def _sidecar(path):
    path = Path(path)
    stem = path.name[:-4] if path.name.endswith(".csv") else path.name
    return path.with_name(stem + ".meta.json")


def read_oca(path, space=None):
    """Load an array written by :meth:`OutputCoveringArray.to_csv`.

    Without ``space`` the class lists come from the sidecar and each
    dimension gets an identity categorical partition.
    """
    path = Path(path)
    meta = json.loads(_sidecar(path).read_text())
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        body = [row for row in reader if row]
    if header is None:
        raise ValidationError(f"{path}: empty file")
    if space is None:
        classes = meta.get("classes")
        if classes is None:
            raise ValidationError(f"{path}: sidecar lacks 'classes' and no partition file was given")
        space = OutputSpace(
            tuple((n, CategoricalPartition(tuple((c, c) for c in classes[n]))) for n in header)
        )
    if tuple(header) != space.names:
        raise ValidationError(f"{path}: header {header} does not match dimensions {list(space.names)}")
    labels = [tuple(map(str, space.classes(j))) for j in range(space.q)]
    rows = []
    for i, row in enumerate(body):
        if len(row) != space.q:
            raise ValidationError(f"{path}: row {i + 1} has {len(row)} cells, expected {space.q}")
        try:
            rows.append([labels[j].index(cell) for j, cell in enumerate(row)])
        except ValueError:
            raise ValidationError(f"{path}: row {i + 1} holds an unknown class label") from None
    if int(meta.get("M", len(rows))) != len(rows):
        raise ValidationError(f"{path}: sidecar M={meta['M']} but file has {len(rows)} rows")
    return OutputCoveringArray(
        np.array(rows, dtype=int).reshape(-1, space.q),
        int(meta["strength"]),
        space,
        meta.get("generator", "unknown"),
        meta.get("seed"),
    )


# ---------------------------------------------------------------------------
# generation


class _TupleIndex:
    """Flat indexing of every s-tuple over every subset."""

    def __init__(self, cards, subsets):
        self.cards = np.asarray(cards)
        self.subsets = subsets
        self.S = np.array(subsets, dtype=int)
        s = self.S.shape[1]
        w = self.cards[self.S]
        strides = np.ones_like(w)
        for i in range(s - 2, -1, -1):
            strides[:, i] = strides[:, i + 1] * w[:, i + 1]
        self.strides = strides
        sizes = w.prod(axis=1)
        self.sizes = sizes
        self.offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        self.size = int(sizes.sum())
        # per dimension d: the subsets containing d (the same count K for every d),
        # their offsets, the other members with their strides, and d's stride
        q = len(cards)
        offs, oth, ostr, dstr = [], [], [], []
        for d in range(q):
            ks = np.nonzero((self.S == d).any(axis=1))[0]
            pos = (self.S[ks] == d).argmax(axis=1)
            keep = np.ones((len(ks), s), bool)
            keep[np.arange(len(ks)), pos] = False
            offs.append(self.offsets[ks])
            oth.append(self.S[ks][keep].reshape(len(ks), s - 1))
            ostr.append(self.strides[ks][keep].reshape(len(ks), s - 1))
            dstr.append(self.strides[ks, pos])
        self.d_offsets, self.d_others = np.array(offs), np.array(oth)
        self.d_other_strides, self.d_strides = np.array(ostr), np.array(dstr)
        self.w_max = int(self.cards.max())

    def flat(self, S, z):
        k = self.subsets.index(tuple(S))
        return int(self.offsets[k] + np.dot(z, self.strides[k]))

    def decode(self, u):
        k = int(np.searchsorted(self.offsets, u, side="right") - 1)
        rem = u - self.offsets[k]
        z = []
        for st in self.strides[k]:
            c, rem = divmod(int(rem), int(st))
            z.append(c)
        return self.subsets[k], tuple(z)

    def decode_many(self, us):
        """Vectorized :meth:`decode`: (list of subsets, list of class tuples)."""
        us = np.asarray(us)
        k = np.searchsorted(self.offsets, us, side="right") - 1
        rem = us - self.offsets[k]
        Z = (rem[:, None] // self.strides[k]) % self.cards[self.S[k]]
        return [self.subsets[i] for i in k], [tuple(z) for z in Z.tolist()]

    def rows_index(self, R):
        R = np.atleast_2d(R)
        return self.offsets + (R[:, self.S] * self.strides).sum(axis=-1)

    def gains(self, dims, partials, uncovered):
        """New coverage for every class of ``dims[b]`` in partial row ``b`` (-1 = unassigned).

        Shape ``(B, w_max)``; classes beyond a dimension's cardinality get -1.
        """
        B = len(dims)
        vals = partials[np.arange(B)[:, None, None], self.d_others[dims]]  # (B, K, s-1)
        ok = (vals >= 0).all(axis=2)
        base = self.d_offsets[dims] + (np.maximum(vals, 0) * self.d_other_strides[dims]).sum(axis=2)
        classes = np.arange(self.w_max)
        idx = base[:, :, None] + self.d_strides[dims][:, :, None] * classes
        g = (uncovered[np.minimum(idx, self.size - 1)] & ok[:, :, None]).sum(axis=1)
        g[classes[None, :] >= self.cards[dims][:, None]] = -1
        return g


class CoveringArrayGenerator(BaseEstimator):
    """Greedy one-row-at-a-time covering array construction.

    Each new row is the best of ``n_candidates`` randomized completions. A
    candidate starts from a random still-uncovered tuple, drawn from one of
    the subsets with the most uncovered tuples, and fills the
    remaining dimensions in random order, each with the class that covers
    the most new tuples together with the classes already placed. The
    winner maximizes newly covered tuples; ties go to the lexicographically
    smallest row.

    After ``fit``, ``array_`` holds the :class:`OutputCoveringArray` and
    ``rows_`` its matrix.
    """

    def __init__(self, strength=2, n_candidates=50, seed=0):
        self.strength = strength
        self.n_candidates = n_candidates
        self.seed = seed

    def fit(self, space, feasibility=None, feasible=None):
        if self.n_candidates < 1:
            raise ValidationError("n_candidates must be >= 1")
        feas = FeasibilityModel() if feasibility is None else feasibility
        s = self.strength
        if feasible is None:
            feasible = enumerate_feasible_tuples(space, s, feas, seed=self.seed)
        cards = space.cardinalities
        index = _TupleIndex(cards, feasible.subsets)
        uncovered = np.zeros(index.size, dtype=bool)
        for S, zs in feasible.items():
            for z in zs:
                uncovered[index.flat(S, z)] = True

        rng = np.random.default_rng(self.seed)
        constrained = set(feas.constrained_dims)
        q = space.q
        rows = []
        contradictions = []
        while uncovered.any():
            # seed candidates from the subsets with the most uncovered tuples
            counts = np.add.reduceat(uncovered, index.offsets)
            busiest = np.flatnonzero(counts == counts.max())
            us, open_ = [], {}
            for k in busiest[rng.integers(len(busiest), size=self.n_candidates)]:
                if k not in open_:
                    lo = int(index.offsets[k])
                    open_[k] = np.flatnonzero(uncovered[lo : lo + index.sizes[k]]) + lo
                us.append(int(open_[k][rng.integers(len(open_[k]))]))
            starts = list(zip(us, *index.decode_many(us)))
            cands = []
            completions = self._complete(starts, index, uncovered, feas, constrained, cards, rng, q)
            for (u, S, z), row in zip(starts, completions):
                if row is not None and feas.predicate is not None and not feas.row_ok(row):
                    row = feasible.witnesses.get((S, z))
                    row = None if row is None else np.array(row)
                if row is None:
                    contradictions.append(SubTuple(S, z))
                    uncovered[u] = False
                    cands = []
                    break
                cands.append(row)
            if not cands:
                continue
            C = np.array(cands)
            scores = uncovered[index.rows_index(C)].sum(axis=1)
            best = np.lexsort((*C.T[::-1], -scores))[0]
            rows.append(C[best])
            uncovered[index.rows_index(C[best])[0]] = False
        if contradictions:
            raise InfeasibleTupleError(sorted(set(contradictions)))

        self.rows_ = np.array(rows, dtype=int).reshape(-1, q)
        self.array_ = OutputCoveringArray(
            self.rows_, s, space, "greedy", self.seed, self.n_candidates, feasible
        )
        return self

    @staticmethod
    def _complete(starts, index, uncovered, feas, constrained, cards, rng, q):
        """Greedy completions of every start tuple, batched over candidates.

        ``starts`` holds ``(flat index, subset, tuple)`` triples. Each
        candidate fills its free dimensions in its own random order; one
        gain computation per step serves all candidates. Returns one row (or None when the start tuple has
        no clause-consistent completion) per start.
        """
        B = len(starts)
        P = np.full((B, q), -1)
        for b, (_, S, z) in enumerate(starts):
            P[b, list(S)] = z
        alive = feas.extendable(P, cards) if constrained else np.ones(B, dtype=bool)
        keys = rng.random((B, q))
        keys[P >= 0] = np.inf
        order = np.argsort(keys, axis=1)
        n_free = (P < 0).sum(axis=1)
        for step in range(int(n_free.max(initial=0))):
            rows = np.flatnonzero(alive & (step < n_free))
            dims = order[rows, step]
            g = index.gains(dims, P[rows], uncovered)
            # integer gains, ties broken by a uniform key in [0, 1)
            ranked = np.argsort(rng.random(g.shape) - g, axis=1)
            P[rows, dims] = ranked[:, 0]
            hit = np.isin(dims, list(constrained))
            if not hit.any():
                continue
            # first class in preference order that keeps the row completable
            rows, dims, ranked = rows[hit], dims[hit], ranked[hit]
            R, w = ranked.shape
            trial = np.repeat(P[rows], w, axis=0)
            trial[np.arange(R * w), np.repeat(dims, w)] = ranked.reshape(-1)
            valid = ranked < np.asarray(cards)[dims][:, None]
            ok = np.zeros((R, w), dtype=bool)
            ok[valid] = feas.extendable(trial[valid.reshape(-1)], cards)
            first = ok.argmax(axis=1)
            P[rows, dims] = ranked[np.arange(R), first]
            alive[rows[~ok.any(axis=1)]] = False

        return [P[b] if alive[b] else None for b in range(B)]


def generate_oca(space, s=2, feas=None, seed=0, n_candidates=50, feasible=None):
    gen = CoveringArrayGenerator(strength=s, n_candidates=n_candidates, seed=seed)
    return gen.fit(space, feas, feasible).array_


# ---------------------------------------------------------------------------
# verification and bounds


@dataclass
class VerificationReport:
    uncovered: list
    infeasible_rows: list
    unconfirmed: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.uncovered and not self.infeasible_rows

    def to_json(self, space):
        return {
            "ok": self.ok,
            "uncovered": [space.labels_of(t) for t in self.uncovered],
            "infeasible_rows": list(self.infeasible_rows),
            "unconfirmed": [space.labels_of(t) for t in self.unconfirmed],
        }


def verify_oca(oca, feas=None, feasible=None):
    """Exhaustively check every feasible s-tuple against every row."""
    feas = FeasibilityModel() if feas is None else feas
    if feasible is None:
        feasible = enumerate_feasible_tuples(oca.space, oca.strength, feas)
    rows = oca.row_tuples()
    infeasible = [i for i, r in enumerate(rows) if not feas.row_ok(r)]
    uncovered = []
    for S, zs in feasible.items():
        seen = {project(r, S).classes for r in rows}
        uncovered.extend(SubTuple(S, z) for z in sorted(zs - seen))
    return VerificationReport(uncovered, infeasible, list(feasible.unconfirmed_tuples()))


def size_lower_bound(space, s, feas=None, preimage_counts=None, feasible=None):
    """Lower bound on the row count of any strength-``s`` array.

    Without preimage counts this is the largest per-subset feasible tuple
    count (each row covers one tuple per subset). With ``preimage_counts``
    (mapping ``SubTuple`` -> count, default 1) each subset's demand is
    divided by its largest preimage count and rounded up.
    """
    if feasible is None:
        feasible = enumerate_feasible_tuples(space, s, feas)
    best = 0
    for S, zs in feasible.items():
        if not zs:
            continue
        if preimage_counts is None:
            need = len(zs)
        else:
            lam = max(preimage_counts.get(SubTuple(S, z), 1) for z in zs)
            need = math.ceil(len(zs) / lam)
        best = max(best, need)
    return best


def preimage_count(sut, space, subset, z, grid):
    """Number of grid inputs whose abstract output projects to ``z`` on ``subset``."""
    from .sut.base import abstract_eval

    grid = list(grid)
    if len(grid) > GRID_GUARD:
        raise EnumerationGuardError(f"grid of {len(grid)} points exceeds the guard of {GRID_GUARD}")
    S = tuple(sorted(subset))
    target = z.classes if isinstance(z, SubTuple) else tuple(z)
    return sum(project(abstract_eval(sut, space, x), S).classes == target for x in grid)
