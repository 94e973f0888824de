import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revnwise.domain import (
    CategoricalInput,
    CategoricalPartition,
    ClusterPartition,
    Continuous,
    DominancePartition,
    InputDomain,
    IntervalPartition,
    KMeansPartitioner,
    OutputSpace,
    SubTuple,
    abstract_output,
    classify,
    dump_partitions,
    fit_cluster_partition,
    load_partitions,
    output_space_cardinality,
    project,
)
from revnwise.errors import ClassificationError, ValidationError

from conftest import uniform_space

CONFIDENCE = IntervalPartition((0.0, 0.3, 0.8, 1.0), ("low", "med", "high"))
QUBIT = DominancePartition(("|0>-dom", "|1>-dom"), 0.7, "superposition")


# -- classify -----------------------------------------------------------------

def test_interval_lower_cell():
    assert CONFIDENCE.classes[classify(CONFIDENCE, 0.25)] == "low"


def test_interval_boundary_goes_up():
    assert CONFIDENCE.classes[classify(CONFIDENCE, 0.3)] == "med"


def test_interval_last_cell_closed():
    assert CONFIDENCE.classes[classify(CONFIDENCE, 1.0)] == "high"
    assert CONFIDENCE.classes[classify(CONFIDENCE, 0.0)] == "low"


def test_interval_out_of_range():
    with pytest.raises(ClassificationError):
        classify(CONFIDENCE, 1.01)
    with pytest.raises(ClassificationError):
        classify(CONFIDENCE, "high")


def test_dominance_examples():
    assert QUBIT.classes[classify(QUBIT, (0.8, 0.2))] == "|0>-dom"
    assert QUBIT.classes[classify(QUBIT, (0.5, 0.5))] == "superposition"
    assert QUBIT.classes[classify(QUBIT, (0.7, 0.3))] == "superposition"  # strictly above


def test_dominance_rejects_non_distribution():
    with pytest.raises(ValidationError):
        classify(QUBIT, (0.8, 0.3))
    with pytest.raises(ClassificationError):
        classify(QUBIT, (1.0, 0.0, 0.0))


@pytest.mark.parametrize("t", [0.5, 0.0, 1.5])
def test_dominance_threshold_range(t):
    with pytest.raises(ValidationError):
        DominancePartition(("a", "b"), t)


def test_categorical_lookup():
    p = CategoricalPartition(((-1, "under"), (0, "well"), (1, "over")))
    assert [p.classes[classify(p, v)] for v in (-1, 0, 1)] == ["under", "well", "over"]
    with pytest.raises(ClassificationError):
        classify(p, 2)


def test_duplicate_labels_rejected():
    with pytest.raises(ValidationError):
        IntervalPartition((0, 1, 2), ("a", "a"))
    with pytest.raises(ValidationError):
        DominancePartition(("mixed", "b"))


def test_interval_edges_must_increase():
    with pytest.raises(ValidationError):
        IntervalPartition((0, 1, 1), ("a", "b"))


def test_cluster_nearest_centroid_and_tie():
    p = ClusterPartition(((0.0, 0.0), (2.0, 0.0)), ("a", "b"))
    assert classify(p, (0.4, 1.0)) == 0
    assert classify(p, (1.9, -3.0)) == 1
    assert classify(p, (1.0, 0.0)) == 0  # equidistant: lower index


@given(st.floats(0.0, 1.0))
def test_interval_total_and_deterministic(v):
    k = classify(CONFIDENCE, v)
    assert 0 <= k < 3 and classify(CONFIDENCE, v) == k
    lo, hi = CONFIDENCE.edges[k], CONFIDENCE.edges[k + 1]
    assert lo <= v < hi or (k == 2 and v == hi)


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=6).filter(lambda p: sum(p) > 1e-3))
def test_dominance_total(raw):
    p = np.asarray(raw) / np.sum(raw)
    labels = tuple(f"o{i}" for i in range(len(p)))
    scheme = DominancePartition(labels, 0.7)
    k = classify(scheme, p)
    if k < len(p):
        assert p[k] > 0.7
    else:
        assert p.max() <= 0.7


# -- abstract output and projection --------------------------------------------

def test_abstract_output_pair():
    space = OutputSpace((
        ("confidence", IntervalPartition((0.0, 0.4, 0.7, 1.0), ("low", "med", "high"))),
        ("prediction", CategoricalPartition(((">$50K", ">$50K"), ("<=$50K", "<=$50K")))),
    ))
    assert space.labels_of(abstract_output(space, [0.95, ">$50K"])) == ("high", ">$50K")


def test_single_class_scheme():
    space = OutputSpace((("only", IntervalPartition((0.0, 1.0), ("all",))),))
    assert abstract_output(space, [0.37]) == (0,)


def test_abstract_output_names_failing_dimension():
    space = uniform_space((2, 3))
    with pytest.raises(ClassificationError) as info:
        abstract_output(space, [0.5, 7.0])
    assert info.value.dimension == 1
    with pytest.raises(ValidationError):
        abstract_output(space, [0.5])


def test_adult_vector_matches_per_dimension_classify(adult, reference_sut):
    x = (0.6, 0.1, 0.9, 0.2, 0.75, 0.4)
    y = reference_sut.evaluate(x)
    expected = tuple(s.classify(v) for s, v in zip(adult.schemes, y))
    assert abstract_output(adult, y) == expected


def test_project_examples():
    t = ("a", "b", "c")
    assert project(t, (0, 2)) == SubTuple((0, 2), ("a", "c"))
    assert project(t, (0, 1, 2)).classes == t
    with pytest.raises(ValidationError):
        project(t, (3,))
    with pytest.raises(ValidationError):
        project(t, ())


@given(
    st.lists(st.integers(0, 4), min_size=1, max_size=7).flatmap(
        lambda tup: st.tuples(
            st.just(tuple(tup)),
            st.sets(st.integers(0, len(tup) - 1), min_size=1),
        )
    ),
    st.data(),
)
def test_nested_projection(args, data):
    tup, S = args
    S2 = data.draw(st.sets(st.sampled_from(sorted(S)), min_size=1))
    assert project(project(tup, S), S2) == project(tup, S2)


@given(st.lists(st.floats(0.0, 1.0), min_size=6, max_size=6), st.sets(st.integers(0, 4), min_size=1))
def test_projection_coherence(x, S):
    from revnwise.sut import SyntheticTabularSUT

    sut = SyntheticTabularSUT()
    y = sut.evaluate(x)
    full = abstract_output(sut.space, y)
    only = tuple(sut.space.schemes[j].classify(y[j]) for j in sorted(S))
    assert project(full, S).classes == only


# -- cardinality ---------------------------------------------------------------

@pytest.mark.parametrize("cards,count", [((2, 3, 3, 3, 3), 162), ((3,), 3), ((3, 3), 9)])
def test_cardinality(cards, count):
    assert output_space_cardinality(uniform_space(cards)) == count


def test_adult_space_cardinality(adult):
    assert adult.cardinalities == (2, 3, 3, 3, 3)
    assert output_space_cardinality(adult) == 162


# -- k-means -------------------------------------------------------------------

FOUR = [(0, 0), (0, 0.1), (10, 10), (10, 10.1)]


def _best_two_clustering(points):
    """Brute force: every split into two nonempty groups, minimal inertia."""
    P = np.asarray(points, float)
    best = None
    for mask in itertools.product((0, 1), repeat=len(P)):
        m = np.array(mask, bool)
        if m.all() or not m.any():
            continue
        cents = [P[m].mean(axis=0), P[~m].mean(axis=0)]
        inertia = ((P[m] - cents[0]) ** 2).sum() + ((P[~m] - cents[1]) ** 2).sum()
        if best is None or inertia < best[0]:
            best = (inertia, sorted(map(tuple, cents)))
    return best


def test_kmeans_matches_bruteforce():
    part = fit_cluster_partition(FOUR, 2, seed=0)
    _, cents = _best_two_clustering(FOUR)
    np.testing.assert_allclose(part.centroids, cents, atol=1e-12)
    assert part.labels == ("cluster_0", "cluster_1")


def test_kmeans_all_distinct_points():
    pts = [(3, 1), (0, 2), (1, 1)]
    part = fit_cluster_partition(pts, 3, seed=5)
    assert part.centroids == ((0.0, 2.0), (1.0, 1.0), (3.0, 1.0))


def test_kmeans_training_samples_land_in_own_cluster():
    rng = np.random.default_rng(1)
    X = np.concatenate([rng.normal(c, 0.2, size=(30, 2)) for c in ((0, 0), (5, 0), (0, 5))])
    est = KMeansPartitioner(n_clusters=3, seed=2).fit(X)
    part = est.partition_
    for x, lab in zip(X, est.labels_):
        d = ((np.asarray(part.centroids) - x) ** 2).sum(axis=1)
        assert classify(part, x) == lab == int(np.argmin(d))


def test_kmeans_reproducible_bit_for_bit():
    X = np.random.default_rng(3).random((200, 3))
    a = fit_cluster_partition(X, 5, seed=11)
    b = fit_cluster_partition(X, 5, seed=11)
    assert a.centroids == b.centroids


def test_kmeans_degenerate_samples():
    with pytest.raises(ValidationError, match="distinct"):
        fit_cluster_partition([(1, 1)] * 5 + [(2, 2)], 3)
    with pytest.raises(ValidationError):
        fit_cluster_partition(FOUR, 1)


def test_kmeans_estimator_api():
    from sklearn.base import clone

    est = KMeansPartitioner(n_clusters=2, seed=4)
    assert clone(est).get_params() == est.get_params()
    est.fit(FOUR)
    assert list(est.predict([(0, 0.2), (9, 9)])) == [0, 1]


# -- input domain --------------------------------------------------------------

def test_input_domain_invariants():
    with pytest.raises(ValidationError):
        Continuous(1.0, 1.0)
    with pytest.raises(ValidationError):
        Continuous(0.0, math.inf)
    with pytest.raises(ValidationError):
        CategoricalInput(())
    with pytest.raises(ValidationError):
        CategoricalInput(("a", "a"))


def test_input_validation_and_encoding():
    dom = InputDomain((Continuous(0, 2, "a"), CategoricalInput(("r", "g", "b"), "c")))
    assert dom.contains((1.0, "g"))
    assert not dom.contains((3.0, "g"))
    assert not dom.contains((1.0, "y"))
    assert not dom.contains((1.0,))
    assert dom.decode(dom.encode((1.5, "b"))) == (1.5, "b")
    assert dom.violation([2.5, 1.0]) == pytest.approx(0.25)
    assert dom.violation([-1.0, 1.0]) == pytest.approx(1.0)


# -- partition files -----------------------------------------------------------

def test_partition_file_round_trip(tmp_path):
    space = OutputSpace((
        ("conf", CONFIDENCE),
        ("cal", CategoricalPartition(((-1, "under"), (0, "well"), (1, "over")))),
        ("meas", QUBIT),
        ("emb", ClusterPartition(((0.0, 1.0), (2.5, -1.0)), ("cluster_0", "cluster_1"))),
    ))
    path = tmp_path / "p.json"
    dump_partitions(space, path)
    again = load_partitions(path)
    assert again == space
    assert json.loads(path.read_text()) == space.to_list()


def test_partition_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"name": "a", "kind": "wavelet"}]))
    with pytest.raises(ValidationError, match="kind"):
        load_partitions(bad)
    bad.write_text(json.dumps([{"name": "a", "kind": "interval", "edges": [0, 1]}]))
    with pytest.raises(ValidationError, match="labels"):
        load_partitions(bad)
    bad.write_text("{")
    with pytest.raises(ValidationError, match="invalid JSON"):
        load_partitions(bad)
