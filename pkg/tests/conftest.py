import contextlib
import os
import time

import pytest
from hypothesis import HealthCheck, settings

from revnwise.domain import IntervalPartition, OutputSpace
from revnwise.sut import SyntheticTabularSUT, adult_space

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def uniform_space(cards):
    """Output space with interval partitions of the given cardinalities on [0, w]."""
    dims = []
    for j, w in enumerate(cards):
        dims.append((f"d{j}", IntervalPartition(tuple(range(w + 1)), tuple(f"c{k}" for k in range(w)))))
    return OutputSpace(tuple(dims))


@pytest.fixture(scope="session")
def adult():
    return adult_space()


@pytest.fixture(scope="session")
def reference_sut():
    return SyntheticTabularSUT()


def random_oca_case(rng):
    """A random (cardinalities, strength, forbidden clauses) instance.

    q <= 8, cardinalities 2..5, s in {2, 3}, up to five forbidden sub-tuples
    of one to three dimensions.
    """
    s = int(rng.choice([2, 3]))
    q = int(rng.integers(s, 9))
    cards = tuple(int(c) for c in rng.integers(2, 6, size=q))
    forbidden = []
    for _ in range(int(rng.integers(0, 6))):
        k = int(rng.integers(1, min(3, q) + 1))
        dims = tuple(sorted(int(d) for d in rng.choice(q, size=k, replace=False)))
        forbidden.append((dims, tuple(int(rng.integers(0, cards[d])) for d in dims)))
    return cards, s, forbidden


# -- acceptance report ---------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """``with criterion(n, title) as note:`` records one pass/fail line; ``note(text)`` adds detail."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    @contextlib.contextmanager
    def check(number, title):
        details = []
        start = time.perf_counter()
        try:
            yield details.append
        except BaseException as exc:
            first = str(exc).splitlines()[0] if str(exc) else ""
            lines.append((number, "FAIL", title, f"{type(exc).__name__}: {first}"))
            raise
        else:
            lines.append((number, "PASS", title, f"{'; '.join(details)}; {time.perf_counter() - start:.1f}s"))

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for number, verdict, title, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {number} {verdict}  {title}  ({detail})")
