"""End-to-end acceptance checks, one test per criterion.

Each test prints a pass/fail line in the "acceptance criteria" section of
the pytest summary.
"""
import itertools
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from revnwise.domain import IntervalPartition, InputDomain, OutputSpace
from revnwise.metrics import CoverageLedger, CoverageReport, drift, guarantee_check
from revnwise.oca import FeasibilityModel, generate_oca, read_oca, size_lower_bound, verify_oca
from revnwise.pipeline import PipelineConfig, baseline_fdr, run_pipeline
from revnwise.search import InverseTarget, OptimizerConfig, solve_metaheuristic, solve_quantum_params
from revnwise.sut import (
    Circuit,
    FunctionSUT,
    Gate,
    Noise,
    QuantumCircuitSUT,
    adult_space,
    quantum_space,
    run_circuit,
    ry_circuit,
    simulate_statevector,
)

from conftest import random_oca_case, uniform_space
from oracles import target_set

SEEDS = range(5)


@pytest.fixture(scope="module")
def random_cases():
    cases = []
    start = time.perf_counter()
    for seed in range(200):
        cards, s, forbidden = random_oca_case(np.random.default_rng(seed))
        space, feas = uniform_space(cards), FeasibilityModel(forbidden)
        oca = generate_oca(space, s, feas, seed=seed)
        cases.append((space, s, feas, oca, verify_oca(oca, feas)))
    return cases, time.perf_counter() - start


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    out = {}
    for seed in SEEDS:
        cfg = PipelineConfig(seed=seed, faults="default", out=str(tmp_path_factory.mktemp(f"seed{seed}")))
        start = time.perf_counter()
        arts = run_pipeline(cfg)
        out[seed] = (arts, time.perf_counter() - start)
    return out


def test_covering_array_validity(criterion, random_cases):
    with criterion(1, "covering arrays verify on 200 random configurations") as note:
        cases, elapsed = random_cases
        bad = [i for i, (*_, report) in enumerate(cases) if report.uncovered or report.infeasible_rows]
        note(f"{len(cases) - len(bad)}/200 valid in {elapsed:.1f}s")
        assert not bad, f"cases {bad} failed verification"
        assert elapsed < 60


def test_size_bounds(criterion, random_cases):
    with criterion(2, "array size respects lower bound and v^2 log q growth") as note:
        start = time.perf_counter()
        cases, _ = random_cases
        below = [i for i, (space, s, feas, oca, _) in enumerate(cases)
                 if oca.M < size_lower_bound(space, s, feas, feasible=oca.feasible)]
        assert not below, f"cases {below} fall below the lower bound"
        sizes = {}
        for q in (4, 8, 16, 32):
            M = generate_oca(uniform_space((3,) * q), 2, seed=0).M
            sizes[q] = M
            assert M <= 9 * (2 + math.log(math.comb(q, 2))), (q, M)
        note("M by q: " + ", ".join(f"{q}->{M}" for q, M in sizes.items()))
        assert time.perf_counter() - start < 30


@pytest.mark.parametrize(
    "label, cards",
    [("cardinalities 2,3,3,3,3", (2, 3, 3, 3, 3)), ("v=5 q=13", (5,) * 13)],
    ids=["adult-shaped", "v5-q13"],
)
def test_generation_speed(criterion, label, cards):
    with criterion(3, f"pairwise generation under 10s, {label}") as note:
        start = time.perf_counter()
        oca = generate_oca(uniform_space(cards), 2, seed=0)
        elapsed = time.perf_counter() - start
        note(f"M={oca.M} in {elapsed:.2f}s")
        assert verify_oca(oca).ok and elapsed < 10


def test_coverage_guarantee(criterion, runs):
    with criterion(4, "pipeline coverage meets the success fraction and the 0.95 target") as note:
        ocovs = []
        for seed, (arts, elapsed) in runs.items():
            assert guarantee_check(arts.alpha, arts.ledger), seed
            assert arts.ledger.ocov_fraction() >= arts.alpha
            assert len(arts.admitted) <= 200
            assert all(o.oracle_calls <= 200 for o in arts.outcomes)
            ocovs.append(arts.coverage.ocov)
        total = sum(e for _, e in runs.values())
        note("OCov " + ", ".join(f"{c:.3f}" for c in ocovs) + f", mean {np.mean(ocovs):.3f}, runs {total:.1f}s")
        assert min(ocovs) >= 0.90
        assert total < 300


def test_fault_detection(criterion, runs):
    with criterion(5, "suite detects 8/8 faults and beats a 25-test random baseline") as note:
        start = time.perf_counter()
        rows = []
        for seed, (arts, _) in runs.items():
            suite, base = arts.fault_report.detected, baseline_fdr(25, seed).detected
            rows.append(f"{suite}v{base}")
            assert arts.fault_report.total == 8
            assert suite == 8, seed
            assert base < suite, seed
        note("suite v baseline " + " ".join(rows))
        assert time.perf_counter() - start < 300


def test_inverse_mapping_matches_grid_oracle(criterion):
    with criterion(6, "search finds every grid-reachable class and never claims the unreachable one") as note:
        start = time.perf_counter()
        space = OutputSpace((("y", IntervalPartition((0.0, 0.3, 0.6, 1.0), ("low", "mid", "high"))),))
        sut = FunctionSUT(lambda x: [0.5 * x[0]], InputDomain.box([0.0], [1.0]), ("y",))
        grid = np.linspace(0.0, 1.0, 1001)
        reachable = {space.schemes[0].classify(0.5 * x) for x in grid}
        assert reachable == {0, 1}
        found = 0
        for seed in SEEDS:
            cfg = OptimizerConfig(budget=200, seed=seed)
            for z in range(3):
                out = solve_metaheuristic(sut, InverseTarget(space, (z,)), config=cfg)
                assert out.oracle_calls <= 200
                if z in reachable:
                    assert out.success and out.best_loss == 0, (seed, z)
                    found += 1
                else:
                    assert not out.success and out.best_loss >= 1, (seed, z)
        note(f"{found}/10 reachable solves, 0/5 false claims")
        assert time.perf_counter() - start < 10


def test_quantum_analytic_checks(criterion):
    with criterion(7, "quantum solver, Bell state and sampling error") as note:
        start = time.perf_counter()
        space = quantum_space(1)
        sut = QuantumCircuitSUT(ry_circuit(), shots=10_000)
        cfg = OptimizerConfig(strategy="quantum", shots=10_000)
        errs = []
        for label, theta in (("|0>-dom", 0.0), ("superposition", math.pi / 2), ("|1>-dom", math.pi)):
            out = solve_quantum_params(sut, InverseTarget.from_labels(space, (label, "high", "no_error")), cfg)
            assert out.success, label
            errs.append(abs(out.best_input[0] - theta))
        assert max(errs) <= 0.15

        bell = simulate_statevector(Circuit(2, (Gate("H", (0,)), Gate("CNOT", (0, 1)))))
        s = 1 / math.sqrt(2)
        assert np.max(np.abs(bell - [s, 0, 0, s])) <= 1e-10

        shots = 10_000
        tvs = []
        for theta in np.linspace(0, math.pi, 7):
            rec = run_circuit(ry_circuit(), [theta], Noise(), shots, 0)
            p1 = math.sin(theta / 2) ** 2
            tvs.append(0.5 * np.abs(rec.distribution - [1 - p1, p1]).sum())
        assert max(tvs) <= 3 / math.sqrt(shots)
        note(f"max theta error {max(errs):.3f} rad, max TV {max(tvs):.4f}")
        assert time.perf_counter() - start < 60


def test_metric_identities(criterion, runs):
    with criterion(8, "coverage metrics equal an independent recount from persisted artifacts") as note:
        start = time.perf_counter()
        arts, _ = runs[0]
        out = arts.config.out
        space = adult_space()
        oca = read_oca(f"{out}/oca.csv", space)
        suite = json.loads(Path(out, "suite.json").read_text())
        cov = json.loads(Path(out, "coverage.json").read_text())

        T = target_set(oca.row_tuples(), 2)
        R, gains = set(), []
        for t in suite:
            tup = space.indices_of(t["tuple"])
            new = target_set([tup], 2)
            gains.append(len((new & T) - R) / len(T))
            R |= new
        assert [t["gain"] for t in suite] == gains
        assert (cov["n_targets"], cov["n_realized"], cov["n_covered"]) == (len(T), len(R), len(T & R))
        assert cov["ocov"] == len(T & R) / len(T)
        assert cov["eta"] == len(R) / len(suite)

        report = CoverageReport.load(f"{out}/coverage.json")
        same = drift(report, report)
        assert same.delta == 0 and not same.alerts and not same.regressed
        assert all(d == 0 for d in same.per_subset.values())

        led = CoverageLedger.from_oca(oca)
        for t in suite[: len(suite) // 2]:
            led.record(space.indices_of(t["tuple"]))
        half = led.report()
        d = drift(report, half)
        R_half = set().union(*(target_set([space.indices_of(t["tuple"])], 2) for t in suite[: len(suite) // 2]))
        assert d.delta == len(T & R_half) / len(T) - len(T & R) / len(T)
        for S in itertools.combinations(range(5), 2):
            tS = {z for z in T if z[0] == S}
            assert d.per_subset[S] == len(tS & R_half) / len(tS) - len(tS & R) / len(tS)
        note(f"{len(T)} targets, {len(suite)} tests, drift to half suite {d.delta:+.3f}")
        assert time.perf_counter() - start < 10


def test_determinism_and_parallel_equivalence(criterion, tmp_path, runs):
    with criterion(9, "identical artifacts across reruns and worker counts") as note:
        start = time.perf_counter()
        ref = runs[0][0].config.out
        files = ("oca.csv", "oca.meta.json", "outcomes.json", "suite.json", "coverage.json", "faults.json")
        for workers in (1, 8):
            out = tmp_path / f"w{workers}"
            run_pipeline(PipelineConfig(seed=0, faults="default", workers=workers, out=str(out)))
            for name in files:
                assert (out / name).read_bytes() == Path(ref, name).read_bytes(), (workers, name)
        note(f"{len(files)} files byte-identical for workers 1 and 8")
        assert time.perf_counter() - start < 600
