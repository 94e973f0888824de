"""End-to-end run: covering array, inverse mapping per row, admission, coverage.

Stages, in order: ``partitions`` (output space and feasibility), ``oca``
(covering array), ``search`` (one inverse-mapping run per row, possibly in
parallel), ``admission`` (sequential, in row order), ``prioritize``,
``coverage`` (report plus the success-fraction guarantee) and ``faults``
(synthetic SUT only). A failing stage raises :class:`PipelineError` naming
the stage; everything computed before it is written to the output
directory first.

All randomness derives from the run seed through named sub-streams, so
the worker count never changes an artifact.
"""
from __future__ import annotations

import hashlib
import json
import platform
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from queue import Queue
from typing import Optional

import numpy as np

from . import __version__
from .domain import load_partitions
from .errors import GuaranteeViolation, PipelineError, ValidationError
from .faults import Detection, FaultReport, default_faults, fdr, load_faults, random_suite
from .metrics import CoverageLedger, guarantee_check, prioritize
from .oca import FeasibilityModel, generate_oca
from .search import InverseTarget, LossSpec, OptimizerConfig, solve
from .sut import QuantumCircuitSUT, SubprocessSUT, SyntheticTabularSUT, adult_space, quantum_space, ry_circuit
from .sut.quantum import Noise

SUT_KINDS = ("synthetic", "quantum", "subprocess")

# sub-stream ids under the run seed
STREAM_OCA, STREAM_ROW, STREAM_SUT, STREAM_BASELINE = 0, 1, 2, 3


def substream_seed(seed, *path):
    return int(np.random.SeedSequence([int(seed), *path]).generate_state(1, dtype=np.uint32)[0])


@dataclass
class SUTConfig:
    kind: str = "synthetic"
    command: Optional[str] = None
    timeout: float = 30.0
    shots: int = 10_000
    p_x: float = 0.0
    p_z: float = 0.0
    noise_inputs: bool = False

    def __post_init__(self):
        if self.kind not in SUT_KINDS:
            raise ValidationError(f"sut.kind: expected one of {SUT_KINDS}, got {self.kind!r}")
        if self.kind == "subprocess" and not self.command:
            raise ValidationError("sut.command: required for a subprocess SUT")
        if self.timeout <= 0:
            raise ValidationError("sut.timeout: must be > 0")


@dataclass
class PipelineConfig:
    partitions: Optional[str] = None
    strength: int = 2
    feasibility: Optional[str] = None
    sut: SUTConfig = field(default_factory=SUTConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    reg_weight: float = 1.0
    theta: float = 0.0
    seed: int = 0
    workers: int = 1
    out: str = "run"
    n_candidates: int = 50
    faults: Optional[str] = None  # "default", a fault file path, or None

    def __post_init__(self):
        if self.strength < 1:
            raise ValidationError("strength: must be >= 1")
        if self.workers < 1:
            raise ValidationError("workers: must be >= 1")
        if self.seed < 0:
            raise ValidationError("seed: must be >= 0")
        if self.n_candidates < 1:
            raise ValidationError("n_candidates: must be >= 1")
        for name in ("partitions", "feasibility"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise ValidationError(f"{name}: file not found: {p}")
        if self.faults not in (None, "default") and not Path(self.faults).is_file():
            raise ValidationError(f"faults: file not found: {self.faults}")
        if self.faults is not None and self.sut.kind != "synthetic":
            raise ValidationError("faults: fault injection needs the synthetic SUT")
        if self.optimizer.strategy == "quantum" and self.sut.kind != "quantum":
            raise ValidationError("optimizer.strategy: 'quantum' needs the quantum SUT")

    @classmethod
    def from_dict(cls, data, base_dir=None):
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"config: unknown field(s) {sorted(unknown)}")
        if isinstance(data.get("sut"), dict):
            sut = dict(data["sut"])
            bad = set(sut) - set(SUTConfig.__dataclass_fields__)
            if bad:
                raise ValidationError(f"config.sut: unknown field(s) {sorted(bad)}")
            data["sut"] = SUTConfig(**sut)
        if isinstance(data.get("optimizer"), dict):
            data["optimizer"] = OptimizerConfig.from_dict(data["optimizer"])
        if base_dir is not None:
            for name in ("partitions", "feasibility", "faults"):
                p = data.get(name)
                if p and p != "default" and not Path(p).is_absolute():
                    data[name] = str(Path(base_dir) / p)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValidationError(f"config: {exc}") from None

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: expected a JSON object")
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self):
        out = asdict(self)
        out["optimizer"] = self.optimizer.to_dict()
        return out

    def digest(self):
        """Hash of the settings that determine the artifacts (worker count and output dir excluded)."""
        d = self.to_dict()
        d.pop("workers")
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


@dataclass
class Test:
    row: int
    input: tuple
    achieved: tuple
    gain: float
    success: bool


@dataclass
class RunArtifacts:
    config: PipelineConfig
    space: object
    oca: object = None
    outcomes: list = field(default_factory=list)
    admitted: list = field(default_factory=list)
    suite: list = field(default_factory=list)
    ledger: Optional[CoverageLedger] = None
    coverage: object = None
    alpha: Optional[Fraction] = None
    guarantee: Optional[bool] = None
    fault_report: object = None
    manifest: dict = field(default_factory=dict)

    @property
    def successful_rows(self):
        return sum(o.success for o in self.outcomes)


def build_space(config):
    if config.partitions:
        return load_partitions(config.partitions)
    if config.sut.kind == "synthetic":
        return adult_space()
    if config.sut.kind == "quantum":
        return quantum_space(1)
    raise ValidationError("partitions: required for a subprocess SUT")


def build_sut(config):
    sc = config.sut
    if sc.kind == "synthetic":
        return SyntheticTabularSUT()
    if sc.kind == "quantum":
        return QuantumCircuitSUT(
            ry_circuit(),
            Noise(sc.p_x, sc.p_z),
            shots=sc.shots,
            seed=substream_seed(config.seed, STREAM_SUT),
            noise_inputs=sc.noise_inputs,
        )
    return SubprocessSUT(sc.command, timeout=sc.timeout)


class _SUTPool:
    """Hands each row solver a SUT it may use without locking."""

    def __init__(self, sut, workers):
        self.sut = sut
        self.children = []
        if sut.concurrency == "safe":
            self._queue = None
        else:
            self._queue = Queue()
            self._queue.put(sut)
            spawn = getattr(sut, "spawn", None)
            for _ in range(workers - 1 if spawn else 0):
                child = spawn()
                self.children.append(child)
                self._queue.put(child)

    def acquire(self):
        return self.sut if self._queue is None else self._queue.get()

    def release(self, sut):
        if self._queue is not None:
            self._queue.put(sut)

    def close(self):
        for c in self.children:
            c.close()


def solve_rows(config, sut, target_list):
    opt = config.optimizer
    spec = LossSpec(config.reg_weight)
    pool = _SUTPool(sut, config.workers)

    def work(i):
        target = target_list[i]
        row_cfg = OptimizerConfig.from_dict({**opt.to_dict(), "seed": substream_seed(config.seed, STREAM_ROW, i)})
        s = pool.acquire()
        try:
            return solve(s, target, row_cfg, spec)
        finally:
            pool.release(s)

    try:
        if config.workers == 1:
            return [work(i) for i in range(len(target_list))]
        with ThreadPoolExecutor(max_workers=config.workers) as ex:
            return list(ex.map(work, range(len(target_list))))
    finally:
        pool.close()


def run_pipeline(config, write=True):
    """Run every stage and (by default) persist the artifacts under ``config.out``."""
    started = time.time()

    arts = RunArtifacts(config=config, space=None)
    stage = "partitions"
    sut = None
    try:
        arts.space = space = build_space(config)
        feas = FeasibilityModel.load(config.feasibility, space) if config.feasibility else FeasibilityModel()
        sut = build_sut(config)
        if len(sut.output_names) != space.q:
            raise ValidationError(
                f"SUT has {len(sut.output_names)} outputs but the partitions define {space.q} dimensions"
            )

        stage = "oca"
        arts.oca = oca = generate_oca(
            space, config.strength, feas, seed=substream_seed(config.seed, STREAM_OCA), n_candidates=config.n_candidates
        )

        stage = "search"
        targets = [InverseTarget(space, r) for r in oca.row_tuples()]
        arts.outcomes = solve_rows(config, sut, targets)

        stage = "admission"
        ledger = CoverageLedger.from_oca(oca) if oca.M else CoverageLedger(space, config.strength)
        guaranteed = 0
        for i, o in enumerate(arts.outcomes):
            if not sut.input_domain.contains(o.best_input):
                continue
            gain = ledger.incremental_gain(o.achieved)
            if gain > config.theta:
                ledger.record(o.achieved)
                arts.admitted.append(Test(i, tuple(o.best_input), tuple(o.achieved), gain, o.success))
                guaranteed += o.success
            elif gain == 0.0 and o.success:
                guaranteed += 1
        if not arts.admitted and oca.M:
            warnings.warn(f"no test passed the gain threshold theta={config.theta}", stacklevel=2)
        if config.theta > 0 and guaranteed < arts.successful_rows:
            warnings.warn(
                "successful rows rejected by the gain threshold are left out of the coverage guarantee",
                stacklevel=2,
            )

        stage = "prioritize"
        ordered = prioritize([(t.input, t.achieved) for t in arts.admitted], ledger)
        by_key = {(t.input, t.achieved): t for t in arts.admitted}
        work = ledger.fresh()
        for x, tup in ordered:
            t = by_key[(x, tup)]
            arts.suite.append(Test(t.row, t.input, t.achieved, work.incremental_gain(tup), t.success))
            work.record(tup)
        arts.ledger = work

        stage = "coverage"
        arts.coverage = work.report()
        arts.alpha = Fraction(guaranteed, oca.M) if oca.M else Fraction(0)
        arts.guarantee = guarantee_check(arts.alpha, work)
        if not arts.guarantee:
            raise GuaranteeViolation(
                f"coverage {work.ocov():.6f} below success fraction {float(arts.alpha):.6f}"
            )

        if config.faults is not None:
            stage = "faults"
            faults = default_faults(sut) if config.faults == "default" else load_faults(config.faults)
            inputs = [t.input for t in arts.suite]
            if inputs:
                arts.fault_report = fdr(faults, inputs, sut, space)
            else:
                arts.fault_report = FaultReport([Detection(f.id, False) for f in faults])
    except Exception as exc:
        arts.manifest = _manifest(config, started, failed_stage=stage)
        if write:
            write_artifacts(arts)
        raise PipelineError(stage, exc, partial=arts) from exc
    finally:
        if isinstance(sut, SubprocessSUT):
            sut.close()
    arts.manifest = _manifest(config, started)
    if write:
        write_artifacts(arts)
    return arts


def _manifest(config, started, failed_stage=None):
    import scipy
    import sklearn

    out = {
        "config": config.to_dict(),
        "config_sha256": config.digest(),
        "seed": config.seed,
        "substreams": {"oca": STREAM_OCA, "row": STREAM_ROW, "sut": STREAM_SUT},
        "versions": {
            "revnwise": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__,
        },
        "started": started,
        "wall_clock_s": round(time.time() - started, 3),
    }
    if failed_stage:
        out["failed_stage"] = failed_stage
    return out


def _dump(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def suite_json(space, tests):
    return [
        {
            "row": t.row,
            "input": [float(v) if not isinstance(v, str) else v for v in t.input],
            "tuple": list(space.labels_of(t.achieved)),
            "gain": t.gain,
            "success": bool(t.success),
        }
        for t in tests
    ]


def write_artifacts(arts):
    out = Path(arts.config.out)
    out.mkdir(parents=True, exist_ok=True)
    space = arts.space
    if arts.oca is not None:
        arts.oca.to_csv(out / "oca.csv")
    if arts.outcomes:
        _dump(out / "outcomes.json", [o.to_json(space) for o in arts.outcomes])
    if arts.ledger is not None:
        _dump(out / "suite.json", suite_json(space, arts.suite))
    if arts.coverage is not None:
        cov = arts.coverage.to_json()
        cov["alpha"] = float(arts.alpha)
        cov["successful_rows"] = arts.successful_rows
        cov["rows"] = arts.oca.M
        cov["guarantee"] = arts.guarantee
        _dump(out / "coverage.json", cov)
        arts.coverage.write_heatmaps(out / "heatmaps")
    if arts.fault_report is not None:
        _dump(out / "faults.json", arts.fault_report.to_json(space))
    _dump(out / "manifest.json", arts.manifest)


def baseline_fdr(n=25, seed=0, faults=None):
    """Fault detection of ``n`` uniform random inputs, for comparison with a run's suite."""
    sut = SyntheticTabularSUT()
    faults = faults if faults is not None else default_faults(sut)
    return fdr(faults, random_suite(sut.input_domain, n, substream_seed(seed, STREAM_BASELINE)), sut)

