"""Drive an external black box over newline-delimited JSON.

Protocol (one JSON object per line):

* child -> parent, once at start::

    {"hello": {"inputs": [{"name", "kind": "continuous", "low", "high"}
                          | {"name", "kind": "categorical", "labels"}, ...],
               "outputs": [{"name", "kind": "real" | "label" | "distribution"}, ...]}}

* parent -> child per evaluation: ``{"id": <int>, "input": [...]}``
* child -> parent: ``{"id": <same int>, "output": [...]}``

Anything else from the child is a protocol error.
"""
from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading

import numpy as np

from ..domain import InputDomain
from ..errors import ChildExited, MalformedFrame, SubprocessTimeout, ValidationError
from .base import SystemUnderTest

_EOF = object()
OUTPUT_KINDS = ("real", "label", "distribution")


class SubprocessSUT(SystemUnderTest):
    concurrency = "serialize"

    def __init__(self, command, timeout=30.0, cwd=None, env=None):
        self.command = command
        self.timeout = float(timeout)
        self._argv = shlex.split(command) if isinstance(command, str) else list(command)
        self._cwd, self._env = cwd, env
        self._lock = threading.Lock()
        self._next_id = 0
        self._proc = subprocess.Popen(
            self._argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            bufsize=1,
            cwd=cwd,
            env=env,
        )
        self._lines = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._handshake()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _read_frame(self, what):
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise SubprocessTimeout(f"no {what} from child within {self.timeout:g}s") from None
        if line is _EOF:
            self._proc.wait()
            raise ChildExited(f"child exited (code {self._proc.returncode}) while awaiting {what}")
        try:
            return json.loads(line)
        except json.JSONDecodeError:
            raise MalformedFrame(f"unparseable frame while awaiting {what}: {line.strip()[:200]!r}") from None

    def _handshake(self):
        frame = self._read_frame("hello")
        hello = frame.get("hello") if isinstance(frame, dict) else None
        if not isinstance(hello, dict) or "inputs" not in hello or "outputs" not in hello:
            self.close()
            raise MalformedFrame(f"expected a hello frame, got {frame!r}")
        try:
            self.input_domain = InputDomain.from_dict(hello["inputs"])
        except (ValidationError, KeyError, TypeError) as exc:
            self.close()
            raise MalformedFrame(f"bad input declaration in hello: {exc}") from None
        outputs = hello["outputs"]
        if not outputs or any(o.get("kind") not in OUTPUT_KINDS for o in outputs):
            self.close()
            raise MalformedFrame(f"bad output declaration in hello: {outputs!r}")
        self.output_names = tuple(o["name"] for o in outputs)
        self.output_kinds = tuple(o["kind"] for o in outputs)
        self.hello = hello

    def descriptor(self):
        return {"inputs": self.input_domain.to_dict(), "outputs": [
            {"name": n, "kind": k} for n, k in zip(self.output_names, self.output_kinds)
        ]}

    def evaluate(self, x, repetition=0):
        x = self.input_domain.validate(tuple(x))
        with self._lock:
            rid = self._next_id
            self._next_id += 1
            payload = json.dumps({"id": rid, "input": [v if isinstance(v, str) else float(v) for v in x]})
            try:
                self._proc.stdin.write(payload + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                raise ChildExited(f"child gone before request {rid}", input=x) from None
            try:
                frame = self._read_frame(f"response to request {rid}")
            except ChildExited as exc:
                raise ChildExited(f"{exc} (request id {rid})", input=x) from None
            except SubprocessTimeout as exc:
                raise SubprocessTimeout(str(exc), input=x) from None
            except MalformedFrame as exc:
                raise MalformedFrame(str(exc), input=x) from None
        if not isinstance(frame, dict) or set(frame) != {"id", "output"} or frame["id"] != rid:
            raise MalformedFrame(f"frame does not answer request {rid}: {frame!r}", input=x)
        out = frame["output"]
        if not isinstance(out, list) or len(out) != len(self.output_names):
            raise MalformedFrame(
                f"request {rid}: output arity {len(out) if isinstance(out, list) else '?'} "
                f"!= declared {len(self.output_names)}",
                input=x,
            )
        return [np.asarray(v, dtype=float) if k == "distribution" else v for v, k in zip(out, self.output_kinds)]

    def spawn(self):
        """A fresh child running the same command."""
        return SubprocessSUT(self._argv, self.timeout, self._cwd, self._env)

    def close(self):
        try:
            self._proc.stdin.close()
        except OSError:  # a dead child leaves unflushed data behind
            pass
        try:
            self._proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._reader.join(timeout=2)
        if not self._reader.is_alive():
            self._proc.stdout.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
