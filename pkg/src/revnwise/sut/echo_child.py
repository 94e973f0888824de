"""Reference child for the subprocess protocol.

Declares ``--inputs`` continuous inputs on [0, 1] and one real output, and
answers every request with ``--const``. ``--fail`` switches on a
misbehavior for exercising the parent's error paths:

``exit``    exit after the hello frame, before answering anything
``arity``   answer with two values instead of one
``badid``   answer with the wrong request id
``hang``    never answer
"""
import argparse
import json
import sys
import time


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--inputs", type=int, default=2)
    ap.add_argument("--const", type=float, default=0.5)
    ap.add_argument("--fail", choices=["exit", "arity", "badid", "hang"])
    args = ap.parse_args(argv)

    emit({"hello": {
        "inputs": [{"name": f"x{i}", "kind": "continuous", "low": 0.0, "high": 1.0} for i in range(args.inputs)],
        "outputs": [{"name": "score", "kind": "real"}],
    }})
    if args.fail == "exit":
        return 3
    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        if args.fail == "hang":
            time.sleep(3600)
        rid = req["id"] + 1 if args.fail == "badid" else req["id"]
        out = [args.const, args.const] if args.fail == "arity" else [args.const]
        emit({"id": rid, "output": out})
    return 0


if __name__ == "__main__":
    sys.exit(main())
