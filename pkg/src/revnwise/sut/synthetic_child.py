"""The synthetic classifier served over the subprocess protocol.

Run as ``python3 -m revnwise.sut.synthetic_child``; pairs with the
partition file written by ``revnwise partitions-validate PATH --emit adult``.
"""
import json
import sys

from .synthetic import SyntheticTabularSUT


def main():
    sut = SyntheticTabularSUT()
    hello = {
        "inputs": sut.input_domain.to_dict(),
        "outputs": [{"name": n, "kind": "real"} for n in sut.output_names],
    }
    sys.stdout.write(json.dumps({"hello": hello}) + "\n")
    sys.stdout.flush()
    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        sys.stdout.write(json.dumps({"id": req["id"], "output": sut.evaluate(req["input"])}) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
