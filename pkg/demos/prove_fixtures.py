"""Run the prover on every fixture and print a one-line verdict for each."""

import sys
import time
from pathlib import Path

from ctgind import load_spec, prove

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main():
    for path in sorted(FIXTURES.glob("*.spec")):
        spec = load_spec(path)
        start = time.perf_counter()
        outcome = prove(spec)
        secs = time.perf_counter() - start
        line = f"{path.stem:28} {outcome.status:12} {outcome.state.steps:4} inferences  {secs:6.2f}s"
        if outcome.counterexample:
            line += "  CEX " + " ".join(f"{v.name}={t}" for v, t in outcome.counterexample.items())
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
