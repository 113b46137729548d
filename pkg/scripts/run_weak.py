"""Weak selection (α = 0.015) from the four-block step datum, 150 generations."""

import argparse

from infinitesimal.config import preset
from infinitesimal.experiments import run_simulate, summary_lines

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/weak")
    args = ap.parse_args()
    result = run_simulate(preset("weak"), args.out)
    print("\n".join(summary_lines(result)))
