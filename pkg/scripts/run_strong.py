"""Strong selection (α = 0.4) from the four-block step datum, 15 generations."""

import argparse

from infinitesimal.config import preset
from infinitesimal.experiments import run_simulate, summary_lines

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/strong")
    args = ap.parse_args()
    result = run_simulate(preset("strong"), args.out)
    print("\n".join(summary_lines(result)))
