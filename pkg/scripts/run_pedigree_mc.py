"""Tree Monte Carlo ratio F_n(x)/F_n(0) against the grid solver."""

import argparse

import numpy as np

from infinitesimal.grid import Grid
from infinitesimal.initial import CENTRAL_STEP, GaussianDatum, rescaled_log
from infinitesimal.operators import ModelParams, iterate
from infinitesimal.pedigree import mc_profile_ratio

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    xs = np.array([-2.0, -1.0, 1.0, 2.0])
    grid = Grid(-20.0, 20.0, 0.001)
    for alpha in (0.4, 1.0):
        for name, datum in (("step", CENTRAL_STEP), ("gauss", GaussianDatum(0.5, 0.6))):
            for n in (1, 2, 3):
                est = mc_profile_ratio(xs, rescaled_log(datum, alpha), n, alpha,
                                       args.samples, args.seed)
                f = iterate(datum.profile(grid), ModelParams(alpha), n, keep={n}).profiles[n]
                ref = np.array([f.at(x) for x in xs]) / f.at(0.0)
                z = (est.ratio - ref) / est.std_error
                print(f"alpha={alpha} {name:5s} n={n}  z = " + " ".join(f"{v:+.2f}" for v in z))
