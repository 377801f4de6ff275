"""Compare the two random-step modes on the 2D toy region.

Runs seeded path searches between the standard endpoints for each mode,
prints a per-seed table plus summary statistics, and optionally dumps one
CSV trace per mode for plotting.
"""

import argparse
import os

import numpy as np

from stickysym.builders import toy_region, toy_region_endpoints
from stickysym.manifold import PathConfig, dump_path_csv, find_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--tol", type=float, default=0.2)
    ap.add_argument("--sigma", type=float, default=0.2)
    ap.add_argument("--beta", type=float, default=-0.1)
    ap.add_argument("--nr", type=int, default=50)
    ap.add_argument("--nmax", type=int, default=100_000)
    ap.add_argument("--trace-dir", default=None,
                    help="write one CSV trace per mode into this directory")
    args = ap.parse_args()

    cs = toy_region()
    x0, x1 = toy_region_endpoints()
    print(f"endpoints: {x0} -> {x1}")
    print(f"{'mode':<10}{'seed':>6}{'found':>7}{'points':>9}{'generated':>11}")

    for mode in ("gaussian", "sample"):
        totals, found = [], 0
        for seed in range(args.seeds):
            cfg = PathConfig(tol=args.tol, sigma=args.sigma, beta=args.beta,
                             n_random=args.nr, n_max=args.nmax, retries=1,
                             mode=mode, seed=seed)
            res = find_path(cs, x0, x1, cfg, record_trace=bool(args.trace_dir))
            totals.append(res.n_generated)
            found += res.found
            print(f"{mode:<10}{seed:>6}{str(res.found):>7}"
                  f"{res.n_points:>9}{res.n_generated:>11}")
            if args.trace_dir and seed == 0:
                os.makedirs(args.trace_dir, exist_ok=True)
                dump_path_csv(os.path.join(args.trace_dir, f"{mode}.csv"), res)
        print(f"{mode}: {found}/{args.seeds} found, "
              f"mean generated {np.mean(totals):.0f}, "
              f"median {np.median(totals):.0f}")


if __name__ == "__main__":
    main()
