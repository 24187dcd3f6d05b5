"""Isoperimetric lower bound of fan discs as the mesh is refined.

The measured constant should climb toward 1/(4 pi) from below.
"""

import argparse
import math
import time

from metdisc.disc_mesh import isoperimetric_lower_bound
from metdisc.meshes import fan_disc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32, 64, 128])
    ap.add_argument("--budget", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    flat = 1 / (4 * math.pi)
    print(f"{'n':>5} {'C':>10} {'1/4pi - C':>11} {'witness':>8} {'secs':>6}")
    for n in args.sizes:
        t = time.perf_counter()
        C, w = isoperimetric_lower_bound(fan_disc(n), args.budget, args.seed)
        print(f"{n:5d} {C:10.6f} {flat - C:11.2e} {len(w.triangles):8d} {time.perf_counter() - t:6.2f}")


if __name__ == "__main__":
    main()
