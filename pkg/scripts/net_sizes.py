"""Tabulate epsilon-net sizes K(eps) for a point cloud or a distance file."""

import argparse

import numpy as np

from metdisc.gh_distance import min_epsilon_net
from metdisc.io import read_distance
from metdisc.metric_core import FiniteMetricSpace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", help="distance file; default is a random planar cloud")
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.5, 0.8])
    ap.add_argument("--exact", action="store_true", help="also solve the minimum cover (<= 25 points)")
    args = ap.parse_args()

    if args.x:
        X = read_distance(args.x)
    else:
        X = FiniteMetricSpace.from_points(np.random.default_rng(args.seed).random((args.points, 2)))
    head = f"{'eps':>6} {'greedy':>7}" + (f" {'exact':>6}" if args.exact else "")
    print(head)
    for eps in args.eps:
        g = min_epsilon_net(X, eps)
        row = f"{eps:6.3f} {len(g.net):7d}"
        if args.exact:
            row += f" {len(min_epsilon_net(X, eps, 'exact').net):6d}"
        print(row)


if __name__ == "__main__":
    main()
