"""Net-based GH bound between a fan disc with a collar of height 1/n and the disc."""

import argparse
import math

from metdisc.disc_mesh import boundary_loop, vertex_metric
from metdisc.gh_distance import gh_upper_from_net
from metdisc.mapping_cylinder import build_cylinder
from metdisc.meshes import fan_disc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sectors", type=int, default=64)
    ap.add_argument("--columns", type=int, default=None, help="angular grid; default matches the loop")
    ap.add_argument("--rows", type=int, default=8)
    ap.add_argument("--ns", type=int, nargs="+", default=[2, 4, 8, 16, 32])
    args = ap.parse_args()

    m = fan_disc(args.sectors)
    loop = boundary_loop(m)
    L = loop.total_length
    base = vertex_metric(m)
    print(f"L = {L:.6f}")
    print(f"{'n':>4} {'1/n':>8} {'bound':>8} {'distortion':>10} {'slack':>8}")
    for n in args.ns:
        c = build_cylinder(base, loop, L, 1 / n, (args.columns, args.rows), base_mesh=m, validate=False)
        nb = gh_upper_from_net(c.space, range(c.n_base))
        print(f"{n:4d} {1 / n:8.4f} {nb.bound:8.4f} {nb.distortion:10.4f} {c.discretization_error:8.4f}")
    print(f"(loop length over 2 pi = {L / (2 * math.pi):.4f})")


if __name__ == "__main__":
    main()
