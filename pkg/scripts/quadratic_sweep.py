"""Noisy-quadratic sweep: optimum agreement and iteration counts, ground vs reverse-attention.

    python scripts/quadratic_sweep.py [--x0 10] [--iterations 500] [--seeds 20]

Prints a per-n summary; the per-seed CSV comes from ``holofocus quadratic``.
"""

import argparse

import numpy as np

from holofocus.quadratic import LOSS_KINDS, compare_rates, descend, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 5, 20, 100])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--iterations", type=int, default=500)
    ap.add_argument("--x0", type=float, default=10.0)
    ap.add_argument("--threshold", type=float, default=1e-4)
    args = ap.parse_args()

    print(f"{'n':>4} {'kind':>18} {'hit x*':>7} {'median k':>9} {'median |x_K-x*|':>16}")
    for n in args.n:
        ensembles = [generate(n, s) for s in range(args.seeds)]
        ground = [descend(e, "ground", args.x0, args.iterations) for e in ensembles]
        for kind in LOSS_KINDS:
            traces = ground if kind == "ground" else [descend(e, kind, args.x0, args.iterations)
                                                      for e in ensembles]
            err = [abs(tr.final[0] - e.optimum[0]) for tr, e in zip(traces, ensembles)]
            ks = [compare_rates(g, tr, args.threshold)[1] for g, tr in zip(ground, traces)]
            hits = sum(x < 1e-6 for x in err)
            print(f"{n:>4} {kind:>18} {hits:>4}/{args.seeds} {np.median(ks):>9g} {np.median(err):>16.3e}")


if __name__ == "__main__":
    main()
