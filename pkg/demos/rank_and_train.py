"""Rank four one-layer ansatzes by relative fluctuation, then train them and compare.

SU(4) and R_y-CZ blocks can express the cluster ground state; R_y-CX and R_x-CX cannot.
The relative fluctuation separates the two groups before any training is run, and Adam
from random starts confirms the split: the bottom group never gets close.
"""

import argparse

from rflab import SamplePlan, build_brickwall_1d, relative_fluctuation, train_adam
from rflab.models import cluster


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--restarts", type=int, default=6)
    ap.add_argument("--iters", type=int, default=1000)
    a = ap.parse_args()

    h = cluster(a.n)
    rows = []
    for template in ("su4", "rycz", "rycx", "rxcx"):
        c = build_brickwall_1d(a.n, 1, template)
        r = relative_fluctuation(c, h, SamplePlan(4000, 10, 0), "m")
        t = train_adam(c, h, lr=0.1, max_iters=a.iters, n_restarts=a.restarts, seed=0)
        rows.append((r.rf, template, r.rf_stderr, t.eps_mean, float(t.errors.min())))
    print(f"cluster model, N={a.n}, depth 1")
    print(f"{'ansatz':>6} {'RF':>7} {'stderr':>7} {'mean eps':>10} {'best eps':>10}")
    for rf_, template, err, eps, best in sorted(rows, reverse=True):
        print(f"{template:>6} {rf_:>7.3f} {err:>7.3f} {eps:>10.2e} {best:>10.2e}")


if __name__ == "__main__":
    main()
