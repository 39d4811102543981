"""Watch the landscape flatten as a brickwall circuit gets deeper.

For the cluster model the fluctuation sigma falls with depth until the circuit scrambles
like a global random unitary, where it sits at ||lambda||_2 / (sqrt(2^N + 1) ||lambda||_1).
The relative fluctuation divides by sigma_0 = 1/sqrt(2M); once sigma stops falling, adding
parameters pushes it back up. Counting every parameter (the "m" policy) keeps this cheap
at any depth.
"""

import argparse

from rflab import SamplePlan, build_brickwall_1d, relative_fluctuation
from rflab.models import cluster


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--samples", type=int, default=4000)
    ap.add_argument("--template", default="su4")
    a = ap.parse_args()

    h = cluster(a.n)
    depths = list(range(1, a.n + 1)) + [2 * a.n, 4 * a.n, 8 * a.n]
    print(f"{a.template} brickwall, cluster model, N={a.n}")
    print(f"{'D':>4} {'M':>6} {'sigma':>9} {'stderr':>8} {'RF':>7}")
    for d in depths:
        r = relative_fluctuation(build_brickwall_1d(a.n, d, a.template), h, SamplePlan(a.samples, 10, d), "m")
        print(f"{d:>4} {r.m:>6} {r.sigma:>9.5f} {r.sigma_stderr:>8.5f} {r.rf:>7.3f}")
    print(f"Haar value of sigma: {r.sigma_haar:.5f}")


if __name__ == "__main__":
    main()
