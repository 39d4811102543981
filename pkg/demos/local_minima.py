"""Random back-evolved targets: shallow circuits stay learnable, deeper ones do not.

Each target is a Z field conjugated by a random Clifford brickwall of depth D, so a
brickwall ansatz of the same depth can reach its ground state. At D=1 the relative
fluctuation stays above 1 as N grows; at D=4 it drops below 1, the signature of bad
local minima. Large N is cheap because only the stabilizer engine is used.
"""

import argparse

from rflab import SamplePlan, build_brickwall_1d, relative_fluctuation
from rflab.models import ModelSpec, build_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="8,16,32")
    ap.add_argument("--instances", type=int, default=2)
    ap.add_argument("--samples", type=int, default=2000)
    a = ap.parse_args()

    print(f"{'N':>4} {'D':>3} {'instance':>8} {'RF':>7} {'stderr':>7}")
    for n in (int(x) for x in a.sizes.split(",")):
        for d in (1, 4):
            for inst in range(a.instances):
                h = build_model(ModelSpec("rand", n, 0.0, d, inst)).hamiltonian
                r = relative_fluctuation(build_brickwall_1d(n, d, "su4"), h, SamplePlan(a.samples, 10, inst), "m")
                print(f"{n:>4} {d:>3} {inst:>8} {r.rf:>7.3f} {r.rf_stderr:>7.3f}")


if __name__ == "__main__":
    main()
