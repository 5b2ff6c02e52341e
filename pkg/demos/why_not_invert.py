"""Show why these three problems cannot be solved by direct inversion.

For each problem kind we place a perturbation of unit data norm on a single
mode and evaluate the norm of the solution it produces.  The response grows
without bound in the mode index, so any noise floor in the data destroys a
direct reconstruction.  The alternating iterations in this package never
invert the bad operator; they repeatedly solve well-posed problems instead,
which is what makes the later demos possible.
"""

import math

from kmiter import illposedness_demo, make_sine_spectrum_1d


def main():
    model = make_sine_spectrum_1d(24, 1.0)
    T = 1.0 / math.pi  # integer lambda T, safely away from wave resonances
    print("unit-norm data perturbation on mode k, resulting solution norm")
    print(f"(horizon T = 1/pi = {T:.4f})")
    print()
    header = f"{'k':>4}  " + "".join(
        f"{kind:>14}" for kind in ("elliptic", "hyperbolic", "parabolic")
    )
    print(header)
    print("-" * len(header))
    for k in (1, 2, 4, 8, 16, 22, 24):
        cells = []
        for kind in ("elliptic", "hyperbolic", "parabolic"):
            rec = illposedness_demo(kind, model, T, k)
            cells.append("overflow" if rec.overflow else f"{rec.solution_norm:.4g}")
        print(f"{k:>4}  " + "".join(f"{c:>14}" for c in cells))
    print()
    print("The elliptic and parabolic responses grow exponentially in the")
    print("eigenvalue; at k = 16 the backward heat value cannot even be")
    print("represented in double precision. The wave column misbehaves")
    print("differently: the amplification 1/|sin(lambda T)| is not monotone,")
    print("it spikes wherever lambda T sits near a multiple of pi (k = 22 is")
    print("the closest here) and admits no uniform bound over the spectrum.")
    print("Either way a measurement error of size 1e-12 on an unlucky mode")
    print("overwhelms the reconstruction, so the inverse map is useless as")
    print("stated and the problem has to be iterated or regularized instead.")


if __name__ == "__main__":
    main()
