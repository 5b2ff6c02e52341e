"""Pick the spectral cutoff for noisy Cauchy data without peeking.

With noisy data the fixed point of the iteration is itself corrupted, and
the corruption grows with the mode index while the truncation error shrinks.
The error bound splits into those two halves, is computable from the data
noise level alone, and its minimizer is an honest a-priori choice of cutoff.
This demo runs the whole pipeline at three noise levels and compares the
error at the chosen cutoff with the best error any cutoff could have had.
"""

from kmiter import run_cutoff_study


def main():
    for eps in (1e-3, 1e-4, 1e-5):
        study = run_cutoff_study(eps=eps, seed=11)
        sel = study.selection
        print(f"data noise eps = {eps:g}  (measured eps' = {study.eps_prime:.3e})")
        print()
        print(f"{'cutoff n':>10}  {'bound':>12}  {'true error':>12}")
        for i, pt in enumerate(study.curve):
            mark = "  <- n*" if i == sel.index else ""
            print(f"{pt.n:>10.4g}  {pt.bound:>12.4e}  {pt.true_error:>12.4e}{mark}")
        ratio = study.error_at_star / study.best_error
        print()
        print(
            f"error at n* = {study.error_at_star:.4e}, best possible"
            f" = {study.best_error:.4e} (within x{ratio:.2f})"
        )
        print()
    print("The bound is pessimistic but its minimizer lands near the true")
    print("optimum at every noise level, and it needs nothing that is not")
    print("measurable: the noise magnitude and a smoothness budget for the")
    print("unknown trace.")


if __name__ == "__main__":
    main()
