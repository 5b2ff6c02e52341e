"""Reconstruct a Neumann trace from one-sided Cauchy data.

We pick a target trace, generate the matching Cauchy pair (f, g) on the
accessible side, then run the alternating iteration from a zero start and
watch the relative error fall.  The per-mode error contracts like
tanh(lambda T)^(2m), so low modes converge in a handful of sweeps while high
modes take their time; the second half of the demo prints the standard
three-mode rate table to make that separation visible.
"""

import numpy as np

from kmiter import (
    Elliptic,
    IterationSchedule,
    build_factors,
    elliptic_dt_solution_at,
    from_coeffs,
    iterate_stepwise,
    make_sine_spectrum_1d,
    render_table,
    run_convergence_table,
    zeros,
)


def main():
    model = make_sine_spectrum_1d(4, 2.0)
    lam = model.eigenvalues
    target = from_coeffs(model, 1.0 / (1.0 + np.arange(4.0)) ** 2)

    # manufacture a consistent Cauchy pair whose hidden trace is the target:
    # the mode solution u_j(t) = t_j cosh(lam_j t) / (lam_j sinh(lam_j T))
    # has u_j'(T) = t_j, u_j(0) = t_j / (lam_j sinh(lam_j T)), u_j'(0) = 0
    T = 1.0
    f = from_coeffs(model, target.coeffs / (lam * np.sinh(lam * T)))
    spec = Elliptic(T=T, f=f, g=zeros(model))
    reference = elliptic_dt_solution_at(spec, spec.T)
    np.testing.assert_allclose(reference.coeffs, target.coeffs, rtol=1e-12)

    fac = build_factors(spec)
    schedule = IterationSchedule(
        checkpoints=(1, 5, 25, 125, 625, 3125, 15625), mode="stepwise"
    )
    report = iterate_stepwise(fac, zeros(model), schedule, reference=reference)

    print("alternating sweeps vs relative error in the reconstructed trace")
    print()
    print(f"{'sweeps':>8}  {'rel error':>12}  {'step diff':>12}")
    for rec in report.records:
        print(
            f"{rec.k:>8}  {rec.error_vs_reference:>12.4e}"
            f"  {rec.successive_diff:>12.4e}"
        )
    print()
    print("Each mode contracts at its own rate. Running the iteration on")
    print("single-mode data isolates those rates:")
    print()
    print(render_table(run_convergence_table(), "markdown"))
    print()
    print("Mode 1 is essentially converged by a thousand sweeps; mode 3")
    print("still carries visible error after a million. The method is")
    print("convergent but not uniformly so, which is exactly the behaviour")
    print("the cutoff regularizer in demo noisy_reconstruction exploits.")


if __name__ == "__main__":
    main()
