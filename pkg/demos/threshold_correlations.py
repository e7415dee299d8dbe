"""A rare global trigger induces vanishing but stubborn pair correlations.

Errors are i.i.d. coin flips until their total crosses a threshold, at
which point every site fails at once.  The pair covariance this induces
decays polynomially in n when the threshold margin grows like sqrt(log n)
-- fast enough to look independent, slow enough to matter forever.
"""

import math

import numpy as np

from corrmem import (
    ThresholdModelSpec,
    covariance_decomposition,
    exact_covariance,
    retention_upper_bound,
    tail_scaling_fit,
    trigger_probability,
)


def main():
    eps = 0.1
    print("pair covariance under a sqrt(log n) threshold margin, eps = 0.1")
    print(f"{'n':>6} {'a=0.6':>12} {'a=1.0':>12} {'a=2.0':>12}")
    sizes = [256, 1024, 4096, 16384]
    for n in sizes:
        row = [exact_covariance(ThresholdModelSpec(n=n, eps=eps, margin_rate=a)) for a in (0.6, 1.0, 2.0)]
        print(f"{n:>6} " + " ".join(f"{v:>12.3e}" for v in row))

    fit = tail_scaling_fit(
        [ThresholdModelSpec(n=n, eps=eps, margin_rate=0.6) for n in sizes]
    )
    print()
    print("fit of ln P(trigger) against squared margin at a = 0.6:")
    print(f"  slope {fit.slope:+.3f}, R^2 {fit.r_squared:.4f}")
    print(f"  retention exponent {fit.retention_exponent:.2f}: the expected")
    print(f"  lifetime grows like n^{fit.retention_exponent:.2f} -- polynomial, not exponential.")

    print()
    print("where does the covariance come from?  split by trigger state (n = 64):")
    spec = ThresholdModelSpec(n=64, eps=eps, margin_rate=1.0)
    dec = covariance_decomposition(spec)
    print(f"  P(trigger)        = {dec.trigger_prob:.3e}")
    print(f"  conditional term  = {dec.conditional_term:+.3e}")
    print(f"  between-state term = {dec.between_term:+.3e}")
    print(f"  total             = {dec.total:+.3e}")
    print("  the between-state term carries essentially all of it: conditioned")
    print("  on the trigger outcome, sites are nearly independent again.")

    print()
    print("explicit margins can also be tuned to a target trigger rate:")
    for margin in (0.3, 0.575, 1.0):
        spec = ThresholdModelSpec(n=64, eps=eps, margin=margin)
        p = trigger_probability(spec)
        print(
            f"  margin {margin:>5.3f}: B = {spec.threshold:>6.2f}, "
            f"P(trigger) = {p:.4f}, mean lifetime ceiling = {retention_upper_bound(spec):8.1f}"
        )


if __name__ == "__main__":
    main()
