"""Brute-force Monte Carlo against every closed-form oracle, plus the
historical-estimator bias study (the one known disagreement)."""

import argparse
import math

from occr import harness, oracle
from occr.harness import StudySpec, Subscore
from occr.synth import LoanGenParams


def historical_bias_study(seed: int, reps: int, n: int) -> None:
    params = LoanGenParams(3.0, 1.0, 1.0, 1.0, n, s_h=0.5)
    est = harness.study_estimates(StudySpec(Subscore.HISTORICAL, params, reps, n, rng_seed=seed))
    e_l, e_l2 = oracle.loan_moments(3.0, 1.0, 1.0, 1.0)
    var = oracle.historical_var_oracle(0.5, n, e_l, e_l2)
    bias = oracle.historical_bias_oracle(0.5, n, *oracle.weight_moments(1.0, e_l, e_l2))
    se = math.sqrt(var / reps)
    print(f"\nhistorical estimator, n={n}, {reps} replications")
    print(f"  variance      {est.var(ddof=1):.6f}  oracle {var:.6f}")
    print(f"  mean          {est.mean():.5f}  (s_h = 0.5, z = {(est.mean() - 0.5) / se:+.2f})")
    print(f"  bias oracle   {bias:.5f}  (z = {(est.mean() - bias) / se:+.2f})")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    for c in harness.oracle_crosschecks(args.seed, args.scale, args.threads):
        print(f"{'PASS' if c.passed() else 'FAIL'}  {c.name:<38} {c.estimate:12.6g} {c.expected:12.6g}  z={c.z:+.2f}")
    historical_bias_study(args.seed, 5000, 100)


if __name__ == "__main__":
    main()
