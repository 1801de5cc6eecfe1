"""The computable guarantees: confidence widths, the regret bound,
and their empirical validation.

First evaluates the closed forms on a grid, then runs the coverage
experiment: does the projected true parameter actually stay inside every
confidence ellipsoid at the prescribed width?
"""

from cbrap import (EnvConfig, ExperimentConfig, NoiseSpec, TheoryParams,
                   beta_schedule, coverage_experiment, regret_bound,
                   success_probability)

p = TheoryParams(R=0.1, S=1.0, L=1.0, B=1.0, lam=1.0, delta=0.05,
                 eps=0.05, eps1=0.05)

print("=== confidence width beta_t over rounds (m=20) ===")
for t in (0, 10, 100, 1000, 10000):
    print(f"  t={t:>6}: beta = {beta_schedule(p, 20, t):8.3f}")

print("\n=== regret bound and success probability ===")
print(f"{'m':>4} {'T':>6} {'bound':>12} {'success prob':>13}")
for m in (10, 20, 40):
    for T in (1000, 10000):
        print(f"{m:>4} {T:>6} {regret_bound(p, m, T):>12.1f} "
              f"{success_probability(p, m, T):>13.6f}")
print("(the second bound term is linear in T with slope ~ L S eps1, so the")
print(" distortion level decides whether the sqrt(T) regime is visible)")

print("\n=== coverage experiment ===")
cfg = ExperimentConfig(
    env=EnvConfig(n=120, K=8, noise=NoiseSpec.gaussian(0.1)),
    m=16, T=400, delta=0.05, seeds=(0,),
)
result = coverage_experiment(cfg, 40)
print(f"full-width coverage over 40 seeds: {result.coverage_rate:.3f}")
print(f"empirical regret <= bound in {result.dominance_fraction:.3f} of seeds")

half = coverage_experiment(cfg, 40, beta_scale=0.5)
print(f"with widths halved, coverage drops to {half.coverage_rate:.3f} "
      f"(first violations by round: {half.first_violation_hist})")

s = result.per_seed[0]
print("\noracle constants measured from one seed's ground truth:")
print(f"  S={s.params.S:.3f} L={s.params.L:.3f} B={s.params.B:.3f} "
      f"eps={s.params.eps:.3f} eps1={s.params.eps1:.3f}")
print(f"  regret bound {s.regret_bound:.1f} vs realized regret {s.cum_regret:.1f}")
