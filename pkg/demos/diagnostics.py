"""Assumption probes on the benchmark: Lipschitz constant of the update,
drift of the mean field against the Lyapunov function, chain mixing, and
the Monte-Carlo check of the closed-form mean update."""

import numpy as np

from tdlab import (
    MeanField,
    SaProblem,
    TdTraceDriver,
    boyan_chain,
    discounted_update_map,
    drift_probe,
    empirical_mean_update,
    induce_chain,
    lambda_operators,
    lipschitz_probe,
    mixing_time,
    neg_def_margin,
    solution_set,
    td_matrices,
    trace_bound,
)

mdp, policy, X = boyan_chain()
chain = induce_chain(mdp, policy)
gamma, lam = 0.9, 0.4

ops = lambda_operators(chain, gamma, lam)
sys = td_matrices(ops, chain, X, gamma)
target = solution_set(sys)

driver = TdTraceDriver(mdp, policy, X, gamma * lam, start_dist=chain.d_pi)
driver.reset(0)
ys = [driver.step() for _ in range(500)]
H = discounted_update_map(X, gamma)
est = lipschitz_probe(H, num_pairs=50, y_samples=ys, dim=5, seed=1, scale=3.0)
bound = 2.0 * X.max_row_norm * trace_bound(X, gamma * lam)
print(f"update-map Lipschitz estimate: {est:.3f} (worst-case bound {bound:.3f})")

problem = SaProblem(update_map=H, chain_driver=driver, target_set=target,
                    w0=np.zeros(5), mean_field=MeanField(M=sys.A, c=sys.b))
margin, _ = drift_probe(problem, num_points=200, seed=2)
print(f"drift margin of the mean field: {margin:.3e} "
      f"(2x the subspace margin {2 * neg_def_margin(sys.A, sys.row_space()):.3e})")

for acc in (0.1, 0.01, 0.001):
    print(f"mixing time to total variation {acc}: "
          f"{mixing_time(chain.P_pi, acc)} steps")

w = np.random.default_rng(5).normal(size=5)
mean, stderr = empirical_mean_update(mdp, policy, chain, X, "discounted", w,
                                     gamma=gamma, lam=lam, num_steps=500_000,
                                     seed=9)
expected = sys.A @ w + sys.b
print("\nMonte-Carlo mean update vs closed form (per coordinate):")
for i in range(5):
    print(f"  {mean[i]:+.6f} vs {expected[i]:+.6f}  (stderr {stderr[i]:.2e})")
