"""Recover a known funness weight from synthetic presence-only data."""
import numpy as np

from gamefun import FitConfig, ScoredGame, fit_sweep, likelihood_ratio_test, rng_stream
from gamefun.maxent import probabilities

rng = rng_stream(5)
n_background = 1000
logp = rng.normal(-1.5, 0.4, n_background)      # stand-in for proposal log-probabilities
u = rng.uniform(0.1, 0.9, n_background)          # stand-in for simulated funness
background = [ScoredGame(f"g{i}", logp[i], u[i]) for i in range(n_background)]

# people "invent" games with probability proportional to exp(logp + 5 u)
p = probabilities(background, theta=5.0)
presence = [background[i] for i in rng.choice(n_background, size=400, p=p)]

fit = fit_sweep(presence, background, FitConfig(lam=0.1))
stat, df = likelihood_ratio_test(fit)
print(f"theta_hat = {fit.theta_hat:.1f}, LRT = {stat:.1f} on {df} df")

# coarse look at the penalized likelihood curve
for theta, ll in fit.curve[::20]:
    bar = "#" * int(max(0.0, ll - fit.curve[0][1]) / 10)
    print(f"{theta:5.1f} {ll:10.2f} {bar}")
print("mean u_sim, presence vs background:",
      round(float(np.mean([g.u_sim for g in presence])), 3), round(float(u.mean()), 3))
