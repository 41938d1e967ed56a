"""Monte-Carlo partition-function estimation vs the Gaussian closed forms.

For zero drift and potential the log-partition has a closed form, which
makes a sharp test bed for the killed-diffusion estimator: sampled log Z,
constant-killing survival and finite-difference controls are all compared
against exact values, and the standard error shrinks like 1/sqrt(N).
"""
import math

import numpy as np

from pimas import ControlParams, DiffusionSpec, EndKernel
from pimas import control_single, estimate_log_z, log_z_single, mc_control, sample_endpoints

params = ControlParams(nu=1.0, R=1.0, alpha=25.0, epsilon=0.01, T=1.0)
x, t, T = np.array([0.3]), 0.0, params.T
mu = np.array([1.0])
spec = DiffusionSpec(nu=params.nu, lam=params.lam, dt=T / 50)
kernel = EndKernel.quadratic(mu, params.alpha, params.lam)

# closed form: single-target log Z plus the kernel's fixed normalization
offset = 0.5 * math.log((params.R / params.alpha) / (T - t + params.R / params.alpha))
closed = log_z_single(x, t, mu, params) + offset

print("log Z estimates against the closed form:")
print(f"{'N':>8} {'estimate':>10} {'SE':>9} {'closed':>10} {'|err|/SE':>9}")
for n in (1_000, 10_000, 100_000):
    sample = sample_endpoints(x, t, spec, T, n, seed=1)
    log_z, se = estimate_log_z(sample, kernel, [0.0])
    print(f"{n:8d} {log_z:10.5f} {se:9.5f} {closed:10.5f} {abs(log_z - closed) / se:9.2f}")

print("\nconstant-killing survival against exp(-V (T - t) / lam):")
v0 = 2.0
kill = DiffusionSpec(nu=params.nu, lam=params.lam, dt=1e-3,
                     potential=lambda y, s: np.full(y.shape[0], v0))
sample = sample_endpoints(x, t, kill, T, 100_000, seed=2)
expected = math.exp(-v0 * T / params.lam)
print(f"  survived {sample.survival_fraction:.5f} vs {expected:.5f}")

print("\nfinite-difference control (common random numbers) vs closed form:")
u, se = mc_control(x, t, spec, kernel, [0.0], T, h=1e-2, n_samples=100_000, seed=3)
exact = control_single(x, t, mu, params)
print(f"  estimate {u[0]:.4f} +/- {se[0]:.4f}, closed form {exact[0]:.4f}")

print("\nnarrow kernel standing in for a delta end cost:")
sigma = 0.02
narrow = EndKernel.narrow(mu, sigma)
sample = sample_endpoints(x, t, spec, T, 200_000, seed=4)
log_z, se = estimate_log_z(sample, narrow, [0.0])
rho = math.exp(-((x[0] - mu[0]) ** 2) / (2 * params.nu * T)) / math.sqrt(2 * math.pi * params.nu * T)
print(f"  estimate exp(log Z) {math.exp(log_z):.6f} vs "
      f"rho(mu, T | x, t) * sigma * sqrt(2 pi) = {rho * sigma * math.sqrt(2 * math.pi):.6f}")
