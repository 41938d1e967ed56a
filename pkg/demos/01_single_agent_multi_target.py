"""Single agent, two targets: posteriors, controls and delayed commitment.

An agent sitting between two targets keeps its options open while the
horizon is long: the target posterior stays near 50/50, the expected target
sits near the midpoint, and the control is nearly zero.  As t approaches T
the effective variance nu*(T - t + R/alpha) collapses and the posterior
snaps to the nearer target.
"""
import numpy as np

from pimas import ControlParams, cost_to_go, effective_variance, mixture_control, mixture_posterior

params = ControlParams(nu=1.0, R=1.0, alpha=1e3, epsilon=0.01, T=1.0)
targets = np.array([[-1.0], [1.0]])
log_w = np.array([0.0, 0.0])  # equal end costs
x = np.array([0.15])          # slightly right of the midpoint

print(f"agent at x = {x[0]}, targets at -1 and +1, equal weights\n")
print(f"{'t':>5} {'eff.var':>9} {'p(right)':>9} {'u':>8} {'cost-to-go':>11}")
for t in (0.0, 0.5, 0.8, 0.9, 0.95, 0.99, 1.0):
    p = mixture_posterior(x, t, targets, log_w, params)
    u = mixture_control(x, t, targets, log_w, params)
    j = cost_to_go(x, t, targets, log_w, params)
    print(f"{t:5.2f} {effective_variance(t, params):9.4f} {p[1]:9.4f} {u[0]:8.3f} {j:11.4f}")

print("""
While nu*(T-t) dwarfs the target separation the posterior barely moves and
the control hedges; once the remaining noise cannot carry the agent to the
far target anymore, the posterior (and with it the control) commits.""")

# the control is exactly the posterior-weighted average of single-target pulls
from pimas import control_single

t = 0.9
p = mixture_posterior(x, t, targets, log_w, params)
u_mix = mixture_control(x, t, targets, log_w, params)
u_avg = sum(p[s] * control_single(x, t, targets[s], params) for s in range(2))
print(f"at t={t}: mixture control {u_mix[0]:+.6f} == "
      f"posterior-weighted single-target controls {u_avg[0]:+.6f}")
