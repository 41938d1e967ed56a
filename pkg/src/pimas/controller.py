"""Joint optimal control and the adaptive-step SDE simulation loop.

Per control step the unary log-partition table is rebuilt from the current
joint state, the assignment posterior is computed exactly by variable
elimination, and each agent steers toward its posterior-expected target:

    u_a = (mu_bar_a - x_a) / (T - t + R/alpha)

The simulation uses the shrinking step dt = epsilon * (T - t + R/alpha), so
u * dt = epsilon * (mu_bar - x) stays small relative to the remaining gap all
the way to the horizon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .inference import AssignmentMarginals, EliminationOrder, eliminate, min_degree_order
from .model import ControlParams, JointState, Scenario, readonly_array


class SimulationError(RuntimeError):
    """A control step failed mid-run; ``partial`` holds the trajectory so far."""

    def __init__(self, message: str, partial: "Trajectory | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class ControlOutput:
    """Controls, expected targets and the marginals they came from."""

    controls: np.ndarray          # (n, k)
    expected_targets: np.ndarray  # (n, k)
    marginals: AssignmentMarginals
    log_z: float

    def __post_init__(self):
        object.__setattr__(self, "controls", readonly_array(self.controls))
        object.__setattr__(self, "expected_targets", readonly_array(self.expected_targets))
        object.__setattr__(self, "log_z", float(self.log_z))


@dataclass(frozen=True)
class Trajectory:
    """Seeded simulation record.

    Arrays are indexed by record; record j holds the state at ``times[j]``
    and the control, expected targets and marginals evaluated there.  The
    last record sits exactly at the termination time.
    """

    seed: int
    params: ControlParams
    times: np.ndarray             # (K,)
    states: np.ndarray            # (K, n, k)
    controls: np.ndarray          # (K, n, k)
    expected_targets: np.ndarray  # (K, n, k)
    marginals: np.ndarray         # (K, n, m)
    termination_time: float

    def __post_init__(self):
        for name in ("times", "states", "controls", "expected_targets", "marginals"):
            object.__setattr__(self, name, readonly_array(getattr(self, name)))

    @property
    def num_records(self) -> int:
        return self.times.shape[0]

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def k(self) -> int:
        return self.states.shape[2]

    @property
    def m(self) -> int:
        return self.marginals.shape[2]


def unary_log_z_table(x: np.ndarray, t: float, targets: np.ndarray, params: ControlParams) -> np.ndarray:
    """(n, m) table of log Z_a(x_a, t; mu_s) for the Gaussian model."""
    horizon = params.T - t + params.R / params.alpha
    if horizon <= 0.0:
        raise ValueError(f"t={t} is at or past T + R/alpha")
    sigma2 = params.nu * horizon
    d2 = np.sum((x[:, None, :] - targets[None, :, :]) ** 2, axis=2)
    return -d2 / (2.0 * sigma2)


def joint_control(state: JointState, scenario: Scenario,
                  order: EliminationOrder | None = None) -> ControlOutput:
    """Exact joint optimal control for the Gaussian model.

    Builds the unary log-partition table at the given state, runs exact
    inference over the factored end cost, and returns per-agent controls
    toward the expected targets mu_bar_a = sum_s p(s_a | x, t) mu_s.
    """
    params = scenario.params
    x, t = state.x, state.t
    mu = scenario.targets.mu
    if order is None:
        order = min_degree_order((f.agents for f in scenario.end_cost.factors), scenario.n)
    tables = unary_log_z_table(x, t, mu, params)
    marginals, log_z = eliminate(tables, scenario.end_cost, params.lam, order)
    mu_bar = marginals.probs @ mu
    horizon = params.T - t + params.R / params.alpha
    u = (mu_bar - x) / horizon
    return ControlOutput(u, mu_bar, marginals, log_z)


def numeric_control_check(state: JointState, scenario: Scenario, h: float = 1e-5) -> np.ndarray:
    """Controls as nu times a central finite difference of the joint log Z.

    Differentiates the exact inference log-partition with respect to every
    coordinate of every agent; on well-conditioned states this matches
    ``joint_control`` to about 1e-5 relative at h = 1e-5.  Quadratic cost in
    n*k inference calls, so intended for validation rather than control.
    """
    if h <= 0:
        raise ValueError(f"step h must be > 0, got {h}")
    params = scenario.params
    mu = scenario.targets.mu
    order = min_degree_order((f.agents for f in scenario.end_cost.factors), scenario.n)

    def log_z_at(x):
        tables = unary_log_z_table(x, state.t, mu, params)
        return eliminate(tables, scenario.end_cost, params.lam, order)[1]

    n, k = state.x.shape
    grad = np.empty((n, k))
    for a in range(n):
        for d in range(k):
            xp = state.x.copy()
            xm = state.x.copy()
            xp[a, d] += h
            xm[a, d] -= h
            grad[a, d] = (log_z_at(xp) - log_z_at(xm)) / (2.0 * h)
    return params.nu * grad


def adaptive_dt(t: float, params: ControlParams) -> float:
    """Shrinking time step epsilon * (T - t + R/alpha)."""
    return params.epsilon * (params.T - t + params.R / params.alpha)


def simulate(scenario: Scenario, seed: int,
             noise: Callable[[int, tuple[int, int]], np.ndarray] | None = None) -> Trajectory:
    """Euler-Maruyama simulation of the controlled joint SDE.

    Repeats: evaluate the joint control, record the step, then move every
    agent by (b_a + u_a) dt plus sqrt(nu dt) standard-normal noise, with the
    adaptive dt schedule.  The final step is shrunk to land exactly on T and
    a closing record is taken there.  Bit-identical for a fixed seed.

    ``noise`` overrides the seeded generator; it receives the step index and
    the (n, k) shape and must return the standard-normal draws (used by tests
    to replay or mirror a noise sequence).
    """
    if scenario.potential is not None:
        raise SimulationError("closed-form control requires a zero potential")
    params = scenario.params
    n, k = scenario.n, scenario.k
    mu = scenario.targets.mu
    order = min_degree_order((f.agents for f in scenario.end_cost.factors), n)
    rng = np.random.default_rng(seed)

    times: list[float] = []
    states: list[np.ndarray] = []
    controls: list[np.ndarray] = []
    expected: list[np.ndarray] = []
    margs: list[np.ndarray] = []

    def partial() -> Trajectory:
        return Trajectory(seed, params, np.array(times), np.array(states),
                          np.array(controls), np.array(expected), np.array(margs),
                          times[-1] if times else scenario.initial.t)

    x = scenario.initial.x.copy()
    t = scenario.initial.t
    step = 0
    while True:
        try:
            tables = unary_log_z_table(x, t, mu, params)
            marginals, _ = eliminate(tables, scenario.end_cost, params.lam, order)
        except Exception as exc:
            raise SimulationError(
                f"control failed at step {step}, t={t}: {exc}", partial()
            ) from exc
        mu_bar = marginals.probs @ mu
        u = (mu_bar - x) / (params.T - t + params.R / params.alpha)
        times.append(t)
        states.append(x.copy())
        controls.append(u)
        expected.append(mu_bar)
        margs.append(marginals.probs.copy())
        if t >= params.T:
            break
        dt = adaptive_dt(t, params)
        if t + dt >= params.T:
            dt = params.T - t
            t_next = params.T
        else:
            t_next = t + dt
        draws = noise(step, (n, k)) if noise is not None else rng.standard_normal((n, k))
        b = scenario.drift(x, t) if scenario.drift is not None else 0.0
        x = x + (b + u) * dt + math.sqrt(params.nu * dt) * draws
        t = t_next
        step += 1
    return Trajectory(seed, params, np.array(times), np.array(states),
                      np.array(controls), np.array(expected), np.array(margs), t)


def expected_step_count(params: ControlParams) -> int:
    """Number of steps the adaptive schedule takes from t=0 to exactly T.

    The remaining widened horizon tau = T - t + R/alpha contracts by (1 -
    epsilon) per full step, so full steps run until tau <= (R/alpha) / (1 -
    epsilon) and one clamped step lands on T.
    """
    ratio = (params.T + params.R / params.alpha) / (params.R / params.alpha)
    return int(math.ceil(math.log(ratio) / -math.log1p(-params.epsilon)))
