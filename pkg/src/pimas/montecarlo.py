"""Monte-Carlo partition-function estimation via killed-diffusion sampling.

For general drift b and potential V there is no closed form, but the
partition function is an expectation over the uncontrolled process:

    Z(x, t) = E[ sum_s w(s) Phi(y; s) ]

where y is the endpoint at time T of an uncontrolled Euler-Maruyama path
started at (x, t), killed along the way with per-step probability
V(x, t) dt / lam, and Phi a Gaussian end kernel around each target.  Killed
paths contribute zero weight.  Controls follow by central finite differences
of log Z with common random numbers across the +/- h evaluations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .model import readonly_array

DEFAULT_STEPS = 1000
KILL_PROB_CAP = 0.5


class StepSizeError(ValueError):
    """The per-step kill probability exceeded the cap; shrink dt."""


class DegenerateEstimateError(RuntimeError):
    """No surviving sample carried any weight; the estimate is undefined."""


@dataclass(frozen=True)
class DiffusionSpec:
    """Uncontrolled dynamics to sample: noise, temperature, drift, potential.

    ``drift(x, t) -> (N, k)`` and ``potential(x, t) -> (N,)`` are vectorized
    over a batch of positions; both default to zero.  ``dt`` fixes the
    sampling step; when None it defaults to (T - t)/1000 at sampling time.
    The temperature ``lam`` sets the killing rate V/lam.
    """

    nu: float
    lam: float
    drift: Callable[[np.ndarray, float], np.ndarray] | None = None
    potential: Callable[[np.ndarray, float], np.ndarray] | None = None
    dt: float | None = None

    def __post_init__(self):
        if self.nu <= 0 or self.lam <= 0:
            raise ValueError("nu and lam must be > 0")
        if self.dt is not None and self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")


@dataclass(frozen=True)
class EndpointSample:
    """Endpoints of N sampled paths plus their survival flags."""

    endpoints: np.ndarray  # (N, k)
    alive: np.ndarray      # (N,) bool

    def __post_init__(self):
        object.__setattr__(self, "endpoints", readonly_array(self.endpoints))
        object.__setattr__(self, "alive", readonly_array(self.alive, dtype=bool))

    @property
    def n_samples(self) -> int:
        return self.endpoints.shape[0]

    @property
    def survival_fraction(self) -> float:
        return float(np.mean(self.alive))


@dataclass(frozen=True)
class EndKernel:
    """Gaussian end kernel exp(-|y - mu_s|^2 / (2 width2)) with peak 1.

    Two constructions: ``quadratic(targets, alpha, lam)`` realizes the
    Boltzmann weight of the quadratic end cost (width2 = lam/alpha);
    ``narrow(targets, sigma)`` is a narrow bump standing in for a delta
    function (width2 = sigma^2), defaulting to sigma = 1% of the smallest
    target spacing.
    """

    targets: np.ndarray  # (m, k)
    width2: float
    kind: str

    def __post_init__(self):
        t = np.asarray(self.targets, dtype=float)
        if t.ndim == 1:
            t = t[:, None]
        object.__setattr__(self, "targets", readonly_array(t))
        if self.width2 <= 0:
            raise ValueError(f"kernel width^2 must be > 0, got {self.width2}")

    @classmethod
    def quadratic(cls, targets, alpha: float, lam: float) -> "EndKernel":
        return cls(targets, lam / alpha, "quadratic")

    @classmethod
    def narrow(cls, targets, sigma: float | None = None) -> "EndKernel":
        if sigma is None:
            t = np.asarray(targets, dtype=float)
            if t.ndim == 1:
                t = t[:, None]
            if t.shape[0] > 1:
                diffs = t[:, None, :] - t[None, :, :]
                d = np.sqrt(np.sum(diffs**2, axis=2))
                spacing = float(np.min(d[np.triu_indices(t.shape[0], k=1)]))
            else:
                spacing = 1.0
            sigma = 0.01 * spacing
        return cls(targets, sigma**2, "narrow")

    def log_phi(self, y: np.ndarray) -> np.ndarray:
        """(N, m) table of log kernel values at endpoints y (N, k)."""
        d2 = np.sum((y[:, None, :] - self.targets[None, :, :]) ** 2, axis=2)
        return -d2 / (2.0 * self.width2)


def sample_endpoints(x, t: float, spec: DiffusionSpec, T: float,
                     n_samples: int, seed: int) -> EndpointSample:
    """Forward-sample N uncontrolled killed-diffusion paths from (x, t) to T.

    Euler-Maruyama with fixed dt (final step clamped); each step kills a live
    path with probability V(x, t) dt / lam.  Noise and kill draws are made
    for every path at every step regardless of survival, so two runs with the
    same seed share their randomness path-by-path (the common-random-numbers
    device the control estimator relies on).
    """
    if n_samples < 1:
        raise ValueError(f"need n_samples >= 1, got {n_samples}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = x.shape[0]
    span = T - t
    if span <= 0:
        raise ValueError(f"need t < T, got t={t}, T={T}")
    dt = spec.dt if spec.dt is not None else span / DEFAULT_STEPS
    rng = np.random.default_rng(seed)
    y = np.tile(x, (n_samples, 1))
    alive = np.ones(n_samples, dtype=bool)
    now = t
    while now < T - 1e-12 * max(1.0, abs(T)):
        h = min(dt, T - now)
        if spec.potential is not None:
            v = np.asarray(spec.potential(y, now), dtype=float)
            if np.any(v < 0):
                raise ValueError("potential must be nonnegative wherever sampled")
            p_kill = v * h / spec.lam
            if np.any(p_kill[alive] > KILL_PROB_CAP + 1e-12):
                raise StepSizeError(
                    f"kill probability reached {float(np.max(p_kill[alive])):.3g} > "
                    f"{KILL_PROB_CAP}; use a smaller dt"
                )
            killed = rng.random(n_samples) < p_kill
            alive &= ~killed
        draws = rng.standard_normal((n_samples, k))
        b = spec.drift(y, now) if spec.drift is not None else 0.0
        y = y + b * h + math.sqrt(spec.nu * h) * draws
        now += h
    return EndpointSample(y, alive)


def _log_weights_per_sample(sample: EndpointSample, kernel: EndKernel, log_weights) -> np.ndarray:
    log_w = np.asarray(log_weights, dtype=float)
    if log_w.shape != (kernel.targets.shape[0],):
        raise ValueError(f"need one log-weight per target, got shape {log_w.shape}")
    log_vals = logsumexp(kernel.log_phi(sample.endpoints) + log_w[None, :], axis=1)
    return np.where(sample.alive, log_vals, -np.inf)


def estimate_log_z(sample: EndpointSample, kernel: EndKernel, log_weights) -> tuple[float, float]:
    """Estimate log Z as the log sample mean of the end-kernel weights.

    Returns (log_z, standard error of log_z).  The standard error comes from
    the delta method, se = std(W) / (mean(W) sqrt(N)), evaluated in the log
    domain; killed paths count as zero weight.
    """
    log_vals = _log_weights_per_sample(sample, kernel, log_weights)
    if not np.any(log_vals > -np.inf):
        raise DegenerateEstimateError("no surviving sample carries weight")
    n = sample.n_samples
    log_mean = float(logsumexp(log_vals) - math.log(n))
    log_mean_sq = float(logsumexp(2.0 * log_vals) - math.log(n))
    # Var(W)/mean(W)^2 = E[W^2]/E[W]^2 - 1, with the usual n/(n-1) correction.
    ratio = math.exp(log_mean_sq - 2.0 * log_mean) - 1.0
    se = math.sqrt(max(ratio, 0.0) / max(n - 1, 1))
    return log_mean, se


def mc_control(x, t: float, spec: DiffusionSpec, kernel: EndKernel, log_weights,
               T: float, h: float, n_samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Control nu * grad_x log Z by central differences of the MC estimate.

    Both evaluations of each coordinate pair reuse the same seed, so the
    Brownian increments and kill decisions are common random numbers and the
    difference is far less noisy than the individual estimates.  Returns
    (control vector, per-coordinate standard errors) with the error of each
    difference computed from the paired per-sample weights.
    """
    if h <= 0:
        raise ValueError(f"step h must be > 0, got {h}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = x.shape[0]
    u = np.empty(k)
    se = np.empty(k)
    for d in range(k):
        xp = x.copy()
        xm = x.copy()
        xp[d] += h
        xm[d] -= h
        sp = sample_endpoints(xp, t, spec, T, n_samples, seed)
        sm = sample_endpoints(xm, t, spec, T, n_samples, seed)
        lp = _log_weights_per_sample(sp, kernel, log_weights)
        lm = _log_weights_per_sample(sm, kernel, log_weights)
        if not (np.any(lp > -np.inf) and np.any(lm > -np.inf)):
            raise DegenerateEstimateError("no surviving sample carries weight")
        n = n_samples
        log_mean_p = logsumexp(lp) - math.log(n)
        log_mean_m = logsumexp(lm) - math.log(n)
        diff = float(log_mean_p - log_mean_m)
        # Paired delta method: Var(log mp - log mm) ~ Var(Wp/mp - Wm/mm)/N.
        resid = np.exp(lp - log_mean_p) - np.exp(lm - log_mean_m)
        var_diff = float(np.var(resid, ddof=1)) / n
        u[d] = spec.nu * diff / (2.0 * h)
        se[d] = spec.nu * math.sqrt(var_diff) / (2.0 * h)
    return u, se
