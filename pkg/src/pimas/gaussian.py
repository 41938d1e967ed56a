"""Closed-form single-agent quantities for the zero-drift, zero-potential model.

With Gaussian transition density and a quadratic end cost of stiffness alpha
around a target mu, the log-partition of one agent is the quadratic

    log Z(x, t; mu) = -|x - mu|^2 / (2 nu (T - t + R/alpha))

(the additive constant is fixed so that log Z = 0 at x = mu), the optimal
control is (mu - x) / (T - t + R/alpha), and multi-target problems mix these
single-target quantities with posterior weights p(s | x, t).  All posterior
arithmetic is done in the log domain.
"""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .model import ControlParams, TargetSet


class DegeneratePosteriorError(ValueError):
    """Every mixture component has zero weight; the posterior is undefined."""


def _as_point(x) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"position must be a flat vector, got shape {arr.shape}")
    return arr


def _as_targets(targets) -> np.ndarray:
    if isinstance(targets, TargetSet):
        return targets.mu
    arr = np.asarray(targets, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def effective_variance(t: float, params: ControlParams) -> float:
    """Variance nu * (T - t + R/alpha) of the end-cost-smoothed kernel.

    This is the Brownian endpoint variance nu*(T - t) widened by the R/alpha
    term the quadratic end cost contributes; it stays strictly positive at
    t = T, which is what keeps the time discretization finite.
    """
    if t > params.T:
        raise ValueError(f"t={t} is past the horizon T={params.T}")
    return params.nu * (params.T - t + params.R / params.alpha)


def log_z_single(x, t: float, mu, params: ControlParams) -> float:
    """Single-target log-partition, normalized to 0 at x = mu."""
    x = _as_point(x)
    mu = _as_point(mu)
    if x.shape != mu.shape:
        raise ValueError(f"position has shape {x.shape} but target has shape {mu.shape}")
    return -float(np.sum((x - mu) ** 2)) / (2.0 * effective_variance(t, params))


def control_single(x, t: float, mu, params: ControlParams) -> np.ndarray:
    """Optimal single-target control (mu - x) / (T - t + R/alpha).

    Equals nu times the spatial gradient of ``log_z_single``; valid for
    t < T + R/alpha.
    """
    x = _as_point(x)
    mu = _as_point(mu)
    if x.shape != mu.shape:
        raise ValueError(f"position has shape {x.shape} but target has shape {mu.shape}")
    horizon = params.T - t + params.R / params.alpha
    if horizon <= 0.0:
        raise ValueError(f"t={t} is at or past T + R/alpha")
    return (mu - x) / horizon


def _log_posterior(x, t, targets, log_weights, params) -> np.ndarray:
    x = _as_point(x)
    mu = _as_targets(targets)
    if mu.shape[1] != x.shape[0]:
        raise ValueError(f"targets have dimension {mu.shape[1]} but position has {x.shape[0]}")
    log_w = np.asarray(log_weights, dtype=float)
    if log_w.shape != (mu.shape[0],):
        raise ValueError(f"need one log-weight per target, got shape {log_w.shape}")
    if not np.any(log_w > -np.inf):
        raise DegeneratePosteriorError("all target weights are zero")
    sigma2 = effective_variance(t, params)
    log_z = -np.sum((x[None, :] - mu) ** 2, axis=1) / (2.0 * sigma2)
    return log_w + log_z


def mixture_posterior(x, t: float, targets, log_weights, params: ControlParams) -> np.ndarray:
    """Target posterior p(s | x, t) proportional to w(s) Z(x, t; s).

    Returns a probability vector over targets, computed with log-sum-exp so
    that huge end costs cannot underflow.
    """
    log_post = _log_posterior(x, t, targets, log_weights, params)
    log_post = log_post - logsumexp(log_post)
    p = np.exp(log_post)
    return p / p.sum()


def mixture_control(x, t: float, targets, log_weights, params: ControlParams) -> np.ndarray:
    """Optimal multi-target control (mu_bar - x) / (T - t + R/alpha).

    mu_bar is the posterior-expected target, so this is identically the
    posterior-weighted average of the single-target controls.
    """
    x = _as_point(x)
    mu = _as_targets(targets)
    p = mixture_posterior(x, t, mu, log_weights, params)
    mu_bar = p @ mu
    return (mu_bar - x) / (params.T - t + params.R / params.alpha)


def cost_to_go(x, t: float, targets, log_weights, params: ControlParams) -> float:
    """Optimal cost-to-go -lam * log sum_s w(s) Z(x, t; s).

    Carries the same additive-constant convention as ``log_z_single`` (zero
    at x = mu for a unit-weight single target).
    """
    log_post = _log_posterior(x, t, targets, log_weights, params)
    return -params.lam * float(logsumexp(log_post))
