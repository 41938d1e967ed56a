"""Self-contained validation suites with machine-readable reports.

Three suites: ``gradient`` (finite differences of the closed-form mixture
log-partition against the analytic controls), ``oracle`` (variable
elimination against brute-force enumeration on random instances), and
``montecarlo`` (sampled estimates against the Gaussian closed forms).  Each
check reports the measured error next to its tolerance.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import logsumexp

from . import gaussian, inference, montecarlo
from .endcost import CostFactor, FactoredEndCost
from .model import ControlParams

SUITES = ("gradient", "oracle", "montecarlo", "all")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "measured", float(self.measured))
        object.__setattr__(self, "tolerance", float(self.tolerance))


def gradient_suite(n_instances: int = 1000, seed: int = 20260810, h: float = 1e-5,
                   rel_tol: float = 1e-6, abs_floor: float = 1e-9) -> list[CheckResult]:
    """Finite-difference check of nu * grad log Z against mixture_control.

    Random well-conditioned instances (t kept away from the horizon so the
    effective variance stays comfortably above h).  The finite difference
    goes through the raw log-sum-exp of single-target log-partitions, a path
    disjoint from the posterior-averaging formula it is checked against.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_detail = ""
    for i in range(n_instances):
        k = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        params = ControlParams(
            nu=float(rng.choice([0.5, 1.0, 2.0])),
            R=float(rng.choice([0.5, 1.0, 2.0])),
            alpha=float(rng.choice([10.0, 100.0, 1000.0])),
            epsilon=0.01,
            T=1.0,
        )
        t = float(rng.uniform(0.0, 0.9 * params.T))
        x = rng.uniform(-2.0, 2.0, size=k)
        targets = rng.uniform(-2.0, 2.0, size=(m, k))
        log_w = rng.uniform(-3.0, 3.0, size=m)
        u = gaussian.mixture_control(x, t, targets, log_w, params)

        def log_z(pt):
            vals = [log_w[s] + gaussian.log_z_single(pt, t, targets[s], params) for s in range(m)]
            return float(logsumexp(vals))

        for d in range(k):
            xp, xm = x.copy(), x.copy()
            xp[d] += h
            xm[d] -= h
            fd = params.nu * (log_z(xp) - log_z(xm)) / (2.0 * h)
            tol = max(rel_tol * abs(u[d]), abs_floor)
            ratio = abs(fd - u[d]) / tol
            if ratio > worst:
                worst = ratio
                worst_detail = f"instance {i}, coord {d}: fd={fd:.3e}, analytic={u[d]:.3e}"
    return [CheckResult(
        name="gradient-consistency",
        passed=worst <= 1.0,
        measured=worst,
        tolerance=1.0,
        detail=f"max |fd - u| / tol over {n_instances} instances; worst at {worst_detail}",
    )]


def random_instance(rng: np.random.Generator, n: int | None = None, m: int | None = None,
                    lam: float | None = None):
    """A random inference instance: unary tables, pairwise end cost, lambda."""
    n = int(rng.integers(2, 9)) if n is None else n
    m = int(rng.integers(2, 4)) if m is None else m
    lam = float(rng.choice([0.5, 1.0, 2.0])) if lam is None else lam
    tables = rng.uniform(-5.0, 5.0, size=(n, m))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    n_factors = int(rng.integers(1, len(pairs) + 1))
    chosen = rng.choice(len(pairs), size=n_factors, replace=False)
    factors = tuple(
        CostFactor(pairs[int(i)], rng.uniform(-3.0, 3.0, size=(m, m))) for i in chosen
    )
    end_cost = FactoredEndCost(factors, float(rng.uniform(-2.0, 2.0)))
    return tables, end_cost, lam


def oracle_suite(n_instances: int = 200, seed: int = 20260810,
                 marginal_tol: float = 1e-10, logz_tol: float = 1e-8) -> list[CheckResult]:
    """Variable elimination against brute-force enumeration."""
    rng = np.random.default_rng(seed)
    worst_marg = 0.0
    worst_logz = 0.0
    for _ in range(n_instances):
        tables, end_cost, lam = random_instance(rng)
        n = tables.shape[0]
        order = inference.min_degree_order((f.agents for f in end_cost.factors), n)
        bf_m, bf_z = inference.brute_force(tables, end_cost, lam)
        ve_m, ve_z = inference.eliminate(tables, end_cost, lam, order)
        worst_marg = max(worst_marg, float(np.max(np.abs(bf_m.probs - ve_m.probs))))
        worst_logz = max(worst_logz, abs(bf_z - ve_z))
    return [
        CheckResult("oracle-marginals", worst_marg <= marginal_tol, worst_marg,
                    marginal_tol, f"max abs marginal diff over {n_instances} instances"),
        CheckResult("oracle-log-partition", worst_logz <= logz_tol, worst_logz,
                    logz_tol, f"max abs log Z diff over {n_instances} instances"),
    ]


def montecarlo_suite(n_samples: int = 100_000, seed: int = 20260810) -> list[CheckResult]:
    """Sampled log Z, survival and control against Gaussian closed forms.

    Uses a moderate end-cost stiffness so the end kernel is well conditioned
    for plain forward sampling and the 3-standard-error bands are tight; the
    near-delta regime is exercised by the unit tests.
    """
    params = ControlParams(nu=1.0, R=1.0, alpha=25.0, epsilon=0.01, T=1.0)
    T, t = params.T, 0.0
    mu = np.array([1.0])
    x = np.array([0.3])
    results = []

    # With b = V = 0 the endpoint law is exact for any dt; a coarse grid keeps
    # the suite quick.
    spec = montecarlo.DiffusionSpec(nu=params.nu, lam=params.lam, dt=(T - t) / 50)
    kernel = montecarlo.EndKernel.quadratic(mu, params.alpha, params.lam)
    sample = montecarlo.sample_endpoints(x, t, spec, T, n_samples, seed)
    mc_log_z, se = montecarlo.estimate_log_z(sample, kernel, np.array([0.0]))
    # Gaussian convolution of the kernel with the endpoint density, relative
    # to the convention that the closed form is 0 at x = mu.
    kernel_offset = 0.5 * math.log((params.R / params.alpha) / (T - t + params.R / params.alpha))
    closed = gaussian.log_z_single(x, t, mu, params) + kernel_offset
    results.append(CheckResult(
        "mc-log-partition", abs(mc_log_z - closed) <= 3 * se,
        abs(mc_log_z - closed), 3 * se,
        f"MC {mc_log_z:.6f} vs closed form {closed:.6f}, se={se:.2e}, N={n_samples}",
    ))

    v0 = 2.0
    kill_spec = montecarlo.DiffusionSpec(
        nu=params.nu, lam=params.lam,
        potential=lambda y, s: np.full(y.shape[0], v0), dt=1e-3,
    )
    killed = montecarlo.sample_endpoints(x, t, kill_spec, T, n_samples, seed + 1)
    expected = math.exp(-v0 * (T - t) / params.lam)
    se_surv = math.sqrt(expected * (1 - expected) / n_samples)
    results.append(CheckResult(
        "mc-killing-survival", abs(killed.survival_fraction - expected) <= 4 * se_surv,
        abs(killed.survival_fraction - expected), 4 * se_surv,
        f"survived {killed.survival_fraction:.5f} vs exp(-V(T-t)/lam)={expected:.5f}",
    ))

    u_mc, u_se = montecarlo.mc_control(x, t, spec, kernel, np.array([0.0]), T,
                                       h=1e-2, n_samples=n_samples, seed=seed + 2)
    u_exact = gaussian.control_single(x, t, mu, params)
    results.append(CheckResult(
        "mc-control", bool(np.all(np.abs(u_mc - u_exact) <= 3 * u_se)),
        float(np.max(np.abs(u_mc - u_exact))), float(np.max(3 * u_se)),
        f"MC control {u_mc[0]:.5f} vs closed form {u_exact[0]:.5f}, se={u_se[0]:.2e}",
    ))
    return results


def run_suite(name: str, *, gradient_instances: int = 1000, oracle_instances: int = 200,
              mc_samples: int = 100_000, seed: int = 20260810) -> dict:
    """Run one suite (or ``all``); returns a JSON-ready report."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    checks: list[CheckResult] = []
    if name in ("gradient", "all"):
        checks += gradient_suite(n_instances=gradient_instances, seed=seed)
    if name in ("oracle", "all"):
        checks += oracle_suite(n_instances=oracle_instances, seed=seed)
    if name in ("montecarlo", "all"):
        checks += montecarlo_suite(n_samples=mc_samples, seed=seed)
    return {
        "suite": name,
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
