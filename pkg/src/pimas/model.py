"""Shared domain types: model constants, joint states, targets, scenarios.

All types are immutable after construction and hold read-only numpy arrays,
so they can be shared freely across concurrent simulation workers.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .endcost import FactoredEndCost, RelationGraph

# Vectorized per-agent drift b(x, t) -> (n, k) and cost rate V(x, t) -> (n,).
# Both must act row-wise (agent a's output depends on row a only).
DriftFn = Callable[[np.ndarray, float], np.ndarray]
PotentialFn = Callable[[np.ndarray, float], np.ndarray]

# Relative slack allowed between an explicitly supplied temperature and nu*R.
LAMBDA_REL_TOL = 1e-12


class ParameterError(ValueError):
    """A model constant is missing, non-finite, or out of range."""


class CouplingError(ParameterError):
    """The supplied temperature is inconsistent with nu * R."""


def readonly_array(values, dtype=float) -> np.ndarray:
    """Copy ``values`` into a C-contiguous array and lock it against writes."""
    arr = np.array(values, dtype=dtype, order="C")
    arr.setflags(write=False)
    return arr


def _require_positive(name: str, value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be finite and > 0, got {value}")
    return value


@dataclass(frozen=True)
class ControlParams:
    """Scalar model constants.

    The noise intensity ``nu`` (variance per unit time), control cost weight
    ``R``, end-cost stiffness ``alpha``, step fraction ``epsilon`` and horizon
    ``T`` are all strictly positive, with ``epsilon < 1``.  The temperature
    ``lam`` is tied to the other constants by ``nu = lam / R``; it is derived
    as ``nu * R`` when omitted and rejected when inconsistent.
    """

    nu: float
    R: float
    alpha: float
    epsilon: float
    T: float
    lam: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "nu", _require_positive("nu", self.nu))
        object.__setattr__(self, "R", _require_positive("R", self.R))
        object.__setattr__(self, "alpha", _require_positive("alpha", self.alpha))
        object.__setattr__(self, "epsilon", _require_positive("epsilon", self.epsilon))
        object.__setattr__(self, "T", _require_positive("T", self.T))
        if self.epsilon >= 1.0:
            raise ParameterError(f"epsilon must be < 1, got {self.epsilon}")
        derived = self.nu * self.R
        if self.lam is None:
            object.__setattr__(self, "lam", derived)
        else:
            lam = _require_positive("lam", self.lam)
            if abs(lam - derived) > LAMBDA_REL_TOL * derived:
                raise CouplingError(
                    f"lam={lam} violates the coupling nu*R={derived} "
                    f"(relative error {abs(lam - derived) / derived:.3e})"
                )
            object.__setattr__(self, "lam", lam)

    def as_dict(self) -> dict[str, float]:
        return {
            "nu": self.nu,
            "R": self.R,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "T": self.T,
            "lambda": self.lam,
        }


_PARAM_KEYS = {"nu", "R", "alpha", "epsilon", "T"}
_LAMBDA_KEYS = {"lam", "lambda"}


def validate_params(record) -> ControlParams:
    """Build validated :class:`ControlParams` from a raw record.

    ``record`` is a mapping with keys nu, R, alpha, epsilon, T and an optional
    lambda (spelled ``lambda`` or ``lam``), or an existing ControlParams
    (re-validated and returned unchanged, so the function is idempotent).
    """
    if isinstance(record, ControlParams):
        record = record.as_dict()
    if not isinstance(record, Mapping):
        raise ParameterError(f"expected a mapping of parameters, got {type(record).__name__}")
    unknown = set(record) - _PARAM_KEYS - _LAMBDA_KEYS
    if unknown:
        raise ParameterError(f"unknown parameter field(s): {sorted(unknown)}")
    missing = _PARAM_KEYS - set(record)
    if missing:
        raise ParameterError(f"missing parameter field(s): {sorted(missing)}")
    lam = None
    for key in _LAMBDA_KEYS:
        if key in record:
            lam = record[key]
    return ControlParams(
        nu=record["nu"],
        R=record["R"],
        alpha=record["alpha"],
        epsilon=record["epsilon"],
        T=record["T"],
        lam=lam,
    )


def _positions(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{what} must be an (n, k) array with n >= 1, k >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must be finite")
    return readonly_array(arr)


@dataclass(frozen=True)
class JointState:
    """Time plus the stacked positions of all agents, shape (n, k)."""

    t: float
    x: np.ndarray

    def __post_init__(self):
        t = float(self.t)
        if not math.isfinite(t):
            raise ValueError(f"time must be finite, got {t}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", _positions(self.x, "positions"))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def k(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class TargetSet:
    """Fixed target positions, shape (m, k)."""

    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", _positions(self.mu, "targets"))

    @property
    def m(self) -> int:
        return self.mu.shape[0]

    @property
    def k(self) -> int:
        return self.mu.shape[1]


@dataclass(frozen=True)
class Scenario:
    """A complete control problem: agents, targets, end cost and constants.

    ``drift`` and ``potential`` default to None (zero); when supplied they
    must be vectorized row-wise evaluators (see DriftFn / PotentialFn).
    ``relations`` carries the relation graph for scenarios whose end cost was
    built from one, so run summaries can report edge statistics.
    """

    targets: TargetSet
    end_cost: FactoredEndCost
    params: ControlParams
    initial: JointState
    drift: DriftFn | None = None
    potential: PotentialFn | None = None
    relations: RelationGraph | None = None
    name: str = "custom"

    def __post_init__(self):
        if self.targets.k != self.initial.k:
            raise ValueError(
                f"targets have dimension {self.targets.k} but agents have {self.initial.k}"
            )
        if not (0.0 <= self.initial.t <= self.params.T):
            raise ValueError(
                f"initial time {self.initial.t} outside [0, T={self.params.T}]"
            )
        n, m = self.initial.n, self.targets.m
        for i, fac in enumerate(self.end_cost.factors):
            if any(a < 0 or a >= n for a in fac.agents):
                raise ValueError(f"factor {i} scope {fac.agents} references agents outside 0..{n - 1}")
            if fac.table.shape != (m,) * len(fac.agents):
                raise ValueError(
                    f"factor {i} table shape {fac.table.shape} does not match "
                    f"{len(fac.agents)} agents x {m} targets"
                )
        if self.relations is not None and self.relations.n != n:
            raise ValueError(
                f"relation graph has {self.relations.n} nodes but scenario has {n} agents"
            )

    @property
    def n(self) -> int:
        return self.initial.n

    @property
    def m(self) -> int:
        return self.targets.m

    @property
    def k(self) -> int:
        return self.initial.k
