"""Exact assignment-posterior inference over factored end costs.

The joint weight over a full labeling s is

    exp( sum_a logZ[a, s_a] - E(s) / lam )

with logZ an (n, m) table of per-agent single-target log-partitions and E a
:class:`~pimas.endcost.FactoredEndCost`.  ``brute_force`` sums the m^n terms
directly and serves as the oracle; ``eliminate`` runs sum-product variable
elimination along a bucket tree in the log domain, with a downward calibration
pass so one upward/downward sweep yields every single-agent marginal and the
joint log-partition.  All factor products are sums of log tables and all
marginalizations are log-sum-exp, so end costs of hundreds of units cannot
underflow.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from .endcost import FactoredEndCost

BRUTE_FORCE_CAP = 10**7
DEFAULT_CLIQUE_CAP = 10**8


class EnumerationSizeError(ValueError):
    """The labeling space m^n exceeds the brute-force guard."""


class TreewidthError(RuntimeError):
    """An intermediate clique grew past the configured label-space cap."""


@dataclass(frozen=True)
class EliminationOrder:
    """A permutation of agent indices plus the induced width it achieves.

    The induced width is the size minus one of the largest cluster (an agent
    together with its live neighbors) formed while eliminating along the
    order, i.e. the standard graphical-models convention.
    """

    order: tuple[int, ...]
    induced_width: int

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError("order must be a permutation of 0..n-1")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "induced_width", int(self.induced_width))


@dataclass(frozen=True)
class AssignmentMarginals:
    """Per-agent probability vectors over targets, shape (n, m)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2:
            raise ValueError(f"marginals must be (n, m), got shape {p.shape}")
        if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("each marginal must be nonnegative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def m(self) -> int:
        return self.probs.shape[1]


def _logsumexp(a: np.ndarray, axis) -> np.ndarray:
    """Log-sum-exp reduction; tolerates all -inf slices."""
    amax = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(amax), amax, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - safe), axis=axis)) + np.squeeze(safe, axis=axis)
    return out


def _sorted_scope(fac) -> tuple[tuple[int, ...], np.ndarray]:
    """Reorder a factor's axes so the scope is ascending."""
    agents = fac.agents
    if all(agents[i] < agents[i + 1] for i in range(len(agents) - 1)):
        return agents, fac.table
    perm = tuple(np.argsort(agents))
    return tuple(agents[i] for i in perm), np.transpose(fac.table, perm)


def _embed(table: np.ndarray, scope: tuple[int, ...], big: tuple[int, ...], m: int) -> np.ndarray:
    # scope and big are sorted, scope is a subset of big: a reshape suffices.
    if scope == big:
        return table
    members = set(scope)
    shape = tuple(m if v in members else 1 for v in big)
    return table.reshape(shape)


def _check_tables(tables) -> np.ndarray:
    t = np.asarray(tables, dtype=float)
    if t.ndim != 2:
        raise ValueError(f"unary log-partition tables must be (n, m), got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("unary log-partition tables must be finite")
    return t


def brute_force(tables, end_cost: FactoredEndCost, lam: float):
    """Exact marginals and log-partition by summing all m^n labelings.

    Returns (AssignmentMarginals, log_z).  Guarded to m^n <= 10^7 entries;
    meant as the independent oracle for ``eliminate``.
    """
    tables = _check_tables(tables)
    n, m = tables.shape
    if m**n > BRUTE_FORCE_CAP:
        raise EnumerationSizeError(f"m^n = {m}^{n} exceeds the {BRUTE_FORCE_CAP:.0e} guard")
    full = tuple(range(n))
    log_joint = np.zeros((m,) * n)
    for a in range(n):
        log_joint += _embed(tables[a], (a,), full, m)
    for fac in end_cost.factors:
        scope, tab = _sorted_scope(fac)
        log_joint += _embed(-tab / lam, scope, full, m)
    log_joint -= end_cost.constant_offset / lam
    log_z = float(_logsumexp(log_joint, axis=tuple(range(n))))
    probs = np.empty((n, m))
    for a in range(n):
        other = tuple(i for i in range(n) if i != a)
        logp = _logsumexp(log_joint, axis=other) if other else log_joint
        logp = logp - _logsumexp(logp, axis=0)
        p = np.exp(logp)
        probs[a] = p / p.sum()
    return AssignmentMarginals(probs), log_z


def min_degree_order(scopes: Iterable[tuple[int, ...]], n: int) -> EliminationOrder:
    """Greedy minimum-degree elimination order with lowest-index tie-breaking.

    Builds the interaction graph (a clique per factor scope), repeatedly
    eliminates a minimum-degree node, and connects its neighbors.  Reports
    the induced width of the resulting order.
    """
    adj: list[set[int]] = [set() for _ in range(n)]
    for scope in scopes:
        for a, b in combinations(sorted(set(scope)), 2):
            adj[a].add(b)
            adj[b].add(a)
    remaining = set(range(n))
    order = []
    width = 0
    while remaining:
        v = min(remaining, key=lambda u: (len(adj[u]), u))
        nbrs = adj[v]
        width = max(width, len(nbrs))
        for a in nbrs:
            adj[a].update(nbrs - {a})
            adj[a].discard(v)
        order.append(v)
        remaining.remove(v)
        adj[v] = set()
    return EliminationOrder(tuple(order), width)


def eliminate(
    tables,
    end_cost: FactoredEndCost,
    lam: float,
    order: EliminationOrder,
    *,
    clique_cap: int = DEFAULT_CLIQUE_CAP,
):
    """All single-agent marginals and log Z by calibrated bucket elimination.

    The upward pass eliminates agents along ``order``, sending each bucket's
    marginalized product to the bucket of its earliest remaining agent; the
    downward pass sends the complementary messages back, after which every
    bucket holds the exact belief over its cluster.  Results agree with
    ``brute_force`` to float64 round-off.

    Raises :class:`TreewidthError` when an intermediate cluster's label space
    would exceed ``clique_cap`` entries.
    """
    tables = _check_tables(tables)
    n, m = tables.shape
    if len(order.order) != n:
        raise ValueError(f"order covers {len(order.order)} agents, expected {n}")
    pos = {v: i for i, v in enumerate(order.order)}

    # Buckets hold (scope, log-table) pairs keyed by earliest-eliminated agent.
    buckets: dict[int, list[tuple[tuple[int, ...], np.ndarray]]] = {v: [] for v in order.order}
    for a in range(n):
        buckets[a].append(((a,), tables[a]))
    for fac in end_cost.factors:
        scope, tab = _sorted_scope(fac)
        first = min(scope, key=pos.__getitem__)
        buckets[first].append((scope, -tab / lam))

    cluster: dict[int, tuple[int, ...]] = {}
    combined: dict[int, np.ndarray] = {}
    up_msg: dict[int, tuple[tuple[int, ...], np.ndarray]] = {}
    children: dict[int, list[int]] = {v: [] for v in order.order}
    parent: dict[int, int | None] = {}
    log_scalars = 0.0

    for v in order.order:
        items = buckets[v]
        scope_union = sorted(set().union(*(set(s) for s, _ in items)))
        cl = tuple(scope_union)
        if m ** len(cl) > clique_cap:
            raise TreewidthError(
                f"clique over agents {cl} needs {m}^{len(cl)} entries, "
                f"more than the cap of {clique_cap}"
            )
        acc = np.zeros((m,) * len(cl))
        for sc, tab in items:
            acc += _embed(tab, sc, cl, m)
        cluster[v] = cl
        combined[v] = acc
        axis = cl.index(v)
        msg = _logsumexp(acc, axis=axis)
        rest = tuple(u for u in cl if u != v)
        up_msg[v] = (rest, msg)
        if rest:
            p = min(rest, key=pos.__getitem__)
            parent[v] = p
            children[p].append(v)
            buckets[p].append((rest, msg))
        else:
            parent[v] = None
            log_scalars += float(msg)

    log_z = log_scalars - end_cost.constant_offset / lam

    # Downward calibration: parents are eliminated later, so reverse order
    # visits each parent before its children.
    down: dict[int, np.ndarray | None] = {v: None for v in order.order}
    for v in reversed(order.order):
        if not children[v]:
            continue
        cl = cluster[v]
        belief = combined[v] if down[v] is None else combined[v] + down[v]
        for c in children[v]:
            sep, msg = up_msg[c]
            partial = belief - _embed(msg, sep, cl, m)
            drop = tuple(i for i, u in enumerate(cl) if u not in sep)
            down_c = _logsumexp(partial, axis=drop) if drop else partial
            down[c] = _embed(down_c, sep, cluster[c], m)

    probs = np.empty((n, m))
    for v in order.order:
        cl = cluster[v]
        belief = combined[v] if down[v] is None else combined[v] + down[v]
        other = tuple(i for i, u in enumerate(cl) if u != v)
        logp = _logsumexp(belief, axis=other) if other else belief
        logp = logp - _logsumexp(logp, axis=0)
        p = np.exp(logp)
        probs[v] = p / p.sum()
    return AssignmentMarginals(probs), log_z


def log_partition(tables, end_cost: FactoredEndCost, lam: float, order: EliminationOrder,
                  *, clique_cap: int = DEFAULT_CLIQUE_CAP) -> float:
    """Joint log Z only (single upward elimination pass, no marginals)."""
    tables = _check_tables(tables)
    n, m = tables.shape
    if len(order.order) != n:
        raise ValueError(f"order covers {len(order.order)} agents, expected {n}")
    pos = {v: i for i, v in enumerate(order.order)}
    buckets: dict[int, list[tuple[tuple[int, ...], np.ndarray]]] = {v: [] for v in order.order}
    for a in range(n):
        buckets[a].append(((a,), tables[a]))
    for fac in end_cost.factors:
        scope, tab = _sorted_scope(fac)
        buckets[min(scope, key=pos.__getitem__)].append((scope, -tab / lam))
    total = -end_cost.constant_offset / lam
    for v in order.order:
        items = buckets[v]
        cl = tuple(sorted(set().union(*(set(s) for s, _ in items))))
        if m ** len(cl) > clique_cap:
            raise TreewidthError(
                f"clique over agents {cl} needs {m}^{len(cl)} entries, "
                f"more than the cap of {clique_cap}"
            )
        acc = np.zeros((m,) * len(cl))
        for sc, tab in items:
            acc += _embed(tab, sc, cl, m)
        msg = _logsumexp(acc, axis=cl.index(v))
        rest = tuple(u for u in cl if u != v)
        if rest:
            buckets[min(rest, key=pos.__getitem__)].append((rest, msg))
        else:
            total += float(msg)
    return total
