"""Factored end costs over agent-target assignments.

An end cost assigns a real penalty E(s) to every full labeling
s = (s_1, ..., s_n) of agents to targets.  It is stored as a sum of factors
over small agent subsets plus a labeling-independent offset, which is the
structure exact inference exploits.  Agent indices and target labels are
0-based throughout the code (file formats use 1-based labels).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np


class GraphGenerationError(RuntimeError):
    """Random graph construction failed (bad parity or too many rejections)."""


@dataclass(frozen=True)
class CostFactor:
    """One additive term E_alpha(s_alpha) over the agents in ``agents``.

    ``table`` has shape (m,) * len(agents); axis i indexes the label of
    agents[i].
    """

    agents: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self):
        agents = tuple(int(a) for a in self.agents)
        if len(agents) == 0:
            raise ValueError("factor scope must be non-empty")
        if len(set(agents)) != len(agents):
            raise ValueError(f"factor scope {agents} contains duplicates")
        table = np.array(self.table, dtype=float)
        if table.ndim != len(agents):
            raise ValueError(
                f"table has {table.ndim} axes but scope has {len(agents)} agents"
            )
        if table.ndim > 0 and len(set(table.shape)) != 1:
            raise ValueError(f"table must be square in every axis, got shape {table.shape}")
        if not np.all(np.isfinite(table)):
            raise ValueError("factor table must be finite")
        table.setflags(write=False)
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "table", table)

    @property
    def num_targets(self) -> int:
        return self.table.shape[0]


@dataclass(frozen=True)
class FactoredEndCost:
    """E(s) = constant_offset + sum of factor tables evaluated at s."""

    factors: tuple[CostFactor, ...]
    constant_offset: float = 0.0

    def __post_init__(self):
        factors = tuple(self.factors)
        offset = float(self.constant_offset)
        if not math.isfinite(offset):
            raise ValueError("constant_offset must be finite")
        cards = {f.num_targets for f in factors}
        if len(cards) > 1:
            raise ValueError(f"factors disagree on the number of targets: {sorted(cards)}")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "constant_offset", offset)

    def total(self, labels) -> float:
        """Evaluate E at a full labeling (0-based target labels)."""
        labels = tuple(int(s) for s in labels)
        value = self.constant_offset
        for fac in self.factors:
            value += float(fac.table[tuple(labels[a] for a in fac.agents)])
        return value


@dataclass(frozen=True)
class RelationGraph:
    """Undirected simple graph with signed edge strengths.

    Edges are stored as (a, b, strength) with a < b; the sign of the strength
    is the sign of the relation.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("graph needs at least one node")
        seen = set()
        norm = []
        for a, b, c in self.edges:
            a, b, c = int(a), int(b), float(c)
            if a == b:
                raise ValueError(f"self-loop at node {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) outside 0..{n - 1}")
            if a > b:
                a, b = b, a
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a}, {b})")
            if not math.isfinite(c) or c == 0.0:
                raise ValueError(f"edge ({a}, {b}) strength must be finite and nonzero, got {c}")
            seen.add((a, b))
            norm.append((a, b, c))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(norm))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for a, b, _ in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg


def firemen_cost_dense(labels, n: int, m: int, c: float) -> float:
    """Balanced-occupancy penalty, evaluated through both closed forms.

    With count_f the number of agents assigned to target f, the penalty is
    c * sum_f (count_f - n/m)^2, which equals c * (sum_{a,b} [s_a == s_b]
    - n^2/m) over all ordered agent pairs including a == b.  Both forms are
    evaluated and cross-checked before returning.
    """
    labels = tuple(int(s) for s in labels)
    if len(labels) != n:
        raise ValueError(f"labeling has length {len(labels)}, expected {n}")
    if any(s < 0 or s >= m for s in labels):
        raise ValueError(f"labels must lie in 0..{m - 1}, got {labels}")
    if c <= 0:
        raise ValueError(f"cost scale c must be > 0, got {c}")
    counts = np.bincount(labels, minlength=m)
    by_counts = c * float(np.sum((counts - n / m) ** 2))
    pair_matches = sum(1 for a in range(n) for b in range(n) if labels[a] == labels[b])
    by_pairs = c * (pair_matches - n * n / m)
    assert abs(by_counts - by_pairs) <= 1e-9 * (1.0 + abs(by_counts)), (by_counts, by_pairs)
    return by_counts


def firemen_factors(n: int, m: int, c: float) -> FactoredEndCost:
    """Pairwise factorization of the balanced-occupancy penalty.

    Every unordered agent pair gets the table 2c * [s_a == s_b]; the ordered
    diagonal terms (a == b, worth c*n) and the -c*n^2/m constant are folded
    into the offset, so the total reproduces ``firemen_cost_dense`` exactly.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 agents and m >= 1 targets")
    if c <= 0:
        raise ValueError(f"cost scale c must be > 0, got {c}")
    table = 2.0 * c * np.eye(m)
    factors = tuple(CostFactor((a, b), table) for a, b in combinations(range(n), 2))
    offset = c * n - c * n * n / m
    return FactoredEndCost(factors, offset)


def holiday_factors(graph: RelationGraph, num_targets: int) -> FactoredEndCost:
    """One factor -c_ab * [s_a == s_b] per relation edge.

    Positive relations reward sharing a target, negative ones penalize it;
    unrelated pairs produce no factor at all.  ``num_targets`` fixes the
    label-space size of the tables.
    """
    if num_targets < 1:
        raise ValueError(f"need num_targets >= 1, got {num_targets}")
    factors = tuple(
        CostFactor((a, b), -c * np.eye(num_targets)) for a, b, c in graph.edges
    )
    return FactoredEndCost(factors, 0.0)


_MAX_PAIRING_ATTEMPTS = 500


def random_regular_graph(
    n: int, degree: int, strength_magnitude: float, seed: int
) -> RelationGraph:
    """Uniform simple ``degree``-regular graph with random +/- strengths.

    Uses the pairing (configuration) model: each node contributes ``degree``
    stubs, the stub list is shuffled and paired off, and the draw is rejected
    whenever a self-loop or parallel edge appears.  Conditioned on acceptance
    the simple graph is uniform.  Each edge strength is +/-
    ``strength_magnitude`` with equal probability.  Deterministic per seed.
    """
    if degree < 1 or n < 2:
        raise GraphGenerationError(f"need n >= 2 and degree >= 1, got n={n}, degree={degree}")
    if degree >= n:
        raise GraphGenerationError(f"degree {degree} must be smaller than n={n}")
    if (n * degree) % 2 != 0:
        raise GraphGenerationError(f"n*degree must be even, got n={n}, degree={degree}")
    if strength_magnitude <= 0:
        raise GraphGenerationError(f"strength magnitude must be > 0, got {strength_magnitude}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(_MAX_PAIRING_ATTEMPTS):
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        if np.any(lo == hi):
            continue
        keys = lo * n + hi
        if len(np.unique(keys)) != len(keys):
            continue
        edge_order = np.argsort(keys)
        signs = rng.integers(0, 2, size=len(keys)) * 2 - 1
        edges = tuple(
            (int(lo[i]), int(hi[i]), float(signs[j] * strength_magnitude))
            for j, i in enumerate(edge_order)
        )
        return RelationGraph(n, edges)
    raise GraphGenerationError(
        f"pairing model failed to produce a simple {degree}-regular graph on "
        f"{n} nodes after {_MAX_PAIRING_ATTEMPTS} attempts"
    )
