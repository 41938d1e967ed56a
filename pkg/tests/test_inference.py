import math
import time
from itertools import product

import numpy as np
import pytest

from pimas.endcost import CostFactor, FactoredEndCost, firemen_factors, holiday_factors, random_regular_graph
from pimas.gaussian import mixture_posterior
from pimas.inference import (
    AssignmentMarginals,
    EliminationOrder,
    EnumerationSizeError,
    TreewidthError,
    brute_force,
    eliminate,
    log_partition,
    min_degree_order,
)
from pimas.model import ControlParams

EMPTY = FactoredEndCost((), 0.0)


def enumeration_oracle(tables, end_cost, lam):
    """Plain-python reference: loop every labeling, work in linear domain."""
    n, m = tables.shape
    shift = tables.sum()  # keep exponents tame; cancels in the marginals
    weights = {}
    for labels in product(range(m), repeat=n):
        logw = sum(tables[a, labels[a]] for a in range(n)) - end_cost.total(labels) / lam
        weights[labels] = math.exp(logw - shift / n)
    z = sum(weights.values())
    marg = np.zeros((n, m))
    for labels, w in weights.items():
        for a in range(n):
            marg[a, labels[a]] += w
    return marg / z, math.log(z) + shift / n


def test_brute_force_uniform_case():
    marg, _ = brute_force(np.zeros((3, 4)), EMPTY, 1.0)
    assert marg.probs == pytest.approx(np.full((3, 4), 0.25), abs=1e-15)


def test_brute_force_four_term_example():
    # four-term hand enumeration: E = {2,0,0,2} at lam=1, zero tables
    marg, log_z = brute_force(np.zeros((2, 2)), firemen_factors(2, 2, 1.0), 1.0)
    assert marg.probs[0] == pytest.approx([0.5, 0.5], abs=1e-14)
    assert log_z == pytest.approx(math.log(2.0 + 2.0 * math.exp(-2.0)), rel=1e-14)
    # each split labeling carries mass 1/(2 + 2 e^-2) = 0.44040
    split_mass = 1.0 / (2.0 + 2.0 * math.exp(-2.0))
    assert split_mass == pytest.approx(0.44039853898894116)
    oracle_marg, oracle_z = enumeration_oracle(np.zeros((2, 2)), firemen_factors(2, 2, 1.0), 1.0)
    assert marg.probs == pytest.approx(oracle_marg, abs=1e-14)
    assert log_z == pytest.approx(oracle_z, rel=1e-14)


def test_single_agent_reduces_to_mixture_posterior():
    params = ControlParams(nu=1.0, R=1.0, alpha=1e3, epsilon=0.01, T=1.0)
    targets = np.array([[-1.0], [0.3], [1.0]])
    x, t = np.array([0.4]), 0.2
    log_w = np.array([-1.0, 0.5, 0.0])
    sigma2 = params.nu * (params.T - t + params.R / params.alpha)
    tables = (-((x[0] - targets[:, 0]) ** 2) / (2 * sigma2))[None, :] + log_w[None, :]
    marg, _ = brute_force(tables, EMPTY, params.lam)
    expected = mixture_posterior(x, t, targets, log_w, params)
    assert marg.probs[0] == pytest.approx(expected, abs=1e-14)


def test_brute_force_size_guard():
    with pytest.raises(EnumerationSizeError):
        brute_force(np.zeros((9, 10)), EMPTY, 1.0)


def test_min_degree_order_chain_and_complete():
    chain = min_degree_order([(0, 1), (1, 2)], 3)
    assert chain.induced_width == 1
    complete = min_degree_order([f.agents for f in firemen_factors(5, 2, 1.0).factors], 5)
    assert complete.induced_width == 4
    empty = min_degree_order([], 4)
    assert empty.induced_width == 0
    assert empty.order == (0, 1, 2, 3)  # lowest-index tie-breaking


def test_elimination_order_validation():
    with pytest.raises(ValueError):
        EliminationOrder((0, 0, 1), 1)


def _random_instance(rng, max_scope=2):
    n = int(rng.integers(2, 8))
    m = int(rng.integers(2, 4))
    lam = float(rng.choice([0.5, 1.0, 2.0]))
    tables = rng.uniform(-5, 5, size=(n, m))
    factors = []
    for _ in range(int(rng.integers(1, n + 2))):
        size = int(rng.integers(1, max_scope + 1)) if n > 2 else 2
        scope = tuple(int(v) for v in rng.choice(n, size=min(size, n), replace=False))
        factors.append(CostFactor(scope, rng.uniform(-3, 3, size=(m,) * len(scope))))
    return tables, FactoredEndCost(tuple(factors), float(rng.uniform(-1, 1))), lam


@pytest.mark.parametrize("max_scope", [2, 3])
def test_eliminate_matches_brute_force(max_scope):
    rng = np.random.default_rng(100 + max_scope)
    for _ in range(60):
        tables, end_cost, lam = _random_instance(rng, max_scope)
        n = tables.shape[0]
        order = min_degree_order((f.agents for f in end_cost.factors), n)
        bm, bz = brute_force(tables, end_cost, lam)
        em, ez = eliminate(tables, end_cost, lam, order)
        assert np.max(np.abs(bm.probs - em.probs)) <= 1e-10
        assert abs(bz - ez) <= 1e-8
        assert log_partition(tables, end_cost, lam, order) == pytest.approx(ez, abs=1e-10)


def test_eliminate_matches_enumeration_oracle():
    rng = np.random.default_rng(77)
    tables, end_cost, lam = _random_instance(rng)
    n = tables.shape[0]
    order = min_degree_order((f.agents for f in end_cost.factors), n)
    em, ez = eliminate(tables, end_cost, lam, order)
    om, oz = enumeration_oracle(tables, end_cost, lam)
    assert np.max(np.abs(em.probs - om)) <= 1e-10
    assert ez == pytest.approx(oz, abs=1e-8)


def test_disconnected_agents_factorize():
    rng = np.random.default_rng(5)
    tables = rng.uniform(-2, 2, size=(4, 3))
    end_cost = FactoredEndCost((CostFactor((0, 1), rng.uniform(-1, 1, size=(3, 3))),), 0.0)
    order = min_degree_order([(0, 1)], 4)
    marg, _ = eliminate(tables, end_cost, 1.0, order)
    for a in (2, 3):
        p = np.exp(tables[a] - tables[a].max())
        p /= p.sum()
        assert marg.probs[a] == pytest.approx(p, abs=1e-14)


def test_marginal_normalization():
    rng = np.random.default_rng(13)
    for _ in range(20):
        tables, end_cost, lam = _random_instance(rng)
        order = min_degree_order((f.agents for f in end_cost.factors), tables.shape[0])
        marg, _ = eliminate(tables, end_cost, lam, order)
        assert np.all(np.abs(marg.probs.sum(axis=1) - 1.0) <= 1e-12)
        assert np.all(marg.probs >= 0)


def test_offset_invariance():
    rng = np.random.default_rng(21)
    tables, end_cost, lam = _random_instance(rng)
    n = tables.shape[0]
    order = min_degree_order((f.agents for f in end_cost.factors), n)
    m0, z0 = eliminate(tables, end_cost, lam, order)
    for c in (5.0, -3.0, 250.0):
        shifted = FactoredEndCost(end_cost.factors, end_cost.constant_offset + c)
        m1, z1 = eliminate(tables, shifted, lam, order)
        assert z1 == pytest.approx(z0 - c / lam, abs=1e-10)
        assert np.max(np.abs(m1.probs - m0.probs)) <= 1e-10
    # the same shift through a factor table instead of the offset
    bumped = FactoredEndCost(
        (CostFactor(end_cost.factors[0].agents, end_cost.factors[0].table + 4.0),)
        + end_cost.factors[1:],
        end_cost.constant_offset,
    )
    m2, z2 = eliminate(tables, bumped, lam, order)
    assert z2 == pytest.approx(z0 - 4.0 / lam, abs=1e-10)
    assert np.max(np.abs(m2.probs - m0.probs)) <= 1e-10


def test_permutation_equivariance():
    rng = np.random.default_rng(31)
    tables, end_cost, lam = _random_instance(rng)
    n = tables.shape[0]
    perm = rng.permutation(n)
    # relabel agent a -> perm[a]: new index i holds old agent argsort(perm)[i]
    p_tables = tables[np.argsort(perm)]
    p_factors = tuple(
        CostFactor(tuple(int(perm[a]) for a in f.agents), f.table) for f in end_cost.factors
    )
    p_cost = FactoredEndCost(p_factors, end_cost.constant_offset)
    order = min_degree_order((f.agents for f in end_cost.factors), n)
    p_order = min_degree_order((f.agents for f in p_factors), n)
    m0, z0 = eliminate(tables, end_cost, lam, order)
    m1, z1 = eliminate(p_tables, p_cost, lam, p_order)
    assert z1 == pytest.approx(z0, abs=1e-10)
    assert np.max(np.abs(m1.probs[perm] - m0.probs)) <= 1e-10


def test_low_temperature_concentrates_on_minimizer():
    rng = np.random.default_rng(41)
    for _ in range(10):
        n, m = 4, 3
        tables = rng.uniform(-1, 1, size=(n, m))
        factors = tuple(
            CostFactor((a, b), rng.uniform(-1, 1, size=(m, m)))
            for a, b in ((0, 1), (1, 2), (2, 3))
        )
        end_cost = FactoredEndCost(factors, 0.0)
        lam = 0.02
        best, best_val = None, np.inf
        for labels in product(range(m), repeat=n):
            val = end_cost.total(labels) - lam * sum(tables[a, labels[a]] for a in range(n))
            if val < best_val:
                best, best_val = labels, val
        order = min_degree_order((f.agents for f in factors), n)
        marg, _ = eliminate(tables, end_cost, lam, order)
        assert tuple(np.argmax(marg.probs, axis=1)) == best


def test_treewidth_cap_error_names_clique():
    tables = np.zeros((6, 3))
    end_cost = firemen_factors(6, 3, 1.0)
    order = min_degree_order((f.agents for f in end_cost.factors), 6)
    with pytest.raises(TreewidthError, match="agents"):
        eliminate(tables, end_cost, 1.0, order, clique_cap=100)


def test_holiday_42_inference_completes_quickly():
    graph = random_regular_graph(42, 3, 1.0, seed=0)
    end_cost = holiday_factors(graph, 3)
    order = min_degree_order((f.agents for f in end_cost.factors), 42)
    assert order.induced_width <= 10
    rng = np.random.default_rng(3)
    tables = rng.uniform(-3, 0, size=(42, 3))
    t0 = time.perf_counter()
    marg, log_z = eliminate(tables, end_cost, 1.0, order)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    assert np.all(np.abs(marg.probs.sum(axis=1) - 1.0) <= 1e-12)
    assert np.isfinite(log_z)
    # determinism of the whole pipeline
    marg2, log_z2 = eliminate(tables, end_cost, 1.0, order)
    assert np.array_equal(marg.probs, marg2.probs) and log_z == log_z2


def test_assignment_marginals_validation():
    with pytest.raises(ValueError):
        AssignmentMarginals(np.array([[0.5, 0.6]]))
    with pytest.raises(ValueError):
        AssignmentMarginals(np.array([[-0.1, 1.1]]))


def test_eliminate_order_must_cover_agents():
    with pytest.raises(ValueError, match="order"):
        eliminate(np.zeros((3, 2)), EMPTY, 1.0, EliminationOrder((0, 1), 0))
