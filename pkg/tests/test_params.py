import numpy as np
import pytest

from pimas.endcost import CostFactor, FactoredEndCost, firemen_factors
from pimas.model import (
    ControlParams,
    CouplingError,
    JointState,
    ParameterError,
    Scenario,
    TargetSet,
    validate_params,
)


BENCH = {"nu": 1.0, "R": 1.0, "alpha": 1e3, "epsilon": 0.01, "T": 1.0}


def test_lambda_derived_from_nu_R():
    p = validate_params(BENCH)
    assert p.lam == 1.0
    assert validate_params({**BENCH, "nu": 2.0, "R": 0.5}).lam == 1.0


def test_explicit_consistent_lambda_accepted():
    p = validate_params({**BENCH, "lambda": 1.0})
    assert p.lam == 1.0


def test_inconsistent_lambda_rejected():
    with pytest.raises(CouplingError):
        validate_params({**BENCH, "lambda": 2.0})
    with pytest.raises(CouplingError):
        ControlParams(nu=1.0, R=1.0, alpha=1.0, epsilon=0.5, T=1.0, lam=1.0 + 1e-6)
    # within the 1e-12 relative slack is fine
    ControlParams(nu=1.0, R=1.0, alpha=1.0, epsilon=0.5, T=1.0, lam=1.0 + 1e-13)


@pytest.mark.parametrize("field", ["nu", "R", "alpha", "epsilon", "T"])
def test_nonpositive_field_rejected_by_name(field):
    with pytest.raises(ParameterError, match=field):
        validate_params({**BENCH, field: 0.0})
    with pytest.raises(ParameterError, match=field):
        validate_params({**BENCH, field: -1.0})


def test_epsilon_must_be_below_one():
    with pytest.raises(ParameterError, match="epsilon"):
        validate_params({**BENCH, "epsilon": 1.0})


def test_missing_and_unknown_fields():
    with pytest.raises(ParameterError, match="missing"):
        validate_params({"nu": 1.0})
    with pytest.raises(ParameterError, match="unknown"):
        validate_params({**BENCH, "beta": 2.0})


def test_validate_params_idempotent():
    p = validate_params(BENCH)
    assert validate_params(p) == p
    assert validate_params(p.as_dict()) == p


def test_joint_state_shapes_and_bounds():
    s = JointState(0.0, [0.0, 1.0])
    assert s.x.shape == (2, 1) and s.n == 2 and s.k == 1
    s2 = JointState(0.5, [[0.0, 1.0], [2.0, 3.0]])
    assert s2.k == 2
    with pytest.raises(ValueError):
        JointState(0.0, [[np.inf]])
    with pytest.raises(ValueError):
        JointState(np.nan, [[0.0]])


def test_targets_validate():
    t = TargetSet([-1.0, 1.0])
    assert t.m == 2 and t.k == 1
    with pytest.raises(ValueError):
        TargetSet([[np.nan]])


def _scenario(**kw):
    base = dict(
        targets=TargetSet([-1.0, 1.0]),
        end_cost=firemen_factors(2, 2, 1.0),
        params=validate_params(BENCH),
        initial=JointState(0.0, [0.0, 0.0]),
    )
    base.update(kw)
    return Scenario(**base)


def test_scenario_validation():
    sc = _scenario()
    assert sc.n == 2 and sc.m == 2 and sc.k == 1
    with pytest.raises(ValueError, match="dimension"):
        _scenario(targets=TargetSet([[1.0, 0.0]]))
    with pytest.raises(ValueError, match="outside"):
        _scenario(initial=JointState(1.5, [0.0, 0.0]))
    bad_scope = FactoredEndCost((CostFactor((0, 5), np.zeros((2, 2))),), 0.0)
    with pytest.raises(ValueError, match="scope"):
        _scenario(end_cost=bad_scope)
    bad_shape = FactoredEndCost((CostFactor((0, 1), np.zeros((3, 3))),), 0.0)
    with pytest.raises(ValueError, match="shape"):
        _scenario(end_cost=bad_shape)


def test_types_are_immutable():
    sc = _scenario()
    with pytest.raises(ValueError):
        sc.initial.x[0, 0] = 5.0
    with pytest.raises(ValueError):
        sc.targets.mu[0, 0] = 5.0
