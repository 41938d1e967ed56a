"""Scenario files and the built-in benchmark scenarios.

A scenario file is a single JSON document.  Agent indices and target labels
are 1-based in files; positions may be written as flat numbers for 1-d
problems or as per-agent coordinate lists.  Schema::

    {
      "name": "two-teams",                 # optional
      "params": {"nu": 1.0, "R": 1.0, "alpha": 1000.0,
                 "epsilon": 0.01, "T": 1.0, "lambda": 1.0},   # lambda optional
      "targets": [-1.0, 1.0],              # or [[x, y], ...] for k > 1
      "start": [0.0, 0.0],                 # one entry per agent
      "t0": 0.0,                           # optional, default 0
      "end_cost": <one of the three forms below>
    }

End-cost forms::

    {"factors": [{"agents": [1, 2], "table": [[2, 0], [0, 2]]}],
     "constant_offset": 0.0}
    {"family": "firemen", "c": 1.0}
    {"family": "holiday", "edges": [[1, 2, 1.0], [2, 3, -1.0]]}

Factor tables are indexed by target label in the order the agents are listed.
Drift and potential cannot be expressed in files (they stay zero); build a
`Scenario` in code to attach them.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .endcost import (
    CostFactor,
    FactoredEndCost,
    RelationGraph,
    firemen_factors,
    holiday_factors,
    random_regular_graph,
)
from .inference import min_degree_order
from .model import ControlParams, JointState, ParameterError, Scenario, TargetSet, validate_params


class ScenarioFormatError(ValueError):
    """A scenario document is malformed; the message names the field."""


BUILTIN_SCENARIOS = ("firemen-2x2", "firemen-6x3", "holiday-42")

# Base seed for the holiday-42 relation graph; bumped until the min-degree
# induced width stays within the inference cap.
HOLIDAY_GRAPH_SEED = 0
HOLIDAY_WIDTH_CAP = 10


def _benchmark_params() -> ControlParams:
    return ControlParams(nu=1.0, R=1.0, alpha=1e3, epsilon=0.01, T=1.0)


def holiday_graph(n: int = 42, degree: int = 3, base_seed: int = HOLIDAY_GRAPH_SEED,
                  width_cap: int = HOLIDAY_WIDTH_CAP) -> RelationGraph:
    """Random 3-regular +/-1 relation graph with bounded elimination width.

    Regenerates with incremented seeds until the min-degree heuristic finds
    an induced width within ``width_cap``, so per-step inference stays cheap.
    """
    seed = base_seed
    while True:
        graph = random_regular_graph(n, degree, 1.0, seed)
        order = min_degree_order(((a, b) for a, b, _ in graph.edges), n)
        if order.induced_width <= width_cap:
            return graph
        seed += 1


def builtin_scenario(name: str) -> Scenario:
    """The three benchmark scenarios, with the standard parameter block."""
    params = _benchmark_params()
    if name == "firemen-2x2":
        return Scenario(
            targets=TargetSet([[-1.0], [1.0]]),
            end_cost=firemen_factors(2, 2, 1.0),
            params=params,
            initial=JointState(0.0, [[0.0], [0.0]]),
            name=name,
        )
    if name == "firemen-6x3":
        return Scenario(
            targets=TargetSet([[-1.0], [0.0], [1.0]]),
            end_cost=firemen_factors(6, 3, 1.0),
            params=params,
            initial=JointState(0.0, [[0.0]] * 6),
            name=name,
        )
    if name == "holiday-42":
        graph = holiday_graph()
        return Scenario(
            targets=TargetSet([[-1.0], [0.0], [1.0]]),
            end_cost=holiday_factors(graph, 3),
            params=params,
            initial=JointState(0.0, [[0.0]] * 42),
            relations=graph,
            name=name,
        )
    raise ScenarioFormatError(f"unknown scenario {name!r}; built-ins: {', '.join(BUILTIN_SCENARIOS)}")


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ScenarioFormatError(f"missing field {key!r} in {where}")
    return doc[key]


def _end_cost_from_dict(doc, n: int, m: int) -> tuple[FactoredEndCost, RelationGraph | None]:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("end_cost must be an object")
    family = doc.get("family")
    if family == "firemen":
        c = float(doc.get("c", 1.0))
        return firemen_factors(n, m, c), None
    if family == "holiday":
        edges = _require(doc, "edges", "end_cost")
        try:
            graph = RelationGraph(n, tuple((int(a) - 1, int(b) - 1, float(c)) for a, b, c in edges))
        except (TypeError, ValueError) as exc:
            raise ScenarioFormatError(f"bad end_cost.edges: {exc}") from exc
        return holiday_factors(graph, m), graph
    if family is not None:
        raise ScenarioFormatError(f"unknown end_cost.family {family!r}")
    factors = []
    for i, fac in enumerate(_require(doc, "factors", "end_cost")):
        agents = _require(fac, "agents", f"end_cost.factors[{i}]")
        table = _require(fac, "table", f"end_cost.factors[{i}]")
        try:
            factors.append(CostFactor(tuple(int(a) - 1 for a in agents), np.asarray(table, dtype=float)))
        except (TypeError, ValueError) as exc:
            raise ScenarioFormatError(f"bad end_cost.factors[{i}]: {exc}") from exc
    offset = float(doc.get("constant_offset", 0.0))
    try:
        return FactoredEndCost(tuple(factors), offset), None
    except ValueError as exc:
        raise ScenarioFormatError(f"bad end_cost: {exc}") from exc


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    try:
        params = validate_params(_require(doc, "params", "scenario"))
    except ParameterError as exc:
        raise ScenarioFormatError(f"bad params: {exc}") from exc
    try:
        targets = TargetSet(np.asarray(_require(doc, "targets", "scenario"), dtype=float))
        initial = JointState(float(doc.get("t0", 0.0)),
                             np.asarray(_require(doc, "start", "scenario"), dtype=float))
    except (TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"bad targets/start: {exc}") from exc
    end_cost, graph = _end_cost_from_dict(_require(doc, "end_cost", "scenario"),
                                          initial.n, targets.m)
    try:
        return Scenario(targets=targets, end_cost=end_cost, params=params, initial=initial,
                        relations=graph, name=str(doc.get("name", "custom")))
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc


def scenario_to_dict(scenario: Scenario) -> dict:
    if scenario.relations is not None:
        end_cost = {
            "family": "holiday",
            "edges": [[a + 1, b + 1, c] for a, b, c in scenario.relations.edges],
        }
    else:
        end_cost = {
            "factors": [
                {"agents": [a + 1 for a in fac.agents], "table": fac.table.tolist()}
                for fac in scenario.end_cost.factors
            ],
            "constant_offset": scenario.end_cost.constant_offset,
        }
    return {
        "name": scenario.name,
        "params": scenario.params.as_dict(),
        "targets": scenario.targets.mu.tolist(),
        "start": scenario.initial.x.tolist(),
        "t0": scenario.initial.t,
        "end_cost": end_cost,
    }


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Load a scenario file, or resolve a built-in name."""
    name = str(path_or_name)
    if name in BUILTIN_SCENARIOS:
        return builtin_scenario(name)
    path = Path(path_or_name)
    if not path.exists():
        raise ScenarioFormatError(
            f"{name!r} is neither a built-in scenario ({', '.join(BUILTIN_SCENARIOS)}) "
            f"nor an existing file"
        )
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(doc)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")
