"""Six firemen, three fires: balanced distribution via pairwise end costs.

The balanced-occupancy penalty c*(sum_ab [s_a == s_b] - n^2/m) factors into
pairwise terms, so exact inference stays cheap even though the agents are
fully coupled.  A small seed sweep shows how often the preferred (2,2,2)
occupancy is realized.
"""
from collections import Counter
from pathlib import Path

import numpy as np

from pimas import load_scenario, simulate
from pimas.io import assign_to_targets, write_trajectory_svg

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

scenario = load_scenario("firemen-6x3")
print(f"{scenario.n} agents, targets {scenario.targets.mu.ravel()}, "
      f"{len(scenario.end_cost.factors)} pairwise factors")

histogram = Counter()
for seed in range(25):
    trajectory = simulate(scenario, seed)
    labels = assign_to_targets(trajectory.states[-1], scenario.targets.mu)
    counts = tuple(int(c) for c in np.bincount(labels[labels > 0] - 1, minlength=3))
    histogram[counts] += 1
    if seed == 0:
        write_trajectory_svg(trajectory, scenario, out / "firemen_six_agents.svg")

print("\nend-count pattern over 25 seeds:")
for counts, times in sorted(histogram.items(), key=lambda kv: -kv[1]):
    print(f"  {counts}: {'#' * times} ({times})")
print(f"\nwrote {out / 'firemen_six_agents.svg'}")
print("the staged symmetry breaking (one group commits first, the remaining")
print("agents split later) is visible in the expected-targets panel of the SVG")
