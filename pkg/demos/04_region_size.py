"""How much room do the movable antennas need?

The array starts as a half-wavelength line on the lower edge of the square
region.  A region of one wavelength cannot hold four antennas in a row at
that spacing, so they are folded onto a second row.  Gradient moves must
respect the minimum spacing, and a tightly packed start leaves little
room to move, which this demo makes visible by reporting how far the
antennas travel.
"""

import numpy as np

from risma import SystemConfig, sample_scenario, solve
from risma.harness import trial_seed
from risma.solver import initial_positions

TRIALS = 8
for region in (1.0, 2.0, 3.0, 4.0):
    config = SystemConfig(region_lambda=region)
    start = initial_positions(config)
    rates, moved = [], []
    for t in range(TRIALS):
        state, trace = solve(sample_scenario(config, trial_seed(0, t)), config)
        rates.append(trace.final_rate)
        moved.append(np.max(np.hypot(*(state.T - start).T)) / config.wavelength)
    print(f"A = {region:.0f} lambda: mean rate {np.mean(rates):.3f} bit/s/Hz, "
          f"largest antenna displacement {np.max(moved):.3f} lambda")
