"""Solve one channel draw and watch the outer loop climb.

Every reflection model starts from the same random phases and the same
antenna layout, so the traces are directly comparable.

    python3 demos/01_convergence.py
"""

from risma import SystemConfig, sample_scenario, solve

base = SystemConfig(seed=3)
scenario = sample_scenario(base)

for antenna, mode in [("ma", "irc"), ("ma", "cps"), ("ma", "dps"), ("fpa", "cps"), ("ma", "fixed")]:
    config = base.replace(antenna_mode=antenna, ris_mode=mode)
    state, trace = solve(scenario, config)
    head = " ".join(f"{r:.3f}" for r in trace.rates[:8])
    label = f"{antenna}-{mode}"
    print(f"{label:9s} start {trace.initial_rate:.3f} -> {head}"
          f"{' ...' if len(trace.rates) > 8 else ''}  [{trace.status}, {len(trace.rates)} it]")

# The per-block wall time of the last run shows where the effort goes.
print("block timings of the last iteration (ms):",
      {k: round(v, 2) for k, v in trace.records[-1].block_ms.items()})
