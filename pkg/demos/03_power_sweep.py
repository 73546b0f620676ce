"""Sum rate against transmit power for the main variants.

Trials are paired: trial ``t`` uses the same channel draw for every variant
and every power level, so differences between curves are not sampling
noise of independent draws.  Set ``TRIALS`` higher for smoother curves.

The same sweep from the shell::

    risma sweep --config demos/default.yaml --param pmax_dbm \
        --values 0,10,20,30 --trials 10 --variants ma-cps,fpa-cps,ma-fixed --out power.csv
"""

from risma.harness import SweepSpec, run_sweep
from risma.model import SystemConfig

TRIALS = 10
spec = SweepSpec(param="pmax_dbm", values=(0.0, 10.0, 20.0, 30.0), trials=TRIALS,
                 variants=("ma-irc", "ma-cps", "ma-dps4", "fpa-cps", "ma-fixed"),
                 base=SystemConfig())
result = run_sweep(spec)

print("variant    " + "".join(f"{v:>10.0f} dBm" for v in spec.values))
for variant in spec.variants:
    cells = "".join(f"{result.summary(variant, v)[0]:>14.3f}" for v in spec.values)
    print(f"{variant:10s}{cells}")
