"""Run the numerical self-checks that guard the solver.

Each suite compares an implementation detail with an independent oracle:
analytic position gradients against finite differences, the surrogate
ascent of the phase update, the power bisection, the tightness of the
auxiliary-variable transforms, and the discrete phase search against
exhaustive enumeration.  ``risma check <suite>`` runs one of them.
"""

from risma.checks import SUITES, self_check

for name in SUITES:
    print(self_check(name).text())
