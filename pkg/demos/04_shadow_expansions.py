"""Constructing a number with a prescribed expansion along powers of e.

The partial sums s_n of any standard coefficient sequence are Cauchy modulo
the microhalo on the limited indices, so b = s_K + M realizes the expansion:
peeling off s_n and rescaling by e^-(n+1) recovers each next coefficient up
to an infinitesimal.  Divergent series are the whole point: the factorial
coefficients below have radius of convergence zero, yet the construction
works level by level.
"""

import math

from flexnum import apps
from flexnum.concretize import Concretization
from flexnum.extnum import ExternalNumber, FormalSeries
from flexnum.scale import MICRO

conc = Concretization(eps0=1e-3)

coeffs = [math.factorial(k) for k in range(7)]
shadow = apps.borel_ritt(coeffs, 6)
print(f"coefficients: {coeffs}")
print(f"b = {shadow.value}")
print(f"cauchy certificate: {len(shadow.certificate.pair_bounds)} pairwise bounds, "
      f"noise {shadow.certificate.noise}, segment {shadow.certificate.segment}")

print()
for n in range(6):
    ok = apps.shadow_check(shadow.value, coeffs, n, conc)
    print(f"level {n}: ((b - s_{n}) / e^{n + 1}) inside {coeffs[n + 1]} + o : {ok}")

print()
print("== perturbations ==")
offset = conc.sample_neutrix(MICRO, conc.rng(1))
print(f"a microhalo offset ({offset:.2e}) is invisible at every level:")
print("  ", [apps.shadow_check(shadow.value, coeffs, n, conc, numeric_offset=offset) for n in range(6)])

n0 = 2
perturbed = ExternalNumber(shadow.value.rep + FormalSeries.monomial(1, n0 + 1), MICRO)
levels = [apps.shadow_check(perturbed, coeffs, n, conc) for n in range(6)]
print(f"adding e^{n0 + 1} breaks the expansion exactly from level {n0}:")
print("  ", levels)
