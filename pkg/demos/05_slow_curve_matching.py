"""Matching fast and slow behavior in eps * dy/dt = f(t, y).

For an attractive slow curve y = 0, a solution starting at appreciable
distance collapses onto the curve: it enters the halo (the concretized
infinitesimal band), then the eps-tube, and stays there.  For f = -y the
exact solution exp(-t/eps) predicts the entry times, which the fixed-step
integration reproduces within a few percent.
"""

import math

from flexnum import apps
from flexnum.concretize import Concretization

for eps0 in (1e-3, 1e-4, 1e-5):
    problem = apps.SlowCurveProblem(
        f=lambda t, y: -y, eps0=eps0, y0=1.0, t_max=40 * eps0, dt=eps0 / 20
    )
    result = apps.match_simulate(problem, Concretization(eps0=min(eps0, 1e-2)))
    t_halo = eps0 * math.log(1.0 / result.halo_radius)
    t_tube = eps0 * math.log(1.0 / result.tube_radius)
    print(f"eps0 = {eps0:g}")
    print(f"  halo radius {result.halo_radius:.3g}: entered at t = {result.t_enter_halo:.4g}"
          f" (exact solution predicts {t_halo:.4g})")
    print(f"  eps-tube    {result.tube_radius:.3g}: entered at t = {result.t_enter_eps_tube:.4g}"
          f" (exact solution predicts {t_tube:.4g})")
    print(f"  stayed inside after entry: {not result.violations}")

print()
print("A nonlinear attractive field behaves the same way:")
p = apps.SlowCurveProblem(f=lambda t, y: -y - y ** 3, eps0=1e-3, y0=1.0, t_max=0.04, dt=5e-5)
r = apps.match_simulate(p, Concretization(eps0=1e-3))
print(f"  f = -y - y^3: tube entry at t = {r.t_enter_eps_tube:.4g}, ok = {r.ok}")

print()
print("A repulsive field is rejected before any integration:")
try:
    apps.match_simulate(
        apps.SlowCurveProblem(f=lambda t, y: +y, eps0=1e-3, y0=1.0, t_max=0.01, dt=1e-5)
    )
except Exception as exc:
    print(f"  {type(exc).__name__}: {exc}")
