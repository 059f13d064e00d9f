# Tracing a circularly polarized ray through a linear index gradient.
# The sigma = +1 and -1 rays split sideways by the anomalous velocity.

import numpy as np

from paraxspin.medium import LinearGradient
from paraxspin.transport import RayState, spin_hall_deflection, trace_ray

k = 200.0
med = LinearGradient(1.0, (0.01, 0.0, 0.0), bounds=((-4, 4), (-4, 4), (-1, 11)))

rays = {s: trace_ray(med, RayState.launch(med, (0, 0, 0), sigma=s), k, 10.0, step=0.05)
        for s in (1, 0, -1)}
print("x at z = 10 (bends toward higher n):", rays[0].r[-1, 0])
print("exact (cosh(gz) - 1) / g:          ", (np.cosh(0.1) - 1) / 0.01)
for s in (1, -1):
    print(f"sigma {s:+d}  y = {rays[s].r[-1, 1]:+.4e}  quadrature "
          f"{spin_hall_deflection(rays[0], k, s)[1]:+.4e}  Berry phase "
          f"{rays[s].berry_phase[-1]:+.3e}")
