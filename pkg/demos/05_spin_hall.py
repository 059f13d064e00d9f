# Both helicities through the same gradient, wave against ray.
# A reduced version of the linear_gradient scenario (128^2, z = 5).

import numpy as np

from paraxspin.medium import LinearGradient
from paraxspin.transport import RayState, spin_hall_deflection, trace_ray
from paraxspin.wave import BeamSpec, run_helicity_pair

k, z_end = 200.0, 5.0
med = LinearGradient(1.0, (0.01, 0.0, 0.0), bounds=((-4, 4), (-4, 4), (-1, 11)))
ray = trace_ray(med, RayState.launch(med, (0, 0, 0), sigma=0), k, z_end, step=0.05)
pred = spin_hall_deflection(ray, k, 1)[1]

pair = run_helicity_pair(med, BeamSpec(0.5), 128, 3.5, k, z_end, 0.01, probe_every=100)
meas = 0.5 * (pair.plus["cy"] - pair.minus["cy"])
for z, m in zip(pair.z, meas):
    print(f"z = {z:4.1f}  half-splitting {m:+.3e}")
print(f"ray prediction {pred:+.3e}; ratio {meas[-1] / pred:+.2f}")
# the ratio comes out near -0.5 rather than +1; see README, criterion 9
