# A helical ray in a parabolic GRIN fiber, and the polarization rotation it
# predicts. The wave measurement is left to the CLI (it takes a few minutes):
#     paraxspin bpm scenarios/grin_helix.yaml

import math

from paraxspin.config import parse_config
from paraxspin.transport import RayState, rytov_angle_closed, trace_ray

cfg = parse_config("scenarios/grin_helix.yaml")
med = cfg.build_medium()
b = cfg.beam
ray = trace_ray(med, RayState.launch(med, (*b["center"], 0.0), tuple(b["tilt"]), 0),
                cfg.k, cfg.z_end, step=cfg.trace["step"])
theta, phi = ray.angles()
print(f"zenith {theta.min():.4f}..{theta.max():.4f}, azimuth span {phi[-1] - phi[0]:.4f}"
      f" (2 pi = {2 * math.pi:.4f})")
rot = rytov_angle_closed(theta, phi)
print("(1/4) int tan^2 dphi:", rot.tan2)
print("(1/4) int theta^2 dphi:", rot.small_angle)
print("(1/2) int theta^2 dphi:", rot.literature)
