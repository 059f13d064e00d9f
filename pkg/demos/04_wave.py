# Split-step propagation of a Gaussian beam in free space: the beta-norm
# stays put and the centroid walks along the launch tilt.

from paraxspin.medium import Homogeneous
from paraxspin.wave import BeamSpec, beta_norm, centroid, init_gaussian_beam, step

k = 100.0
grid = init_gaussian_beam(BeamSpec(0.5, tilt=(0.05, 0.0)), 128, 4.0, 1.0, k)
med = Homogeneous(1.0)
n0 = beta_norm(grid)
for i in range(200):
    grid = step(grid, 0.01, med)
print("z =", grid.z, " centroid x =", centroid(grid)[0], " (tilt * z =", 0.05 * grid.z, ")")
print("relative beta-norm drift:", abs(beta_norm(grid) / n0 - 1))
