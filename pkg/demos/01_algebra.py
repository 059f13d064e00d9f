# The 4x4 matrices behind the Dirac-like Maxwell operator, and the spinor
# built from the Riemann-Silberstein vector of a circular plane wave.

import numpy as np

from paraxspin.clifford import (CONJUGATE, STANDARD, HamiltonianSymbol, hamiltonian_matrix,
                                plane_wave_eigencheck, verify_clifford)

for name, mset in (("standard", STANDARD), ("conjugate", CONJUGATE)):
    rep = verify_clifford(mset)
    print(f"{name:9s} residual {rep['max']:.1e}  orientation {rep['orientation']:+d}")

# H is beta-Hermitian, not Hermitian: beta H^dagger beta = H
H = hamiltonian_matrix(HamiltonianSymbol(1.0, 0.02, (0.1, -0.05)))
print("beta H^+ beta - H:", np.abs(STANDARD.m_z @ H.conj().T @ STANDARD.m_z - H).max())

# a forward left-circular wave has no standard spinor; the conjugate set carries it
d = np.array([0.1, 0.0, 1.0]) / np.hypot(0.1, 1.0)
for sigma in (1, -1):
    for conj in (False, True):
        chk = plane_wave_eigencheck(d, sigma, conjugated=conj)
        print(f"sigma {sigma:+d} conjugated={conj!s:5s} -> {chk.status} {chk.residual:.1e}")
