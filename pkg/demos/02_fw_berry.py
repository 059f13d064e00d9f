# Diagonalizing the homogeneous operator, then the Berry connection and
# curvature that remain after projecting on one circular polarization.

import numpy as np

from paraxspin.clifford import STANDARD
from paraxspin.fw import (berry_connection_exact, berry_connection_fd, berry_curvature,
                          curl_fd, fw_matrix, projected_connection)

p = (0.12, -0.04)
fw = fw_matrix(p, 1.0)
H0 = -STANDARD.m_z + STANDARD.m_z @ STANDARD.dot_perp(p)
D = fw.inverse @ H0 @ fw.matrix
np.set_printoptions(precision=4, suppress=True)
print("U^-1 H0 U =\n", D.real)
print("E =", fw.energy)

A = berry_connection_exact(p, 1.0)
print("closed form vs finite difference:", np.abs(A - berry_connection_fd(p, 1.0)).max())

q = np.array([0.1, 0.2, 0.97])
print("A(p) =", projected_connection(q))
print("curl A - B:", np.abs(curl_fd(projected_connection, q) - berry_curvature(q)).max())
