"""Brute-force reference for W at one point.

Rings centred at x, Gauss-Legendre in the radius (16 nodes per unit panel),
trapezoid in the angle with twice the node count the library uses, out to
four times the library's truncation radius.  Prints W and the divergence
from its closed form.

    python3 corrector_oracle.py shear_sin 1 0 1.0 0.75 4676.079501784488
"""
import math
import sys

import numba
import numpy as np


@numba.njit(cache=True)
def field(kind, y1, y2):
    if kind == 0:  # shear_sin
        return 0.0, math.sin(y1)
    # taylor_green
    return -math.sin(y1) * math.cos(y2), math.cos(y1) * math.sin(y2)


@numba.njit(cache=True)
def rings(kind, x1, x2, alpha, p, radius, nodes, weights):
    a2 = alpha * alpha
    s1 = 0.0
    s2 = 0.0
    panels = int(math.ceil(radius))
    for k in range(panels):
        for q in range(nodes.size):
            rho = k + 0.5 * (nodes[q] + 1.0)
            w = 0.5 * weights[q]
            nt = 2 * int(math.ceil(64.0 + 2.0 * rho + 8.0 * rho ** (1.0 / 3.0) + 28.0 * math.hypot(x1, x2) / alpha))
            dt = 2.0 * math.pi / nt
            r1 = 0.0
            r2 = 0.0
            for j in range(nt):
                c = math.cos(j * dt)
                s = math.sin(j * dt)
                y1 = x1 + rho * c
                y2 = x2 + rho * s
                v1, v2 = field(kind, y1, y2)
                g = (y1 * v1 + y2 * v2) * (y1 * y1 + y2 * y2 + a2) ** (-(p + 1.0))
                r1 += c * g
                r2 += s * g
            s1 += w * r1 * dt
            s2 += w * r2 * dt
    return s1, s2


def main():
    kind = {"shear_sin": 0, "taylor_green": 1}[sys.argv[1]]
    x1, x2, alpha, p, r_trunc = map(float, sys.argv[2:7])
    nodes, weights = np.polynomial.legendre.leggauss(16)
    i1, i2 = rings(kind, x1, x2, alpha, p, 4.0 * r_trunc, nodes, weights)
    pref = 2.0 * p / (2.0 * math.pi) * (x1 * x1 + x2 * x2 + alpha * alpha) ** p
    # (x - y)/|x - y|^2 rho drho dtheta = -e_theta drho dtheta
    w1, w2 = -pref * i1, -pref * i2
    v1, v2 = field(kind, x1, x2)
    div = 2.0 * p * (x1 * (v1 + w1) + x2 * (v2 + w2)) / (x1 * x1 + x2 * x2 + alpha * alpha)
    print(f"W = ({w1:.17g}, {w2:.17g})  div_exact = {div:.17g}")


if __name__ == "__main__":
    main()
