"""Reference values for the scalar integrals used in the unit tests."""
import math

from scipy.integrate import quad

# int_{B_1} y.y / (|y|^2 + 1)^0.75 dy in the plane: 2 pi int_0^1 r^3 (r^2 + 1)^-0.75 dr
moment, _ = quad(lambda r: r**3 * (r * r + 1.0) ** -0.75, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12)
print(f"radial moment F=x, rho=1, c=1, p=0.75: {2 * math.pi * moment:.17g}")

# mu(B_R) in the plane, p = 0.75, alpha = 1
for R in (10.0, 100.0, 1000.0):
    v, _ = quad(lambda r: r * (r * r + 1.0) ** -0.75, 0.0, R, epsabs=1e-12, epsrel=1e-12, limit=200)
    print(f"mu(B_{R:g}) = {2 * math.pi * v:.17g}  closed form {4 * math.pi * ((R * R + 1) ** 0.25 - 1):.17g}")

print(f"psi(|x|=1, alpha=1, p=0.75) = {2 ** -0.75:.17g}")
