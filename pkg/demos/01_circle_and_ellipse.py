"""Circle and ellipse: the two domains with closed forms.

Run with ``python demos/01_circle_and_ellipse.py``.
"""

# %%
# In the unit circle every (p, q) orbit is a regular polygon, so the maximal
# perimeter is 2 q sin(pi p / q) and the orbit is parabolic (residue zero).
import math
from fractions import Fraction

from mlspectrum import DomainSpec, build_domain, ml_max, solve_periodic
from mlspectrum.spectra import farey

circle = build_domain(DomainSpec.circle(1.0))
for w in farey(6, upper=Fraction(1)):
    p, q = w.numerator, w.denominator
    L = float(ml_max(circle, p, q))
    print(f"{p}/{q}  perimeter {L:.15f}  closed form {2 * q * math.sin(math.pi * p / q):.15f}")

# %%
# The ellipse x^2 + (y / 0.6)^2 = 1 has a hyperbolic 2-orbit along the major
# axis. Its multiplier follows from the mirror formula: with chord length 2
# and radius of curvature 0.36 at the vertex, trace = 2 (2 (1 - 2 / 0.36)^2 - 1).
ellipse = build_domain(DomainSpec.ellipse(1.0, 0.6))
orbit = solve_periodic(ellipse, 1, 2)
tr = 2 * (2 * (1 - 2 / 0.36) ** 2 - 1)
print(f"trace  {orbit.eigen.trace:.12f}  mirror formula {tr:.12f}")
print(f"lambda {orbit.eigen.lam:.15f}  = 1/81 ? {abs(orbit.eigen.lam - 1 / 81) < 1e-12}")
