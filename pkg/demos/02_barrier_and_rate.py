"""Generic domain: the barrier B and the exponential rate of a_N.

The perimeters L_N of the (Np, Nq - 1) orbits approaching a hyperbolic (p, q)
orbit give a_N = L_N - N L_{p/q} -> -B, with a_N + B decaying like
lambda^N. Three routes to B are compared and the rate is fitted.
Takes about half a minute in extended precision.
"""

# %%
import math

from mlspectrum import build_domain, generic_domain, solve_heteroclinic, solve_periodic
from mlspectrum.spectra import barrier_via_prop2
from mlspectrum.verifier import default_window, extract_limit, fit_rate, sweep

curve = build_domain(generic_domain())
orbit = solve_periodic(curve, 1, 2, precision="extended")
print(f"period-2 orbit: perimeter {float(orbit.perimeter):.15f}, lambda {orbit.eigen.lam:.6e}")

# %%
# Sweep N = 3..14 and look at the differences converging to -B.
rep = sweep(curve, 1, 2, 3, 14, precision="extended", orbit=orbit)
B = extract_limit(rep)
for n in sorted(rep.a):
    print(f"N={n:2d}  a_N + B = {float(rep.a[n] + B): .3e}")

# %%
# The same constant from the heteroclinic connection and from the right
# derivative of beta.
k = default_window(orbit.eigen.lam)
B_het = solve_heteroclinic(curve, orbit, k, k, precision="extended").barrier_value
B_der = barrier_via_prop2(curve, 1, 2, 14, precision="extended", orbit=orbit, family=rep.perimeters)
print(f"B from the sweep        {float(B):.15f}")
print(f"B from the heteroclinic {float(B_het):.15f}")
print(f"B from beta'            {B_der:.15f}")

# %%
# Fit log|a_N + B| per parity; the common slope is log lambda.
slope, c_even, c_odd = fit_rate(rep, B)
print(f"fitted slope {slope:.6f}  log lambda {math.log(orbit.eigen.lam):.6f}")
print(f"C_even {c_even:.6g}  C_odd {c_odd:.6g}  window {rep.fit_window}")
