"""Near the boundary the billiard map is close to (x, y) -> (x + y, y).

In Lazutkin coordinates the defect of that shear shrinks like y^3 in x and
y^4 in y. The regression slopes on log-log axes recover both exponents; in
the circle y is conserved exactly.
"""

# %%
from mlspectrum import DomainSpec, build_domain, generic_domain
from mlspectrum.verifier import lazutkin_asymptotics

domains = {
    "circle": DomainSpec.circle(1.0),
    "ellipse": DomainSpec.ellipse(1.0, 0.6),
    "generic": generic_domain(),
}
for name, spec in domains.items():
    rep = lazutkin_asymptotics(build_domain(spec))
    y = "exact" if rep.exact_y else f"{rep.slope_y:.3f}"
    print(f"{name:8s} slope x {rep.slope_x:.3f}  slope y {y}")
