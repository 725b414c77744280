"""
Partial diameter and separation on tiny spaces
==============================================

A two-point space with unit distance and equal weights is the smallest
space where the observable diameter and the separation distance disagree.
"""

import numpy as np

from obsdiam import FiniteMMSpace, WeightedCloud, obsdiam_bracket_R, partial_diameter_exact, sep_exact

X = FiniteMMSpace([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5])

# dropping half the mass leaves a single atom, so the partial diameter is 0
print("partial diameter at kappa=1/2:", partial_diameter_exact(X, 0.5))

# the two atoms themselves each carry mass 1/2, so they are 1 apart
print("Sep(X; 1/2, 1/2):", sep_exact(X, 0.5, 0.5))

# the observable diameter is only ever reported as a bracket
for kp in (0.5, 0.4):
    b = obsdiam_bracket_R(X, kp)
    print(f"bracket at kappa'={kp}: [{b.lower}, {b.upper}]")
    print("   upper side realised by", b.witnesses["upper_sep"])
    print("   lower side realised by", b.witnesses["lower_observable"])

###############################################################################
# Four equally weighted points on a line

line = WeightedCloud.on_line([0.0, 1.0, 2.0, 3.0], [0.25] * 4)
for kappa in (0.0, 0.25, 0.5, 0.75):
    print(f"kappa={kappa}: partial diameter {partial_diameter_exact(line, kappa)}, "
          f"Sep {sep_exact(line, kappa)}")

###############################################################################
# A random space in the unit cube with the sup distance

rng = np.random.default_rng(0)
pts = rng.uniform(size=(8, 3))
d = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
Y = FiniteMMSpace(d, rng.dirichlet(np.ones(8)))
b = obsdiam_bracket_R(Y, 0.2)
print(f"random 8-point space: observable diameter at kappa'=0.2 lies in [{b.lower:.4f}, {b.upper:.4f}]")
