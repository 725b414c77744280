"""
Concentration on l^p spheres
============================

Sample the cone measure on the l^p sphere, watch the first coordinate
concentrate around its median as the dimension grows, and check that a
symmetric sample always keeps an antipodal pair once more than half the
mass is retained.
"""

from obsdiam import antipodal_lower, median_concentration_profile, sample_cone

r_grid = [0.1, 0.2, 0.3, 0.5]
# x_1 is 1-Lipschitz for every l^q distance, so its spread bounds the
# observable diameter from below
for p in (1.0, 2.0, 4.0):
    print(f"p={p}")
    for n in (4, 16, 64, 256):
        S = sample_cone(n, p, 5000, seed=n)
        prof = median_concentration_profile(S.points[:, 0], r_grid)
        print(f"   n={n:3d}  " + "  ".join(f"r={r}: {v:.4f}" for r, v in zip(r_grid, prof)))

###############################################################################
# Antipodal pairs keep the diameter at 2

S = sample_cone(30, 2.0, 200, seed=7, symmetrize=True)
for kappa in (0.0, 0.25, 0.45):
    print(f"kappa={kappa}: partial diameter >= {antipodal_lower(S, 2.0, kappa):.6f}")
