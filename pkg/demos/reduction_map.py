"""
Collapsing the l^p ball onto sparse vectors
===========================================

The reduction map moves every point of the unit l^p ball by at most eps/2
in the l^q distance (p < q) while leaving at most k(eps) nonzero
coordinates. This walks through one point by hand and then checks the
guarantees on a random batch.
"""

import numpy as np

from obsdiam import ReductionParams, canonicalize, f_trunc, k_eps, lq_dist, reduce_F, reduce_F_batch
from obsdiam.instances import perturb_in_ball, random_ball_points
from obsdiam.lp import lp_norms

P = ReductionParams(p=1, q=2, eps=1)
print("k(eps) for p=1, q=2, eps=1:", k_eps(1, 2, 1))

# a point with one coordinate too many
x = np.array([0.1, -0.4, 0.2, 0.3])
g, y = canonicalize(x)
print("canonical form:", y, "reached by", g)
print("truncated:", f_trunc(y, P.k_eps))
fx = reduce_F(x, P)
print("F(x) =", fx, " moved by", lq_dist(x, fx, 2))

###############################################################################
# Batch certificates

rng = np.random.default_rng(1)
for k in (4, 8, 64):
    X = random_ball_points(rng, 2000, k, P.p)
    Y = perturb_in_ball(rng, X, P.p, 1e-2)
    FX, FY = reduce_F_batch(X, P), reduce_F_batch(Y, P)
    move = lp_norms(X - FX, P.q).max()
    ratio = (lp_norms(FX - FY, P.q) / lp_norms(X - Y, P.q)).max()
    support = np.count_nonzero(FX, axis=1).max()
    print(f"k={k:3d}: max move {move:.4f} (<= {P.eps / 2}), max stretch {ratio:.3f} "
          f"(<= {P.lipschitz:.3f}), max support {support} (<= {P.k_eps})")
