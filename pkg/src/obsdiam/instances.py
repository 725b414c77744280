"""Seeded random instances used by the inequality suite and the tests."""

from __future__ import annotations

import math

import numpy as np

from .lp import lp_norms
from .mmspace import FiniteMMSpace, WeightedCloud, pairwise_lr
from .sphere import cone_directions


def random_weights(rng: np.random.Generator, n: int) -> np.ndarray:
    w = rng.uniform(size=n)
    return w / w.sum()


def random_mmspace(rng: np.random.Generator, n: int, dim: int = 3) -> FiniteMMSpace:
    """``n`` points uniform in the unit cube of R^dim under l^inf, with
    uniform-then-normalised weights."""
    pts = rng.uniform(size=(n, dim))
    return FiniteMMSpace(pairwise_lr(pts, math.inf), random_weights(rng, n))


def random_mmspace_with_points(rng: np.random.Generator, n: int, dim: int = 3):
    pts = rng.uniform(size=(n, dim))
    return FiniteMMSpace(pairwise_lr(pts, math.inf), random_weights(rng, n)), pts


def random_line_cloud(rng: np.random.Generator, n: int, *, grid: bool = False) -> WeightedCloud:
    """Random measure on the real line. ``grid`` puts atoms on a coarse
    integer grid so that coincident and equally spaced atoms occur."""
    x = rng.integers(0, 6, size=n).astype(float) if grid else rng.normal(size=n)
    return WeightedCloud.on_line(x, random_weights(rng, n))


def random_coord_cloud(rng: np.random.Generator, n: int, k: int, r: float) -> WeightedCloud:
    return WeightedCloud.in_coords(rng.uniform(-1, 1, size=(n, k)), random_weights(rng, n), r)


def random_ball_points(rng: np.random.Generator, count: int, k: int, p: float) -> np.ndarray:
    """Mixed sample of the unit l^p ball of R^k.

    A third are uniform in the ball, a third sparse with a random support size
    and radius, a third quantised to multiples of 1/8 so that ties between
    absolute values are common.
    """
    kinds = rng.integers(0, 3, size=count)
    out = np.zeros((count, k))
    m0 = int(np.sum(kinds == 0))
    if m0:
        dirs = cone_directions(rng, k, p, m0)
        out[kinds == 0] = dirs * rng.uniform(size=(m0, 1)) ** (1.0 / k)
    for i in np.flatnonzero(kinds == 1):
        s = int(rng.integers(1, k + 1))
        idx = rng.choice(k, size=s, replace=False)
        out[i, idx] = cone_directions(rng, s, p, 1)[0] * rng.uniform() ** 0.25
    for i in np.flatnonzero(kinds == 2):
        v = rng.integers(-4, 5, size=k) / 8.0
        norm = lp_norms(v[None, :], p)[0]
        if norm > 1:
            v = np.trunc(v / norm * 8) / 8.0
        out[i] = v
    # guard against the occasional rounding past the boundary
    norms = lp_norms(out, p)
    big = norms > 1
    out[big] /= norms[big, None]
    return out


def perturb_in_ball(rng: np.random.Generator, X: np.ndarray, p: float, scale: float) -> np.ndarray:
    """Nearby partner points for Lipschitz-ratio checks, kept inside the ball."""
    Y = X + scale * rng.normal(size=X.shape)
    norms = lp_norms(Y, p)
    big = norms > 1
    Y[big] /= norms[big, None]
    return Y
