"""Seeded sampling from the cone measure on l^p spheres, and Monte Carlo
concentration profiles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .lp import lp_norms
from .mmspace import FiniteMMSpace, pairwise_lr


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the sub-task labelled by ``keys``.

    Same ``(seed, keys)`` always gives the same stream; different keys give
    statistically independent streams.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def derived_seed(seed: int, *keys: int) -> int:
    """Integer seed for the sub-task ``keys``, for APIs that record an int."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class SphereSampleSet:
    n: int
    p: float
    points: np.ndarray
    symmetrized: bool
    seed: int

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": "inf" if math.isinf(self.p) else self.p,
            "seed": self.seed,
            "symmetrized": self.symmetrized,
            "points": self.points.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SphereSampleSet":
        doc = json.loads(text)
        return cls(int(doc["n"]), float(doc["p"]), np.array(doc["points"], dtype=float),
                   bool(doc["symmetrized"]), int(doc["seed"]))


def cone_directions(rng: np.random.Generator, n: int, p: float, count: int) -> np.ndarray:
    """``count`` draws from the normalised cone measure on the l^p sphere in R^n.

    Coordinates are i.i.d. with density proportional to ``exp(-|t|^p)``
    (``|t| = G^(1/p)`` with ``G ~ Gamma(1/p)`` and a fair sign); dividing by
    the l^p norm gives the cone measure. ``p = inf`` uses the uniform law on
    the cube.
    """
    if math.isinf(p):
        t = rng.uniform(-1.0, 1.0, size=(count, n))
    else:
        mag = rng.gamma(1.0 / p, size=(count, n)) ** (1.0 / p)
        sign = rng.choice(np.array([-1.0, 1.0]), size=(count, n))
        t = sign * mag
    norms = lp_norms(t, p)
    return t / norms[:, None]


def sample_cone(n: int, p: float, count: int, seed: int, symmetrize: bool = False) -> SphereSampleSet:
    """Seeded sample set on the l^p sphere of R^n.

    With ``symmetrize`` every draw is followed by its antipode, giving
    ``2 * count`` points in exact +/- pairs.
    """
    if n < 1 or count < 1:
        raise ValueError(f"need n >= 1 and count >= 1, got n={n}, count={count}")
    if not p >= 1:
        raise ValueError(f"need p >= 1, got {p}")
    x = cone_directions(np.random.default_rng(seed), n, p, count)
    if symmetrize:
        x = np.stack([x, -x], axis=1).reshape(2 * count, n)
    x.flags.writeable = False
    return SphereSampleSet(n, float(p), x, symmetrize, seed)


def empirical_mmspace(S: SphereSampleSet, q: float) -> FiniteMMSpace:
    """The sample with the l^q distance and uniform weights summing to 1."""
    d = pairwise_lr(S.points, q)
    return FiniteMMSpace(d, np.full(S.size, 1.0 / S.size), check=False)


def median(values) -> float:
    """Empirical median; the midpoint of the two central order statistics for
    an even count."""
    return float(np.median(np.asarray(values, dtype=float)))


def median_concentration_profile(values, r_grid) -> np.ndarray:
    """Fraction of ``values`` at distance ``>= r`` from their median, for each
    ``r`` in ``r_grid``."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("empty sample")
    dev = np.abs(v - median(v))
    r = np.asarray(r_grid, dtype=float)
    return (dev[None, :] >= r[:, None]).mean(axis=1)
