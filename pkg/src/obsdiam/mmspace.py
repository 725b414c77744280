"""Finite metric measure spaces and their concentration functionals.

Everything here works on finite weighted point sets. The exact routines
enumerate subsets, so each one carries a hard size cap and raises
:class:`InstanceTooLargeError` instead of silently degrading.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np

TRIANGLE_TOL = 1e-9
# slack used whenever a subset mass is compared against a threshold
MASS_TOL = 1e-12

DIAMETER_CAP = 22
SEP_CAP = 14
CONCENTRATION_CAP = 22


class InstanceTooLargeError(ValueError):
    """Raised when an exact (enumerating) routine is handed too many points."""


def _mass_tol(total: float) -> float:
    return MASS_TOL * max(1.0, total)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FiniteMMSpace:
    """A finite point set with a full distance matrix and nonnegative weights.

    Parameters
    ----------
    dist : (n, n) array_like
        Symmetric, zero-diagonal distance matrix. The triangle inequality is
        verified at construction time (tolerance ``TRIANGLE_TOL`` scaled by the
        largest entry) unless ``check=False``.
    weights : (n,) array_like
        Nonnegative point masses. ``total_mass`` is their exact (``math.fsum``)
        sum.
    """

    dist: np.ndarray
    weights: np.ndarray
    total_mass: float = field(init=False)

    def __init__(self, dist, weights, *, check: bool = True):
        d = np.array(dist, dtype=float)
        w = np.array(weights, dtype=float).reshape(-1)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {d.shape}")
        if d.shape[0] != w.shape[0]:
            raise ValueError(
                f"{d.shape[0]} points but {w.shape[0]} weights"
            )
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if check:
            _validate_metric(d)
        object.__setattr__(self, "dist", _readonly(d))
        object.__setattr__(self, "weights", _readonly(w))
        object.__setattr__(self, "total_mass", math.fsum(w.tolist()))

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def distinct_distances(self) -> np.ndarray:
        """Sorted distinct positive off-diagonal distances."""
        iu = np.triu_indices(self.n, 1)
        vals = self.dist[iu]
        return np.unique(vals[vals > 0])

    # -- I/O -----------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"dist": self.dist.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, doc: dict, *, check: bool = True) -> "FiniteMMSpace":
        try:
            return cls(doc["dist"], doc["weights"], check=check)
        except KeyError as exc:
            raise ValueError(f"mm-space document is missing key {exc}") from None

    def to_json(self, path: Union[str, Path, None] = None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source: Union[str, Path, dict], *, check: bool = True) -> "FiniteMMSpace":
        """Load from a JSON document ``{"dist": [[...]], "weights": [...]}``.

        ``source`` may be a path, a JSON string or an already parsed dict.
        """
        if isinstance(source, dict):
            return cls.from_dict(source, check=check)
        text = str(source)
        if not text.lstrip().startswith("{"):
            text = Path(source).read_text()
        return cls.from_dict(json.loads(text), check=check)

    @classmethod
    def from_csv(cls, matrix_path, weights_path, *, check: bool = True) -> "FiniteMMSpace":
        """Load a square distance matrix file and a weights file (one value per
        line or a single comma separated row)."""
        with open(matrix_path, newline="") as fh:
            rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
        with open(weights_path, newline="") as fh:
            weights = [float(v) for row in csv.reader(fh) for v in row if v.strip()]
        return cls(rows, weights, check=check)

    def to_csv(self, matrix_path, weights_path) -> None:
        with open(matrix_path, "w", newline="") as fh:
            csv.writer(fh).writerows(self.dist.tolist())
        with open(weights_path, "w", newline="") as fh:
            csv.writer(fh).writerows([[w] for w in self.weights.tolist()])


def _validate_metric(d: np.ndarray) -> None:
    n = d.shape[0]
    if n == 0:
        return
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ValueError("distances must be finite and nonnegative")
    if np.any(np.diag(d) != 0):
        raise ValueError("distance matrix must vanish on the diagonal")
    if not np.array_equal(d, d.T):
        raise ValueError("distance matrix must be symmetric")
    tol = TRIANGLE_TOL * max(1.0, float(d.max()))
    for k in range(n):
        # d[i, j] <= d[i, k] + d[k, j] for every i, j
        if np.any(d > d[:, k, None] + d[None, k, :] + tol):
            i, j = np.argwhere(d > d[:, k, None] + d[None, k, :] + tol)[0]
            raise ValueError(
                f"triangle inequality fails: d[{i},{j}]={d[i, j]:.6g} > "
                f"d[{i},{k}] + d[{k},{j}] = {d[i, k] + d[k, j]:.6g}"
            )


# -- weighted clouds -----------------------------------------------------------


@dataclass(frozen=True)
class Target:
    """Where a pushforward measure lives.

    ``kind`` is ``"real-line"`` or ``"coordinate-space"``; for the latter ``k``
    is the dimension and ``r`` the exponent of the l^r distance (``math.inf``
    allowed).
    """

    kind: str = "real-line"
    k: int = 1
    r: float = 2.0

    def __post_init__(self):
        if self.kind == "real-line":
            object.__setattr__(self, "k", 1)
        elif self.kind == "coordinate-space":
            if self.k < 1:
                raise ValueError("coordinate space needs k >= 1")
            if not self.r >= 1:
                raise ValueError(f"l^r exponent must be >= 1, got {self.r}")
        else:
            raise ValueError(f"unknown target kind {self.kind!r}")

    @classmethod
    def real_line(cls) -> "Target":
        return cls("real-line")

    @classmethod
    def coords(cls, k: int, r: float) -> "Target":
        return cls("coordinate-space", int(k), float(r))

    @property
    def is_line(self) -> bool:
        return self.kind == "real-line"

    def to_dict(self) -> dict:
        if self.is_line:
            return {"target_kind": "real-line"}
        r = "inf" if math.isinf(self.r) else self.r
        return {"target_kind": "coordinate-space", "k": self.k, "r": r}

    @classmethod
    def from_dict(cls, doc: dict) -> "Target":
        if doc["target_kind"] == "real-line":
            return cls.real_line()
        return cls.coords(doc["k"], float(doc["r"]))


@dataclass(frozen=True)
class WeightedCloud:
    """Finitely supported measure on the real line or on (R^k, l^r)."""

    target: Target
    points: np.ndarray
    weights: np.ndarray
    total_mass: float = field(init=False)

    def __init__(self, target: Target, points, weights):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        w = np.array(weights, dtype=float).reshape(-1)
        if pts.ndim != 2 or pts.shape[0] != w.shape[0]:
            raise ValueError(
                f"{pts.shape[0]} points but {w.shape[0]} weights"
            )
        if pts.shape[0] and pts.shape[1] != target.k:
            raise ValueError(
                f"points have dimension {pts.shape[1]}, target expects {target.k}"
            )
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "weights", _readonly(w))
        object.__setattr__(self, "total_mass", math.fsum(w.tolist()))

    @classmethod
    def on_line(cls, values, weights) -> "WeightedCloud":
        return cls(Target.real_line(), np.asarray(values, dtype=float).reshape(-1, 1), weights)

    @classmethod
    def in_coords(cls, points, weights, r: float) -> "WeightedCloud":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(Target.coords(pts.shape[1], r), pts, weights)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def r(self) -> float:
        return 1.0 if self.target.is_line else self.target.r

    def distance_matrix(self) -> np.ndarray:
        return pairwise_lr(self.points, self.r)

    def to_mmspace(self) -> FiniteMMSpace:
        """The cloud viewed as a finite mm-space (its support with the target
        metric)."""
        return FiniteMMSpace(self.distance_matrix(), self.weights, check=False)

    def map_points(self, fn: Callable[[np.ndarray], np.ndarray], target: Target | None = None) -> "WeightedCloud":
        """Push the cloud forward under a map acting on the whole point array."""
        image = np.asarray(fn(self.points), dtype=float)
        return WeightedCloud(target or self.target, image, self.weights)

    def to_dict(self) -> dict:
        doc = self.target.to_dict()
        doc["points"] = self.points.tolist()
        doc["weights"] = self.weights.tolist()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "WeightedCloud":
        return cls(Target.from_dict(doc), doc["points"], doc["weights"])

    @classmethod
    def from_json(cls, text: str) -> "WeightedCloud":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SepQuery:
    kappa1: float
    kappa2: float

    def __post_init__(self):
        if not (self.kappa1 >= 0 and self.kappa2 >= 0):
            raise ValueError("separation thresholds must be nonnegative")


def pairwise_lr(points: np.ndarray, r: float) -> np.ndarray:
    """Full l^r distance matrix between the rows of ``points``."""
    pts = np.asarray(points, dtype=float)
    diff = np.abs(pts[:, None, :] - pts[None, :, :])
    if math.isinf(r):
        return diff.max(axis=2) if pts.shape[1] else np.zeros((len(pts), len(pts)))
    if r == 1:
        return diff.sum(axis=2)
    if r == 2:
        return np.sqrt((diff * diff).sum(axis=2))
    return (diff**r).sum(axis=2) ** (1.0 / r)


# -- partial diameter ------------------------------------------------------------

MeasureLike = Union[WeightedCloud, FiniteMMSpace]


def _subset_masses(w: np.ndarray) -> np.ndarray:
    """mass[mask] for every subset, bit i of ``mask`` standing for point i."""
    mass = np.zeros(1)
    for wi in w:
        mass = np.concatenate([mass, mass + wi])
    return mass


def _subset_diameters(d: np.ndarray) -> np.ndarray:
    """diam[mask] for every subset of the points of ``d``."""
    n = d.shape[0]
    diam = np.zeros(1)
    for b in range(n):
        # farthest distance from point b into each subset of {0, .., b-1}
        reach = np.zeros(1)
        for j in range(b):
            reach = np.concatenate([reach, np.maximum(reach, d[b, j])])
        diam = np.concatenate([diam, np.maximum(diam, reach)])
    return diam


def _line_partial_diameter(x: np.ndarray, w: np.ndarray, need: float, tol: float) -> float:
    order = np.argsort(x, kind="stable")
    xs, ws = x[order], w[order]
    cw = np.concatenate([[0.0], np.cumsum(ws)])
    # the optimal set can be taken to be all atoms inside [xs[i], xs[j]]
    ends = np.searchsorted(cw, cw[:-1] + need - tol, side="left") - 1
    starts = np.arange(len(xs))
    ok = ends < len(xs)
    if not np.any(ok):
        return 0.0
    ends = np.maximum(ends[ok], starts[ok])
    return float(np.min(xs[ends] - xs[starts[ok]]))


def partial_diameter_exact(measure: MeasureLike, kappa: float, *, cap: int = DIAMETER_CAP) -> float:
    """Smallest diameter of a support subset carrying mass at least ``m - kappa``.

    Measures on the real line use an O(n log n) interval scan. Everything else
    (finite mm-spaces, clouds in R^k) enumerates all subsets of the support and
    refuses supports larger than ``cap``.

    Returns 0 when ``kappa >= m`` (the empty set qualifies).
    """
    if not kappa >= 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    m = measure.total_mass
    tol = _mass_tol(m)
    need = m - kappa
    if need <= tol:
        return 0.0
    keep = measure.weights > 0
    w = measure.weights[keep]
    if isinstance(measure, WeightedCloud) and measure.target.is_line:
        return _line_partial_diameter(measure.points[keep, 0], w, need, tol)
    if len(w) > cap:
        raise InstanceTooLargeError(
            f"instance too large for exact mode: support of {len(w)} points exceeds "
            f"cap {cap}; subsample, or project to the real line"
        )
    if isinstance(measure, WeightedCloud):
        d = pairwise_lr(measure.points[keep], measure.r)
    else:
        d = measure.dist[np.ix_(keep, keep)]
    mass = _subset_masses(w)
    diam = _subset_diameters(d)
    return float(diam[mass >= need - tol].min())


# -- separation distance ----------------------------------------------------------


def _as_mmspace(measure: MeasureLike) -> FiniteMMSpace:
    return measure.to_mmspace() if isinstance(measure, WeightedCloud) else measure


def _query(q, kappa2):
    if isinstance(q, SepQuery):
        return q
    return SepQuery(float(q), float(q if kappa2 is None else kappa2))


def _labeling_exists(close, w, mass_of, k1, k2, tol) -> bool:
    """Is there a split into nonempty A, B with no cross pair marked close?

    ``close[i]`` is the bitmask of points within distance < t of point i
    (including i). Points are visited heaviest first; a branch is cut as soon
    as either side can no longer reach its mass threshold.
    """
    n = len(w)
    order = sorted(range(n), key=lambda i: -w[i])
    # rest[pos]: bitmask of the points not yet visited at depth pos
    rest = [0] * (n + 1)
    for pos in range(n - 1, -1, -1):
        rest[pos] = rest[pos + 1] | (1 << order[pos])

    def search(pos, a, b, ma, mb, block_a, block_b):
        if a and b and ma >= k1 - tol and mb >= k2 - tol:
            return True
        if pos == n:
            return False
        free = rest[pos]
        if ma + mass_of(free & ~block_a) < k1 - tol:
            return False
        if mb + mass_of(free & ~block_b) < k2 - tol:
            return False
        i = order[pos]
        bit = 1 << i
        # a side that is already satisfied never needs more points
        if (not a or ma < k1 - tol) and not bit & block_a:
            if search(pos + 1, a | bit, b, ma + w[i], mb, block_a, block_b | close[i]):
                return True
        if (not b or mb < k2 - tol) and not bit & block_b:
            if search(pos + 1, a, b | bit, ma, mb + w[i], block_a | close[i], block_b):
                return True
        return search(pos + 1, a, b, ma, mb, block_a, block_b)

    return search(0, 0, 0, 0.0, 0.0, 0, 0)


def sep_exact(X: MeasureLike, q, kappa2: float | None = None, *, cap: int = SEP_CAP) -> float:
    """Exact separation distance ``Sep(X; kappa1, kappa2)``.

    The supremum of ``d(A, B)`` over nonempty subsets with ``mu(A) >= kappa1``
    and ``mu(B) >= kappa2``. The candidate values are the distinct pairwise
    distances; feasibility at a threshold ``t`` is monotone in ``t``, so the
    largest feasible candidate is located by bisection, each probe being an
    exhaustive A/B/neither labeling with mass-bound pruning.

    ``q`` is a :class:`SepQuery` or ``kappa1`` (``kappa2`` defaults to it).
    Returns 0 if no feasible pair exists.
    """
    q = _query(q, kappa2)
    X = _as_mmspace(X)
    if X.n > cap:
        raise InstanceTooLargeError(
            f"instance too large for exact mode: {X.n} points exceeds cap {cap}; "
            "use sep_lower_greedy for a lower bound"
        )
    m = X.total_mass
    tol = _mass_tol(m)
    if q.kappa1 > m + tol or q.kappa2 > m + tol or X.n < 2:
        return 0.0
    w = X.weights.tolist()
    table = _subset_masses(X.weights)
    mass_of = table.__getitem__
    cands = X.distinct_distances()

    def feasible(t):
        close = [int(sum(1 << j for j in np.flatnonzero(X.dist[i] < t))) for i in range(X.n)]
        return _labeling_exists(close, w, mass_of, q.kappa1, q.kappa2, tol)

    lo, hi = 0, len(cands)  # answer index lies in [lo - 1, hi - 1]
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            lo = mid + 1
        else:
            hi = mid
    return float(cands[lo - 1]) if lo else 0.0


def sep_lower_greedy(X: MeasureLike, q, kappa2: float | None = None) -> float:
    """Greedy lower bound for :func:`sep_exact` with no size cap.

    For each candidate distance ``t`` (largest first) and each seed pair at
    distance ``>= t``, one side is grown greedily and the other side takes
    every point still at distance ``>= t``; the first ``t`` that reaches both
    thresholds is returned. Every returned value is witnessed by an explicit
    pair of sets, hence never exceeds the exact value.
    """
    q = _query(q, kappa2)
    X = _as_mmspace(X)
    m = X.total_mass
    tol = _mass_tol(m)
    if q.kappa1 > m + tol or q.kappa2 > m + tol or X.n < 2:
        return 0.0
    d, w = X.dist, X.weights
    for t in X.distinct_distances()[::-1]:
        far = d >= t
        seeds = np.argwhere(np.triu(far, 1))
        for i, j in seeds:
            if _greedy_pair(far, w, i, j, q.kappa1, q.kappa2, tol):
                return float(t)
            if _greedy_pair(far, w, j, i, q.kappa1, q.kappa2, tol):
                return float(t)
            if _greedy_pair(far, w, j, i, q.kappa2, q.kappa1, tol):
                return float(t)
            if _greedy_pair(far, w, i, j, q.kappa2, q.kappa1, tol):
                return float(t)
    return 0.0


def _greedy_pair(far, w, i, j, k_grow, k_fill, tol) -> bool:
    # grow G from i; the other side is everything far from all of G
    in_g = np.zeros(len(w), dtype=bool)
    in_g[i] = True
    reach = far[i].copy()  # points at distance >= t from every point of G
    mg = w[i]
    while mg < k_grow - tol:
        cand = np.flatnonzero(~in_g & ~reach)
        # a candidate may not be far from G; it must also keep j reachable
        cand = cand[far[cand, j]]
        if cand.size == 0:
            return False
        after = (reach[None, :] & far[cand]) @ w
        # prefer a point that finishes G while leaving enough for the other side
        done = (mg + w[cand] >= k_grow - tol) & (after >= k_fill - tol)
        if np.any(done):
            cand, after = cand[done], after[done]
        best = cand[np.lexsort((-w[cand], -after))[0]]
        in_g[best] = True
        reach &= far[best]
        mg += w[best]
    return bool(w[reach].sum() >= k_fill - tol)


# -- pushforward and concentration ---------------------------------------------------


def pushforward(X: FiniteMMSpace, f, target: Target | None = None) -> WeightedCloud:
    """Transport the weights of ``X`` along ``f``.

    ``f`` is either a callable taking a point index or an array of images (one
    row per point). Coinciding images are merged into a single atom. The target
    defaults to the real line for scalar images.
    """
    if callable(f):
        images = [np.atleast_1d(np.asarray(f(i), dtype=float)) for i in range(X.n)]
        images = np.array(images, dtype=float).reshape(X.n, -1) if X.n else np.zeros((0, 1))
    else:
        images = np.asarray(f, dtype=float)
        if images.ndim == 1:
            images = images.reshape(-1, 1)
    if images.shape[0] != X.n:
        raise ValueError(f"map gives {images.shape[0]} images for {X.n} points")
    if target is None:
        if images.shape[1] != 1:
            raise ValueError("vector-valued map needs an explicit coordinate-space target")
        target = Target.real_line()
    if images.shape[1] != target.k:
        raise ValueError(
            f"image dimension {images.shape[1]} does not match target dimension {target.k}"
        )
    atoms: dict[tuple, list[float]] = {}
    for row, wi in zip(images.tolist(), X.weights.tolist()):
        atoms.setdefault(tuple(row), []).append(wi)
    pts = np.array(list(atoms.keys()), dtype=float).reshape(len(atoms), target.k)
    return WeightedCloud(target, pts, [math.fsum(v) for v in atoms.values()])


def concentration_function(X: FiniteMMSpace, r: float, *, cap: int = CONCENTRATION_CAP) -> float:
    """Exact ``alpha_X(r)``: the largest mass outside the open r-neighbourhood
    ``{x : d(x, A) < r}`` of a set ``A`` carrying at least half the mass."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    if X.n > cap:
        raise InstanceTooLargeError(
            f"instance too large for exact mode: {X.n} points exceeds cap {cap}; "
            "estimate a Monte Carlo profile instead (sphere.median_concentration_profile)"
        )
    if X.n == 0:
        return 0.0
    far_from = [int(sum(1 << j for j in np.flatnonzero(X.dist[i] >= r))) for i in range(X.n)]
    far = np.array([(1 << X.n) - 1], dtype=np.int64)
    for b in range(X.n):
        far = np.concatenate([far, far & far_from[b]])
    mass = _subset_masses(X.weights)
    half = X.total_mass / 2 - _mass_tol(X.total_mass)
    return float(mass[far[mass >= half]].max())


def lipschitz_constant(dist: np.ndarray, images: np.ndarray, r: float = 1.0) -> float:
    """Smallest alpha with ``d(f(x), f(y)) <= alpha d(x, y)`` over all pairs.

    Pairs at distance zero must have equal images, otherwise the map is not
    Lipschitz and ``inf`` is returned.
    """
    img = np.asarray(images, dtype=float)
    if img.ndim == 1:
        img = img.reshape(-1, 1)
    di = pairwise_lr(img, r)
    pos = dist > 0
    if np.any(di[~pos] > 0):
        return math.inf
    return float((di[pos] / dist[pos]).max()) if np.any(pos) else 0.0


def from_points(points: Sequence, weights=None, r: float = 2.0) -> FiniteMMSpace:
    """Finite mm-space of points in (R^k, l^r); uniform unit-mass weights by default."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if weights is None:
        weights = np.full(len(pts), 1.0 / len(pts))
    return FiniteMMSpace(pairwise_lr(pts, r), weights, check=False)
