"""l^p / l^q geometry, the signed-permutation group and the reduction map F.

Vectors are finitely supported: a length-k array stands for the point of
R^infinity whose coordinates past k vanish. Coordinates are 0-based in code.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

BALL_TOL = 1e-12


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


def _pad(x: np.ndarray, y: np.ndarray):
    n = max(len(x), len(y))
    return np.pad(x, (0, n - len(x))), np.pad(y, (0, n - len(y)))


def lp_norm(x, r: float) -> float:
    a = np.abs(_vec(x))
    if a.size == 0:
        return 0.0
    if math.isinf(r):
        return float(a.max())
    # fsum keeps the value independent of coordinate order
    return math.fsum((a**r).tolist()) ** (1.0 / r)


def lq_dist(x, y, r: float) -> float:
    """l^r distance; the shorter vector is padded with zeros."""
    a, b = _pad(_vec(x), _vec(y))
    return lp_norm(a - b, r)


def lp_norms(X: np.ndarray, r: float) -> np.ndarray:
    """Row-wise l^r norms of a 2-D array."""
    a = np.abs(np.asarray(X, dtype=float))
    if math.isinf(r):
        return a.max(axis=1) if a.shape[1] else np.zeros(len(a))
    if r == 1:
        return a.sum(axis=1)
    if r == 2:
        return np.sqrt((a * a).sum(axis=1))
    # scale by the row maximum: avoids overflow and makes a single nonzero
    # coordinate come out exactly
    m = a.max(axis=1) if a.shape[1] else np.zeros(len(a))
    safe = np.where(m > 0, m, 1.0)
    return m * ((a / safe[:, None]) ** r).sum(axis=1) ** (1.0 / r)


def k_eps(p: float, q: float, eps: float) -> int:
    """``ceil((2/eps)^(pq/(q-p))) - 1``.

    For ``q = inf`` the exponent is its limit ``p``. Values within 1e-9
    (relative) of an integer are snapped to it before taking the ceiling, so
    e.g. ``(2/1)^2`` counts as exactly 4.
    """
    _check_pq(p, q)
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    expo = p if math.isinf(q) else p * q / (q - p)
    val = (2.0 / eps) ** expo
    near = round(val)
    if abs(val - near) <= 1e-9 * max(1.0, val):
        val = near
    return int(math.ceil(val)) - 1


def lipschitz_bound(k: int, q: float) -> float:
    """Lipschitz constant ``1 + k^(1/q)`` of F; ``k^(1/q)`` is 1 when q = inf."""
    return 2.0 if math.isinf(q) else 1.0 + k ** (1.0 / q)


def _check_pq(p, q):
    if not (1 <= p < q):
        raise ValueError(f"need 1 <= p < q <= inf, got p={p}, q={q}")


@dataclass(frozen=True)
class ReductionParams:
    p: float
    q: float
    eps: float
    k_eps: int = -1

    def __post_init__(self):
        object.__setattr__(self, "k_eps", k_eps(self.p, self.q, self.eps))

    @property
    def lipschitz(self) -> float:
        return lipschitz_bound(self.k_eps, self.q)


# -- the group {+-1}^k x| S_k ----------------------------------------------------


@dataclass(frozen=True)
class SignedPermutation:
    """Element ``(signs, sigma)`` of the hyperoctahedral group.

    ``perm[i]`` is ``sigma(i)``. The action is ``(g x)[n] = signs[n] *
    x[sigma^-1(n)]``, i.e. coordinate i moves to position ``sigma(i)`` and
    the sign is read at the destination.
    """

    signs: tuple
    perm: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        perm = tuple(int(i) for i in self.perm)
        if len(signs) != len(perm):
            raise ValueError("signs and permutation must have equal length")
        if any(s not in (-1, 1) for s in signs):
            raise ValueError("signs must be +1 or -1")
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "perm", perm)

    @classmethod
    def identity(cls, k: int) -> "SignedPermutation":
        return cls((1,) * k, tuple(range(k)))

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> "SignedPermutation":
        return cls(tuple(rng.choice([-1, 1], size=k)), tuple(rng.permutation(k)))

    @property
    def k(self) -> int:
        return len(self.perm)

    def apply(self, x) -> np.ndarray:
        x = _vec(x)
        if len(x) != self.k:
            raise ValueError(f"vector of length {len(x)} acted on by an element of G_{self.k}")
        y = np.empty_like(x)
        y[list(self.perm)] = x
        return np.asarray(self.signs, dtype=float) * y

    def __mul__(self, other: "SignedPermutation") -> "SignedPermutation":
        if self.k != other.k:
            raise ValueError("cannot compose elements of different G_k")
        inv = self._inverse_perm()
        signs = tuple(self.signs[n] * other.signs[inv[n]] for n in range(self.k))
        perm = tuple(self.perm[other.perm[i]] for i in range(self.k))
        return SignedPermutation(signs, perm)

    def inverse(self) -> "SignedPermutation":
        return SignedPermutation(
            tuple(self.signs[self.perm[m]] for m in range(self.k)),
            self._inverse_perm(),
        )

    def _inverse_perm(self) -> tuple:
        inv = [0] * self.k
        for i, s in enumerate(self.perm):
            inv[s] = i
        return tuple(inv)


def group_apply(g: SignedPermutation, x) -> np.ndarray:
    return g.apply(x)


def group_compose(g: SignedPermutation, h: SignedPermutation) -> SignedPermutation:
    return g * h


def group_inverse(g: SignedPermutation) -> SignedPermutation:
    return g.inverse()


def canonicalize(x):
    """Signed permutation moving ``x`` into the cone of nonincreasing,
    nonnegative vectors.

    Coordinates are ordered by decreasing absolute value with a stable sort,
    and ``sign(0)`` is taken as +1. Returns ``(g, g.apply(x))``.
    """
    x = _vec(x)
    order = np.argsort(-np.abs(x), kind="stable")
    perm = np.empty(len(x), dtype=int)
    perm[order] = np.arange(len(x))
    signs = np.where(x[order] < 0, -1, 1)
    g = SignedPermutation(tuple(signs), tuple(perm))
    return g, g.apply(x)


def in_cone(y) -> bool:
    y = _vec(y)
    return bool(np.all(y >= 0) and np.all(y[:-1] >= y[1:]))


def f_trunc(y, k: int) -> np.ndarray:
    """Subtract the (k+1)-th coordinate from the first k and zero the rest.

    ``y`` must be nonincreasing and nonnegative. Missing coordinates count as
    zero, so vectors of length ``<= k`` come back unchanged.
    """
    y = _vec(y)
    if not in_cone(y):
        raise ValueError("f_trunc needs a nonincreasing nonnegative vector")
    if len(y) <= k:
        return y.copy()
    out = np.zeros_like(y)
    out[:k] = y[:k] - y[k]
    return out


def _check_ball(x: np.ndarray, p: float, tol: float):
    norm = lp_norms(np.atleast_2d(x), p)
    if np.any(norm > 1 + tol):
        raise ValueError(
            f"point outside the unit l^{p} ball (norm {norm.max():.15g})"
        )


def reduce_F(x, params: ReductionParams, *, tol: float = BALL_TOL) -> np.ndarray:
    """Evaluate ``F(x) = g^-1 f(g x)`` for a single point of the l^p ball,
    literally through :func:`canonicalize` and the group inverse."""
    x = _vec(x)
    _check_ball(x, params.p, tol)
    g, y = canonicalize(x)
    return g.inverse().apply(f_trunc(y, params.k_eps))


def reduce_F_batch(X, params: ReductionParams, *, tol: float = BALL_TOL) -> np.ndarray:
    """Vectorised :func:`reduce_F` over the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_ball(X, params.p, tol)
    k = params.k_eps
    if X.shape[1] <= k:
        return X.copy()
    a = np.abs(X)
    order = np.argsort(-a, axis=1, kind="stable")
    y = np.take_along_axis(a, order, axis=1)
    top = y[:, :k] - y[:, k : k + 1]
    idx = order[:, :k]
    sign = np.where(np.take_along_axis(X, idx, axis=1) < 0, -1.0, 1.0)
    out = np.zeros_like(X)
    np.put_along_axis(out, idx, sign * top, axis=1)
    return out


def support_size(x, atol: float = 0.0) -> int:
    return int(np.count_nonzero(np.abs(_vec(x)) > atol))


def project_Ak(x, k: int, q: float):
    """Nearest point of ``A_k`` (vectors with at most k nonzeros) in l^q.

    Keeps the k coordinates of largest absolute value (earlier index wins a
    tie). Returns ``(y, dist)``.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    x = _vec(x)
    y = x.copy()
    if support_size(x) > k:
        order = np.argsort(-np.abs(x), kind="stable")
        y[order[k:]] = 0.0
    return y, lq_dist(x, y, q)


def project_Ak_bruteforce(x, k: int, q: float):
    """Reference for :func:`project_Ak`: try every keep-set of size <= k."""
    x = _vec(x)
    best = None
    for size in range(min(k, len(x)) + 1):
        for keep in itertools.combinations(range(len(x)), size):
            y = np.zeros_like(x)
            y[list(keep)] = x[list(keep)]
            d = lq_dist(x, y, q)
            if best is None or d < best[1]:
                best = (y, d)
    return best
