"""Computable brackets and pass/fail certificates for the concentration
inequalities.

Observable diameters are never reported as point values: the supremum over
all 1-Lipschitz observables is not computable, so :func:`obsdiam_bracket_R`
returns a lower bound realised by explicit observables and separation-based
bounds on both sides.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import instances
from .lp import (
    ReductionParams,
    lp_norms,
    lq_dist,
    reduce_F_batch,
    support_size,
)
from .mmspace import (
    DIAMETER_CAP,
    SEP_CAP,
    FiniteMMSpace,
    InstanceTooLargeError,
    WeightedCloud,
    _mass_tol,
    _subset_masses,
    lipschitz_constant,
    partial_diameter_exact,
    pushforward,
    sep_exact,
    sep_lower_greedy,
)
from .sphere import SphereSampleSet, empirical_mmspace, substream

BRACKET_TOL = 1e-9


@dataclass(frozen=True)
class Bracket:
    lower: float
    upper: float
    witnesses: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper + BRACKET_TOL:
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    def as_tuple(self):
        return (self.lower, self.upper)


# -- distance observables ---------------------------------------------------------


def distance_observable(X: FiniteMMSpace, A, clamp=None) -> np.ndarray:
    """Values of ``x -> d(x, A)`` on every point of ``X``.

    With ``clamp=(a, b)``, ``a < b``, returns ``min(d(x, A) + a, b)``, a
    1-Lipschitz function with values in ``[a, b]``.
    """
    idx = np.asarray(sorted(A), dtype=int)
    if idx.size == 0:
        raise ValueError("distance to the empty set is undefined")
    vals = X.dist[:, idx].min(axis=1)
    if clamp is not None:
        a, b = clamp
        if not a < b:
            raise ValueError("clamp needs a < b")
        vals = np.minimum(vals + a, b)
    return vals


def _subset_distances(d: np.ndarray) -> np.ndarray:
    """dA[mask, x] = d(x, A) for every subset A (row 0, the empty set, is inf)."""
    n = d.shape[0]
    table = np.full((1, n), np.inf)
    for b in range(n):
        table = np.concatenate([table, np.minimum(table, d[b])])
    return table


def _batched_line_partial_diameters(values: np.ndarray, w: np.ndarray, need: float, tol: float) -> np.ndarray:
    """Row-wise partial diameters of the measures ``sum_i w_i delta_{values[r, i]}``."""
    order = np.argsort(values, axis=1, kind="stable")
    xs = np.take_along_axis(values, order, axis=1)
    ws = w[order]
    cw = np.concatenate([np.zeros((len(values), 1)), np.cumsum(ws, axis=1)], axis=1)
    n = values.shape[1]
    i, j = np.triu_indices(n)
    mass = cw[:, j + 1] - cw[:, i]
    span = xs[:, j] - xs[:, i]
    span = np.where(mass >= need - tol, span, np.inf)
    return span.min(axis=1)


def distance_family_lower(X: FiniteMMSpace, kappa: float, *, cap: int = SEP_CAP):
    """Largest partial diameter at ``kappa`` over the observables ``d(., A)``.

    Every nonempty ``A`` is tried (reflections ``-d(., A)`` give the same
    value). Returns ``(value, A)`` with ``A`` a tuple of point indices, or
    ``(0.0, ())`` when ``kappa >= m``.
    """
    if X.n > cap:
        raise InstanceTooLargeError(
            f"instance too large for exact mode: {X.n} points exceeds cap {cap}"
        )
    m = X.total_mass
    tol = _mass_tol(m)
    need = m - kappa
    if need <= tol or X.n == 0:
        return 0.0, ()
    table = _subset_distances(X.dist)[1:]
    vals = _batched_line_partial_diameters(table, X.weights, need, tol)
    best = int(np.argmax(vals))
    mask = best + 1
    return float(vals[best]), tuple(i for i in range(X.n) if mask >> i & 1)


def _next_mass_above(X: FiniteMMSpace, kappa: float):
    masses = _subset_masses(X.weights)
    above = masses[masses > kappa + _mass_tol(X.total_mass)]
    return float(above.min()) if above.size else None


def obsdiam_bracket_R(X: FiniteMMSpace, kappa_prime: float, kappa_grid=None, *, cap: int = SEP_CAP) -> Bracket:
    """Bracket on the real-valued observable diameter ``ObsDiam_R(X; -kappa')``.

    Lower side: the best of ``Sep(X; k, k)`` over grid values ``k > kappa'``
    and the distance-observable family. Upper side: ``Sep(X; kappa'/2,
    kappa'/2)``. The default grid is the single smallest subset mass strictly
    above ``kappa'``, which already gives the largest admissible separation.
    """
    if not kappa_prime > 0:
        raise ValueError("kappa' must be positive")
    if kappa_grid is None:
        nxt = _next_mass_above(X, kappa_prime) if X.n <= cap else None
        kappa_grid = [] if nxt is None else [nxt]
    kappa_grid = [float(k) for k in kappa_grid]
    if any(k <= kappa_prime for k in kappa_grid):
        raise ValueError("grid values must exceed kappa'")
    sep_lower, sep_kappa = 0.0, None
    for k in kappa_grid:
        s = sep_exact(X, k, cap=cap)
        if s > sep_lower:
            sep_lower, sep_kappa = s, k
    fam, A = distance_family_lower(X, kappa_prime, cap=cap)
    upper = sep_exact(X, kappa_prime / 2, cap=cap)
    lower = max(sep_lower, fam)
    witnesses = {
        "lower_sep": {"value": sep_lower, "kappa": sep_kappa},
        "lower_observable": {"value": fam, "map": "d(., A)", "A": list(A)},
        "upper_sep": {"value": upper, "kappa": kappa_prime / 2},
    }
    return Bracket(lower, upper, witnesses)


# -- the l^p-ball reduction chain --------------------------------------------------------


class ReductionBound(NamedTuple):
    direct: float
    reduced: float
    bound_ok: bool


def lpball_reduce_bound(cloud: WeightedCloud, params: ReductionParams, kappa: float, *,
                        cap: int = DIAMETER_CAP, tol: float = BRACKET_TOL) -> ReductionBound:
    """Partial diameters of a ball-supported cloud before and after F.

    ``cloud`` lives in the unit l^p ball with the l^q distance. Since F moves
    every point by at most eps/2, ``direct <= reduced + eps`` must hold.
    """
    if cloud.target.is_line or cloud.r != params.q:
        raise ValueError(f"cloud must live in coordinate space with the l^{params.q} distance")
    reduced_cloud = WeightedCloud(cloud.target, reduce_F_batch(cloud.points, params), cloud.weights)
    direct = partial_diameter_exact(cloud, kappa, cap=cap)
    reduced = partial_diameter_exact(reduced_cloud, kappa, cap=cap)
    return ReductionBound(direct, reduced, bool(direct <= reduced + params.eps + tol))


# -- antipodal lower bound ---------------------------------------------------------------


def antipodal_lower(S: SphereSampleSet, q: float, kappa: float, *, cap: int = DIAMETER_CAP) -> float:
    """Lower bound on the partial diameter at mass ``1 - kappa`` of a
    symmetrised sphere sample viewed in l^q.

    Up to ``cap`` points the partial diameter is computed exactly. Beyond that
    the pigeonhole bound is returned: a set of more than half the points holds
    at least ``c - N`` complete antipodal pairs (``c`` points needed, ``N``
    pairs), so its diameter is at least the ``(c - N)``-th smallest
    ``d(x, -x)``. For ``q <= p`` every such distance is at least 2.
    """
    if not S.symmetrized:
        raise ValueError("antipodal bound needs a symmetrised sample")
    if q > S.p:
        raise ValueError(f"need q <= p (got q={q}, p={S.p})")
    if not 0 <= kappa < 0.5:
        raise ValueError(f"need 0 <= kappa < 1/2, got {kappa}")
    if S.size <= cap:
        return partial_diameter_exact(empirical_mmspace(S, q), kappa, cap=cap)
    pairs = S.size // 2
    x = S.points[0::2]
    anti = np.sort(2.0 * lp_norms(x, q))
    needed = math.ceil((1 - kappa) * S.size - _mass_tol(1.0) * S.size)
    return float(anti[needed - pairs - 1])


# -- inequality suite ------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRecord:
    """One inequality ``lhs <= rhs`` evaluated on one random instance."""

    name: str
    seed: int
    trial: int
    lhs: float
    rhs: float
    margin: float
    passed: bool


@dataclass
class SuiteReport:
    seed: int
    trials: int
    records: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.records)

    @property
    def failed(self) -> int:
        return len(self.records) - self.passed

    @property
    def all_passed(self) -> bool:
        return self.failed == 0

    def by_name(self, name: str) -> list:
        return [r for r in self.records if r.name == name]

    def summary(self) -> dict:
        out = {}
        for r in self.records:
            s = out.setdefault(r.name, {"checks": 0, "passed": 0, "min_margin": math.inf})
            s["checks"] += 1
            s["passed"] += r.passed
            s["min_margin"] = min(s["min_margin"], r.margin)
        return out

    def greedy_equality_rate(self) -> float:
        rows = self.by_name("greedy_vs_exact")
        return sum(r.lhs == r.rhs for r in rows) / len(rows) if rows else math.nan

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "failed": self.failed,
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    CSV_COLUMNS = ("name", "seed", "trial", "lhs", "rhs", "margin", "pass")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.records:
            w.writerow([r.name, r.seed, r.trial, repr(r.lhs), repr(r.rhs), repr(r.margin), int(r.passed)])
        return buf.getvalue()


# (p, q) pairs exercised by the F certificates
PQ_PAIRS = ((1.0, 2.0), (1.0, math.inf), (2.0, 3.0))
EPS_VALUES = (0.5, 1.0)


def _record(name, seed, trial, lhs, rhs, tol=BRACKET_TOL):
    margin = float(rhs) - float(lhs)
    return CheckRecord(name, seed, trial, float(lhs), float(rhs), margin, bool(margin >= -tol))


def run_trial(seed: int, trial: int, *, fault: float | None = None) -> list:
    """All checks for one trial, drawn from the substream ``(seed, trial)``.

    ``fault`` is a test hook: when set, the Lipschitz constants used on the
    right-hand side of the Lipschitz checks are multiplied by it, so a value
    below 1 must eventually produce failing records.
    """
    rng = substream(seed, trial)
    shrink = 1.0 if fault is None else float(fault)
    out = []

    X, pts = instances.random_mmspace_with_points(rng, int(rng.integers(2, 11)))
    k1, k2 = rng.uniform(0.02, 0.6, size=2)

    # Lipschitz image of X on the real line
    a = rng.normal(size=pts.shape[1])
    images = pts @ a
    alpha = lipschitz_constant(X.dist, images)
    Y = pushforward(X, images)
    out.append(_record("pushforward_sep", seed, trial, sep_exact(Y, k1, k2),
                       shrink * alpha * sep_exact(X, k1, k2)))

    kp = float(rng.uniform(0.02, 0.5))
    kk = float(kp + rng.uniform(1e-6, 0.5))
    bracket = obsdiam_bracket_R(X, kp)
    fam = bracket.witnesses["lower_observable"]["value"]
    out.append(_record("sep_below_observable", seed, trial, sep_exact(X, kk), fam))
    out.append(_record("bracket_order", seed, trial, bracket.lower, bracket.upper))

    exact = sep_exact(X, k1, k2)
    out.append(_record("greedy_vs_exact", seed, trial, sep_lower_greedy(X, k1, k2), exact))

    n_atoms = int(rng.integers(1, 11))
    line = instances.random_line_cloud(rng, n_atoms, grid=bool(rng.integers(0, 2)))
    kl = float(rng.uniform(0.01, 0.6))
    out.append(_record("diam_below_sep", seed, trial, partial_diameter_exact(line, 2 * kl),
                       sep_exact(line, kl)))

    k = int(rng.integers(1, 5))
    r = [1.0, 2.0, 3.0, math.inf][int(rng.integers(0, 4))]
    cloud = instances.random_coord_cloud(rng, int(rng.integers(1, 11)), k, r)
    kc = float(rng.uniform(0.01, 1.0))
    factor = 1.0 if math.isinf(r) else k ** (1.0 / r)
    out.append(_record("diam_below_coordinate_sep", seed, trial, partial_diameter_exact(cloud, kc),
                       factor * sep_exact(cloud, kc / (2 * k))))

    p, q = PQ_PAIRS[int(rng.integers(0, len(PQ_PAIRS)))]
    params = ReductionParams(p, q, EPS_VALUES[int(rng.integers(0, 2))])
    dim = int(rng.integers(1, min(2 * params.k_eps + 2, 128) + 1))
    xs = instances.random_ball_points(rng, 2, dim, p)
    x, y = xs
    if rng.uniform() < 0.5:
        y = instances.perturb_in_ball(rng, x[None, :], p, 1e-3)[0]
    fx, fy = reduce_F_batch(np.stack([x, y]), params)
    out.append(_record("reduction_move", seed, trial, lq_dist(x, fx, q), params.eps / 2, tol=1e-12))
    out.append(_record("reduction_support", seed, trial, support_size(fx), params.k_eps, tol=0.0))
    out.append(_record("reduction_lipschitz", seed, trial, lq_dist(fx, fy, q),
                       shrink * params.lipschitz * lq_dist(x, y, q)))
    return out


def run_inequality_suite(seed: int, trials: int, *, fault: float | None = None) -> SuiteReport:
    """Run ``trials`` independent random trials of every check.

    Deterministic given ``seed``; failures are kept as records, never dropped.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    report = SuiteReport(seed, trials)
    for t in range(trials):
        report.records.extend(run_trial(seed, t, fault=fault))
    return report
