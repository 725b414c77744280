"""Seeded experiments and their JSON / CSV emission.

Every experiment is a pure function of its :class:`ExperimentConfig`; all
randomness comes from substreams of ``config.seed`` keyed by the dimension
(or trial) being processed, so a rerun reproduces every number.

Records are emitted in long format, one row per ``(n, quantity, value)``.
CSV columns: ``command, n, quantity, value``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import instances
from .certify import lpball_reduce_bound, obsdiam_bracket_R, run_inequality_suite, antipodal_lower
from .lp import ReductionParams, reduce_F_batch
from .mmspace import DIAMETER_CAP, FiniteMMSpace, WeightedCloud, partial_diameter_exact, sep_exact
from .sphere import cone_directions, derived_seed, median_concentration_profile, sample_cone, substream

SCHEMA_VERSION = 1
COMMANDS = ("demo-two-point", "suite", "sphere-concentration", "prop41", "theorem1", "obsdiam-bracket")
CSV_COLUMNS = ("command", "n", "quantity", "value")


class HypothesisError(ValueError):
    """Parameters outside the range where the underlying result holds."""


# per-command defaults for the fields left as None
DEFAULTS = {
    "demo-two-point": {},
    "suite": {"samples": 500},
    "sphere-concentration": {"p": 2.0, "q": 2.0, "n_list": (4, 16, 64, 256), "samples": 5000,
                             "r_grid": (0.1, 0.2, 0.3, 0.5)},
    "prop41": {"p": 2.0, "q": 2.0, "n_list": (30,), "samples": 200, "kappa": 0.25},
    "theorem1": {"p": 1.0, "q": 2.0, "eps": 0.5, "kappa": 0.1, "n_list": (16, 256), "samples": 1000},
    "obsdiam-bracket": {"n_list": (6, 10), "kappa": 0.2},
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    p: float | None = None
    q: float | None = None
    n_list: tuple | None = None
    samples: int | None = None
    eps: float | None = None
    kappa: float | None = None
    seed: int = 0
    output: str = "-"
    format: str = "json"
    r_grid: tuple | None = None
    exact_points: int = DIAMETER_CAP
    input: str | None = None

    def resolved(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {self.format!r}")
        fill = {k: v for k, v in DEFAULTS[self.command].items() if getattr(self, k) is None}
        cfg = replace(self, **fill)
        if cfg.n_list is not None:
            cfg = replace(cfg, n_list=tuple(int(n) for n in cfg.n_list))
        if cfg.r_grid is not None:
            cfg = replace(cfg, r_grid=tuple(float(r) for r in cfg.r_grid))
        return cfg

    def params(self) -> dict:
        out = {}
        for key in ("p", "q", "n_list", "samples", "eps", "kappa", "r_grid", "exact_points", "input"):
            val = getattr(self, key)
            if val is None or (key == "exact_points" and self.command != "theorem1"):
                continue
            out[key] = _jsonable(val)
        return out


@dataclass
class ExperimentRecord:
    command: str
    seed: int
    params: dict
    results: list = field(default_factory=list)
    wall_time: float = 0.0

    def add(self, n, quantity: str, value) -> None:
        self.results.append({"n": n, "quantity": quantity, "value": _jsonable(value)})

    def value(self, quantity: str, n=None):
        for row in self.results:
            if row["quantity"] == quantity and (n is None or row["n"] == n):
                return row["value"]
        raise KeyError((quantity, n))

    def payload(self) -> dict:
        """Everything except the wall time: identical across reruns."""
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "results": self.results,
        }

    def to_dict(self) -> dict:
        doc = self.payload()
        doc["wall_time"] = self.wall_time
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentRecord":
        if doc.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema {doc.get('schema')!r}")
        return cls(doc["command"], doc["seed"], doc["params"], list(doc["results"]),
                   doc.get("wall_time", 0.0))


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "inf" if math.isinf(v) else v
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    return v


# -- commands -------------------------------------------------------------------------


def _demo_two_point(cfg, rec):
    X = FiniteMMSpace([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5])
    rec.add(2, "partial_diameter", partial_diameter_exact(X, 0.5))
    rec.add(2, "sep", sep_exact(X, 0.5, 0.5))


def _suite(cfg, rec):
    report = run_inequality_suite(cfg.seed, cfg.samples)
    for name, s in report.summary().items():
        rec.add(None, f"{name}.checks", s["checks"])
        rec.add(None, f"{name}.passed", s["passed"])
        rec.add(None, f"{name}.min_margin", s["min_margin"])
    rec.add(None, "greedy_equality_rate", report.greedy_equality_rate())
    rec.add(None, "failed", report.failed)


def _sphere_concentration(cfg, rec):
    if not cfg.q <= cfg.p:
        raise HypothesisError(
            f"sphere-concentration needs 1 <= q <= p (concentration range), got p={cfg.p}, q={cfg.q}"
        )
    for n in cfg.n_list:
        x = cone_directions(substream(cfg.seed, n), n, cfg.p, cfg.samples)
        prof = median_concentration_profile(x[:, 0], cfg.r_grid)
        for r, v in zip(cfg.r_grid, prof):
            rec.add(n, f"profile[r={r:g}]", v)
            rec.add(n, f"stderr[r={r:g}]", math.sqrt(v * (1 - v) / cfg.samples))


def _antipodal(cfg, rec):
    if not cfg.q <= cfg.p:
        raise HypothesisError(
            f"prop41 needs 1 <= q <= p (antipodal pairs are only >= 2 apart when q <= p), got p={cfg.p}, q={cfg.q}"
        )
    if not 0 < cfg.kappa < 0.5:
        raise HypothesisError(f"prop41 needs 0 < kappa < 1/2, got {cfg.kappa}")
    for n in cfg.n_list:
        S = sample_cone(n, cfg.p, cfg.samples, derived_seed(cfg.seed, n), symmetrize=True)
        rec.add(n, "antipodal_lower", antipodal_lower(S, cfg.q, cfg.kappa))


def _ball_scale(n: int, p: float) -> float:
    # x -> x * n^-(1/p - 1/2) maps the l^2 sphere into the l^p ball, 1-Lipschitz
    # for the l^q distance whenever p < q
    return n ** -max(0.0, 1.0 / p - 0.5)


def _reduction_chain(cfg, rec):
    if not cfg.p < cfg.q:
        raise HypothesisError(
            f"theorem1 needs 1 <= p < q <= inf (the reduction map needs p < q), got p={cfg.p}, q={cfg.q}"
        )
    params = ReductionParams(cfg.p, cfg.q, cfg.eps)
    tol = 1e-9
    for n in cfg.n_list:
        y = cone_directions(substream(cfg.seed, n), n, 2.0, cfg.samples) * _ball_scale(n, cfg.p)
        fy = reduce_F_batch(y, params)

        m = min(cfg.exact_points, cfg.samples)
        sub = WeightedCloud.in_coords(y[:m], np.full(m, 1.0 / m), cfg.q)
        exact = lpball_reduce_bound(sub, params, cfg.kappa, cap=cfg.exact_points)
        rec.add(n, "direct_exact", exact.direct)
        rec.add(n, "reduced_exact", exact.reduced)
        rec.add(n, "bound_ok_exact", exact.bound_ok)
        rec.add(n, "exact_points", m)

        # the coordinate observable is 1-Lipschitz, so the chain survives projection
        c = int(np.argmax(fy.var(axis=0)))
        w = np.full(cfg.samples, 1.0 / cfg.samples)
        direct = partial_diameter_exact(WeightedCloud.on_line(y[:, c], w), cfg.kappa)
        reduced = partial_diameter_exact(WeightedCloud.on_line(fy[:, c], w), cfg.kappa)
        rec.add(n, "direct_projected", direct)
        rec.add(n, "reduced_projected", reduced)
        rec.add(n, "bound_ok_projected", direct <= reduced + cfg.eps + tol)
        rec.add(n, "projected_coordinate", c)
    rec.params["k_eps"] = params.k_eps
    rec.params["lipschitz"] = params.lipschitz


def _obsdiam_bracket(cfg, rec):
    if not cfg.kappa > 0:
        raise HypothesisError(f"observable diameter needs kappa > 0, got {cfg.kappa}")
    if cfg.input:
        spaces = [FiniteMMSpace.from_json(Path(cfg.input))]
    else:
        spaces = [instances.random_mmspace(substream(cfg.seed, n), n) for n in cfg.n_list]
    for X in spaces:
        b = obsdiam_bracket_R(X, cfg.kappa)
        rec.add(X.n, "bracket_lower", b.lower)
        rec.add(X.n, "bracket_upper", b.upper)


_RUNNERS = {
    "demo-two-point": _demo_two_point,
    "suite": _suite,
    "sphere-concentration": _sphere_concentration,
    "prop41": _antipodal,
    "theorem1": _reduction_chain,
    "obsdiam-bracket": _obsdiam_bracket,
}


def run_experiment(config: ExperimentConfig) -> ExperimentRecord:
    cfg = config.resolved()
    rec = ExperimentRecord(cfg.command, cfg.seed, cfg.params())
    start = time.perf_counter()
    _RUNNERS[cfg.command](cfg, rec)
    rec.wall_time = time.perf_counter() - start
    return rec


# -- emission ---------------------------------------------------------------------------


def to_json(record: ExperimentRecord) -> str:
    return json.dumps(record.to_dict(), indent=2) + "\n"


def to_csv(record: ExperimentRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in record.results:
        n = "" if row["n"] is None else row["n"]
        val = row["value"]
        w.writerow([record.command, n, row["quantity"], repr(val) if isinstance(val, float) else val])
    return buf.getvalue()


def emit(record: ExperimentRecord, format: str = "json", path="-") -> str:
    """Write ``record`` as JSON or long-format CSV to ``path`` (``-`` is
    stdout). Returns the emitted text."""
    if format == "json":
        text = to_json(record)
    elif format == "csv":
        text = to_csv(record)
    else:
        raise ValueError(f"format must be json or csv, got {format!r}")
    if str(path) == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text
