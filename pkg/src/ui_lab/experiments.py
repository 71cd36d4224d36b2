"""Configurable experiment runs producing plain data tables.

A config is one JSON document::

    {"protocol": "two_ref",
     "parameters": {"n_a": 1, "n_b": 1, "n_c": 1, "delta": 2.0},
     "shots": 100000, "seed": 7,
     "sweep": {"parameter": "delta", "min": 0.0, "max": 4.0, "steps": 41}}

``shots == 0`` skips every Monte Carlo column. Each sweep point draws from
its own seed derived from ``(seed, point index)``, so a table is identical
regardless of how many workers evaluate it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import noise, optimality, protocols, recovery
from .errors import ConfigError
from .protocols import Hypothesis

__all__ = [
    "PROTOCOLS",
    "Sweep",
    "ExperimentConfig",
    "ResultTable",
    "run_experiment",
    "point_seed",
]

FORMAT_VERSION = "1"


# --------------------------------------------------------------------------
# config


@dataclass(frozen=True)
class Sweep:
    parameter: str
    min: float
    max: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)

    @classmethod
    def from_dict(cls, d) -> "Sweep":
        if not isinstance(d, dict):
            raise ConfigError("sweep must be an object", key="sweep")
        for key in ("parameter", "min", "max", "steps"):
            if key not in d:
                raise ConfigError(f"sweep is missing {key!r}", key=f"sweep.{key}")
        try:
            lo, hi, steps = float(d["min"]), float(d["max"]), d["steps"]
        except (TypeError, ValueError):
            raise ConfigError("sweep bounds must be numbers", key="sweep") from None
        if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
            raise ConfigError(f"sweep steps must be a positive integer, got {steps!r}",
                              key="sweep.steps")
        return cls(str(d["parameter"]), lo, hi, steps)

    def to_dict(self) -> dict:
        return {"parameter": self.parameter, "min": self.min, "max": self.max, "steps": self.steps}


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str
    parameters: dict = field(default_factory=dict)
    shots: int = 0
    seed: int = 0
    sweep: Sweep | None = None

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; "
                              f"choose from {sorted(PROTOCOLS)}", key="protocol")
        if not isinstance(self.parameters, dict):
            raise ConfigError("parameters must be an object", key="parameters")
        for name, value in (("shots", self.shots), ("seed", self.seed)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}", key=name)
        if self.shots < 0:
            raise ConfigError(f"shots must be >= 0, got {self.shots}", key="shots")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}", key="seed")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - {"protocol", "parameters", "shots", "seed", "sweep"}
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"unexpected config entry {key!r}", key=key)
        if "protocol" not in d:
            raise ConfigError("config needs a protocol", key="protocol")
        sweep = Sweep.from_dict(d["sweep"]) if d.get("sweep") is not None else None
        return cls(d["protocol"], dict(d.get("parameters", {})), d.get("shots", 0),
                   d.get("seed", 0), sweep)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None

    def to_dict(self) -> dict:
        out = {"protocol": self.protocol, "parameters": self.parameters,
               "shots": self.shots, "seed": self.seed}
        if self.sweep is not None:
            out["sweep"] = self.sweep.to_dict()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def with_overrides(self, shots=None, seed=None) -> "ExperimentConfig":
        return ExperimentConfig(self.protocol, self.parameters,
                                self.shots if shots is None else shots,
                                self.seed if seed is None else seed, self.sweep)


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _json_value(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


@dataclass
class ResultTable:
    """Named columns of equal length plus a metadata echo.

    Every ``mc_<name>`` column must come with ``se_<name>``.
    """

    columns: dict[str, list]
    metadata: dict

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
        for name in self.columns:
            if name.startswith("mc_") and "se_" + name[3:] not in self.columns:
                raise ValueError(f"column {name!r} lacks its standard error")

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(self.columns))
        for row in zip(*self.columns.values()):
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        cols = {k: [_json_value(v) for v in vals] for k, vals in self.columns.items()}
        return json.dumps({"metadata": self.metadata, "columns": cols}, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ConfigError(f"unknown output format {fmt!r}", key="format")


# --------------------------------------------------------------------------
# parameter helpers

_MISSING = object()


def _get(p: dict, key: str, default=_MISSING):
    if key in p:
        return p[key]
    if default is _MISSING:
        raise ConfigError(f"missing parameter {key!r}", key=key)
    return default


def _num(p, key, default=_MISSING) -> float:
    v = _get(p, key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
        raise ConfigError(f"parameter {key!r} must be a number, got {v!r}", key=key)
    return float(v)


def _int(p, key, default=_MISSING) -> int:
    v = _get(p, key, default)
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        raise ConfigError(f"parameter {key!r} must be an integer, got {v!r}", key=key)
    return int(v)


def _amp(v, key) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        try:
            return complex(float(v[0]), float(v[1]))
        except (TypeError, ValueError):
            pass
    elif isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    raise ConfigError(f"amplitude {key!r} must be a number or a [re, im] pair, got {v!r}", key=key)


def _int_list(p, key) -> list[int]:
    v = _get(p, key)
    items = v if isinstance(v, list) else [v]
    try:
        return [_int({key: x}, key) for x in items]
    except ConfigError:
        raise ConfigError(f"parameter {key!r} must be an integer or a list of integers",
                          key=key) from None


def _pair(p) -> tuple[complex, complex]:
    """Reference amplitudes from ``alpha1``/``alpha2`` or from ``delta`` (then ``(delta, 0)``)."""
    if "alpha1" in p or "alpha2" in p:
        return _amp(_get(p, "alpha1"), "alpha1"), _amp(_get(p, "alpha2"), "alpha2")
    return complex(_num(p, "delta")), 0j


def _recursion(p) -> str:
    r = _get(p, "recursion", "printed")
    if r not in recovery.RECURSIONS:
        raise ConfigError(f"recursion must be one of {recovery.RECURSIONS}", key="recursion")
    return r


def _mc(row, name, p, se):
    row["mc_" + name] = p
    row["se_" + name] = se


# --------------------------------------------------------------------------
# protocol handlers: (parameters, shots, seed) -> ordered row


def _two_ref(p, shots, seed):
    n_a, n_b, n_c = (_num(p, k, 1) for k in ("n_a", "n_b", "n_c"))
    t1 = _num(p, "t1", 0.5)
    a1, a2 = _pair(p)
    p1, p2, pt = protocols.analytic_two_ref(n_a, n_b, n_c, t1, a1, a2)
    row = {"P1": p1, "P2": p2, "P": pt}
    if shots:
        setup = protocols.build_two_ref_setup(_int(p, "n_a", 1), _int(p, "n_b", 1),
                                              _int(p, "n_c", 1), t1)
        res = protocols.mc_success(setup, (a1, a2), shots, seed)
        _mc(row, "P", res["p_success"], res["se_success"])
        err = res["wrong"] / shots
        _mc(row, "P_error", err, math.sqrt(err * (1 - err) / shots))
    return row


def _multi_ref(p, shots, seed):
    m, n_a, n_b = _int(p, "m"), _int(p, "n_a", 1), _int(p, "n_b", 1)
    raw = _get(p, "ref_amps")
    if not isinstance(raw, list) or len(raw) != m:
        raise ConfigError(f"ref_amps must list {m} amplitudes", key="ref_amps")
    scale = _num(p, "scale", 1.0)
    refs = [scale * _amp(v, "ref_amps") for v in raw]
    row = {"P": protocols.analytic_multi_ref_P(m, n_a, n_b, refs)}
    if shots:
        setup = protocols.build_multi_ref_setup(m, n_a, n_b)
        res = protocols.mc_success(setup, refs, shots, seed)
        _mc(row, "P", res["p_success"], res["se_success"])
        err = res["wrong"] / shots
        _mc(row, "P_error", err, math.sqrt(err * (1 - err) / shots))
    return row


def _weak(p, shots, seed):
    n = _int(p, "N")
    a1, a2 = _pair(p)
    truth = _int(p, "truth", 1)
    row = {"P": float(-np.expm1(-abs(a1 - a2) ** 2 / 3.0))}
    if shots:
        res = protocols.weak_ui_batch(n, Hypothesis(truth, (a1, a2)), shots, seed)
        ok = int(res["verdicts"][truth])
        q = ok / shots
        _mc(row, "P", q, math.sqrt(q * (1 - q) / shots))
    return row


def _recovery_rounds(p, shots, seed):
    delta = _num(p, "delta")
    rec = _recursion(p)
    return {f"P_round_{k}": float(recovery.cumulative_success(k, delta, rec))
            for k in _int_list(p, "rounds")}


def _same_unknown(p, shots, seed):
    a1, a2 = _pair(p)
    cond, overall, setup = recovery.same_unknown_second_round(a1 - a2)
    row = {"P_conditional": cond, "P_overall": overall}
    if shots:
        res = protocols.mc_success(setup, (a1, a2), shots, seed)
        _mc(row, "P_overall", res["p_success"], res["se_success"])
    return row


def _splitting_compare(p, shots, seed):
    delta = _num(p, "delta")
    rec = _recursion(p)
    row = {}
    for n in _int_list(p, "N"):
        r, s, d = recovery.compare_strategies(n, delta, rec)
        row[f"recovery_{n}"] = float(r)
        row[f"splitting_{n}"] = float(s)
        row[f"difference_{n}"] = float(d)
    return row


def _noise_rates(p, shots, seed):
    n_a, n_b = _int(p, "n_a", 1), _int(p, "n_b", 1)
    n_c = _int(p, "n_c", n_b)
    sigma, xi = _num(p, "sigma"), _num(p, "xi")
    rep = noise.averaged_rates_closed(n_a, n_b, sigma, xi, n_c=n_c)
    row = {"R": rep.reliability, "theta": rep.theta, "P": rep.p_success,
           "P_error": rep.p_error, "P_failure": rep.p_failure}
    if shots:
        est = noise.mc_rates(n_a, n_b, sigma, xi, shots, seed, n_c=n_c)
        _mc(row, "R", est.reliability, est.se_reliability)
        _mc(row, "P", est.p_success, est.se_success)
        _mc(row, "P_error", est.p_error, est.se_error)
        _mc(row, "P_failure", est.p_failure, est.se_failure)
    return row


def _optimality_sweep(p, shots, seed):
    if "l1" in p:
        l1, delta = _num(p, "l1"), _num(p, "delta")
        return {
            "l2_saturated": optimality.lambda2_sq_max(l1),
            "P_saturated": optimality.two_detector_P(l1, delta),
            "l2_printed": optimality.lambda2_sq_printed(l1),
            "P_printed": optimality.two_detector_P(l1, delta, form="printed"),
        }
    delta = _num(p, "delta")
    best = optimality.optimize_lambda1(delta)
    l1 = math.nan if best is optimality.DEGENERATE else best
    return {
        "l1_opt": l1,
        "P_opt": 0.0 if math.isnan(l1) else optimality.two_detector_P(l1, delta),
        "P_setup": float(-np.expm1(-delta * delta / 3.0)),
    }


def _gaussian_integral_check(p, shots, seed):
    m = _int(p, "m")
    a, b, sigma = _num(p, "a"), _num(p, "b"), _num(p, "sigma")
    x = _amp(_get(p, "x"), "x")
    closed = noise.gaussian_integral_Im(m, a, b, x, sigma)
    step = noise.gaussian_integral_step(m, a, b, x, sigma)
    numeric = noise.gaussian_integral_numeric(a, b, x, sigma) if m == 1 else math.nan
    return {"closed": closed, "recursion": step, "abs_diff": abs(closed - step),
            "numeric": numeric}


PROTOCOLS: dict[str, Callable[[dict, int, int], dict]] = {
    "two_ref": _two_ref,
    "multi_ref": _multi_ref,
    "weak": _weak,
    "recovery_rounds": _recovery_rounds,
    "same_unknown": _same_unknown,
    "splitting_compare": _splitting_compare,
    "noise_rates": _noise_rates,
    "optimality_sweep": _optimality_sweep,
    "gaussian_integral_check": _gaussian_integral_check,
}


# --------------------------------------------------------------------------
# runner


def point_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for sweep point ``index``."""
    state = np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _package_version() -> str:
    from . import __version__
    return __version__


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ResultTable:
    """Evaluate ``cfg`` at every sweep point and collect the rows into a table."""
    handler = PROTOCOLS[cfg.protocol]
    if cfg.sweep is None:
        points: list[tuple[Any, dict]] = [(None, dict(cfg.parameters))]
    else:
        name = cfg.sweep.parameter
        points = [(float(v), {**cfg.parameters, name: float(v)}) for v in cfg.sweep.values()]

    def evaluate(job):
        index, (_, params) = job
        return handler(params, cfg.shots, point_seed(cfg.seed, index))

    jobs = list(enumerate(points))
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, jobs))
    else:
        rows = [evaluate(job) for job in jobs]

    columns: dict[str, list] = {}
    if cfg.sweep is not None:
        columns[cfg.sweep.parameter] = [v for v, _ in points]
    for key in rows[0]:
        if key in columns:
            raise ConfigError(f"sweep parameter {key!r} clashes with an output column",
                              key="sweep.parameter")
        columns[key] = [row[key] for row in rows]
    metadata = {"config": cfg.to_dict(), "seed": cfg.seed, "version": _package_version(),
                "format": FORMAT_VERSION}
    return ResultTable(columns, metadata)
