"""Scenario-driven verification: config loading, checks, reports.

A scenario is a YAML mapping with every numeric parameter spelled out.  Each
requested check produces evidence items ``{label, relation, lhs, rhs, tol,
ok, converged}``; a check's status is a pure function of its items and its
aggregation rule, so a serialized report can be re-checked offline with
:func:`recheck`.
"""
from __future__ import annotations

import csv
import json
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__
from .capacity import capacity_lp, capacity_orbit_upper
from .entropy import RateProfile, topological_entropy
from .measures import (
    InvariantMeasure,
    MeasureError,
    _solve_stationary,
    build_markov_measure,
    parse_measure,
)
from .sensitivity import (
    rate_a1,
    rate_a2_profile,
    rate_mu_bowen,
    rate_mu_direct,
)
from .symbolic import (
    Sft,
    SftError,
    SymbolicPoint,
    parse_point,
    parse_sft,
    parse_union,
    periodic_points,
    strongly_connected_components,
)

CHECKS = (
    "theorem-a",
    "theorem-b",
    "theorem-c",
    "lemma-3.2",
    "lemma-4.1",
    "lemma-lem1",
    "lemma-333",
    "corollary-4.5",
)

# keys each check must declare; nothing falls back to a hidden default
CHECK_KEYS: dict[str, tuple[str, ...]] = {
    "theorem-a": ("abs", "rel", "min_pass_fraction", "m_tol", "verdict_threshold"),
    "theorem-b": ("abs", "m", "exhaustive_limit"),
    "theorem-c": ("abs", "rel", "m_e", "m_d", "N_range", "witness_max_period"),
    "corollary-4.5": ("abs", "rel", "m_e", "m_d", "N_range", "witness_max_period"),
    "lemma-3.2": ("abs", "m", "L_direct"),
    "lemma-4.1": ("abs", "measures", "seed", "max_weight", "unions", "orbit_max_period"),
    "lemma-lem1": ("abs",),
    "lemma-333": ("abs", "rel"),
}

THREADS_ENV = "SENSTROPY_THREADS"
STATUS_ORDER = {"pass": 0, "inconclusive": 1, "fail": 2}


class ConfigError(ValueError):
    """Invalid or incomplete scenario."""


# ---------------------------------------------------------------------------
# scenario


@dataclass
class PointRecord:
    label: str
    point: SymbolicPoint
    source: int | None  # index of the measure it was sampled from


@dataclass
class Scenario:
    name: str
    sft_text: str
    measure_texts: list[str]
    explicit_points: list[str]
    per_measure: int
    sample_seed: int | None
    horizon: int
    m_range: list[int]
    N: int
    L: int
    checks: dict[str, dict[str, Any]]
    source: str = ""

    # resolved objects
    sft: Sft = field(init=False, repr=False)
    measures: list[InvariantMeasure] = field(init=False, repr=False)
    points: list[PointRecord] = field(init=False, repr=False)

    def echo(self) -> dict:
        return {
            "name": self.name,
            "sft": self.sft_text,
            "measures": list(self.measure_texts),
            "points": {
                "explicit": list(self.explicit_points),
                "sampled": {
                    "per_measure": self.per_measure,
                    "seed": self.sample_seed,
                    "horizon": self.horizon,
                },
            },
            "m_range": list(self.m_range),
            "N": self.N,
            "L": self.L,
            "checks": {k: self.checks[k] for k in self.checks},
        }


def _require(mapping: dict, key: str, where: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _int(v, where: str, minimum: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}, got {v}")
    return v


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    if v < 0 or not math.isfinite(v):
        raise ConfigError(f"{where}: must be a finite nonnegative number")
    return float(v)


def _int_list(v, where: str, minimum: int = 0) -> list[int]:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}: expected a nonempty list of integers")
    out = [_int(x, where, minimum) for x in v]
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"{where}: must be strictly increasing")
    return out


def _validate_check(name: str, cfg: dict) -> dict:
    where = f"checks.{name}"
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where}: expected a mapping of parameters")
    for key in CHECK_KEYS[name]:
        _require(cfg, key, where)
    unknown = set(cfg) - set(CHECK_KEYS[name])
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    out = dict(cfg)
    for key in ("abs", "rel", "m_tol", "verdict_threshold"):
        if key in out:
            out[key] = _num(out[key], f"{where}.{key}")
    if "min_pass_fraction" in out:
        f = _num(out["min_pass_fraction"], f"{where}.min_pass_fraction")
        if f > 1:
            raise ConfigError(f"{where}.min_pass_fraction must be <= 1")
    if "m" in out:
        out["m"] = _int_list(out["m"], f"{where}.m", minimum=1)
    for key in ("m_e", "m_d"):
        if key in out:
            _int(out[key], f"{where}.{key}", 1)
    if "N_range" in out:
        r = out["N_range"]
        if not isinstance(r, list) or len(r) != 2:
            raise ConfigError(f"{where}.N_range: expected [first, last]")
        lo, hi = (_int(v, f"{where}.N_range", 0) for v in r)
        if hi < lo:
            raise ConfigError(f"{where}.N_range: last < first")
    for key, lo in (
        ("exhaustive_limit", 1),
        ("L_direct", 1),
        ("witness_max_period", 1),
        ("measures", 1),
        ("seed", 0),
        ("max_weight", 1),
        ("orbit_max_period", 1),
    ):
        if key in out:
            _int(out[key], f"{where}.{key}", lo)
    if "unions" in out:
        if not isinstance(out["unions"], list) or not out["unions"]:
            raise ConfigError(f"{where}.unions: expected a nonempty list")
    return out


def scenario_from_dict(data: dict, source: str = "", seed: int | None = None) -> Scenario:
    """Validate a parsed scenario mapping and resolve every object it names."""
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping")
    known = {"name", "sft", "measures", "points", "m_range", "N", "L", "checks"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    name = str(_require(data, "name", "scenario"))
    sft_text = _require(data, "sft", "scenario")
    measure_texts = _require(data, "measures", "scenario")
    if not isinstance(measure_texts, list) or not measure_texts:
        raise ConfigError("measures: expected a nonempty list")
    pts = _require(data, "points", "scenario")
    explicit = pts.get("explicit", []) if isinstance(pts, dict) else None
    if explicit is None or not isinstance(explicit, list):
        raise ConfigError("points.explicit: expected a list")
    sampled = _require(pts, "sampled", "points")
    per_measure = _int(_require(sampled, "per_measure", "points.sampled"), "per_measure", 0)
    base_seed = sampled.get("seed")
    if per_measure > 0:
        if base_seed is None:
            raise ConfigError("points.sampled.seed is required when sampling")
        base_seed = _int(base_seed, "points.sampled.seed", 0)
    horizon = _int(_require(sampled, "horizon", "points.sampled"), "horizon", 1)
    m_range = _int_list(_require(data, "m_range", "scenario"), "m_range", minimum=1)
    N = _int(_require(data, "N", "scenario"), "N", 2)
    L = _int(_require(data, "L", "scenario"), "L", 1)
    if per_measure > 0 and horizon < N + m_range[-1] + 1:
        raise ConfigError(
            f"points.sampled.horizon={horizon} is shorter than N + max(m_range) + 1"
        )
    checks_raw = _require(data, "checks", "scenario")
    if not isinstance(checks_raw, dict) or not checks_raw:
        raise ConfigError("checks: expected a nonempty mapping")
    checks = {}
    for cname in CHECKS:  # canonical order
        if cname in checks_raw:
            checks[cname] = _validate_check(cname, checks_raw[cname])
    bad = set(checks_raw) - set(CHECKS)
    if bad:
        raise ConfigError(f"unknown checks {sorted(bad)}; expected a subset of {list(CHECKS)}")
    sc = Scenario(
        name, str(sft_text), [str(t) for t in measure_texts], [str(p) for p in explicit],
        per_measure, base_seed, horizon, m_range, N, L, checks, source,
    )
    resolve(sc, seed)
    return sc


def resolve(sc: Scenario, seed: int | None = None) -> Scenario:
    """Build the SFT, measures and points; ``seed`` overrides the sampling seed."""
    if seed is not None:
        sc.sample_seed = seed
    try:
        sc.sft = parse_sft(sc.sft_text)
    except SftError as exc:
        raise ConfigError(f"sft: {exc}") from None
    sc.measures = []
    for i, text in enumerate(sc.measure_texts):
        try:
            sc.measures.append(parse_measure(text, sc.sft))
        except (MeasureError, SftError) as exc:
            raise ConfigError(f"measures[{i}]: {exc}") from None
    points: list[PointRecord] = []
    for i, text in enumerate(sc.explicit_points):
        try:
            x = parse_point(text)
        except (SftError, ValueError) as exc:
            raise ConfigError(f"points.explicit[{i}]: {exc}") from None
        if not sc.sft.contains(x):
            raise ConfigError(f"points.explicit[{i}]={text!r} is not in the subshift")
        points.append(PointRecord(f"x{i}", x, None))
    for i, mu in enumerate(sc.measures):
        for j in range(sc.per_measure):
            s = point_seed(sc.sample_seed, i, j)
            points.append(PointRecord(f"mu{i}s{j}", mu.sample_point(sc.horizon, s), i))
    sc.points = points
    return sc


def point_seed(base: int, measure_index: int, draw: int) -> int:
    """Deterministic per-draw seed derived from the scenario seed."""
    return int(np.random.SeedSequence([base, measure_index, draw]).generate_state(1)[0])


def load_scenario(path: str | os.PathLike, seed: int | None = None) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {p}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: invalid YAML: {exc}") from None
    return scenario_from_dict(data, source=p.name, seed=seed)


def default_scenario_paths() -> list[Path]:
    root = Path(__file__).with_name("scenarios")
    return sorted(root.glob("*.yaml"))


# ---------------------------------------------------------------------------
# evidence and status


def _item_ok(relation: str, lhs, rhs, tol: float) -> bool:
    if relation == "equal":
        return lhs == rhs
    if relation == "abs_le":
        return lhs == rhs or abs(lhs - rhs) <= tol
    if relation == "le":
        return lhs <= rhs + tol
    if relation == "ge":
        return lhs >= rhs - tol
    if relation == "within":
        lo, hi = rhs
        return lo - tol <= lhs <= hi + tol
    raise ValueError(f"unknown relation {relation!r}")


def _margin(it: dict) -> float:
    """Slack of an item in units of its tolerance (negative when violated)."""
    rel, lhs, rhs, tol = it["relation"], it["lhs"], it["rhs"], it["tol"]
    if rel == "equal":
        return 1.0 if lhs == rhs else -1.0
    def diff(a, b):
        return 0.0 if a == b else a - b

    if rel == "abs_le":
        m = tol - abs(diff(lhs, rhs))
    elif rel == "le":
        m = tol + diff(rhs, lhs)
    elif rel == "ge":
        m = tol + diff(lhs, rhs)
    else:
        m = tol + min(diff(lhs, rhs[0]), diff(rhs[1], lhs))
    if m != m:
        return 0.0
    return m / tol if tol > 0 and math.isfinite(m) else m


def item(label: str, relation: str, lhs, rhs, tol: float, converged: bool = True,
         informational: bool = False, **extra) -> dict:
    out = {
        "label": label,
        "relation": relation,
        "lhs": lhs,
        "rhs": rhs,
        "tol": tol,
        "ok": _item_ok(relation, lhs, rhs, tol),
        "converged": bool(converged),
    }
    if informational:
        out["informational"] = True
    out.update(extra)
    return out


def aggregate(items: list[dict], min_pass_fraction: float) -> str:
    hard = [it for it in items if not it.get("informational")]
    if not hard:
        return "pass"
    passed = sum(1 for it in hard if _item_ok(it["relation"], it["lhs"], it["rhs"], it["tol"]))
    if passed < min_pass_fraction * len(hard) - 1e-12:
        return "fail"
    if any(not it["converged"] for it in hard):
        return "inconclusive"
    return "pass"


@dataclass
class CheckResult:
    check: str
    items: list[dict]
    min_pass_fraction: float = 1.0
    notes: list[str] = field(default_factory=list)
    profiles: dict[str, RateProfile] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def status(self) -> str:
        return aggregate(self.items, self.min_pass_fraction)

    def headline(self) -> dict:
        """The least favourable hard item, used as the check-level lhs/rhs."""
        hard = [it for it in self.items if not it.get("informational")]
        if not hard:
            return {"lhs": None, "rhs": None, "tol": None, "relation": None, "label": None}
        worst = min(hard, key=_margin)
        return {k: worst[k] for k in ("lhs", "rhs", "tol", "relation", "label")}

    def as_dict(self) -> dict:
        head = self.headline()
        hard = [it for it in self.items if not it.get("informational")]
        return {
            "check": self.check,
            "status": self.status,
            "lhs": head["lhs"],
            "rhs": head["rhs"],
            "tol": head["tol"],
            "relation": head["relation"],
            "worst_item": head["label"],
            "rule": {"min_pass_fraction": self.min_pass_fraction},
            "passed": sum(1 for it in hard if it["ok"]),
            "total": len(hard),
            "notes": list(self.notes),
            "summary": self.summary,
            "items": self.items,
        }


@dataclass
class Report:
    scenario: Scenario
    checks: list[CheckResult]
    h_top: float
    wall_time: float = 0.0

    @property
    def status(self) -> str:
        worst = "pass"
        for c in self.checks:
            if STATUS_ORDER[c.status] > STATUS_ORDER[worst]:
                worst = c.status
        return worst

    @property
    def exit_code(self) -> int:
        return {"pass": 0, "fail": 1, "inconclusive": 3}[self.status]

    def as_dict(self) -> dict:
        sc = self.scenario
        return {
            "artifact": {"name": "senstropy", "version": __version__},
            "scenario": sc.echo(),
            "h_top": self.h_top,
            "points": [
                {"label": p.label, "point": str(p.point), "source": p.source} for p in sc.points
            ],
            "status": self.status,
            "checks": [c.as_dict() for c in self.checks],
        }


# ---------------------------------------------------------------------------
# checks


def _tol(cfg: dict, reference: float) -> float:
    rel = cfg.get("rel", 0.0)
    scale = abs(reference) if math.isfinite(reference) else 0.0
    return max(cfg["abs"], rel * scale)


@lru_cache(maxsize=4096)
def _a2(x: SymbolicPoint, m_e: int, m_d: int, lo: int, hi: int, sft: Sft):
    return rate_a2_profile(x, m_e, m_d, range(lo, hi + 1), sft)


def _check_theorem_a(sc: Scenario, cfg: dict, h_top: float) -> CheckResult:
    res = CheckResult("theorem-a", [], cfg["min_pass_fraction"])
    for i, mu in enumerate(sc.measures):
        if not mu.is_ergodic:
            res.notes.append(f"mu{i} is not ergodic; skipped")
            continue
        h = mu.entropy_rate()
        pts = [p for p in sc.points if p.source == i]
        values = []
        for p in pts:
            est = rate_mu_bowen(p.point, mu, sc.m_range, sc.N, tol=cfg["m_tol"])
            values.append(est.value)
            res.items.append(item(
                f"{p.label} mu{i}", "abs_le", est.value, h, _tol(cfg, h),
                converged=est.converged, case=est.details["case"],
                tail_by_m=est.details["tail_by_m"],
            ))
            res.profiles[f"theorem-a_mu{i}_{p.label}_m{sc.m_range[-1]}"] = est.profile
        if values:
            thr = cfg["verdict_threshold"]
            res.items.append(item(
                f"verdict mu{i}", "equal", bool(min(values) > thr), bool(h > thr), 0.0,
                entropy=h, min_rate=min(values),
            ))
    if not res.items:
        res.notes.append("no sampled points from ergodic measures")
    return res


def _check_theorem_b(sc: Scenario, cfg: dict, h_top: float) -> CheckResult:
    res = CheckResult("theorem-b", [])
    best_a1 = -math.inf
    for p in sc.points:
        for m in cfg["m"]:
            a1 = rate_a1(p.point, m, sc.L, sc.sft, exhaustive_limit=cfg["exhaustive_limit"])
            best_a1 = max(best_a1, a1.value)
            unions = [t.union for t in a1.terms]
            for i, mu in enumerate(sc.measures):
                d = rate_mu_direct(p.point, mu, m, sc.L, unions)
                res.items.append(item(
                    f"{p.label} mu{i} m={m}", "ge", a1.value, d.value, cfg["abs"],
                    a1_argmin=a1.details["argmin"], mu_argmin=d.details["argmin"],
                ))
    res.items.append(item(
        "sup_x 1/a_1 vs h_top", "ge", best_a1, h_top, cfg["abs"], informational=True,
    ))
    res.notes.append(
        "lhs is an upper estimate of 1/a_1 and rhs the infimum over the same union family "
        "plus single cylinders; only the proven direction is asserted"
    )
    return res


def _a2_candidates(sc: Scenario, max_period: int) -> list[tuple[str, SymbolicPoint]]:
    seen: set[SymbolicPoint] = set()
    out = []
    for p in sc.points:
        if p.point not in seen:
            seen.add(p.point)
            out.append((p.label, p.point))
    for x in periodic_points(sc.sft, max_period):
        if x not in seen:
            seen.add(x)
            out.append((f"per:{x}", x))
    return out


def _best_a2(sc: Scenario, cfg: dict, res: CheckResult, bound_items: bool):
    lo, hi = cfg["N_range"]
    best = None
    h_top = topological_entropy(sc.sft)
    for label, x in _a2_candidates(sc, cfg["witness_max_period"]):
        est = _a2(x, cfg["m_e"], cfg["m_d"], lo, hi, sc.sft)
        if bound_items:
            res.items.append(item(f"{label} 1/a_2 <= h_top", "le", est.value, h_top,
                                  _tol(cfg, h_top)))
        if best is None or est.value > best[2].value:
            best = (label, x, est)
    return best


def _check_theorem_c(sc: Scenario, cfg: dict, h_top: float) -> CheckResult:
    res = CheckResult("theorem-c", [])
    label, x, est = _best_a2(sc, cfg, res, bound_items=True)
    res.items.append(item(f"best {label}", "abs_le", est.value, h_top, _tol(cfg, h_top)))
    res.profiles[f"theorem-c_{label}"] = est.profile
    res.summary = {"best_point": str(x), "best_label": label}
    return res


def _check_corollary(sc: Scenario, cfg: dict, h_top: float) -> CheckResult:
    res = CheckResult("corollary-4.5", [])
    label, x, est = _best_a2(sc, cfg, res, bound_items=False)
    res.items.append(item(f"witness {label}", "abs_le", est.value, h_top, _tol(cfg, h_top)))
    res.summary = {"witness": str(x), "witness_label": label, "value": est.value}
    res.notes.append("finite search over scenario and periodic points; exact attainment "
                     "is not certified")
    return res


def _check_lemma_32(sc: Scenario, cfg: dict, h_top: float) -> CheckResult:
    res = CheckResult("lemma-3.2", [])
    for p in sc.points:
        for i, mu in enumerate(sc.measures):
            for m in cfg["m"]:
                d = rate_mu_direct(p.point, mu, m, cfg["L_direct"])
                lo, hi = d.details["bracket_lower"], d.details["bracket_upper"]
                res.items.append(item(
                    f"{p.label} mu{i} m={m}", "within", d.value, [lo, hi], cfg["abs"],
                    argmin=d.details["argmin"], family_size=d.details["family_size"],
                ))
    return res


def random_markov_measure(sft: Sft, rng: np.random.Generator, max_weight: int,
                          label: str = ""):
    """Markov measure with random rational transition weights on every allowed edge.

    On reducible subshifts the stationary vector mixes the closed classes with
    random rational weights; transient symbols get mass zero.
    """
    k = sft.alphabet_size
    P = []
    for a in range(k):
        succ = sft.successors[a]
        w = rng.integers(1, max_weight + 1, size=len(succ))
        row = [Fraction(0)] * k
        for b, wb in zip(succ, w.tolist()):
            row[b] = Fraction(int(wb), int(w.sum()))
        P.append(row)
    comps = strongly_connected_components(sft.matrix)
    closed = [c for c in comps if all(set(sft.successors[a]) <= set(c) for a in c)]
    cw = rng.integers(1, max_weight + 1, size=len(closed)).tolist()
    total = sum(cw)
    pi = [Fraction(0)] * k
    for c, wc in zip(closed, cw):
        sub = [[P[a][b] for b in c] for a in c]
        for a, v in zip(c, _solve_stationary(sub)):
            pi[a] = Fraction(wc, total) * v
    return build_markov_measure(P, pi, sft, mode="exact", label=label)


def _check_lemma_41(sc: Scenario, cfg: dict, h_top: float) -> CheckResult:
    res = CheckResult("lemma-4.1", [])
    try:
        unions = [parse_union(u, sc.sft) for u in cfg["unions"]]
    except (SftError, ValueError) as exc:
        raise ConfigError(f"checks.lemma-4.1.unions: {exc}") from None
    caps = []
    for u, V in zip(cfg["unions"], unions):
        c = capacity_lp(sc.sft, V, exact=True).value
        upper, witness = capacity_orbit_upper(sc.sft, V, cfg["orbit_max_period"])
        caps.append(c)
        res.items.append(item(f"c({u}) <= orbit", "le", float(c), float(upper), cfg["abs"],
                              witness=str(witness)))
    for i in range(cfg["measures"]):
        rng = np.random.default_rng(np.random.SeedSequence([cfg["seed"], i]))
        mu = random_markov_measure(sc.sft, rng, cfg["max_weight"], label=f"random{i}")
        for u, V, c in zip(cfg["unions"], unions, caps):
            res.items.append(item(f"random{i} {u}", "le", float(c),
                                  float(mu.measure_of_union(V)), cfg["abs"]))
    for i, mu in enumerate(sc.measures):
        for u, V, c in zip(cfg["unions"], unions, caps):
            res.items.append(item(f"mu{i} {u}", "le", float(c),
                                  float(mu.measure_of_union(V)), cfg["abs"]))
    res.summary = {"capacities": {u: str(c) for u, c in zip(cfg["unions"], caps)}}
    return res


def _check_lemma_lem1(sc: Scenario, cfg: dict, h_top: float) -> CheckResult:
    res = CheckResult("lemma-lem1", [])
    for p in sc.points:
        for i, mu in enumerate(sc.measures):
            outside = not mu.contains_point(p.point)
            atom = not outside and mu.atom_mass(p.point) > 0
            if not (outside or atom):
                continue
            est = rate_mu_bowen(p.point, mu, sc.m_range, sc.N)
            expected = math.inf if outside else 0.0
            lab = f"{p.label} mu{i} {'outside-support' if outside else 'atom'}"
            res.items.append(item(lab, "equal", est.value, expected, 0.0))
            prof = est.profile
            if outside:
                res.items.append(item(lab + " profile end", "equal",
                                      float(prof.values[-1]), math.inf, 0.0))
            else:
                res.items.append(item(lab + " profile tail", "abs_le",
                                      prof.tail_estimate, 0.0, cfg["abs"]))
            res.profiles[f"lemma-lem1_mu{i}_{p.label}"] = prof
    if not res.items:
        res.notes.append("no point lies outside a support or on an atom")
    return res


def _check_lemma_333(sc: Scenario, cfg: dict, h_top: float) -> CheckResult:
    res = CheckResult("lemma-333", [])
    for p in sc.points:
        for i, mu in enumerate(sc.measures):
            if not mu.contains_point(p.point) or mu.atom_mass(p.point) > 0:
                continue
            est = rate_mu_bowen(p.point, mu, sc.m_range, sc.N)
            prof = est.profile
            tail = prof.tail_estimate
            res.items.append(item(
                f"{p.label} mu{i}", "abs_le", prof.running_min, tail, _tol(cfg, tail),
            ))
    if not res.items:
        res.notes.append("no non-atomic point in a support; nothing to compare")
    res.notes.append("running infimum vs tail estimate at the finest scale; atoms and points "
                     "outside a support are covered by lemma-lem1")
    return res


CHECK_FUNCS: dict[str, Callable[[Scenario, dict, float], CheckResult]] = {
    "theorem-a": _check_theorem_a,
    "theorem-b": _check_theorem_b,
    "theorem-c": _check_theorem_c,
    "corollary-4.5": _check_corollary,
    "lemma-3.2": _check_lemma_32,
    "lemma-4.1": _check_lemma_41,
    "lemma-lem1": _check_lemma_lem1,
    "lemma-333": _check_lemma_333,
}


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return n


def run_verification(sc: Scenario, threads: int | None = None) -> Report:
    """Run every requested check; failures in one check never stop the others."""
    t0 = time.perf_counter()
    h_top = topological_entropy(sc.sft)
    names = list(sc.checks)

    def run_one(name: str) -> CheckResult:
        t = time.perf_counter()
        res = CHECK_FUNCS[name](sc, sc.checks[name], h_top)
        res.wall_time = time.perf_counter() - t
        return res

    n = threads if threads is not None else thread_count()
    if n == 1:
        results = [run_one(c) for c in names]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(run_one, names))  # ordered reduction
    return Report(sc, results, h_top, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# serialization


def _jsonable(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, (np.floating,)):
        return _jsonable(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _from_json(v):
    if isinstance(v, str) and v in ("inf", "-inf", "nan"):
        return float(v)
    if isinstance(v, list):
        return [_from_json(x) for x in v]
    return v


def report_json(report: Report | list[Report]) -> str:
    reports = report if isinstance(report, list) else [report]
    payload = [r.as_dict() for r in reports]
    body = payload if isinstance(report, list) else payload[0]
    return json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n"


def recheck(report: dict) -> dict[str, str]:
    """Recompute every check status from serialized evidence alone."""
    out = {}
    for c in report["checks"]:
        items = []
        for it in c["items"]:
            items.append({
                "relation": it["relation"],
                "lhs": _from_json(it["lhs"]),
                "rhs": _from_json(it["rhs"]),
                "tol": _from_json(it["tol"]),
                "converged": it["converged"],
                "informational": it.get("informational", False),
            })
        out[c["check"]] = aggregate(items, c["rule"]["min_pass_fraction"])
    return out


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def report_text(reports: list[Report]) -> str:
    lines = []
    for r in reports:
        sc = r.scenario
        lines.append(f"scenario {sc.name}  sft {sc.sft_text}  h_top {r.h_top:.12g}  "
                     f"status {r.status.upper()}  wall {r.wall_time:.2f}s")
        lines.append(f"  {'check':<15} {'status':<13} {'passed':>9}  {'lhs':>14} {'rhs':>22} "
                     f"{'tol':>10}  {'time':>7}")
        for c in r.checks:
            d = c.as_dict()
            lines.append(
                f"  {c.check:<15} {d['status']:<13} {d['passed']:>4}/{d['total']:<4}  "
                f"{_fmt(d['lhs']):>14} {_fmt(d['rhs']):>22} {_fmt(d['tol']):>10}  "
                f"{c.wall_time:>6.2f}s"
            )
            for note in c.notes:
                lines.append(f"      note: {note}")
        lines.append("")
    return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.8g}"
    return str(v)


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def write_profile_csv(profile: RateProfile, path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "value"])
            for n, v in profile.rows():
                w.writerow([n, repr(v)])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def emit_report(report: Report | list[Report], fmt: str, path: str | os.PathLike) -> list[Path]:
    """Write the report under directory ``path``; returns the files written.

    ``json``: ``report.json`` (deterministic) and ``timing.json``;
    ``csv``: ``checks.csv`` plus one ``profiles/<name>.csv`` per profile;
    ``text``: ``report.txt``.
    """
    reports = report if isinstance(report, list) else [report]
    out = Path(path)
    written: list[Path] = []
    if fmt == "json":
        _write(out / "report.json", report_json(report))
        timing = {
            r.scenario.name: {"total": r.wall_time, **{c.check: c.wall_time for c in r.checks}}
            for r in reports
        }
        _write(out / "timing.json", json.dumps(timing, sort_keys=True, indent=2) + "\n")
        written += [out / "report.json", out / "timing.json"]
    elif fmt == "csv":
        rows = ["scenario,check,status,passed,total,lhs,rhs,tol"]
        for r in reports:
            for c in r.checks:
                d = _jsonable(c.as_dict())
                rows.append(",".join(str(x) for x in (
                    r.scenario.name, c.check, d["status"], d["passed"], d["total"],
                    json.dumps(d["lhs"]).replace(",", ";"), json.dumps(d["rhs"]).replace(",", ";"),
                    d["tol"],
                )))
        _write(out / "checks.csv", "\n".join(rows) + "\n")
        written.append(out / "checks.csv")
        for r in reports:
            for c in r.checks:
                for name, prof in c.profiles.items():
                    p = out / "profiles" / f"{_slug(r.scenario.name)}_{_slug(name)}.csv"
                    write_profile_csv(prof, p)
                    written.append(p)
    elif fmt == "text":
        _write(out / "report.txt", report_text(reports))
        written.append(out / "report.txt")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return written


__all__ = [
    "CHECKS",
    "CheckResult",
    "ConfigError",
    "Report",
    "Scenario",
    "default_scenario_paths",
    "emit_report",
    "load_scenario",
    "recheck",
    "report_json",
    "run_verification",
    "scenario_from_dict",
]
