"""Randomized checks of the trap, growth and Green function inequalities.

Each suite draws its sample points from a seeded generator in the calling
process and evaluates them (optionally in a process pool), so reports are
byte-identical for a fixed seed whatever the worker count.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ._parallel import parallel_map
from .errors import NotApplicable
from .green import green_minus, green_plus
from .maps import BACKWARD, FORWARD, Params, Point3, forward_step, inverse_step, iterate
from .numeric import ComplexExt
from .regions import (LN_1_5, RegionConstants, in_v_minus, in_v_plus, log_m,
                      region_verdict, sample_v_minus, sample_v_plus, v_minus_margin,
                      v_plus_margin)

DEFAULT_SAMPLES = 1000
DEFAULT_SEED = 7
STABILIZATION = 1e-6
_ROUNDING = 1e-12


@dataclass
class VerifyReport:
    property: str
    seed: int
    params: dict
    constants: dict
    attempted: int = 0
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    worst_margin: float | None = None
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def add(self, ok: bool, margin: float, w: Point3 | None = None, reason: str = ""):
        self.attempted += 1
        if margin is not None and math.isfinite(margin):
            self.worst_margin = (margin if self.worst_margin is None
                                 else min(self.worst_margin, margin))
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append({"point": encode_point(w) if w is not None else None,
                                  "reason": reason})

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "status": self.status,
            "seed": self.seed,
            "params": self.params,
            "constants": self.constants,
            "counts": {"attempted": self.attempted, "passed": self.passed,
                       "failed": self.failed, "skipped": self.skipped},
            "worst_margin": self.worst_margin,
            "failures": self.failures,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "quadmap verification report",
    "type": "object",
    "required": ["property", "status", "seed", "params", "constants", "counts",
                 "worst_margin", "failures", "notes"],
    "properties": {
        "property": {"type": "string"},
        "status": {"enum": ["ok", "not-applicable"]},
        "seed": {"type": "integer"},
        "params": {
            "type": "object",
            "required": ["a", "b"],
            "properties": {
                "a": {"$ref": "#/$defs/pair"},
                "b": {"$ref": "#/$defs/pair"},
            },
        },
        "constants": {"type": "object"},
        "counts": {
            "type": "object",
            "required": ["attempted", "passed", "failed", "skipped"],
            "properties": {k: {"type": "integer", "minimum": 0}
                           for k in ("attempted", "passed", "failed", "skipped")},
        },
        "worst_margin": {"type": ["number", "null"]},
        "failures": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["point", "reason"],
                "properties": {
                    "point": {"type": "array", "items": {"$ref": "#/$defs/decpair"},
                              "minItems": 3, "maxItems": 3},
                    "reason": {"type": "string"},
                },
            },
        },
        "notes": {"type": "object"},
    },
    "$defs": {
        "pair": {"type": "array", "items": {"type": "number"},
                 "minItems": 2, "maxItems": 2},
        # decimal strings with exponent field, e.g. "1.25e+4096"
        "decpair": {"type": "array",
                    "items": {"type": "string",
                              "pattern": "^-?[0-9]+(\\.[0-9]+)?(e[+-][0-9]+)?$"},
                    "minItems": 2, "maxItems": 2},
    },
}


def encode_point(w: Point3) -> list:
    return [list(c.to_decimal_strings()) for c in w]


def _pair(z: complex) -> list:
    return [z.real, z.imag]


def _report(name: str, p: Params, c: RegionConstants, seed: int) -> VerifyReport:
    return VerifyReport(name, int(seed), {"a": _pair(p.a), "b": _pair(p.b)}, c.as_dict())


def _disc(rng: np.random.Generator, r: float) -> complex:
    rad = r * math.sqrt(rng.uniform())
    ph = rng.uniform(0.0, 2.0 * math.pi)
    return complex(rad * math.cos(ph), rad * math.sin(ph))


def _polydisc_point(rng: np.random.Generator, r: float) -> Point3:
    return Point3.of(_disc(rng, r), _disc(rng, r), _disc(rng, r))


def _collect(candidates, keep, n: int, workers, batch: int = 64, max_batches: int = 200):
    """First ``n`` candidates (in draw order) whose evaluation passes ``keep``.

    ``candidates()`` returns the next point; ``keep`` is evaluated in the pool.
    Returns ``(kept, evaluations, draws)``.
    """
    kept, evals, draws = [], [], 0
    for _ in range(max_batches):
        if len(kept) >= n:
            break
        pts = [candidates() for _ in range(batch)]
        draws += batch
        results = parallel_map(keep, pts, workers)
        for w, res in zip(pts, results):
            if res is not None and len(kept) < n:
                kept.append(w)
                evals.append(res)
    return kept, evals, draws


# --------------------------------------------------------------------------
# trap invariance


def _check_forward_trap(p: Params, c: RegionConstants, w: Point3):
    lx, ly, _ = w.log_abs()
    w1 = forward_step(p, w)
    lx1, ly1, _ = w1.log_abs()
    be2 = c.b_abs * c.epsilon ** 2
    slacks = {
        "H(w) in V-": v_minus_margin(w1, c),
        "|x1| > |xy|/2": lx1 - (lx + ly - math.log(2.0)),
        "|x1| < 3|xy|/2": (LN_1_5 + lx + ly) - lx1,
        "|y1| > (1-|b|eps^2)|x|^2": ly1 - (math.log1p(-be2) + 2 * lx),
        "|y1| < (1+|b|eps^2)|x|^2": (math.log1p(be2) + 2 * lx) - ly1,
    }
    name, worst = min(slacks.items(), key=lambda t: t[1])
    return worst > 0 and in_v_minus(w1, c), worst, name


def _check_backward_trap(p: Params, c: RegionConstants, w: Point3):
    lz = w.z.log_abs()
    w1 = inverse_step(p, w)
    lz1 = w1.z.log_abs()
    slacks = {
        "H^-1(w) in V+": v_plus_margin(w1, c),
        "|z1| > C1|z|^3": lz1 - (math.log(c.C1) + 3 * lz),
        "|z1| < C2|z|^3": (math.log(c.C2) + 3 * lz) - lz1,
    }
    name, worst = min(slacks.items(), key=lambda t: t[1])
    return worst > 0 and in_v_plus(w1, c), worst, name


def _run_points(report, fn, pts, workers):
    for w, (ok, margin, why) in zip(pts, parallel_map(fn, pts, workers)):
        report.add(ok, margin, w, "" if ok else f"violated: {why}")
    return report


def verify_trap_forward(p: Params, c: RegionConstants, samples: int = DEFAULT_SAMPLES,
                        seed: int = DEFAULT_SEED, workers: int | None = None,
                        points=None) -> VerifyReport:
    """H(V-) in V- and |xy|/2 < |x1| < 3|xy|/2, (1-|b|eps^2)|x|^2 < |y1| < (1+|b|eps^2)|x|^2."""
    c.validate(p)
    report = _report("trap_forward", p, c, seed)
    if points is None:
        points = sample_v_minus(c, np.random.default_rng(seed), samples)
    else:
        points = [w for w in points if in_v_minus(w, c)]
    return _run_points(report, partial(_check_forward_trap, p, c), points, workers)


def verify_trap_backward(p: Params, c: RegionConstants, samples: int = DEFAULT_SAMPLES,
                         seed: int = DEFAULT_SEED, workers: int | None = None,
                         points=None) -> VerifyReport:
    """H^-1(V+) in V+ and C1|z|^3 < |z1| < C2|z|^3."""
    c.validate(p)
    report = _report("trap_backward", p, c, seed)
    if points is None:
        points = sample_v_plus(c, np.random.default_rng(seed), samples)
    else:
        points = [w for w in points if in_v_plus(w, c)]
    return _run_points(report, partial(_check_backward_trap, p, c), points, workers)


# --------------------------------------------------------------------------
# boundedness of backward orbits on K- (|b| > 1)


def _log_m_minus(w: Point3, c: RegionConstants) -> float:
    lx, ly, _ = w.log_abs()
    return max(c.log_R_plus, lx, math.log1p(c.delta) + 0.5 * ly)


def _kminus_orbit(p: Params, c: RegionConstants, horizon: int, w: Point3):
    """Log norms and backward M_n of a K- orbit, or ``None`` if it reaches V+."""
    norms, ms = [], []
    for wn in iterate(p, w, horizon, BACKWARD):
        if in_v_plus(wn, c):
            return None
        norms.append(wn.log_norm())
        ms.append(_log_m_minus(wn, c))
    return norms, ms


def _check_kminus(c: RegionConstants, horizon: int, data):
    norms, ms = data
    half = horizon // 2
    first = max(norms[: half + 1])
    second = max(norms[half:])
    margin = math.log1p(STABILIZATION) - (second - first)
    violations = [ms[n] for n in range(len(ms) - 1)
                  if ms[n] > c.log_R_plus and ms[n + 1] > ms[n] + _ROUNDING]
    why = []
    if margin <= 0:
        why.append(f"running max grew by factor {math.exp(second - first):.9g}")
    if violations:
        why.append(f"M_(n+1) > M_n above R_plus ({len(violations)} steps)")
    return not why, margin, "; ".join(why), max(violations, default=None)


def verify_kminus_bounded(p: Params, c: RegionConstants, samples: int = 100,
                          horizon: int = 500, seed: int = DEFAULT_SEED,
                          workers: int | None = None, points=None,
                          radius: float = 0.5) -> VerifyReport:
    """Backward orbits of K- points stop growing (needs |b| > 1).

    The running max of ||H^-n(w)|| over the second half of the horizon may
    not exceed the first-half max by more than a factor 1 + 1e-6, and the
    backward envelope M_n = max(R+, |x_n|, (1+delta)|y_n|^(1/2)) must be
    nonincreasing whenever it exceeds R+.
    """
    c.validate(p)
    if not c.kminus_bound_applies:
        raise NotApplicable("backward boundedness on K- needs |b| > 1")
    report = _report("kminus_bounded", p, c, seed)
    keep = partial(_kminus_orbit, p, c, horizon)
    if points is None:
        rng = np.random.default_rng(seed)
        pts, orbits, draws = _collect(lambda: _polydisc_point(rng, radius), keep,
                                      samples, workers)
        report.notes["candidates_drawn"] = draws
    else:
        pts, orbits = [], []
        for w, res in zip(points, parallel_map(keep, points, workers)):
            if res is not None:
                pts.append(w)
                orbits.append(res)
        report.notes["excluded_escaping"] = len(points) - len(pts)
    threshold = None
    for w, data in zip(pts, orbits):
        ok, margin, why, thr = _check_kminus(c, horizon, data)
        if thr is not None:
            threshold = thr if threshold is None else max(threshold, thr)
        report.add(ok, margin, w, why)
    report.notes["horizon"] = horizon
    report.notes["sampling_radius"] = radius
    report.notes["empirical_m_threshold"] = (None if threshold is None
                                             else math.exp(threshold))
    return report


# --------------------------------------------------------------------------
# Green function functional equations


def _green_pair(p: Params, c: RegionConstants, tol: float, horizon: int,
                direction: str, w: Point3):
    if all(v.is_zero() for v in w):
        # the fixed point: G = 0 on both sides, trivially consistent
        return 0.0
    if direction == FORWARD:
        g0 = green_plus(p, c, w, tol, horizon)
        if not g0.converged:
            return None
        g1 = green_plus(p, c, forward_step(p, w), tol, horizon)
        factor = 2.0
    else:
        g0 = green_minus(p, c, w, tol, horizon)
        if not g0.converged:
            return None
        g1 = green_minus(p, c, inverse_step(p, w), tol, horizon)
        factor = 3.0
    if not g1.converged:
        return None
    return abs(g1.value - factor * g0.value)


def verify_green_functional(p: Params, c: RegionConstants, samples: int = 200,
                            tol: float = 1e-8, seed: int = DEFAULT_SEED,
                            workers: int | None = None, horizon: int = 200,
                            radius: float = 3.0, points=None) -> VerifyReport:
    """|G+(H w) - 2 G+(w)| and |G-(H^-1 w) - 3 G-(w)| at most 10 tol.

    ``samples`` converged pairs are collected per direction; draws whose
    estimates stay unresolved are counted as skipped.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    report = _report("green_functional", p, c, seed)
    bound = 10.0 * tol
    rng = np.random.default_rng(seed)
    for direction in (FORWARD, BACKWARD):
        keep = partial(_green_pair, p, c, tol, horizon, direction)
        if points is None:
            pts, residuals, draws = _collect(lambda: _polydisc_point(rng, radius), keep,
                                             samples, workers)
        else:
            pts, residuals = [], []
            for w, res in zip(points, parallel_map(keep, points, workers)):
                if res is not None:
                    pts.append(w)
                    residuals.append(res)
            draws = len(points)
        report.skipped += draws - len(pts)
        for w, r in zip(pts, residuals):
            margin = math.log(bound / r) if r > 0 else math.log(bound) + 745.0
            report.add(r <= bound, margin, w,
                       f"{direction} residual {r:.3e} exceeds {bound:.1e}")
        report.notes[f"{direction}_pairs"] = len(pts)
        report.notes[f"{direction}_max_residual"] = max(residuals, default=None)
    report.notes["tol"] = tol
    return report


# --------------------------------------------------------------------------
# K+ growth envelope


def _kplus_orbit(p: Params, c: RegionConstants, horizon: int, w: Point3):
    pts = []
    for wn in iterate(p, w, horizon, FORWARD):
        if in_v_minus(wn, c):
            return None
        pts.append(wn.log_abs())
    return pts


def _check_envelope(c: RegionConstants, logs):
    """Items (i)-(iv) of the K+ growth bounds plus M_n <= c_tilde M_{n-2}^3."""
    m = [max(c.log_R_minus, math.log(2.0 * c.a_abs) + lz, 1.5 * lx,
             1.5 * ly - math.log(c.epsilon)) for lx, ly, lz in logs]
    lc, lct = math.log(c.c_lemma), math.log(c.c_tilde)
    m1 = m[1] if len(m) > 1 else m[0]
    m_tilde = max(lct + m[0], 2.0 * (lct + m1))
    slack = {"i": math.inf, "ii": math.inf, "iii": math.inf, "iv": math.inf,
             "recursion": math.inf}
    s3 = math.sqrt(3.0)
    for n in range(1, len(m)):
        lx, ly, _ = logs[n]
        lx_prev = logs[n - 1][0]
        slack["i"] = min(slack["i"], LN_1_5 + m[n - 1] - lx)
        slack["ii"] = min(slack["ii"], max(1.5 * (LN_1_5 + m[n - 1]),
                                           1.5 * ly - math.log(c.epsilon)) - m[n])
        slack["iii"] = min(slack["iii"], lc + max(1.5 * m[n - 1], 3.0 * lx_prev) - m[n])
        slack["iv"] = min(slack["iv"], s3 ** n * m_tilde - m[n])
        if n >= 2:
            slack["recursion"] = min(slack["recursion"], lct + 3.0 * m[n - 2] - m[n])
    tol = _ROUNDING * (1.0 + max(abs(v) for v in m))
    bad = [k for k, v in slack.items() if v < -tol]
    worst = min(slack.values())
    return not bad, worst, ", ".join(bad)


def _kplus_candidate(rng: np.random.Generator, radius: float, k: int) -> Point3:
    if k % 2 == 0:
        return _polydisc_point(rng, radius)
    # the invariant line x = z = 0 lies in K+
    mod = math.exp(rng.uniform(-2.0, 2.0))
    ph = rng.uniform(0.0, 2.0 * math.pi)
    return Point3.of(0, complex(mod * math.cos(ph), mod * math.sin(ph)), 0)


def verify_growth_envelope(p: Params, c: RegionConstants, samples: int = 100,
                           horizon: int = 60, seed: int = DEFAULT_SEED,
                           workers: int | None = None, points=None,
                           radius: float = 0.3) -> VerifyReport:
    """The K+ growth bounds along forward orbits that never enter V-."""
    c.validate(p)
    report = _report("growth_envelope", p, c, seed)
    keep = partial(_kplus_orbit, p, c, horizon)
    if points is None:
        rng = np.random.default_rng(seed)
        counter = iter(range(10 ** 9))
        pts, orbits, draws = _collect(
            lambda: _kplus_candidate(rng, radius, next(counter)), keep, samples, workers)
        report.notes["candidates_drawn"] = draws
    else:
        pts, orbits = [], []
        for w, res in zip(points, parallel_map(keep, points, workers)):
            if res is not None:
                pts.append(w)
                orbits.append(res)
        report.notes["excluded_escaping"] = len(points) - len(pts)
    for w, logs in zip(pts, orbits):
        ok, margin, why = _check_envelope(c, logs)
        report.add(ok, margin, w, f"violated: {why}")
    report.notes["horizon"] = horizon
    report.notes["c_lemma"] = c.c_lemma
    report.notes["c_tilde"] = c.c_tilde
    return report


# --------------------------------------------------------------------------


SUITES = ("trap_forward", "trap_backward", "kminus_bounded", "green_functional",
          "growth_envelope")


def run_all(p: Params, c: RegionConstants, samples: int = DEFAULT_SAMPLES,
            seed: int = DEFAULT_SEED, workers: int | None = None,
            tol: float = 1e-8) -> dict[str, VerifyReport]:
    """All five suites; the K- suite is marked not-applicable when |b| <= 1."""
    reports = {
        "trap_forward": verify_trap_forward(p, c, samples, seed, workers),
        "trap_backward": verify_trap_backward(p, c, samples, seed, workers),
    }
    small = max(1, samples // 10)
    if c.kminus_bound_applies:
        reports["kminus_bounded"] = verify_kminus_bounded(p, c, small, seed=seed,
                                                          workers=workers)
    else:
        rep = _report("kminus_bounded", p, c, seed)
        rep.status = "not-applicable"
        rep.notes["reason"] = "needs |b| > 1"
        reports["kminus_bounded"] = rep
    reports["green_functional"] = verify_green_functional(
        p, c, max(1, samples // 5), tol, seed, workers)
    reports["growth_envelope"] = verify_growth_envelope(p, c, small, seed=seed,
                                                        workers=workers)
    return reports


def reports_json(reports: dict[str, VerifyReport]) -> str:
    return json.dumps({k: v.to_dict() for k, v in reports.items()}, sort_keys=True,
                      indent=2)
