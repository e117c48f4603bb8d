"""Trapping regions V+ / V-, escape verdicts and the M_n growth envelope.

V+ = {|z| > max(R+, |x|, (1+delta)|y|^(1/2))} is invariant under H^-1 and
V- = {|xy| > max(R-, 2|az|, |x|^(3/2), |y|^(3/2)/eps)} is invariant under H.
Every comparison is made on natural logs of moduli, so thresholds such as
``|x|**1.5`` are linear and never overflow.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidConstants, NoFeasibleEpsilon
from .maps import FORWARD, Params, Point3, check_direction, forward_step, iterate
from .numeric import ComplexExt

LN2 = math.log(2.0)
LN_1_5 = math.log(1.5)

EPSILON_GRID = tuple(round(0.5 - 0.05 * k, 2) for k in range(10))

_OVERRIDABLE = ("R_plus", "delta", "alpha", "R_minus", "epsilon")


@dataclass(frozen=True)
class RegionConstants:
    """Constants (R+, delta, alpha, R-, eps) for a given pair (|a|, |b|)."""

    a_abs: float
    b_abs: float
    R_plus: float
    delta: float
    alpha: float
    R_minus: float
    epsilon: float

    # derived -----------------------------------------------------------
    @property
    def theta(self) -> float:
        return self.alpha + (1.0 + self.delta) ** -2

    @property
    def C1(self) -> float:
        return (1.0 - self.theta) / (self.a_abs * self.b_abs)

    @property
    def C2(self) -> float:
        return (1.0 + self.theta) / (self.a_abs * self.b_abs)

    @property
    def kminus_bound_applies(self) -> bool:
        return self.b_abs > 1.0

    @property
    def c_lemma(self) -> float:
        """Constant C with M_n <= C max(M_{n-1}^(3/2), |x_{n-1}|^3) on K+."""
        eps, b = self.epsilon, self.b_abs
        return max(1.5 ** 1.5, 2 ** 1.5 / eps, 2 ** 1.5 * b ** 1.5)

    @property
    def c_quadratic(self) -> float:
        """Constant C' with M_n <= C' M_{n-1}^2 on K+."""
        eps, a, b = self.epsilon, self.a_abs, self.b_abs
        return max(1.0, 1.5 ** 1.5, 2.0 * a, (1.0 + b * eps ** (2 / 3)) ** 1.5 / eps)

    @property
    def c_tilde(self) -> float:
        """Constant with M_n <= c_tilde * M_{n-2}^3 on K+."""
        return self.c_lemma * max(self.c_quadratic ** 1.5, 1.5 ** 3)

    # logs used by the membership predicates
    @property
    def log_R_plus(self) -> float:
        return math.log(self.R_plus)

    @property
    def log_R_minus(self) -> float:
        return math.log(self.R_minus)

    def inequalities(self) -> list[tuple[str, float]]:
        """Every required inequality as ``(name, slack)``; valid iff all slack > 0."""
        a, b = self.a_abs, self.b_abs
        eps, d, al = self.epsilon, self.delta, self.alpha
        half = (1.0 - b * eps ** 2) / 2.0
        out = [
            ("delta > 0", d),
            ("alpha > 0", al),
            ("0 < epsilon < 1", min(eps, 1.0 - eps)),
            ("alpha + (1+delta)^-2 < 1", 1.0 - al - (1.0 + d) ** -2),
            ("R_plus >= (|b|/alpha)^(1/2)",
             self.R_plus - math.sqrt(b / al) if al > 0 else -1.0),
            ("R_minus > 1/epsilon^10",
             math.log(self.R_minus) + 10 * math.log(eps) if eps > 0 else -1.0),
            ("epsilon^3 (3/2)^(3/2) <= (1-|b|eps^2)/2",
             half - eps ** 3 * 1.5 ** 1.5 + 1e-300),
            ("epsilon (1+|b|eps^2)^(3/2) <= (1-|b|eps^2)/2",
             half - eps * (1.0 + b * eps ** 2) ** 1.5 + 1e-300),
            ("1-|b|eps^2 > 4|a|eps^10", 2.0 * half - 4.0 * a * eps ** 10),
        ]
        if out[3][1] > 0 and al > 0:
            k = _vplus_image_factor(b, d)
            out.append(("C1 R_plus^2 >= max(1, K) (H^-1 maps V+ into V+)",
                         math.log(self.C1 * self.R_plus ** 2) - math.log(max(1.0, k))
                         + 1e-300))
        out.append(("2|a| R_minus^(2/3) <= (3 R_minus/2)^(3/2)",
                    1.5 * (LN_1_5 + math.log(self.R_minus))
                    - math.log(2.0 * a) - (2 / 3) * math.log(self.R_minus) + 1e-300))
        return out

    def validate(self, p: Params | None = None) -> "RegionConstants":
        if p is not None and (not math.isclose(abs(p.a), self.a_abs, rel_tol=1e-12)
                              or not math.isclose(abs(p.b), self.b_abs, rel_tol=1e-12)):
            raise InvalidConstants("constants were chosen for different |a|, |b|")
        for name, slack in self.inequalities():
            if not slack > 0:
                raise InvalidConstants(f"region constants violate {name} "
                                       f"(slack {slack:.6g})", name)
        return self

    def as_dict(self) -> dict:
        return {
            "a_abs": self.a_abs, "b_abs": self.b_abs,
            "R_plus": self.R_plus, "delta": self.delta, "alpha": self.alpha,
            "R_minus": self.R_minus, "epsilon": self.epsilon,
            "theta": self.theta, "C1": self.C1, "C2": self.C2,
            "kminus_bound_applies": self.kminus_bound_applies,
            "c_tilde": self.c_tilde,
        }


def _vplus_image_factor(b_abs: float, delta: float) -> float:
    # (1+delta)|y_1|^(1/2) < K |z| on V+
    return (1.0 + delta) / math.sqrt(b_abs) * math.sqrt(1.0 + (1.0 + delta) ** -2)


def _epsilon_slacks(a_abs: float, b_abs: float, eps: float) -> list[tuple[str, float]]:
    half = (1.0 - b_abs * eps ** 2) / 2.0
    return [
        ("epsilon^3 (3/2)^(3/2) <= (1-|b|eps^2)/2", half - eps ** 3 * 1.5 ** 1.5),
        ("epsilon (1+|b|eps^2)^(3/2) <= (1-|b|eps^2)/2",
         half - eps * (1.0 + b_abs * eps ** 2) ** 1.5),
        ("1-|b|eps^2 > 4|a|eps^10", 2.0 * half - 4.0 * a_abs * eps ** 10),
    ]


def epsilon_feasible(a_abs: float, b_abs: float, eps: float) -> bool:
    s = _epsilon_slacks(a_abs, b_abs, eps)
    return s[0][1] >= 0 and s[1][1] >= 0 and s[2][1] > 0


def choose_constants(p: Params, overrides: dict | None = None) -> RegionConstants:
    """Default region constants for ``p``, optionally with explicit overrides.

    Defaults: ``delta = |b| - 1`` when ``|b| > 1`` (else 0.5),
    ``alpha = (1 - (1+delta)^-2) / 2``, ``R_plus = max(10, 2 sqrt(|b|/alpha))``
    raised if needed so that H^-1 maps V+ into itself, ``epsilon`` the largest
    grid value 0.5, 0.45, ..., 0.05 passing the trap inequalities and
    ``R_minus = 2 / epsilon^10`` (raised for very large ``|a|``).
    Overridden values are used verbatim and the result is re-validated.
    """
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(_OVERRIDABLE)
    if unknown:
        raise InvalidConstants(f"unknown constant(s): {sorted(unknown)}")
    a_abs, b_abs = abs(p.a), abs(p.b)

    delta = overrides.get("delta", b_abs - 1.0 if b_abs > 1.0 else 0.5)
    alpha = overrides.get("alpha", (1.0 - (1.0 + delta) ** -2) / 2.0)
    if "R_plus" in overrides:
        R_plus = overrides["R_plus"]
    else:
        R_plus = max(10.0, 2.0 * math.sqrt(b_abs / alpha)) if alpha > 0 else 10.0
        theta = alpha + (1.0 + delta) ** -2
        if theta < 1.0:
            c1 = (1.0 - theta) / (a_abs * b_abs)
            need = max(1.0, _vplus_image_factor(b_abs, delta))
            R_plus = max(R_plus, 2.0 * math.sqrt(need / c1))

    if "epsilon" in overrides:
        epsilon = overrides["epsilon"]
    else:
        for eps in EPSILON_GRID:
            if epsilon_feasible(a_abs, b_abs, eps):
                epsilon = eps
                break
        else:
            slacks = _epsilon_slacks(a_abs, b_abs, EPSILON_GRID[-1])
            name, worst = min(slacks, key=lambda t: t[1])
            raise NoFeasibleEpsilon(
                f"no epsilon in the grid works; tightest inequality at "
                f"eps={EPSILON_GRID[-1]}: {name} (slack {worst:.6g})", name)
    if "R_minus" in overrides:
        R_minus = overrides["R_minus"]
    else:
        R_minus = 2.0 / epsilon ** 10
        # keeps 2|az_n| below (3M/2)^(3/2) in the K+ growth bounds
        R_minus = max(R_minus, 2.0 * (2.0 * a_abs / 1.5 ** 1.5) ** 1.2)

    c = RegionConstants(a_abs, b_abs, float(R_plus), float(delta), float(alpha),
                        float(R_minus), float(epsilon))
    return c.validate()


# --------------------------------------------------------------------------
# membership


def in_v_plus(w: Point3, c: RegionConstants) -> bool:
    lx, ly, lz = w.log_abs()
    return lz > max(c.log_R_plus, lx, math.log1p(c.delta) + 0.5 * ly)


def in_v_minus(w: Point3, c: RegionConstants) -> bool:
    lx, ly, lz = w.log_abs()
    lxy = lx + ly
    return lxy > max(c.log_R_minus, LN2 + math.log(c.a_abs) + lz,
                     1.5 * lx, 1.5 * ly - math.log(c.epsilon))


def v_plus_margin(w: Point3, c: RegionConstants) -> float:
    """Log-slack of the V+ inequality (positive inside)."""
    lx, ly, lz = w.log_abs()
    return lz - max(c.log_R_plus, lx, math.log1p(c.delta) + 0.5 * ly)


def v_minus_margin(w: Point3, c: RegionConstants) -> float:
    lx, ly, lz = w.log_abs()
    return (lx + ly) - max(c.log_R_minus, LN2 + math.log(c.a_abs) + lz,
                           1.5 * lx, 1.5 * ly - math.log(c.epsilon))


# --------------------------------------------------------------------------
# verdicts


class Verdict(enum.Enum):
    U_PLUS = "InUPlus"
    U_MINUS = "InUMinus"
    K_PLUS = "KPlusUpToHorizon"
    K_MINUS = "KMinusUpToHorizon"


@dataclass(frozen=True)
class RegionVerdict:
    kind: Verdict
    horizon: int
    step: int | None = None

    @property
    def escaped(self) -> bool:
        return self.kind in (Verdict.U_PLUS, Verdict.U_MINUS)

    def __str__(self):
        arg = self.step if self.escaped else self.horizon
        return f"{self.kind.value}({arg})"


def region_verdict(p: Params, c: RegionConstants, w: Point3, horizon: int,
                   direction: str = FORWARD) -> RegionVerdict:
    """Least ``n <= horizon`` with ``H^n(w)`` in V- (or ``H^-n(w)`` in V+)."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    check_direction(direction)
    member = in_v_minus if direction == FORWARD else in_v_plus
    for n, wn in enumerate(iterate(p, w, horizon, direction)):
        if member(wn, c):
            kind = Verdict.U_PLUS if direction == FORWARD else Verdict.U_MINUS
            return RegionVerdict(kind, horizon, n)
    kind = Verdict.K_PLUS if direction == FORWARD else Verdict.K_MINUS
    return RegionVerdict(kind, horizon)


# --------------------------------------------------------------------------
# growth envelope on K+


@dataclass
class GrowthEnvelope:
    """log M_0..log M_n along a forward orbit, with the envelope constants.

    ``m_values`` and ``m_tilde`` are natural logs; ``c_const`` is the
    multiplicative constant in ``M_n <= c_const * M_{n-2}^3``.
    """

    m_values: list[float]
    m_tilde: float
    c_const: float
    c_lemma: float
    points: list[Point3] = field(repr=False, default_factory=list)


def log_m(w: Point3, c: RegionConstants) -> float:
    lx, ly, lz = w.log_abs()
    return max(c.log_R_minus, LN2 + math.log(c.a_abs) + lz, 1.5 * lx,
               1.5 * ly - math.log(c.epsilon))


def m_sequence(p: Params, c: RegionConstants, w: Point3, n: int) -> GrowthEnvelope:
    if n < 0:
        raise ValueError("n must be nonnegative")
    pts = list(iterate(p, w, n, FORWARD))
    logs = [log_m(q, c) for q in pts]
    lc = math.log(c.c_tilde)
    m1 = logs[1] if n >= 1 else log_m(forward_step(p, w), c)
    m_tilde = max(lc + logs[0], 2.0 * (lc + m1))
    return GrowthEnvelope(logs, m_tilde, c.c_tilde, c.c_lemma, pts)


# --------------------------------------------------------------------------
# sampling of the traps


def _polar(rng: np.random.Generator, log_r: float) -> ComplexExt:
    phase = rng.uniform(0.0, 2.0 * math.pi)
    k = math.floor(log_r / LN2)
    frac = math.exp(log_r - k * LN2)
    return ComplexExt(complex(frac * math.cos(phase), frac * math.sin(phase)), k)


def sample_v_minus(c: RegionConstants, rng: np.random.Generator, n: int,
                   span: float = 20.0, max_tries: int | None = None) -> list[Point3]:
    """Log-uniform moduli, uniform phases, rejected against ``in_v_minus``."""
    out: list[Point3] = []
    lo = c.log_R_minus / 2.0
    tries = 0
    limit = max_tries if max_tries is not None else 1000 * max(n, 1)
    while len(out) < n and tries < limit:
        tries += 1
        lx = rng.uniform(lo, c.log_R_minus + span)
        ly = rng.uniform(0.5 * lx, min(2.0 * lx + 2.0 * math.log(c.epsilon),
                                       c.log_R_minus + span))
        if ly < 0.5 * lx:
            continue
        lz = rng.uniform(-span, lx + ly - LN2 - math.log(c.a_abs))
        w = Point3(_polar(rng, lx), _polar(rng, ly), _polar(rng, lz))
        if in_v_minus(w, c):
            out.append(w)
    return out


def sample_v_plus(c: RegionConstants, rng: np.random.Generator, n: int,
                  span: float = 20.0, max_tries: int | None = None) -> list[Point3]:
    out: list[Point3] = []
    tries = 0
    limit = max_tries if max_tries is not None else 1000 * max(n, 1)
    while len(out) < n and tries < limit:
        tries += 1
        lz = rng.uniform(c.log_R_plus, c.log_R_plus + span)
        lx = rng.uniform(lz - span, lz)
        ly_top = 2.0 * (lz - math.log1p(c.delta))
        ly = rng.uniform(ly_top - span, ly_top)
        w = Point3(_polar(rng, lx), _polar(rng, ly), _polar(rng, lz))
        if in_v_plus(w, c):
            out.append(w)
    return out


def with_overrides(c: RegionConstants, **kw) -> RegionConstants:
    return replace(c, **kw)
