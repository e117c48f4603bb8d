"""Green function estimates for H (weight 2^-n) and H^-1 (weight 3^-n).

Points are first run to the trap (V- forward, V+ backward); only escaped
orbits are refined, and the weighted log sequence is iterated until three
consecutive increments fall below the tolerance. Orbits that never reach the
trap within the horizon are reported as an unresolved zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .maps import (BACKWARD, FORWARD, Params, Point3, ProjPoint, check_direction,
                   degree, lift_step, step)
from .regions import RegionConstants, in_v_minus, in_v_plus

DEFAULT_HORIZON = 1000
MAX_REFINE = 400
STABLE_RUN = 3

_CHANNELS = {
    "x": lambda w: w.x.log_abs(),
    "y": lambda w: w.y.log_abs(),
    "z": lambda w: w.z.log_abs(),
    "norm": lambda w: w.log_norm(),
}


@dataclass(frozen=True)
class GreenEstimate:
    value: float
    iterations_used: int
    converged: bool
    residual: float
    horizon_limited: bool = False
    escape_step: int | None = None

    @property
    def unresolved(self) -> bool:
        return self.horizon_limited


def _refine(p: Params, w: Point3, n: int, direction: str, tol: float,
            channel, max_refine: int) -> GreenEstimate:
    """Iterate ``d^-k ln+ |channel(w_k)|`` from step ``n`` until it stabilizes."""
    d = degree(direction)
    escape = n
    g = max(channel(w), 0.0) / d ** n
    run = 0
    diff = math.inf
    for _ in range(max_refine):
        w = step(p, w, direction)
        n += 1
        lg = channel(w)
        if not math.isfinite(lg) or lg > 1e300:
            break
        g_new = max(lg, 0.0) / d ** n
        diff = abs(g_new - g)
        g = g_new
        run = run + 1 if diff < tol else 0
        if run >= STABLE_RUN:
            return GreenEstimate(g, n, True, diff, False, escape)
    return GreenEstimate(g, n, False, diff, False, escape)


def _estimate(p, c, w, tol, horizon, direction, channel, max_refine):
    if tol <= 0:
        raise ValueError("tol must be positive")
    member = in_v_minus if direction == FORWARD else in_v_plus
    chan = _CHANNELS[channel]
    for n in range(horizon + 1):
        if member(w, c):
            return _refine(p, w, n, direction, tol, chan, max_refine)
        if n < horizon:
            w = step(p, w, direction)
    return GreenEstimate(0.0, horizon, False, math.nan, True, None)


def green_plus(p: Params, c: RegionConstants, w: Point3, tol: float = 1e-8,
               horizon: int = DEFAULT_HORIZON, channel: str = "x",
               max_refine: int = MAX_REFINE) -> GreenEstimate:
    """G+(w) = lim 2^-n ln+|x_n| (or the ``y`` / ``norm`` channel)."""
    if channel not in ("x", "y", "norm"):
        raise ValueError(f"unknown forward channel {channel!r}")
    return _estimate(p, c, w, tol, horizon, FORWARD, channel, max_refine)


def green_minus(p: Params, c: RegionConstants, w: Point3, tol: float = 1e-8,
                horizon: int = DEFAULT_HORIZON, channel: str = "z",
                max_refine: int = MAX_REFINE) -> GreenEstimate:
    """G-(w) = lim 3^-n ln+|z_n| along the backward orbit."""
    if channel not in ("z", "norm"):
        raise ValueError(f"unknown backward channel {channel!r}")
    return _estimate(p, c, w, tol, horizon, BACKWARD, channel, max_refine)


def lift_shift(p: Params, direction: str) -> float:
    """Limit offset between the lifted estimate and G+/G- on affine points.

    The forward lift fixes t = 1, so there is none. The backward lift carries
    the factor ab, which contributes ln|ab|/2 in the limit.
    """
    if check_direction(direction) == FORWARD:
        return 0.0
    return 0.5 * math.log(abs(p.a * p.b))


def green_lifted(p: Params, v: ProjPoint, direction: str = FORWARD,
                 tol: float = 1e-8, horizon: int = DEFAULT_HORIZON) -> GreenEstimate:
    """Limit of the accumulated scale of renormalized lifted iteration.

    Raises :class:`~quadmap.errors.IndeterminacyHit` when the orbit lands on
    the indeterminacy locus of the lift.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    check_direction(direction)
    run = 0
    diff = math.inf
    for n in range(1, horizon + 1):
        nv = lift_step(p, v, direction)
        diff = abs(nv.scale - v.scale)
        v = nv
        run = run + 1 if diff < tol else 0
        if run >= STABLE_RUN:
            return GreenEstimate(v.scale, n, True, diff)
    return GreenEstimate(v.scale, v.steps, False, diff)


def lifted_scales(p: Params, v: ProjPoint, n: int, direction: str = FORWARD) -> list[float]:
    """The sequence of accumulated scales for ``n`` lifted steps (index 0 = start)."""
    out = [v.scale]
    for _ in range(n):
        v = lift_step(p, v, direction)
        out.append(v.scale)
    return out
