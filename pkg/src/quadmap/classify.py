"""Orbit growth classification and projective cluster points."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .maps import FORWARD, Params, Point3, check_direction, orbit
from .numeric import ONE
from .regions import RegionConstants

LOG_GATE = 10.0
SUPER_FIT_QUALITY = 0.999
LINEAR_FIT_QUALITY = 0.99
MIN_TAIL = 30


@dataclass(frozen=True)
class OrbitClass:
    """One of Bounded, LinearExponential, SuperExponential, HorizonLimited.

    ``value`` is the sup-norm for Bounded, the exponential rate for
    LinearExponential and the base for SuperExponential.
    """

    label: str
    value: float = math.nan
    quality: float = math.nan

    @property
    def base(self) -> float:
        return self.value

    @property
    def rate(self) -> float:
        return self.value


BOUNDED = "Bounded"
LINEAR = "LinearExponential"
SUPER = "SuperExponential"
HORIZON_LIMITED = "HorizonLimited"
LABELS = (BOUNDED, LINEAR, SUPER, HORIZON_LIMITED)


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """Least-squares slope, intercept and coefficient of determination."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def classify_log_norms(log_norms, threshold: float, tail_start: int) -> OrbitClass:
    """Classify from the per-step sequence ``ln||w_n||``.

    ``threshold`` is the log of the bound under which the tail counts as
    bounded.
    """
    ln = np.asarray(log_norms, dtype=float)
    tail = ln[tail_start:]
    if tail.size == 0:
        return OrbitClass(HORIZON_LIMITED)
    idx = np.arange(tail_start, tail_start + tail.size)
    top = float(np.max(tail))
    if top <= threshold:
        return OrbitClass(BOUNDED, math.exp(top) if top > -math.inf else 0.0)

    gated = tail > LOG_GATE
    lin_slope, _, lin_r2 = (linear_fit(idx, tail) if tail.size >= 3
                            else (math.nan, 0.0, -math.inf))
    if np.count_nonzero(gated) >= 3:
        s, _, q = linear_fit(idx[gated], np.log(tail[gated]))
        # a straight ln||w_n|| beats the loglog fit: growth is only exponential
        if q >= SUPER_FIT_QUALITY and s > 0 and q > lin_r2:
            return OrbitClass(SUPER, math.exp(s), q)
    if lin_r2 >= LINEAR_FIT_QUALITY and math.isfinite(lin_slope):
        return OrbitClass(LINEAR, lin_slope, lin_r2)
    return OrbitClass(HORIZON_LIMITED)


def classify_orbit(p: Params, c: RegionConstants, w: Point3, horizon: int = 60,
                   direction: str = FORWARD, tail_start: int | None = None) -> OrbitClass:
    """Bounded / exponential / super-exponential classification of an orbit.

    The tail window defaults to the second half of the horizon. The bound for
    Bounded is ``max(10 R, 10 ||w||)`` with R the trap radius of the direction.
    """
    if horizon < 50:
        raise ValueError("classification needs a horizon of at least 50 steps")
    check_direction(direction)
    series = orbit(p, w, horizon, direction)
    ln = series.log_norms()
    if tail_start is None:
        tail_start = min(horizon // 2, len(ln) - 1)
    R = c.R_minus if direction == FORWARD else c.R_plus
    threshold = math.log(10.0) + max(math.log(R), ln[0])
    return classify_log_norms(ln, threshold, tail_start)


# --------------------------------------------------------------------------
# projective geometry


def normalized_vector(coords) -> np.ndarray:
    """Complex 4-vector of ``coords`` (ComplexExt) scaled so the largest entry has modulus ~1."""
    top = max((c.e for c in coords if not c.is_zero()), default=None)
    if top is None:
        raise ValueError("zero vector")
    return np.array([c.scaled(-top) for c in coords], dtype=complex)


def chordal(u, v) -> float:
    """Sine of the angle between the complex lines through ``u`` and ``v``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    perp = u - np.vdot(v, u) * v
    return float(min(1.0, np.linalg.norm(perp)))


def distance_to_span(u, axes) -> float:
    """Sine of the angle between ``u`` and the coordinate subspace ``axes``."""
    u = np.asarray(u, dtype=complex)
    u = u / np.linalg.norm(u)
    off = [k for k in range(len(u)) if k not in axes]
    return float(min(1.0, np.linalg.norm(u[off])))


# coordinates are ordered (x, y, z, t)
SPECIAL_POINTS = {
    "P": np.array([0, 1, 0, 0], dtype=complex),
    "Q": np.array([1, 0, 0, 0], dtype=complex),
    "Xm": np.array([0, 0, 1, 0], dtype=complex),
}
# each line is the span of the listed axes
SPECIAL_LINES = {
    "I+": (1, 2),     # {t = x = 0}
    "Itop": (0, 2),   # {t = y = 0}
    "I-": (0, 1),     # {t = z = 0}
}


def loci_distances(u) -> dict[str, float]:
    out = {name: chordal(u, q) for name, q in SPECIAL_POINTS.items()}
    out.update({name: distance_to_span(u, axes) for name, axes in SPECIAL_LINES.items()})
    out["I+inf"] = min(out["I+"], out["Itop"])
    return out


@dataclass
class Cluster:
    point: np.ndarray
    visits: int
    fraction: float
    distances: dict[str, float] = field(default_factory=dict)


@dataclass
class ClusterReport:
    clusters: list[Cluster]
    tail_length: int

    def nearest(self, names=("P", "Q")) -> list[float]:
        """Per cluster, the distance to the closest of the named loci."""
        return [min(cl.distances[n] for n in names) for cl in self.clusters]


def projectivize(w: Point3) -> np.ndarray:
    return normalized_vector((w.x, w.y, w.z, ONE))


def cluster_points(p: Params, w: Point3, horizon: int = 200, merge_tol: float = 0.05,
                   direction: str = FORWARD, tail_start: int | None = None) -> ClusterReport:
    """Greedy chordal clustering of the projectivized orbit tail ``[w_n : 1]``.

    Each cluster keeps its latest member as representative, so for a
    convergent tail the representative is the best available limit estimate.
    """
    if not 0.0 < merge_tol < 0.5:
        raise ValueError("merge_tol must lie in (0, 0.5)")
    check_direction(direction)
    series = orbit(p, w, horizon, direction, stride=1)
    pts = [q for _, q in series.checkpoints]
    if tail_start is None:
        tail_start = len(pts) // 2
    tail = [projectivize(q) for q in pts[tail_start:]]
    reps: list[list] = []  # [representative, count]
    for u in tail:
        for rep in reps:
            if chordal(u, rep[0]) <= merge_tol:
                rep[0] = u
                rep[1] += 1
                break
        else:
            reps.append([u, 1])
    total = len(tail)
    clusters = []
    for u, count in reps:
        rep = u / u[np.argmax(np.abs(u))]
        clusters.append(Cluster(rep, count, count / total, loci_distances(rep)))
    return ClusterReport(clusters, total)
