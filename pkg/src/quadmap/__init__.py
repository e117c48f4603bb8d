"""Dynamics of the quadratic automorphism H(x, y, z) = (xy + az, x^2 + by, x) of C^3.

Orbits are computed in extended-exponent complex arithmetic, so iterates
with magnitudes like C^(3^n) stay representable for hundreds of steps.
"""
__version__ = "0.1.0"

from .classify import OrbitClass, classify_orbit, cluster_points, chordal
from .errors import (IndeterminacyHit, InvalidConstants, NoFeasibleEpsilon, NotApplicable,
                     QuadmapError)
from .estimators import EscapeRegionClassifier, GreenFunctionEstimator, OrbitGrowthClassifier
from .green import GreenEstimate, green_lifted, green_minus, green_plus
from .maps import (BACKWARD, FORWARD, OrbitSeries, Params, Point3, ProjPoint, forward_step,
                   inverse_step, lift_step, orbit, point)
from .model2d import (InvariantLineSet, Point2, invariant_lines, sharp_growth_exponent,
                      step2_closed, step2d)
from .numeric import ComplexExt
from .raster import RasterGrid, SliceSpec, render_slice
from .regions import (RegionConstants, RegionVerdict, Verdict, choose_constants, in_v_minus,
                      in_v_plus, m_sequence, region_verdict)
from .verify import (VerifyReport, verify_green_functional, verify_growth_envelope,
                     verify_kminus_bounded, verify_trap_backward, verify_trap_forward)

__all__ = [
    "BACKWARD", "FORWARD", "ComplexExt", "EscapeRegionClassifier", "GreenEstimate",
    "GreenFunctionEstimator", "IndeterminacyHit", "InvalidConstants", "InvariantLineSet",
    "NoFeasibleEpsilon", "NotApplicable", "OrbitClass", "OrbitGrowthClassifier", "OrbitSeries",
    "Params", "Point2", "Point3", "ProjPoint", "QuadmapError", "RasterGrid", "RegionConstants",
    "RegionVerdict", "SliceSpec", "Verdict", "VerifyReport", "choose_constants", "chordal",
    "classify_orbit", "cluster_points", "forward_step", "green_lifted", "green_minus",
    "green_plus", "in_v_minus", "in_v_plus", "invariant_lines", "inverse_step", "lift_step",
    "m_sequence", "orbit", "point", "region_verdict", "render_slice", "sharp_growth_exponent",
    "step2_closed", "step2d", "verify_green_functional", "verify_growth_envelope",
    "verify_kminus_bounded", "verify_trap_backward", "verify_trap_forward",
]
