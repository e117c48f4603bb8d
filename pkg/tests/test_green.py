import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadmap.errors import IndeterminacyHit
from quadmap.green import (green_lifted, green_minus, green_plus, lift_shift,
                           lifted_scales)
from quadmap.maps import BACKWARD, FORWARD, Params, Point3, ProjPoint, forward_step, \
    inverse_step, iterate, point
from quadmap.regions import choose_constants, region_verdict

from _helpers import ACCEPTANCE_PAIRS

mpmath.mp.prec = 300

coord = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))
points3 = st.builds(Point3.of, coord, coord, coord)


def mp_green(a, b, w, n, direction):
    """d^-n ln|x_n| (or |z_n| backward) by high-precision iteration (oracle)."""
    a, b = mpmath.mpc(a), mpmath.mpc(b)
    x, y, z = (mpmath.mpc(v) for v in w)
    for _ in range(n):
        if direction == FORWARD:
            x, y, z = x * y + a * z, x * x + b * y, x
        else:
            y1 = (y - z * z) / b
            x, y, z = z, y1, (x - z * y1) / a
    if direction == FORWARD:
        return float(mpmath.log(abs(x)) / 2**n)
    return float(mpmath.log(abs(z)) / 3**n)


def test_green_plus_example_against_big_float():
    p = Params(1, 1)
    c = choose_constants(p)
    g = green_plus(p, c, point(1e4, 1e4, 1), tol=1e-8)
    assert g.converged and not g.horizon_limited
    assert g.value == pytest.approx(mp_green(1, 1, (1e4, 1e4, 1), 40, FORWARD), abs=1e-7)
    assert g.value == pytest.approx((2 * math.log(1e4) + math.log(1e4)) / 3, abs=0.01)
    assert g.residual <= 1e-8


def test_green_minus_example_against_big_float():
    p = Params(1, 1.5)
    c = choose_constants(p)
    g = green_minus(p, c, point(1, 4, 100), tol=1e-8)
    assert g.converged
    assert g.value == pytest.approx(mp_green(1, 1.5, (1, 4, 100), 25, BACKWARD), abs=1e-7)
    assert g.value == pytest.approx(math.log(100) - 0.5 * math.log(1.5), abs=0.3)


def test_fixed_point_is_unresolved_zero():
    p = Params(1, 1)
    c = choose_constants(p)
    for fn in (green_plus, green_minus):
        g = fn(p, c, point(0, 0, 0), horizon=50)
        assert g.value == 0 and g.horizon_limited and g.unresolved and not g.converged


def test_escaping_point_converges():
    p = Params(1, 1)
    g = green_plus(p, choose_constants(p), point(2, 2, 1))
    assert g.converged and g.value > 0 and g.escape_step == 3


def test_invariant_line_backward_unresolved():
    p = Params(1, 2)
    g = green_minus(p, choose_constants(p), point(0, 5, 0), horizon=300)
    assert g.horizon_limited and g.value == 0
    # backward orbit on x = z = 0 is (0, 5/2^n, 0)
    w = list(iterate(p, point(0, 5, 0), 5, BACKWARD))[-1]
    assert w.to_complex() == (0, 5 / 32, 0)


def test_tolerance_must_be_positive():
    p = Params(1, 1)
    c = choose_constants(p)
    with pytest.raises(ValueError):
        green_plus(p, c, point(1, 1, 1), tol=0)
    with pytest.raises(ValueError):
        green_lifted(p, ProjPoint.from_vector((1, 1, 1, 1)), tol=-1)


@pytest.mark.parametrize("ab", ACCEPTANCE_PAIRS)
@settings(max_examples=40)
@given(points3)
def test_functional_equations(ab, w):
    p = Params(*ab)
    c = choose_constants(p)
    tol = 1e-8
    g = green_plus(p, c, w, tol, horizon=200)
    if g.converged:
        g1 = green_plus(p, c, forward_step(p, w), tol, horizon=200)
        assert abs(g1.value - 2 * g.value) <= 10 * tol
    g = green_minus(p, c, w, tol, horizon=200)
    if g.converged:
        g1 = green_minus(p, c, inverse_step(p, w), tol, horizon=200)
        assert abs(g1.value - 3 * g.value) <= 10 * tol


@settings(max_examples=60)
@given(points3)
def test_channels_agree(w):
    p = Params(1j, 2)
    c = choose_constants(p)
    tol = 1e-9
    vals = [green_plus(p, c, w, tol, 200, ch) for ch in ("x", "y", "norm")]
    if all(v.converged for v in vals):
        assert max(v.value for v in vals) - min(v.value for v in vals) <= 10 * tol


@settings(max_examples=60)
@given(points3)
def test_zero_set_matches_verdict(w):
    p = Params(0.5, -1)
    c = choose_constants(p)
    g = green_plus(p, c, w, horizon=80)
    v = region_verdict(p, c, w, 80)
    assert g.value >= 0
    if v.escaped:
        assert not g.horizon_limited
        assert not g.converged or g.value > 0
    else:
        assert g.horizon_limited and g.value == 0 and not g.converged


def test_lifted_agrees_with_affine_estimates():
    p = Params(1, 1)
    c = choose_constants(p)
    w = point(1e4, 1e4, 1)
    gl = green_lifted(p, ProjPoint.from_affine(w), FORWARD)
    assert gl.converged
    assert gl.value - lift_shift(p, FORWARD) == pytest.approx(green_plus(p, c, w).value,
                                                              abs=1e-6)
    p = Params(1, 1.5)
    c = choose_constants(p)
    w = point(1, 4, 100)
    gl = green_lifted(p, ProjPoint.from_affine(w), BACKWARD)
    assert gl.value - lift_shift(p, BACKWARD) == pytest.approx(green_minus(p, c, w).value,
                                                               abs=1e-6)


def test_lifted_special_points():
    p = Params(1, 1)
    assert green_lifted(p, ProjPoint.from_vector((0, 0, 0, 1))).value == 0
    with pytest.raises(IndeterminacyHit):
        green_lifted(p, ProjPoint.from_vector((0, 1, 0, 0)))


@pytest.mark.parametrize("ab", ACCEPTANCE_PAIRS)
def test_lifted_monotone_approach(ab):
    """Two monotone forms of the lifted estimate s_n.

    One lifted step multiplies the sup-norm of a unit vector by at most
    C = 1 + max(|a|, |b|), so s_n - ln C (1 - 2^-n) never increases. The raw
    sequence is non-increasing up to 1e-12 once ||w_n|| >= 1e12.
    """
    p = Params(*ab)
    c = choose_constants(p)
    log_c = math.log(1 + max(abs(p.a), abs(p.b)))
    rng = np.random.default_rng(2)
    checked = 0
    for _ in range(100):
        w = Point3.of(*(complex(*rng.uniform(-3, 3, 2)) for _ in range(3)))
        v = region_verdict(p, c, w, 100)
        if not v.escaped:
            continue
        n = v.step + 40
        s = lifted_scales(p, ProjPoint.from_affine(w), n)
        norms = [q.log_norm() for q in iterate(p, w, n)]
        corrected = [s[k] - log_c * (1 - 2.0**-k) for k in range(n + 1)]
        assert all(u2 <= u1 + 1e-15 * (1 + abs(u1))
                   for u1, u2 in zip(corrected, corrected[1:]))
        deep = [k for k in range(v.step, n) if norms[k] >= math.log(1e12)]
        assert all(s[k + 1] <= s[k] + 1e-12 for k in deep)
        checked += 1
    assert checked > 20
