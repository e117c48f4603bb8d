import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from quadmap.errors import IndeterminacyHit
from quadmap.numeric import ComplexExt
from quadmap.maps import (BACKWARD, COMPLETED, FORWARD, Params, Point3, ProjPoint,
                          forward_step, inverse_step, lift_backward, lift_forward,
                          lift_power_log_norm, lift_step, orbit, point, step)

from _helpers import finite_complex, nonzero_complex

X, Y, Z, T, A, B, L = sp.symbols("X Y Z T a b lambda")


def sym_forward(x, y, z):
    return (x * y + A * z, x**2 + B * y, x)


def sym_inverse(x, y, z):
    y1 = (y - z**2) / B
    return (z, y1, (x - z * y1) / A)


class _Sym:
    """Minimal stand-in for ComplexExt so the lifts can run on sympy symbols."""

    def __init__(self, e):
        self.e = sp.sympify(e)

    def __mul__(self, o):
        return _Sym(self.e * o.e)

    def __add__(self, o):
        return _Sym(self.e + o.e)

    def __sub__(self, o):
        return _Sym(self.e - o.e)

    def square(self):
        return _Sym(self.e**2)


class _SymParams:
    a_ext = _Sym(A)
    b_ext = _Sym(B)


def sym_lift(fn, v):
    return tuple(sp.expand(c.e) for c in fn(_SymParams(), tuple(_Sym(c) for c in v)))


def test_symbolic_inverse_is_two_sided():
    assert all(sp.simplify(u - v) == 0
               for u, v in zip(sym_forward(*sym_inverse(X, Y, Z)), (X, Y, Z)))
    assert all(sp.simplify(u - v) == 0
               for u, v in zip(sym_inverse(*sym_forward(X, Y, Z)), (X, Y, Z)))


def test_symbolic_lifts_restrict_to_map():
    fwd = sym_lift(lift_forward, (X, Y, Z, 1))
    assert [sp.simplify(u - v) for u, v in zip(fwd, (*sym_forward(X, Y, Z), 1))] == [0] * 4
    bwd = sym_lift(lift_backward, (X, Y, Z, 1))
    want = [A * B * c for c in (*sym_inverse(X, Y, Z), 1)]
    assert [sp.simplify(u - v) for u, v in zip(bwd, want)] == [0] * 4


@pytest.mark.parametrize("fn,d", [(lift_forward, 2), (lift_backward, 3)])
def test_symbolic_lifts_homogeneous(fn, d):
    lhs = sym_lift(fn, (L * X, L * Y, L * Z, L * T))
    rhs = sym_lift(fn, (X, Y, Z, T))
    assert all(sp.expand(u - L**d * v) == 0 for u, v in zip(lhs, rhs))


def test_symbolic_indeterminacy_loci():
    # at infinity the forward lift is (XY, X^2, 0, 0): zero iff X = 0
    assert sym_lift(lift_forward, (X, Y, Z, 0)) == (X * Y, X**2, 0, 0)
    # the backward lift is (0, 0, Z^3, 0): zero iff Z = 0
    assert sym_lift(lift_backward, (X, Y, Z, 0)) == (0, 0, Z**3, 0)


def test_spec_examples():
    assert forward_step(Params(1, 1), point(1, 1, 1)).to_complex() == (2, 2, 1)
    assert forward_step(Params(1, 2), point(1, 2, 3)).to_complex() == (5, 5, 1)
    back = inverse_step(Params(1, 1.5), point(1, 4, 100)).to_complex()
    assert back == (100, -6664, 666401)
    s = orbit(Params(1, 1), point(2, 2, 1), 3)
    assert s.final.to_complex() == (997, 1055, 32)
    assert s.termination == COMPLETED and s.steps == 3


def test_params_reject_degenerate():
    with pytest.raises(ValueError):
        Params(0, 1)
    with pytest.raises(ValueError):
        Params(1, 0)


@given(nonzero_complex(), nonzero_complex(), finite_complex(1e3), finite_complex(1e3),
       finite_complex(1e3))
def test_forward_matches_complex_oracle(a, b, x, y, z):
    got = forward_step(Params(a, b), point(x, y, z)).to_complex()
    want = (x * y + a * z, x * x + b * y, x)
    for g, w in zip(got, want):
        assert abs(g - w) <= 1e-13 * (1 + abs(w) + abs(x * y) + abs(a * z) + abs(x * x)
                                      + abs(b * y))


@given(nonzero_complex(0.5, 2), nonzero_complex(0.5, 2), finite_complex(10),
       finite_complex(10), finite_complex(10))
def test_roundtrip_both_orders(a, b, x, y, z):
    p = Params(a, b)
    w = point(x, y, z)
    scale = max(abs(x), abs(y), abs(z), 1.0) ** 4
    for first, second in ((forward_step, inverse_step), (inverse_step, forward_step)):
        back = second(p, first(p, w)).to_complex()
        err = max(abs(u - v) for u, v in zip(back, (x, y, z)))
        assert err <= 1e-12 * scale


def test_roundtrip_beyond_double_range():
    # |x|^2 ~ |by| and |xy| ~ |az|: the inverse has no catastrophic cancellation
    p = Params(1, 1.5)
    w = Point3(ComplexExt(1.25 + 0.5j, 5000), ComplexExt(-1.5, 10000), ComplexExt(1.1j, 15000))
    back = inverse_step(p, forward_step(p, w))
    for u, v in zip(back, w):
        assert (u - v).is_zero() or (u - v).log_abs() - v.log_abs() < math.log(1e-10)


def test_step_dispatch():
    p = Params(1, 1)
    w = point(1, 2, 3)
    assert step(p, w, FORWARD) == forward_step(p, w)
    assert step(p, w, BACKWARD) == inverse_step(p, w)
    with pytest.raises(ValueError):
        orbit(p, w, 1, "sideways")


def test_lift_example_and_indeterminacy():
    p = Params(1, 1)
    v = lift_step(p, ProjPoint.from_vector((1, 1, 1, 1)))
    assert v.to_complex() == (1, 1, 0.5, 0.5)
    assert v.scale == pytest.approx(math.log(2) / 2)
    with pytest.raises(IndeterminacyHit):
        lift_step(p, ProjPoint.from_vector((0, 1, 0, 0)))
    with pytest.raises(IndeterminacyHit):
        lift_step(p, ProjPoint.from_vector((1, 1, 0, 0)), BACKWARD)
    # [0:0:1:0] is the forward image of infinity and fixed by the lift
    fixed = lift_step(p, ProjPoint.from_vector((1, 0, 0, 0)))
    assert fixed.to_complex() == (0, 1, 0, 0)


@pytest.mark.parametrize("direction", [FORWARD, BACKWARD])
@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8), st.integers(1, 12))
def test_renormalized_scale_matches_direct_power(direction, coords, n):
    p = Params(1j, 1.5)
    v0 = tuple(complex(coords[2 * k], coords[2 * k + 1]) for k in range(4))
    if max(abs(c) for c in v0) < 1e-3:
        return
    v = ProjPoint.from_vector(v0)
    d = 2 if direction == FORWARD else 3
    try:
        for _ in range(n):
            v = lift_step(p, v, direction)
    except IndeterminacyHit:
        return
    direct = lift_power_log_norm(p, v0, n, direction)
    assert v.scale == pytest.approx(direct / d**n, rel=1e-9, abs=1e-9)
    assert max(abs(c) for c in v.to_complex()) == pytest.approx(1.0)


def test_orbit_series_shape_and_stride():
    p = Params(1, 1)
    s = orbit(p, point(0.1, 0.2, 0.3), 10, stride=4)
    assert len(s.logmags) == 11
    assert [k for k, _ in s.checkpoints] == [0, 4, 8, 10]
    assert s.log_norms().shape == (11,)
    np.testing.assert_allclose(s.logmag_array()[:, 3], s.logmag_array()[:, :3].max(axis=1))


def test_orbit_zero_is_fixed():
    s = orbit(Params(1, 1), point(0, 0, 0), 10)
    assert all(w.to_complex() == (0, 0, 0) for _, w in s.checkpoints)
    assert all(r[3] == -math.inf for r in s.logmags)


def test_orbit_survives_double_overflow():
    # norms grow like C^(2^n); 30 steps is far past 1e308
    s = orbit(Params(1, 1), point(2, 2, 1), 30)
    assert s.termination == COMPLETED
    assert s.logmags[-1][3] > 1e8
