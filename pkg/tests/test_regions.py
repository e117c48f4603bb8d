import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadmap.errors import InvalidConstants, NoFeasibleEpsilon
from quadmap.maps import BACKWARD, FORWARD, Params, Point3, forward_step, inverse_step, point
from quadmap.regions import (EPSILON_GRID, RegionConstants, Verdict, choose_constants,
                             epsilon_feasible, in_v_minus, in_v_plus, m_sequence,
                             region_verdict, sample_v_minus, sample_v_plus, with_overrides)

from _helpers import ACCEPTANCE_PAIRS, nonzero_complex


def eps_ok(a, b, e):
    """Independent restatement of the three epsilon inequalities."""
    return (e**3 * 1.5**1.5 <= (1 - b * e**2) / 2
            and e * (1 + b * e**2) ** 1.5 <= (1 - b * e**2) / 2
            and 1 - b * e**2 > 4 * a * e**10)


def plain_in_v_minus(w, a, R, eps):
    x, y, z = (abs(c) for c in w)
    return x * y > max(R, 2 * a * z, x**1.5, y**1.5 / eps)


def plain_in_v_plus(w, R, delta):
    x, y, z = (abs(c) for c in w)
    return z > max(R, x, (1 + delta) * y**0.5)


def test_defaults_b_1_5():
    c = choose_constants(Params(1, 1.5))
    assert c.delta == 0.5
    assert c.alpha == pytest.approx((1 - 1 / 2.25) / 2) and round(c.alpha, 4) == 0.2778
    assert c.R_plus == 10 and c.epsilon == 0.3
    assert c.R_minus == pytest.approx(3.387e5, rel=1e-3)
    assert c.kminus_bound_applies
    # the grid search stops at the first feasible value; 0.4 fails as stated
    assert 0.4 * 1.24**1.5 > (1 - 1.5 * 0.16) / 2


def test_defaults_unit_b():
    c = choose_constants(Params(1, 1))
    assert not c.kminus_bound_applies and c.delta == 0.5
    assert c.epsilon == 0.35


@pytest.mark.parametrize("ab", ACCEPTANCE_PAIRS + [(3, 0.2), (0.01, 2.5), (5j, -1j)])
def test_epsilon_is_largest_feasible(ab):
    p = Params(*ab)
    c = choose_constants(p)
    a, b = abs(p.a), abs(p.b)
    assert eps_ok(a, b, c.epsilon)
    assert not any(eps_ok(a, b, e) for e in EPSILON_GRID if e > c.epsilon)
    assert c.R_minus > c.epsilon**-10
    assert c.R_plus >= math.sqrt(b / c.alpha)
    assert c.alpha + (1 + c.delta) ** -2 < 1


@given(nonzero_complex(0.05, 20), nonzero_complex(0.05, 3))
def test_choose_constants_always_valid(a, b):
    p = Params(a, b)
    try:
        c = choose_constants(p)
    except NoFeasibleEpsilon:
        assert not any(eps_ok(abs(a), abs(b), e) for e in EPSILON_GRID)
        return
    assert all(slack > 0 for _, slack in c.inequalities())
    assert epsilon_feasible(abs(a), abs(b), c.epsilon)


def test_no_feasible_epsilon():
    with pytest.raises(NoFeasibleEpsilon) as err:
        choose_constants(Params(1, 400))
    assert err.value.inequality


def test_overrides_rejected():
    with pytest.raises(InvalidConstants) as err:
        choose_constants(Params(1, 1.5), {"R_minus": 1, "epsilon": 0.3})
    assert "R_minus" in err.value.inequality
    with pytest.raises(InvalidConstants):
        choose_constants(Params(1, 1), {"epsilon": 0.9})
    with pytest.raises(InvalidConstants):
        choose_constants(Params(1, 1), {"gamma": 1})


def test_theta_and_cubic_constants():
    c = choose_constants(Params(1, 1.5))
    assert c.theta == pytest.approx(0.2777777 + 1 / 2.25, rel=1e-6)
    assert c.C1 == pytest.approx((1 - c.theta) / 1.5)
    assert c.C2 == pytest.approx((1 + c.theta) / 1.5)
    # |z1| for (1,4,100) lies in both the recomputed interval and the one quoted
    # from theta = 0.7444
    assert c.C1 * 1e6 < 666401 < c.C2 * 1e6
    assert 1.704e5 < 666401 < 1.163e6


def test_membership_examples():
    c = choose_constants(Params(1, 1.5))
    assert in_v_plus(point(1, 4, 100), c)
    assert not in_v_plus(point(0, 0, 0), c)
    assert not in_v_plus(point(100, 4, 100), c)
    c2 = with_overrides(choose_constants(Params(1, 1)), epsilon=0.2, R_minus=1.95e7)
    assert in_v_minus(point(1e4, 1e4, 1), c2)
    assert not in_v_minus(point(997, 1055, 32), c2)
    assert not in_v_minus(point(0, 0, 0), c2)


@given(st.lists(st.floats(-4, 9), min_size=6, max_size=6))
def test_membership_matches_plain_oracle(logs):
    c = choose_constants(Params(1, 1.5))
    w = tuple(10 ** logs[2 * k] * complex(math.cos(logs[2 * k + 1]), math.sin(logs[2 * k + 1]))
              for k in range(3))
    pw = Point3.of(*w)
    # skip points within rounding of a boundary
    x, y, z = (abs(v) for v in w)
    margins_minus = [x * y / t for t in (c.R_minus, 2 * z, x**1.5, y**1.5 / c.epsilon) if t]
    margins_plus = [z / t for t in (c.R_plus, x, (1 + c.delta) * y**0.5) if t]
    if all(abs(m - 1) > 1e-9 for m in margins_minus):
        assert in_v_minus(pw, c) == plain_in_v_minus(w, 1, c.R_minus, c.epsilon)
    if all(abs(m - 1) > 1e-9 for m in margins_plus):
        assert in_v_plus(pw, c) == plain_in_v_plus(w, c.R_plus, c.delta)


def test_verdict_examples():
    p = Params(1, 1)
    c = choose_constants(p)
    # w3 = (997, 1055, 32) already has |x3 y3| > R_minus = 2/0.35^10
    pts = [(2, 2, 1)]
    for _ in range(4):
        x, y, z = pts[-1]
        pts.append((x * y + z, x * x + y, x))
    assert pts[3] == (997, 1055, 32) and pts[4] == (1051867, 995064, 997)
    first = next(n for n, w in enumerate(pts) if plain_in_v_minus(w, 1, c.R_minus, c.epsilon))
    assert first == 3
    v = region_verdict(p, c, point(2, 2, 1), 10)
    assert v.kind is Verdict.U_PLUS and v.step == 3 and str(v) == "InUPlus(3)"
    # with the deeper trap of the membership example the entry step is 4
    c2 = with_overrides(c, epsilon=0.2, R_minus=1.95e7)
    assert str(region_verdict(p, c2, point(2, 2, 1), 10)) == "InUPlus(4)"
    cb = choose_constants(Params(1, 1.5))
    assert str(region_verdict(Params(1, 1.5), cb, point(1, 4, 100), 10, BACKWARD)) == \
        "InUMinus(0)"
    for d, kind in ((FORWARD, Verdict.K_PLUS), (BACKWARD, Verdict.K_MINUS)):
        v = region_verdict(p, c, point(0, 0, 0), 100, d)
        assert v.kind is kind and not v.escaped and str(v) == f"{kind.value}(100)"


@settings(max_examples=60)
@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6), st.integers(0, 30))
def test_verdicts_monotone_in_horizon(coords, extra):
    p = Params(1, 1)
    c = choose_constants(p)
    w = Point3.of(*(complex(coords[2 * k], coords[2 * k + 1]) for k in range(3)))
    v = region_verdict(p, c, w, 40)
    if v.escaped:
        for h in (v.step, v.step + extra, 40 + extra):
            assert region_verdict(p, c, w, h).step == v.step
    else:
        assert not region_verdict(p, c, w, 40 - min(extra, 40)).escaped


def test_samplers_respect_membership_and_seed(pc):
    p, c = pc
    vm = sample_v_minus(c, np.random.default_rng(3), 200)
    vp = sample_v_plus(c, np.random.default_rng(3), 200)
    assert len(vm) == 200 and len(vp) == 200
    assert all(in_v_minus(w, c) for w in vm) and all(in_v_plus(w, c) for w in vp)
    assert vm == sample_v_minus(c, np.random.default_rng(3), 200)
    # log-uniform: the sample reaches well beyond double range edge cases
    assert max(w.log_norm() for w in vm) > c.log_R_minus + 10


def test_trap_invariance_forward(pc):
    p, c = pc
    for w in sample_v_minus(c, np.random.default_rng(11), 300):
        assert in_v_minus(forward_step(p, w), c)


def test_trap_invariance_backward(pc):
    p, c = pc
    for w in sample_v_plus(c, np.random.default_rng(11), 300):
        assert in_v_plus(inverse_step(p, w), c)


def test_m_sequence_examples():
    p = Params(1, 1)
    c = choose_constants(p)
    env = m_sequence(p, c, point(0, 0, 0), 5)
    assert env.m_values == [c.log_R_minus] * 6
    assert m_sequence(p, c, point(2, 2, 1), 0).m_values[0] == c.log_R_minus
    c2 = with_overrides(c, epsilon=0.2, R_minus=1.95e7)
    assert math.exp(m_sequence(p, c2, point(1e4, 1e4, 1), 0).m_values[0]) == \
        pytest.approx(1.95e7)


def test_m_envelope_on_kplus_orbits(pc):
    p, c = pc
    rng = np.random.default_rng(5)
    seen = 0
    for k in range(200):
        w = Point3.of(*(complex(*rng.uniform(-0.3, 0.3, 2)) for _ in range(3)))
        if k % 2:
            # the line x = z = 0 is invariant and never reaches V-
            w = Point3.of(0, complex(*rng.uniform(-3, 3, 2)), 0)
        if region_verdict(p, c, w, 60).escaped:
            continue
        seen += 1
        env = m_sequence(p, c, w, 60)
        lc = math.log(env.c_const)
        for n, m in enumerate(env.m_values):
            assert m >= c.log_R_minus
            assert m <= math.sqrt(3) ** n * env.m_tilde + 1e-9
            if n >= 2:
                assert m <= lc + 3 * env.m_values[n - 2] + 1e-9
    assert seen > 0


def test_constants_frozen_and_serializable():
    c = choose_constants(Params(1, 1))
    with pytest.raises(AttributeError):
        c.epsilon = 0.1
    d = c.as_dict()
    assert d["C1"] == c.C1 and d["kminus_bound_applies"] is False
    assert isinstance(RegionConstants(**{k: d[k] for k in
                                         ("a_abs", "b_abs", "R_plus", "delta", "alpha",
                                          "R_minus", "epsilon")}), RegionConstants)
