"""Ladder sequences and the two routes to A_n(z), B_n(z)."""

import pytest
from mpmath import mp

import pv5lab
from pv5lab.errors import LadderIneligible
from pv5lab.verify import sample_points


def test_hand_integral_oracles_at_t_zero(jacobi_ladder):
    # a_0 = (2/h_0) * 2 = 3 with h_0 = 4/3;  a_1 = (2/h_1) * (2/3) = 5 with h_1 = 4/15
    assert abs(jacobi_ladder.a[0] - 3) < mp.mpf("1e-28")
    assert abs(jacobi_ladder.a[1] - 5) < mp.mpf("1e-28")


def test_R_and_r_vanish_at_t_zero(jacobi_ladder):
    assert all(v == 0 for v in jacobi_ladder.R)
    assert all(v == 0 for v in jacobi_ladder.r)


def test_positivity_invariants(gap_ladder):
    assert all(v > 0 for v in gap_ladder.R)
    assert all(v > 0 for v in gap_ladder.a)


def test_ladder_ineligible_cases(ctx_fast):
    p = pv5lab.validate(0, 0.25, 0.5, 192, 4)  # alpha = 0
    with pytest.raises(LadderIneligible):
        pv5lab.compute(pv5lab.build(p, ctx_fast), ctx_fast)
    p = pv5lab.validate(1, 0.25, 0, 192, 4)  # t = 0 with k2 > 0
    with pytest.raises(LadderIneligible):
        pv5lab.compute(pv5lab.build(p, ctx_fast), ctx_fast)


def test_a_rational_classical_point(jacobi_state, jacobi_ladder):
    got = pv5lab.A_rational(0, 0, jacobi_state, jacobi_ladder)
    assert abs(got - 3) < mp.mpf("1e-28")


def test_a_integral_classical_point(jacobi_state, ctx_fast):
    got = pv5lab.A_integral(0, 0, jacobi_state, ctx_fast)
    assert abs(got - 3) < mp.mpf("1e-28")


def test_a_rational_even_b_rational_odd(gap_state, gap_ladder):
    for z in ("0.8", "0.13"):
        ap = pv5lab.A_rational(3, z, gap_state, gap_ladder)
        am = pv5lab.A_rational(3, "-" + z, gap_state, gap_ladder)
        assert ap == am
        bp = pv5lab.B_rational(3, z, gap_state, gap_ladder)
        bm = pv5lab.B_rational(3, "-" + z, gap_state, gap_ladder)
        assert bp == -bm
    assert pv5lab.B_rational(3, 0, gap_state, gap_ladder) == 0


def test_b_integral_vanishes_at_degree_zero(gap_state, ctx_fast):
    assert pv5lab.B_integral(0, "0.8", gap_state, ctx_fast) == 0
    assert pv5lab.B_integral(0, "1.5", gap_state, ctx_fast) == 0


def test_a_integral_even_in_z(gap_state, ctx_fast):
    za = pv5lab.A_integral(2, "0.66", gap_state, ctx_fast)
    zb = pv5lab.A_integral(2, "-0.66", gap_state, ctx_fast)
    assert abs(za - zb) < mp.mpf("1e-30") * (1 + abs(za))


@pytest.mark.parametrize("n", [0, 2, 5])
def test_rational_equals_integral_A(n, gap_state, gap_ladder, ctx_fast):
    for z in sample_points(gap_state.params, count=5, seed=7):
        ar = pv5lab.A_rational(n, z, gap_state, gap_ladder)
        ai = pv5lab.A_integral(n, z, gap_state, ctx_fast)
        assert abs(ar - ai) / (1 + abs(ar)) < mp.mpf("1e-25")


@pytest.mark.parametrize("n", [1, 4, 6])
def test_rational_equals_integral_B(n, gap_state, gap_ladder, ctx_fast):
    for z in sample_points(gap_state.params, count=5, seed=8):
        br = pv5lab.B_rational(n, z, gap_state, gap_ladder)
        bi = pv5lab.B_integral(n, z, gap_state, ctx_fast)
        assert abs(br - bi) / (1 + abs(br)) < mp.mpf("1e-25")


def test_routes_agree_outside_unit_interval(gap_state, gap_ladder, ctx_fast):
    z = mp.mpf("1.5")
    br = pv5lab.B_rational(2, z, gap_state, gap_ladder)
    bi = pv5lab.B_integral(2, z, gap_state, ctx_fast)
    assert abs(br - bi) / (1 + abs(br)) < mp.mpf("1e-25")


def test_large_z_sum_rule_with_decay_trend(gap_state, gap_ladder):
    """z^2 A_n(z) -> -(2n + 2 alpha + 1) with an O(1/z^2) approach."""
    alpha = gap_state.params.alpha
    for n in (1, 4):
        s = 2 * n + 2 * alpha + 1
        errs = []
        for z in (mp.mpf(10), mp.mpf(100), mp.mpf(1000)):
            a = pv5lab.A_rational(n, z, gap_state, gap_ladder)
            errs.append(abs(z * z * a + s))
        assert errs[1] < errs[0] / 20
        assert errs[2] < errs[1] / 20


@pytest.mark.parametrize("n", [1, 3, 6])
def test_lowering_and_raising_relations(n, gap_state, gap_ladder):
    for z in sample_points(gap_state.params, count=5, seed=9):
        assert pv5lab.lowering_residual(n, z, gap_state, gap_ladder) < mp.mpf("1e-25")
        assert pv5lab.raising_residual(n, z, gap_state, gap_ladder) < mp.mpf("1e-25")


def test_compute_is_cached(gap_state, ctx_fast):
    a = pv5lab.compute(gap_state, ctx_fast)
    b = pv5lab.compute(gap_state, ctx_fast)
    assert a is b
