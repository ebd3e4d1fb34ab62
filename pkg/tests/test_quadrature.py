"""Tanh-sinh integration: values, error estimates, convergence flags."""

import pytest
from mpmath import mp

import pv5lab
from pv5lab.errors import ParameterError
from pv5lab.quadrature import integration_intervals


def test_context_validation():
    with pytest.raises(ParameterError):
        pv5lab.PrecisionContext(bits=32)
    with pytest.raises(ParameterError):
        pv5lab.PrecisionContext(bits=256, max_level=40)
    with pytest.raises(ParameterError):
        pv5lab.PrecisionContext(bits=64, rel_tol=1e-40)  # below 2^(-bits+16)
    with pytest.raises(ParameterError):
        pv5lab.PrecisionContext(bits=256, rel_tol=0.0)


def test_constant_over_full_interval(ctx_fast):
    sup = pv5lab.support(pv5lab.validate(0, -1, 0, 192, 4))
    res = pv5lab.integrate(lambda z: mp.mpf(1), sup, ctx_fast)
    assert res.converged
    assert abs(res.value - 2) < mp.mpf("1e-30")


def test_odd_integrand_cancels(gap_params, ctx_fast):
    sup = pv5lab.support(gap_params)
    res = pv5lab.integrate(lambda z: z * pv5lab.weight(z, gap_params), sup, ctx_fast)
    assert res.converged
    assert abs(res.value) < mp.mpf("1e-40")


def test_weight_mass_cross_rule(gap_params, ctx_fast):
    """Tanh-sinh against mpmath's Gauss-Legendre rule (independent code path)."""
    sup = pv5lab.support(gap_params)
    res = pv5lab.integrate(lambda z: pv5lab.weight(z, gap_params), sup, ctx_fast)
    assert res.converged and res.value > 0
    with mp.workprec(gap_params.work_bits):
        oracle = mp.fsum(
            mp.quad(lambda z: pv5lab.weight(z, gap_params), [a, b],
                    method="gauss-legendre")
            for a, b in sup)
    assert abs(res.value - oracle) < mp.mpf("1e-30") * oracle


def test_moment_trivial_values(ctx_fast):
    p0 = pv5lab.validate(0, -1, 0, 192, 4)
    assert abs(pv5lab.moment(0, p0, ctx_fast) - 2) < mp.mpf("1e-30")
    assert abs(pv5lab.moment(2, p0, ctx_fast) - mp.mpf(2) / 3) < mp.mpf("1e-30")
    p1 = pv5lab.validate(1, -1, 0, 192, 4)
    assert abs(pv5lab.moment(0, p1, ctx_fast) - mp.mpf(4) / 3) < mp.mpf("1e-30")


def test_odd_moment_is_exact_zero(gap_params, ctx_fast):
    assert pv5lab.moment(3, gap_params, ctx_fast) == 0
    assert pv5lab.moment(1, gap_params, ctx_fast) == 0


def test_moment_rejects_bad_order(gap_params, ctx_fast):
    with pytest.raises(ParameterError):
        pv5lab.moment(-1, gap_params, ctx_fast)


def test_even_symmetry_of_two_interval_integral(gap_params, ctx_fast):
    """Integral over both intervals equals twice the right interval for even f."""
    f = lambda z: pv5lab.weight(z, gap_params) / (1 + z * z)
    sup = pv5lab.support(gap_params)
    full = pv5lab.integrate(f, sup, ctx_fast)
    right = pv5lab.integrate(f, [sup.intervals[1]], ctx_fast)
    assert full.converged and right.converged
    assert abs(full.value - 2 * right.value) <= mp.mpf(10) * (full.error + 2 * right.error)


def test_interval_additivity(ctx_fast):
    p = pv5lab.validate(1, -0.5, 0.5, 192, 4)
    f = lambda z: pv5lab.weight(z, p)
    whole = pv5lab.integrate(f, [(mp.mpf(-1), mp.mpf(1))], ctx_fast)
    split = pv5lab.integrate(f, [(mp.mpf(-1), mp.mpf("0.3")),
                                 (mp.mpf("0.3"), mp.mpf(1))], ctx_fast)
    assert abs(whole.value - split.value) <= mp.mpf(10) * (whole.error + split.error)


def test_error_estimate_honesty(ctx_fast):
    # closed form: integral of z^2 (1-z^2) over [-1,1] = 4/15
    p = pv5lab.validate(1, -1, 0, 192, 4)
    res = pv5lab.integrate(lambda z: z * z * pv5lab.weight(z, p),
                           pv5lab.support(p), ctx_fast)
    true_err = abs(res.value - mp.mpf(4) / 15)
    assert true_err <= 10 * res.error


def test_no_convergence_flag():
    ctx = pv5lab.PrecisionContext(bits=64, rel_tol=1e-12, max_level=4)
    res = pv5lab.integrate(lambda z: mp.sqrt(abs(z - mp.mpf("0.337"))),
                           [(mp.mpf(-1), mp.mpf(1))], ctx)
    assert not res.converged
    assert res.error > mp.mpf("1e-12")


def test_integration_intervals_split_at_zero_for_k2_zero():
    p = pv5lab.validate(1, 0, 0.5, 192, 4)
    ivs = integration_intervals(p)
    assert len(ivs) == 2
    assert ivs[0][1] == 0 and ivs[1][0] == 0
    # reported support stays a single interval
    assert len(pv5lab.support(p)) == 1


def test_zero_length_interval(ctx_fast):
    res = pv5lab.integrate(lambda z: mp.mpf(1),
                           [(mp.mpf("0.3"), mp.mpf("0.3"))], ctx_fast)
    assert res.converged and res.value == 0
