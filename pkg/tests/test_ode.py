"""Adaptive integrator: order behavior, round trips, singularity policy."""

import pytest
from mpmath import mp

import pv5lab
from pv5lab.errors import ParameterError, PoleHit, SingularParams, StepUnderflow


def harmonic(t, y):
    return (y[1], -y[0])


@pytest.fixture(scope="module")
def octx():
    return pv5lab.PrecisionContext(bits=192, rel_tol=1e-30, max_level=12)


@pytest.fixture(scope="module")
def oparams():
    return pv5lab.validate(1, 0.04, 0.5, 192, 4)


@pytest.fixture(scope="module")
def ricc_init(oparams, octx):
    return pv5lab.riccati_initial(oparams, 2, "0.5", octx)


def test_zero_length_interval():
    traj = pv5lab.integrate_ivp(harmonic, 1, 1, (1, 0), 1e-12, bits=192)
    assert traj.t_points == (mp.mpf(1),)
    assert traj.values[0] == (mp.mpf(1), mp.mpf(0))


def test_cosine_endpoint_across_tolerances():
    errs = []
    for tol in (1e-10, 1e-12, 1e-14):
        traj = pv5lab.integrate_ivp(harmonic, 0, 1, (1, 0), tol, bits=192)
        errs.append(abs(traj.values[-1][0] - mp.cos(1)))
        assert errs[-1] < 50 * mp.mpf(tol)
    # endpoint error tracks the local tolerance roughly linearly
    slope = (mp.log(errs[2]) - mp.log(errs[0])) / (mp.log(mp.mpf(1e-14)) - mp.log(mp.mpf(1e-10)))
    assert mp.mpf("0.7") < slope < mp.mpf("1.3")


def test_determinism_bit_identical():
    a = pv5lab.integrate_ivp(harmonic, 0, 1, (1, 0), 1e-12, bits=192)
    b = pv5lab.integrate_ivp(harmonic, 0, 1, (1, 0), 1e-12, bits=192)
    assert a.t_points == b.t_points
    assert a.values == b.values


def test_trajectory_invariants_and_dense_output():
    traj = pv5lab.integrate_ivp(harmonic, 0, 2, (1, 0), 1e-12, bits=192)
    assert all(b > a for a, b in zip(traj.t_points, traj.t_points[1:]))
    for ts in ("0.5", "1.3"):
        got = traj.sample(ts)[0]
        assert abs(got - mp.cos(mp.mpf(ts))) < mp.mpf("1e-9")
    with pytest.raises(ParameterError):
        traj.sample("2.5")


def test_riccati_roundtrip_within_ten_tol(oparams, octx, ricc_init):
    tol = mp.mpf(1e-12)
    fwd = pv5lab.integrate_riccati(oparams, 2, "0.5", "0.52", ricc_init, tol)
    back = pv5lab.integrate_riccati(oparams, 2, "0.52", "0.5", fwd.values[-1], tol)
    dev = max(abs(a - b) for a, b in zip(back.values[0], ricc_init))
    assert dev < 10 * tol


def test_riccati_tol_monotonicity(oparams, octx, ricc_init):
    # halving the tolerance cannot make the endpoint worse by contract
    devs = {}
    ref = pv5lab.integrate_riccati(oparams, 2, "0.5", "0.52", ricc_init, 1e-20)
    target = ref.values[-1][0]
    for tol in (1e-8, 1e-12):
        traj = pv5lab.integrate_riccati(oparams, 2, "0.5", "0.52", ricc_init, tol)
        devs[tol] = abs(traj.values[-1][0] - target)
    assert devs[1e-12] <= devs[1e-8]


def test_riccati_long_span_hits_singularity(oparams, ricc_init):
    with pytest.raises((StepUnderflow, PoleHit)):
        pv5lab.integrate_riccati(oparams, 2, "0.5", "1.0", ricc_init, 1e-12)


def test_riccati_guards(oparams, octx):
    with pytest.raises(SingularParams):
        pv5lab.integrate_riccati(pv5lab.validate(1, 0, 0.5, 192, 4), 2,
                                 "0.5", "0.6", (1, 1), 1e-10)
    with pytest.raises(IndexError):
        pv5lab.integrate_riccati(oparams, 0, "0.5", "0.6", (1, 1), 1e-10)
    with pytest.raises(ParameterError):
        pv5lab.integrate_riccati(oparams, 2, 0, "0.6", (1, 1), 1e-10)


def test_crosscheck_at_seed_point_is_zero(oparams, octx, ricc_init):
    traj = pv5lab.integrate_riccati(oparams, 2, "0.5", "0.51", ricc_init, 1e-12)
    dev = pv5lab.crosscheck(traj, oparams, octx, ["0.5"])
    assert dev < mp.mpf("1e-25")


def test_crosscheck_records_model_deviation(oparams, octx, ricc_init):
    # the published pair does not track the quadrature functions; the
    # deviation is recorded, not asserted small
    traj = pv5lab.integrate_riccati(oparams, 2, "0.5", "0.51", ricc_init, 1e-12)
    dev = pv5lab.crosscheck(traj, oparams, octx, ["0.505", "0.51"])
    assert mp.isfinite(dev)


def test_pv_initial_and_pole_hit(oparams, octx):
    phi0, phip0 = pv5lab.pv_initial(oparams, 2, "0.5", octx)
    assert phi0 > 1
    with pytest.raises(PoleHit):
        pv5lab.integrate_pv(oparams, 2, "0.5", "1.0", (phi0, phip0), 1e-12)


def test_pv_initial_guard_distance(oparams):
    with pytest.raises(PoleHit):
        pv5lab.integrate_pv(oparams, 2, "0.5", "0.6", (mp.mpf("1.0000000001"), 0), 1e-10)


def test_pv_short_span_crosscheck(oparams, octx):
    init = pv5lab.pv_initial(oparams, 2, "0.5", octx)
    traj = pv5lab.integrate_pv(oparams, 2, "0.5", "0.51", init, 1e-12)
    dev = pv5lab.crosscheck(traj, oparams, octx, ["0.51"])
    assert mp.isfinite(dev)
