import math

import numpy as np
import pytest

from snapcal.detect import DISCONTINUITY, KINK
from snapcal.exact import (
    CASES,
    _w1,
    _w2,
    CaseId,
    RiemannSolverError,
    advection_exact,
    burgers_exact,
    exact_feature_trajectories,
    get_case,
    sod_exact,
    sod_star_state,
    wave_exact,
    write_trajectories_csv,
)

SQ2 = math.sqrt(2.0)

# Star state of the shock tube (rho, v, P) = (1, 0, 1) | (0.125, 0, 0.1), gamma = 5/3,
# from 200 bisection steps on the pressure function in 40-digit arithmetic.
P_STAR = 0.29394518766601782994
V_STAR = 0.84119485216880840601
RHO_STAR_L = 0.4796890587209174747
RHO_STAR_R = 0.22980574931194700901
SHOCK_SPEED = 1.8444733670538202848
FAN_HEAD = -1.2909944487358056284
FAN_TAIL = -0.16940131251072775371


def test_case_table():
    assert CASES[CaseId.BURGERS].omega == (-0.5, 3.5) and CASES[CaseId.BURGERS].T == 4.0
    assert CASES[CaseId.WAVE].Q == 2 and CASES[CaseId.WAVE].T == 2.0
    assert CASES[CaseId.SOD].omega == (-0.5, 0.5) and CASES[CaseId.SOD].Q == 3
    assert CASES[CaseId.ADVECTION].T == 1.0
    assert get_case("Burgers") is CASES[CaseId.BURGERS]
    with pytest.raises(ValueError):
        get_case("heat")
    with pytest.raises(ValueError):
        CASES[CaseId.BURGERS].solution(1)


@pytest.mark.parametrize("x,t,expected", [(0.5, 1.0, 0.5), (3.0, 1.0, 0.0), (1.0, 4.0, 0.25), (1.2, 1.0, 1.0), (-0.1, 1.0, 0.0)])
def test_burgers_values(x, t, expected):
    assert burgers_exact(x, t) == pytest.approx(expected)


def test_burgers_initial_data():
    x = np.array([-0.1, 0.0, 0.5, 1.0, 1.1])
    np.testing.assert_array_equal(burgers_exact(x, 0.0), [0, 1, 1, 1, 0])


def test_burgers_rankine_hugoniot():
    # shock speed d/dt (1 + t/2) = 1/2 is the mean of the states 1 and 0
    for t in (0.3, 1.0, 1.7):
        s = 1.0 + 0.5 * t
        left, right = burgers_exact(s - 1e-9, t), burgers_exact(s + 1e-9, t)
        assert 0.5 * (left + right) == pytest.approx(0.5)
    # after the collision the shock at sqrt(2t) moves at 1/sqrt(2t) = u_left / 2
    for t in (2.5, 3.5):
        s = math.sqrt(2 * t)
        assert 0.5 * burgers_exact(s - 1e-12, t) == pytest.approx(1.0 / s, rel=1e-9)


def test_wave_values():
    u1, u2 = wave_exact(0.5, 0.0)
    assert u1 == pytest.approx(SQ2)
    assert u2 == pytest.approx(-SQ2)
    u1, u2 = wave_exact(-0.3, 0.0)
    assert (u1, u2) == (0.0, 0.0)
    u1, _ = wave_exact(1.5, 1.0)
    assert u1 == pytest.approx(2 * SQ2)


def test_wave_dalembert():
    x = np.linspace(-0.5, 3.5, 301)
    for t in (0.0, 0.4, 1.3):
        u1, u2 = wave_exact(x, t)
        np.testing.assert_allclose(u1 - u2, 2 * _w1(x - t), atol=1e-14)
        np.testing.assert_allclose(u1 + u2, 2 * _w2(x + t), atol=1e-14)


@pytest.mark.parametrize("x,t,expected", [(0.5, 0.0, 2.0), (-0.45, 0.2, 1.0), (3.0, 0.1, 0.0), (-0.45, 0.04, 0.0), (-0.3, 0.5, 1.0), (-0.05, 0.5, 0.0)])
def test_advection_values(x, t, expected):
    assert advection_exact(x, t) == pytest.approx(expected)


def test_advection_characteristics():
    x = np.linspace(0.05, 2.0, 50)
    for s in (0.1, 0.3):
        np.testing.assert_allclose(advection_exact(x + s, 0.4 + s), advection_exact(x, 0.4), atol=1e-14)


def test_sod_star_state_oracle():
    star = sod_star_state()
    assert star.p_star == pytest.approx(P_STAR, rel=1e-12)
    assert star.v_star == pytest.approx(V_STAR, rel=1e-12)
    assert star.rho_star_L == pytest.approx(RHO_STAR_L, rel=1e-12)
    assert star.rho_star_R == pytest.approx(RHO_STAR_R, rel=1e-12)
    sp = star.wave_speeds()
    assert sp["left_head"] == pytest.approx(FAN_HEAD, rel=1e-12)
    assert sp["left_tail"] == pytest.approx(FAN_TAIL, rel=1e-12)
    assert sp["right_head"] == pytest.approx(SHOCK_SPEED, rel=1e-12)
    assert not star.left_is_shock and star.right_is_shock


def _rh_residual(star):
    # mass, momentum and energy fluxes across the right shock in its own frame
    g = star.gamma
    S = star.wave_speeds()["right_head"]
    rr, vr, pr = star.right
    rs, vs, ps = star.rho_star_R, star.v_star, star.p_star

    def flux(rho, v, p):
        E = p / (g - 1) + 0.5 * rho * v * v
        return np.array([rho * v, rho * v * v + p, v * (E + p)]), np.array([rho, rho * v, E])

    fs, us = flux(rs, vs, ps)
    fr, ur = flux(rr, vr, pr)
    return np.abs(fs - fr - S * (us - ur)).max()


def test_sod_rankine_hugoniot():
    assert _rh_residual(sod_star_state()) < 1e-10


def test_sod_identity_problem():
    star = sod_star_state((1.0, 0.3, 2.0), (1.0, 0.3, 2.0))
    assert star.p_star == pytest.approx(2.0, rel=1e-12)
    assert star.v_star == pytest.approx(0.3, rel=1e-12)
    assert star.rho_star_L == pytest.approx(1.0) and star.rho_star_R == pytest.approx(1.0)


def test_sod_symmetric_collision():
    star = sod_star_state((1.0, 0.5, 1.0), (1.0, -0.5, 1.0))
    assert star.v_star == pytest.approx(0.0, abs=1e-12)
    assert star.left_is_shock and star.right_is_shock
    assert _rh_residual(star) < 1e-10


def test_sod_errors():
    with pytest.raises(ValueError):
        sod_star_state((1.0, 0.0, -1.0), (1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        sod_star_state(gamma=1.0)
    with pytest.raises(RiemannSolverError):
        sod_star_state((1.0, -10.0, 1.0), (1.0, 10.0, 1.0))
    with pytest.raises(RiemannSolverError):
        sod_star_state(max_iter=1)


def test_sod_values():
    rho, v, p = sod_exact(np.array([-0.2, 0.3]), 0.0)
    np.testing.assert_array_equal(rho, [1.0, 0.125])
    np.testing.assert_array_equal(p, [1.0, 0.1])
    assert sod_exact(-0.49, 0.1) == (1.0, 0.0, 1.0)
    assert sod_exact(0.45, 0.2) == (0.125, 0.0, 0.1)
    rho, v, p = sod_exact(0.5 * (V_STAR + SHOCK_SPEED) * 0.1, 0.1)
    assert (rho, v, p) == pytest.approx((RHO_STAR_R, V_STAR, P_STAR), rel=1e-12)


def test_sod_contact():
    t = 0.1
    xc = V_STAR * t
    eps = 1e-9
    left = np.array(sod_exact(xc - eps, t))
    right = np.array(sod_exact(xc + eps, t))
    assert left[0] - right[0] == pytest.approx(RHO_STAR_L - RHO_STAR_R, rel=1e-12)
    assert abs(left[1] - right[1]) < 1e-10
    assert abs(left[2] - right[2]) < 1e-10


def test_sod_fan_continuity():
    t = 0.15
    for xi in (FAN_HEAD, FAN_TAIL):
        a = np.array(sod_exact(xi * t - 1e-11, t))
        b = np.array(sod_exact(xi * t + 1e-11, t))
        np.testing.assert_allclose(a, b, atol=1e-9)


def test_sod_self_similar():
    x = np.linspace(-0.5, 0.5, 201)
    for lam in (0.5, 2.0):
        for q in range(3):
            np.testing.assert_allclose(sod_exact(lam * x, lam * 0.08)[q], sod_exact(x, 0.08)[q], atol=1e-12)


def _check(fs, locs, ids):
    np.testing.assert_allclose(fs.interior, locs, atol=1e-12)
    np.testing.assert_array_equal(fs.identifiers, ids)


def test_trajectories_burgers():
    _check(exact_feature_trajectories("burgers", 1.0), [0.0, 1.0, 1.5], [KINK, KINK, DISCONTINUITY])
    _check(exact_feature_trajectories("burgers", 0.0), [0.0, 1.0], [DISCONTINUITY, DISCONTINUITY])
    _check(exact_feature_trajectories("burgers", 3.125), [0.0, 2.5], [KINK, DISCONTINUITY])
    fs = exact_feature_trajectories("burgers", 2.0)
    assert fs.p == 2


def test_trajectories_advection():
    # both initial bump edges are jumps: the bump equals 1 at x = 0 and x = 1
    _check(exact_feature_trajectories("advection", 0.0), [0.0, 1.0], [0, 0])
    _check(exact_feature_trajectories("advection", 0.3), [-0.3, 0.3, 1.3], [0, 0, 0])
    _check(exact_feature_trajectories("advection", 0.75), [-0.25, 0.15, 0.75, 1.75], [0, 0, 0, 0])


def test_trajectories_wave():
    # u1 jumps at the edges of w1(x - t) and w2(x + t)
    _check(exact_feature_trajectories("wave", 0.25, 0), [0.25, 1.25, 1.75, 2.75], [0, 0, 0, 0])
    # at t = 0.5 the right edge of w1 meets the left edge of w2; the jumps cancel in u1 only
    _check(exact_feature_trajectories("wave", 0.5, 0), [0.5, 2.5], [0, 0])
    _check(exact_feature_trajectories("wave", 0.5, 1), [0.5, 1.5, 2.5], [0, 0, 0])


def test_trajectories_sod():
    t = 0.1
    fs = exact_feature_trajectories("sod", t, 0)
    _check(fs, [FAN_HEAD * t, FAN_TAIL * t, V_STAR * t, SHOCK_SPEED * t], [1, 1, 0, 0])
    fs = exact_feature_trajectories("sod", t, 1)
    _check(fs, [FAN_HEAD * t, FAN_TAIL * t, SHOCK_SPEED * t], [1, 1, 0])
    assert exact_feature_trajectories("sod", 0.0, 2).p == 1


def test_trajectories_time_range():
    with pytest.raises(ValueError):
        exact_feature_trajectories("advection", 1.5)


def test_trajectories_csv(tmp_path):
    path = tmp_path / "traj.csv"
    write_trajectories_csv(path, get_case("burgers"), [0.0, 1.0])
    lines = path.read_text().splitlines()
    assert lines[0] == "t,feature_index,location,identifier"
    assert lines[1:] == ["0.0,1,0.0,0", "0.0,2,1.0,0", "1.0,1,0.0,1", "1.0,2,1.0,1", "1.0,3,1.5,0"]
