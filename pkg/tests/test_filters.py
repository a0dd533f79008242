"""Safety-filter routes: projections, minimality, soundness, dispatch."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcbf_shield.filters import (
    InfeasibleError,
    channel_margin,
    filter_auto,
    filter_qp_channels,
    filter_scalar,
    filter_socp,
    robust_margin,
)


def test_halfspace_projection_frozen():
    # theta = 0: 1 - 2*u1 >= 0 clips u1 at 0.5, u2 untouched
    res = filter_socp(1.0, np.array([-2.0, 0.0]), np.array([1.0, 0.0]), 0.0)
    assert res.u == pytest.approx([0.5, 0.0], abs=1e-8)
    assert res.altered
    assert res.margin >= -1e-8


def test_feasible_baseline_returned_unaltered():
    p, a, u0 = 5.0, np.array([1.0]), np.array([0.2])
    for route in (filter_scalar, filter_socp):
        res = route(p, a, u0, 0.3)
        assert not res.altered
        assert res.iterations == 0
        assert np.array_equal(res.u, u0)
    res = filter_qp_channels(p, a, u0, np.array([0.3]))
    assert not res.altered and np.array_equal(res.u, u0)


def test_scalar_route_frozen_instance():
    # p = -1, a = 1, theta = 0.5, u0 = 0: need u - 0.5|u| >= 1, so u = 2
    res = filter_scalar(-1.0, np.array([1.0]), np.array([0.0]), 0.5)
    assert res.u[0] == pytest.approx(2.0, abs=1e-12)
    assert res.margin == pytest.approx(0.0, abs=1e-12)
    assert res.w_star[0] == pytest.approx(-1.0)  # -theta*|u|*sign(a)


def test_scalar_route_negative_direction():
    res = filter_scalar(-1.0, np.array([-1.0]), np.array([0.0]), 0.5)
    assert res.u[0] == pytest.approx(-2.0, abs=1e-12)


def test_routes_agree_on_scalar_grid():
    thetas = [0.0, 0.25, 0.5, 0.75]
    grid = np.linspace(-4.0, 4.0, 9)
    for theta in thetas:
        for p in (-2.0, 0.5):
            for u0v in grid:
                a = np.array([1.3])
                u0 = np.array([u0v])
                exact = filter_scalar(p, a, u0, theta)
                cone = filter_socp(p, a, u0, theta)
                split = filter_qp_channels(p, a, u0, np.array([theta]))
                assert cone.u[0] == pytest.approx(exact.u[0], abs=1e-6)
                assert split.u[0] == pytest.approx(exact.u[0], abs=1e-6)


def test_minimality_against_candidate_grid():
    # no feasible grid point may be closer to u0 than the filtered input
    p = -2.0
    a = np.array([1.0, -0.8])
    u0 = np.array([0.3, 0.4])
    theta = 0.4
    res = filter_socp(p, a, u0, theta)
    dist = np.linalg.norm(res.u - u0)
    xs = np.linspace(-6.0, 6.0, 61)
    for u1 in xs:
        for u2 in xs:
            cand = np.array([u1, u2])
            if robust_margin(p, a, cand, theta) >= 0.0:
                assert np.linalg.norm(cand - u0) >= dist - 1e-6


def test_split_route_minimality_per_channel():
    p = -1.5
    a = np.array([2.0, 1.0])
    u0 = np.array([-0.2, 0.1])
    theta = np.array([0.3, 0.6])
    res = filter_qp_channels(p, a, u0, theta)
    dist = np.linalg.norm(res.u - u0)
    xs = np.linspace(-4.0, 4.0, 41)
    for u1 in xs:
        for u2 in xs:
            cand = np.array([u1, u2])
            if channel_margin(p, a, cand, theta) >= 0.0:
                assert np.linalg.norm(cand - u0) >= dist - 1e-6


def test_margin_soundness_random():
    rng = np.random.default_rng(21)
    for _ in range(50):
        m = int(rng.integers(1, 4))
        p = float(rng.uniform(-4.0, 4.0))
        a = rng.normal(size=m)
        if np.linalg.norm(a) < 0.1:
            continue
        u0 = rng.uniform(-5.0, 5.0, size=m)
        theta = float(rng.uniform(0.0, 0.85))
        res = filter_auto(p, a, u0, theta)
        assert res.margin >= -1e-8
        # margin is attained by w*: realization at w* equals the margin
        realized = p + float(a @ (res.u + res.w_star))
        assert realized == pytest.approx(res.margin, abs=1e-9)


def test_theta_monotone_conservatism():
    # growing the uncertainty level never shrinks the correction
    p = -1.0
    a = np.array([1.0])
    u0 = np.array([0.0])
    prev = 0.0
    for theta in (0.0, 0.2, 0.4, 0.6, 0.8):
        res = filter_scalar(p, a, u0, theta)
        assert res.u[0] >= prev - 1e-12
        prev = res.u[0]


def test_epigraph_identity_on_solved_instances():
    rng = np.random.default_rng(22)
    for _ in range(25):
        m = int(rng.integers(2, 4))
        p = float(rng.uniform(-4.0, 1.0))
        a = rng.normal(size=m) * 2.0
        if np.linalg.norm(a) < 0.1:
            continue
        u0 = rng.uniform(-4.0, 4.0, size=m)
        theta = float(rng.uniform(0.0, 0.8))
        res = filter_socp(p, a, u0, theta)
        if res.q_star is not None and res.altered:
            assert 2.0 * res.q_star == pytest.approx(float(res.u @ res.u), abs=1e-6)


def test_split_complementarity():
    res = filter_qp_channels(
        4.0762984749473965,
        np.array([9.64485474318362, 1.1367904403207176, 4.642268968237971]),
        np.array([-6.396332715908006, 6.648924621031636, 2.1654095544854552]),
        np.array([0.5436452256153305, 0.21777456908258824, 0.6033186995540122]))
    assert res.u_pos is not None and res.u_neg is not None
    assert float(np.minimum(res.u_pos, res.u_neg).max()) <= 1e-8
    assert res.u == pytest.approx(res.u_pos - res.u_neg, abs=1e-12)
    assert res.margin >= -1e-8


def test_degenerate_direction_paths():
    # a = 0 with p >= 0: constraint holds regardless of u
    res = filter_socp(0.5, np.zeros(2), np.array([1.0, -2.0]), 0.4)
    assert not res.altered
    assert res.margin == pytest.approx(0.5)
    # a = 0 with p < 0: nothing the input can do
    with pytest.raises(InfeasibleError) as exc:
        filter_socp(-0.5, np.zeros(2), np.array([1.0, -2.0]), 0.4)
    assert exc.value.degenerate


def test_box_bound_clips_and_raises():
    # feasible within the box: projection lands on the box face
    res = filter_scalar(-1.0, np.array([1.0]), np.array([0.0]), 0.0, u_max=3.0)
    assert res.u[0] == pytest.approx(1.0, abs=1e-9)
    # required input exceeds the box
    with pytest.raises(InfeasibleError):
        filter_scalar(-10.0, np.array([1.0]), np.array([0.0]), 0.0, u_max=3.0)
    with pytest.raises(InfeasibleError):
        filter_socp(-10.0, np.array([1.0, 0.0]), np.zeros(2), 0.0, u_max=3.0)
    with pytest.raises(ValueError):
        filter_scalar(0.0, np.array([1.0]), np.array([0.0]), 0.0, u_max=-1.0)


def test_box_bound_cone_route():
    res = filter_socp(-2.0, np.array([1.0, 1.0]), np.zeros(2), 0.3, u_max=5.0)
    assert np.all(np.abs(res.u) <= 5.0 + 1e-9)
    assert res.margin >= -1e-8


def test_auto_dispatch():
    p, u0 = -1.0, np.array([0.0])
    a = np.array([1.0])
    assert filter_auto(p, a, u0, 0.5).iterations == 0  # scalar closed form
    r_vec = filter_auto(p, np.array([1.0, 0.5]), np.zeros(2), 0.5)
    assert r_vec.q_star is not None  # cone route
    r_chan = filter_auto(p, a, u0, np.array([0.5]))
    assert r_chan.u_pos is not None  # split route
    with pytest.raises(ValueError):
        filter_auto(p, a, u0, 0.5, mode="nope")


def test_small_continuity_in_p():
    a = np.array([1.0, -0.4])
    u0 = np.array([0.2, 0.1])
    base = filter_socp(-1.0, a, u0, 0.5).u
    bumped = filter_socp(-1.0 + 1e-6, a, u0, 0.5).u
    assert np.linalg.norm(base - bumped) <= 1e-4


def test_validation_errors():
    with pytest.raises(ValueError):
        filter_scalar(0.0, np.array([1.0, 2.0]), np.array([0.0, 0.0]), 0.5)
    with pytest.raises(ValueError):
        filter_socp(np.nan, np.array([1.0]), np.array([0.0]), 0.5)
    with pytest.raises(ValueError):
        filter_socp(0.0, np.array([1.0]), np.array([0.0]), 1.0)
    with pytest.raises(ValueError):
        filter_qp_channels(0.0, np.array([1.0]), np.array([0.0]), np.array([-0.1]))


@settings(deadline=None, max_examples=50)
@given(p=st.floats(-5.0, 5.0), theta=st.floats(0.0, 0.9),
       a1=st.floats(0.1, 5.0), sign=st.sampled_from([-1.0, 1.0]),
       u0v=st.floats(-8.0, 8.0))
def test_scalar_filter_is_sound_and_minimal(p, theta, a1, sign, u0v):
    a = np.array([sign * a1])
    u0 = np.array([u0v])
    res = filter_scalar(p, a, u0, theta)
    assert res.margin >= -1e-9
    # minimality: any u strictly between u0 and the answer is infeasible
    if res.altered:
        for frac in (0.25, 0.5, 0.75):
            mid = u0 + frac * (res.u - u0)
            assert robust_margin(p, a, mid, theta) < 1e-9
