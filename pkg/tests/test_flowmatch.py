import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from protcogen.errors import InvalidArgumentError, NearAntipodalError, TimeSingularityError
from protcogen.flowmatch import (
    Exponential,
    FrameSet,
    Linear,
    euler_step,
    interp_rot,
    interp_trans,
    sample_prior,
    schedule_fraction,
    vf_rot,
    vf_trans,
)
from protcogen.geom3 import geodesic, is_rotation, random_rotation, rotation_angle, so3_exp, so3_log

from conftest import random_rotations


def test_interp_trans_examples():
    x0, x1 = np.array([1.0, 2, 3]), np.array([-4.0, 0, 9])
    assert np.array_equal(interp_trans(x0, x1, 0.0), x0)
    assert np.array_equal(interp_trans(x0, x1, 1.0), x1)
    np.testing.assert_allclose(interp_trans([0, 0, 0], [2, 0, 0], 0.25), [0.5, 0, 0])


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.lists(st.floats(-50, 50), min_size=9, max_size=9))
def test_interp_trans_affine(t, vals):
    a, x0, x1 = np.reshape(vals, (3, 3))
    np.testing.assert_allclose(interp_trans(a + x0, a + x1, t), a + interp_trans(x0, x1, t), atol=1e-9)


def test_interp_trans_rejects_bad_time():
    with pytest.raises(InvalidArgumentError):
        interp_trans(np.zeros(3), np.ones(3), 1.5)


def test_interp_rot_schedules(rng):
    R0 = random_rotation(rng)
    R1 = R0 @ so3_exp([0.4, -1.0, 0.7])
    np.testing.assert_allclose(interp_rot(R0, R1, 1.0, Linear()), R1, atol=1e-9)
    assert np.array_equal(interp_rot(R0, R1, 0.0, Exponential(10)), R0 @ np.eye(3))
    assert schedule_fraction(1.0, Exponential(10)) == pytest.approx(0.9999546, abs=1e-7)
    got = interp_rot(R0, R1, 1.0, Exponential(10))
    np.testing.assert_allclose(got, geodesic(R0, R1, 1 - np.exp(-10)), atol=1e-12)


def test_interp_rot_antipodal():
    with pytest.raises(NearAntipodalError):
        interp_rot(np.eye(3), so3_exp([np.pi, 0, 0]), 0.5)


def test_exponential_requires_positive_c():
    with pytest.raises(InvalidArgumentError):
        Exponential(0.0)


def test_vf_trans_examples(rng):
    np.testing.assert_allclose(vf_trans([0.5, 0, 0], [1, 0, 0], 0.5), [1, 0, 0])
    x1 = rng.normal(size=3)
    assert np.array_equal(vf_trans(x1, x1, 0.3), np.zeros(3))
    x0 = rng.normal(size=3)
    for t in (0.0, 0.3, 0.77, 0.99):
        np.testing.assert_allclose(vf_trans(interp_trans(x0, x1, t), x1, t), x1 - x0, atol=1e-12)
    with pytest.raises(TimeSingularityError):
        vf_trans(x0, x1, 1.0 - 1e-7)


def test_vf_rot_examples(rng):
    R = random_rotation(rng)
    assert np.array_equal(vf_rot(R, R, 0.3, Linear()), np.zeros(3))
    assert np.allclose(vf_rot(R, R, 0.3, Exponential(10)), 0.0)
    theta = 1.3
    R1 = R @ so3_exp([0, theta, 0])
    assert np.linalg.norm(vf_rot(R, R1, 0.99999999, Exponential(10))) == pytest.approx(10 * theta, abs=1e-9)
    R1 = R @ so3_exp([0.2, 0, 0])
    assert np.linalg.norm(vf_rot(R, R1, 0.5, Linear())) == pytest.approx(0.4, abs=1e-12)
    with pytest.raises(TimeSingularityError):
        vf_rot(R, R1, 1.0, Linear())


def test_vf_rot_is_body_frame(rng):
    R = random_rotation(rng)
    R1 = random_rotation(rng)
    v = vf_rot(R, R1, 0.0, Linear())
    np.testing.assert_allclose(R @ so3_exp(v), R1, atol=1e-9)


def _frames(rng, n):
    return FrameSet(random_rotation(rng, n), rng.normal(size=(n, 3)) * 5)


def test_euler_step_zero_field(rng):
    f = _frames(rng, 6)
    out, vt, vr = euler_step(f, f, 0.2, 0.1)
    np.testing.assert_allclose(out.rot, f.rot, atol=1e-12)
    np.testing.assert_allclose(out.trans, f.trans, atol=1e-12)
    assert np.allclose(vt, 0) and np.allclose(vr, 0)


def test_euler_closes_translation_gap(rng):
    f, g = _frames(rng, 5), _frames(rng, 5)
    out, _, _ = euler_step(f, g, 0.3, 0.7)
    np.testing.assert_allclose(out.trans, g.trans, atol=1e-12)


def test_two_half_steps_match_one(rng):
    f, g = _frames(rng, 5), _frames(rng, 5)
    full, _, _ = euler_step(f, g, 0.2, 0.4)
    half, _, _ = euler_step(f, g, 0.2, 0.2)
    half, _, _ = euler_step(half, g, 0.4, 0.2)
    np.testing.assert_allclose(half.trans, full.trans, atol=1e-12)


def test_euler_rejects_overshoot(rng):
    f = _frames(rng, 2)
    with pytest.raises(InvalidArgumentError):
        euler_step(f, f, 0.95, 0.1)


@pytest.mark.parametrize("steps", [1, 3, 10, 100])
def test_translation_path_consistency(rng, steps):
    x0, x1 = rng.normal(size=(4, 3)) * 10, rng.normal(size=(4, 3)) * 10
    target = FrameSet(np.broadcast_to(np.eye(3), (4, 3, 3)).copy(), x1)
    f = FrameSet(target.rot.copy(), x0)
    dt = 1.0 / steps
    for k in range(steps):
        f, _, _ = euler_step(f, target, k * dt, dt if k < steps - 1 else 1.0 - k * dt)
    np.testing.assert_allclose(f.trans, x1, atol=1e-9)


@pytest.mark.parametrize("theta0", [0.5, 1.5, 2.5, 3.0])
def test_exponential_rotation_contraction(rng, theta0):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    R1 = random_rotation(rng)
    R = R1 @ so3_exp(theta0 * axis)
    f, target = FrameSet(R[None], np.zeros((1, 3))), FrameSet(R1[None], np.zeros((1, 3)))
    drift = 0.0
    for k in range(100):
        f, _, _ = euler_step(f, target, k * 0.01, 0.01, Exponential(10))
        drift = max(drift, np.abs(f.rot[0].T @ f.rot[0] - np.eye(3)).max())
    remaining = rotation_angle(f.rot[0].T @ R1)
    assert remaining < 1e-3 * theta0 + 5e-5 * theta0
    assert drift < 1e-8
    assert is_rotation(f.rot, atol=1e-9)


def test_prior_single_residue(rng):
    p = sample_prior(1, rng)
    assert np.array_equal(p.trans, np.zeros((1, 3)))
    with pytest.raises(InvalidArgumentError):
        sample_prior(0, rng)


def test_prior_rotation_mean_is_zero(rng):
    p = sample_prior(100_000, rng)
    assert np.abs(p.rot.mean(axis=0)).max() < 0.01
    assert is_rotation(p.rot, atol=1e-9)


def test_prior_translation_std(rng):
    xs = np.stack([sample_prior(2, rng, trans_std=10.0).trans for _ in range(50_000)])
    std = xs.reshape(-1, 3).std(axis=0)
    np.testing.assert_allclose(std, 10.0 * np.sqrt(0.5), rtol=0.02)
