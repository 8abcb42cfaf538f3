import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from protcogen.errors import InvalidArgumentError, NearAntipodalError
from protcogen.geom3 import (
    RigidTransform,
    apply_frame,
    geodesic,
    is_rotation,
    mat2vec,
    random_rotation,
    random_transform,
    rotation_angle,
    so3_exp,
    so3_log,
)

from conftest import random_rotations


def rot_z(a):
    return so3_exp([0.0, 0.0, a])


def test_exp_zero_is_identity():
    assert np.array_equal(so3_exp(np.zeros(3)), np.eye(3))


def test_exp_quarter_turn_about_z():
    R = so3_exp([0.0, 0.0, np.pi / 2])
    np.testing.assert_allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_exp_rejects_nonfinite():
    with pytest.raises(InvalidArgumentError):
        so3_exp([np.nan, 0, 0])


def test_exp_log_roundtrip_1000(rng):
    R, _ = random_rotations(rng, 1000)
    assert np.abs(so3_exp(so3_log(R)) - R).max() < 1e-9


def test_log_identity():
    assert np.array_equal(so3_log(np.eye(3)), np.zeros(3))


def test_log_pi_over_3_about_x():
    R = np.array([[1, 0, 0], [0, 0.5, -np.sqrt(3) / 2], [0, np.sqrt(3) / 2, 0.5]])
    np.testing.assert_allclose(so3_log(R), [np.pi / 3, 0, 0], atol=1e-9)


def test_log_near_antipodal_raises():
    # angle pi - 1e-7 sits inside the eps = 1e-6 exclusion band
    with pytest.raises(NearAntipodalError):
        so3_log(so3_exp([0.0, 0.0, np.pi - 1e-7]))
    with pytest.raises(NearAntipodalError):
        so3_log(np.diag([-1.0, -1.0, 1.0]))


def test_log_just_outside_band_is_accurate():
    v = np.array([0.3, -0.5, 0.8])
    v *= (np.pi - 1e-4) / np.linalg.norm(v)
    np.testing.assert_allclose(so3_log(so3_exp(v)), v, atol=1e-9)


def test_log_tiny_angles():
    for a in (1e-12, 1e-9, 1e-7, 5e-6):
        v = a * np.array([0.6, 0.0, 0.8])
        np.testing.assert_allclose(so3_log(so3_exp(v)), v, atol=1e-15)


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3).filter(
        lambda a: np.linalg.norm(a) > 1e-3
    ),
    st.floats(1e-9, np.pi - 0.05),
)
def test_log_exp_property(axis, angle):
    v = np.asarray(axis) / np.linalg.norm(axis) * angle
    assert np.linalg.norm(so3_log(so3_exp(v)) - v) < 1e-9


def test_geodesic_endpoints(rng):
    R0, _ = random_rotations(rng, 1)
    R1, _ = random_rotations(rng, 1)
    R0, R1 = R0[0], R1[0]
    assert np.array_equal(geodesic(R0, R1, 0.0), R0 @ np.eye(3))
    np.testing.assert_allclose(geodesic(R0, R1, 1.0), R1, atol=1e-9)


def test_geodesic_half_turn():
    np.testing.assert_allclose(geodesic(np.eye(3), rot_z(np.pi / 2), 0.5), rot_z(np.pi / 4), atol=1e-12)


def test_geodesic_distance_scales(rng):
    R0, _ = random_rotations(rng, 50)
    R1, _ = random_rotations(rng, 50, max_angle=2.5)
    R1 = R0 @ R1
    s = rng.uniform(0, 1, 50)
    Rs = geodesic(R0, R1, s)
    d = rotation_angle(np.swapaxes(R0, -1, -2) @ Rs)
    full = rotation_angle(np.swapaxes(R0, -1, -2) @ R1)
    np.testing.assert_allclose(d, s * full, atol=1e-9)


def test_geodesic_symmetric(rng):
    R0, _ = random_rotations(rng, 100)
    rel, _ = random_rotations(rng, 100, max_angle=3.0)
    R1 = R0 @ rel
    for s in (0.0, 0.2, 0.5, 0.9, 1.0):
        assert np.abs(geodesic(R0, R1, s) - geodesic(R1, R0, 1 - s)).max() < 1e-9


def test_geodesic_antipodal_raises():
    with pytest.raises(NearAntipodalError):
        geodesic(np.eye(3), rot_z(np.pi), 0.5)


def test_mat2vec():
    assert np.array_equal(mat2vec(np.eye(3)), [1, 0, 0, 0, 1, 0, 0, 0, 1])
    R = np.arange(9.0).reshape(3, 3)
    assert np.array_equal(mat2vec(R), np.arange(9.0))


def test_mat2vec_norm_and_injective(rng):
    R = random_rotation(rng, 200)
    v = mat2vec(R)
    np.testing.assert_allclose(np.sum(v * v, axis=-1), 3.0, atol=1e-12)
    diffs = np.abs(v[:, None] - v[None]).max(-1)
    assert np.all(diffs[~np.eye(200, dtype=bool)] > 0)


def test_random_rotation_valid(rng):
    assert is_rotation(random_rotation(rng, 1000), atol=1e-9)
    assert random_rotation(rng).shape == (3, 3)


def test_apply_frame_examples():
    I = RigidTransform.identity()
    assert np.array_equal(apply_frame(I, [[1, 2, 3]]), [[1, 2, 3]])
    T = RigidTransform(np.eye(3), np.array([0.0, 0, 5]))
    assert np.array_equal(apply_frame(T, [[0, 0, 0]]), [[0, 0, 5]])


def test_apply_frame_inverse_and_rigidity(rng):
    for _ in range(20):
        T = random_transform(rng)
        p = rng.normal(size=(10, 3)) * 5
        np.testing.assert_allclose(apply_frame(T, apply_frame(T.inverse(), p)), p, atol=1e-9)
        q = apply_frame(T, p)
        d0 = np.linalg.norm(p[:, None] - p[None], axis=-1)
        d1 = np.linalg.norm(q[:, None] - q[None], axis=-1)
        assert np.abs(d0 - d1).max() < 1e-9


def test_compose_associative_with_identity(rng):
    a, b, c = (random_transform(rng) for _ in range(3))
    lhs = a.compose(b).compose(c)
    rhs = a.compose(b.compose(c))
    np.testing.assert_allclose(lhs.rot, rhs.rot, atol=1e-12)
    np.testing.assert_allclose(lhs.trans, rhs.trans, atol=1e-12)
    I = RigidTransform.identity()
    np.testing.assert_allclose(a.compose(I).trans, a.trans)
    np.testing.assert_allclose(I.compose(a).rot, a.rot)
    inv = a.compose(a.inverse())
    np.testing.assert_allclose(inv.rot, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(inv.trans, 0, atol=1e-12)
