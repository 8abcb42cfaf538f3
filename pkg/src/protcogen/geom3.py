"""SO(3) / SE(3) primitives.

Rotations are plain ``(..., 3, 3)`` float arrays and tangent vectors are
``(..., 3)`` axis-angle arrays, so every function here broadcasts over
leading batch dimensions.  Tangents applied to a rotation ``R`` are always
body-frame: ``exp_R(v) = R @ so3_exp(v)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NearAntipodalError

EXP_SMALL_ANGLE = 1e-8
LOG_SMALL_ANGLE = 1e-6
ANTIPODAL_EPS = 1e-6
# Below this distance from pi the skew-part of R is too small to carry the
# axis accurately; the symmetric part is used instead.
_LOG_NEAR_PI = 1e-3


def hat(v):
    """Skew-symmetric matrix [v]_x of a (..., 3) array."""
    v = np.asarray(v, dtype=float)
    z = np.zeros(v.shape[:-1])
    x, y, w = v[..., 0], v[..., 1], v[..., 2]
    return np.stack(
        [
            np.stack([z, -w, y], -1),
            np.stack([w, z, -x], -1),
            np.stack([-y, x, z], -1),
        ],
        -2,
    )


def vee(m):
    m = np.asarray(m, dtype=float)
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], -1)


def so3_exp(v):
    """Rodrigues formula; a second-order series is used for tiny angles."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("so3_exp: non-finite tangent vector")
    theta = np.linalg.norm(v, axis=-1)
    small = theta < EXP_SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    t2 = theta * theta
    a = np.where(small, 1.0 - t2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - t2 / 24.0, (1.0 - np.cos(safe)) / (safe * safe))
    k = hat(v)
    eye = np.broadcast_to(np.eye(3), k.shape)
    return eye + a[..., None, None] * k + b[..., None, None] * (k @ k)


def rotation_angle(R):
    """Geodesic distance of ``R`` from the identity, in [0, pi]."""
    R = np.asarray(R, dtype=float)
    w = 0.5 * vee(R - np.swapaxes(R, -1, -2))
    c = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    return np.arctan2(np.linalg.norm(w, axis=-1), c)


def so3_log(R, eps=ANTIPODAL_EPS):
    """Inverse of :func:`so3_exp` on rotations with angle below ``pi - eps``.

    Raises NearAntipodalError when the angle is within ``eps`` of pi, where
    the logarithm is not unique.
    """
    R = np.asarray(R, dtype=float)
    w = 0.5 * vee(R - np.swapaxes(R, -1, -2))
    s = np.linalg.norm(w, axis=-1)
    c = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    theta = np.arctan2(s, c)
    if np.any(np.pi - theta < eps):
        raise NearAntipodalError(
            f"rotation angle within {eps:g} of pi; logarithm is not unique"
        )
    small = theta < LOG_SMALL_ANGLE
    safe_s = np.where(small, 1.0, s)
    scale = np.where(small, 1.0 + theta * theta / 6.0, theta / safe_s)
    out = scale[..., None] * w

    near_pi = (np.pi - theta) < _LOG_NEAR_PI
    if np.any(near_pi):
        shape = out.shape
        out = np.array(out, copy=True).reshape(-1, 3)
        idx = np.nonzero(near_pi.reshape(-1))[0]
        Rn = R.reshape(-1, 3, 3)[idx]
        cn = c.reshape(-1)[idx]
        sym = 0.5 * (Rn + np.swapaxes(Rn, -1, -2)) - cn[:, None, None] * np.eye(3)
        # sym = (1 - cos) a a^T; read the axis off its largest column.
        diag = np.diagonal(sym, axis1=-2, axis2=-1)
        col = np.argmax(diag, axis=-1)
        a = sym[np.arange(len(col)), :, col]
        a = a / np.linalg.norm(a, axis=-1, keepdims=True)
        sign = np.sign(np.sum(a * w.reshape(-1, 3)[idx], axis=-1))
        sign = np.where(sign == 0, 1.0, sign)
        out[idx] = (sign * theta.reshape(-1)[idx])[:, None] * a
        out = out.reshape(shape)
    return out


def geodesic(R0, R1, s):
    """Point at fraction ``s`` along the geodesic from ``R0`` to ``R1``."""
    R0 = np.asarray(R0, dtype=float)
    R1 = np.asarray(R1, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise InvalidArgumentError("geodesic: s must lie in [0, 1]")
    rel = np.swapaxes(R0, -1, -2) @ R1
    v = so3_log(rel)
    return R0 @ so3_exp(s[..., None] * v)


def mat2vec(R):
    """Row-major flattening ``(..., 3, 3) -> (..., 9)``."""
    R = np.asarray(R, dtype=float)
    return R.reshape(R.shape[:-2] + (9,))


def orthonormalize(R):
    """Closest rotation in Frobenius norm (polar decomposition)."""
    u, _, vt = np.linalg.svd(R)
    d = np.sign(np.linalg.det(u @ vt))
    u = np.array(u, copy=True)
    u[..., :, -1] *= d[..., None]
    return u @ vt


def is_rotation(R, atol=1e-9):
    R = np.asarray(R, dtype=float)
    eye = np.eye(3)
    ortho = np.abs(np.swapaxes(R, -1, -2) @ R - eye).max(initial=0.0) <= atol
    return bool(ortho and np.all(np.abs(np.linalg.det(R) - 1.0) <= atol))


def random_rotation(rng, size=None):
    """Uniform rotations on SO(3) from normalised Gaussian quaternions."""
    shape = () if size is None else np.atleast_1d(size).tolist()
    q = rng.standard_normal(tuple(shape) + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return quat_to_matrix(q)


def quat_to_matrix(q):
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)], -1),
            np.stack([2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)], -1),
            np.stack([2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)], -1),
        ],
        -2,
    )


@dataclass(frozen=True)
class RigidTransform:
    """Rotation followed by translation, ``p -> R p + x``.

    ``rot`` has shape ``(..., 3, 3)`` and ``trans`` shape ``(..., 3)``; a
    transform with a leading dimension of length N is a per-residue frame set.
    """

    rot: np.ndarray
    trans: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rot, dtype=float)
        trans = np.asarray(self.trans, dtype=float)
        if rot.shape[-2:] != (3, 3) or trans.shape[-1:] != (3,):
            raise InvalidArgumentError(
                f"bad transform shapes rot={rot.shape} trans={trans.shape}"
            )
        if rot.shape[:-2] != trans.shape[:-1]:
            raise InvalidArgumentError(
                f"batch shape mismatch rot={rot.shape} trans={trans.shape}"
            )
        object.__setattr__(self, "rot", rot)
        object.__setattr__(self, "trans", trans)

    @classmethod
    def identity(cls, shape=()):
        shape = tuple(np.atleast_1d(shape)) if shape != () else ()
        rot = np.broadcast_to(np.eye(3), shape + (3, 3)).copy()
        return cls(rot, np.zeros(shape + (3,)))

    @property
    def shape(self):
        return self.trans.shape[:-1]

    def __len__(self):
        return self.shape[0]

    def __getitem__(self, idx):
        return RigidTransform(self.rot[idx], self.trans[idx])

    def compose(self, other):
        """``self ∘ other``: apply ``other`` first."""
        rot = self.rot @ other.rot
        trans = np.einsum("...ij,...j->...i", self.rot, other.trans) + self.trans
        return RigidTransform(rot, trans)

    def inverse(self):
        rt = np.swapaxes(self.rot, -1, -2)
        return RigidTransform(rt, -np.einsum("...ij,...j->...i", rt, self.trans))

    def apply(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.einsum("...ij,...j->...i", self.rot, pts) + self.trans

    def apply_inverse(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.einsum("...ji,...j->...i", self.rot, pts - self.trans)

    def copy(self):
        return RigidTransform(self.rot.copy(), self.trans.copy())


def apply_frame(T: RigidTransform, pts):
    """Map points through a single transform; ``pts`` has shape (M, 3)."""
    pts = np.asarray(pts, dtype=float)
    if not np.all(np.isfinite(pts)):
        raise InvalidArgumentError("apply_frame: non-finite points")
    return pts @ T.rot.T + T.trans


def random_transform(rng, trans_scale=10.0, size=None):
    rot = random_rotation(rng, size)
    shape = rot.shape[:-2]
    return RigidTransform(rot, trans_scale * rng.standard_normal(shape + (3,)))
