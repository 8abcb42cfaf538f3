"""Rotations as tangent vectors: exp/log maps and geodesics on SO(3).

A rotation is stored as a 3x3 matrix; its tangent vector v has direction
equal to the axis and length equal to the angle.
"""
import numpy as np

from protcogen.geom3 import geodesic, rotation_angle, so3_exp, so3_log

rng = np.random.default_rng(0)

v = np.array([0.0, 0.0, np.pi / 2])
R = so3_exp(v)
print("quarter turn about z:\n", np.round(R, 6))
print("log recovers the tangent:", so3_log(R))

# Walking a geodesic covers the angle linearly in the parameter.
R0, R1 = so3_exp(rng.normal(size=3)), so3_exp(rng.normal(size=3))
total = rotation_angle(R0.T @ R1)
for s in (0.0, 0.25, 0.5, 1.0):
    Rs = geodesic(R0, R1, s)
    print(f"s={s:.2f}  angle from R0 = {rotation_angle(R0.T @ Rs):.4f}  (expected {s * total:.4f})")

# Batched roundtrip error.
axes = rng.normal(size=(1000, 3))
axes /= np.linalg.norm(axes, axis=1, keepdims=True)
vs = axes * rng.uniform(0, np.pi - 0.05, (1000, 1))
print("max roundtrip error over 1000 rotations:", np.abs(so3_log(so3_exp(vs)) - vs).max())
